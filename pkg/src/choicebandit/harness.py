"""Seeded, replicated experiments over agent variants and environments.

Randomness is derived per replication ``b`` from the master seed:

* ``default_rng([seed, b, 0])`` builds the environment (arm means or the
  loss matrix);
* ``default_rng([seed, b, 1])`` draws one uniform (arm sampling) and one
  standard normal (reward noise) per step.

The step stream is shared by every variant of the replication (common random
numbers), so variants that are mathematically identical produce identical
trajectories, and results do not depend on how replications are split across
workers.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import adversarial, envs, experts, gradient
from .gev import GnlModel, ModelError

log = logging.getLogger(__name__)

GRADIENT_KINDS = gradient.KINDS
FULL_INFO_KINDS = ("experts", "gev-bandit")
STOCHASTIC_ENVS = ("mnl-env", "nl-env", "nl-large-env", "custom")
CHUNK = 250
FAST_REPLICATIONS = 200


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class EnvSpec:
    kind: str
    means: tuple | None = None
    noise_sd: float = 1.0
    generator: str | None = None
    n: int | None = None
    losses: np.ndarray | None = field(default=None, compare=False)
    csv: str | None = None

    @property
    def adversarial(self) -> bool:
        return self.kind == "adversarial"

    def num_arms(self) -> int:
        if self.kind == "mnl-env":
            return 10
        if self.kind == "nl-env":
            return 9
        if self.kind == "nl-large-env":
            return 25
        if self.kind == "custom":
            return len(self.means)
        return self.losses.shape[1] if self.losses is not None else int(self.n)

    def build(self, rng: np.random.Generator, T: int):
        """Stochastic env object, or a ``(T, n)`` loss matrix for adversarial specs."""
        if self.kind in envs.ENV_FACTORIES:
            return envs.ENV_FACTORIES[self.kind](rng)
        if self.kind == "custom":
            return envs.StochasticEnv(self.means, self.noise_sd)
        if self.losses is not None:
            return self.losses[:T]
        return envs.make_adversarial_losses(self.generator, self.n, T, rng)

    def to_json(self) -> dict:
        if self.kind == "custom":
            return {"kind": "custom", "means": list(self.means), "noise_sd": self.noise_sd}
        if self.adversarial:
            out = {"kind": "adversarial", "n": self.num_arms()}
            if self.csv:
                out["csv"] = self.csv
            elif self.generator:
                out["generator"] = self.generator
            return out
        return {"kind": self.kind}


@dataclass(frozen=True)
class AgentSpec:
    name: str
    algorithm: str
    model: GnlModel
    alpha: float = 0.1
    eta: float | str = 1.0

    def gradient_variant(self) -> gradient.GradBanditVariant:
        return gradient.GradBanditVariant(self.algorithm, self.model, self.alpha)

    def resolved_eta(self, T: int, K: float = 1.0) -> float:
        if self.eta != "optimal":
            return float(self.eta)
        if self.algorithm == "experts":
            eta = experts.experts_regret_bound(self.model, 1.0, K, T).optimal_eta
        else:
            eta = adversarial.optimal_bandit_eta(self.model, T)[0]
        return eta if np.isfinite(eta) else 1.0

    def to_json(self) -> dict:
        out = {"name": self.name, "algorithm": self.algorithm, "model": self.model.to_json()}
        if self.algorithm in GRADIENT_KINDS:
            out["alpha"] = self.alpha
        else:
            out["eta"] = self.eta
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    env: EnvSpec
    variants: tuple[AgentSpec, ...]
    steps: int = 1000
    replications: int = 2000
    seed: int = 0
    output_dir: str = "results"
    formats: tuple[str, ...] = ("csv", "svg")
    description: str = ""

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.variants:
            raise ConfigError("at least one variant is required")
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ConfigError(f"variant names must be unique: {names}")
        n = self.env.num_arms()
        for v in self.variants:
            if v.model.n != n:
                raise ConfigError(f"variant {v.name!r}: model has {v.model.n} arms, env has {n}")
            if v.algorithm in GRADIENT_KINDS:
                try:
                    v.gradient_variant()
                except (ModelError, ValueError) as exc:
                    raise ConfigError(f"variant {v.name!r}: {exc}") from exc
            elif v.algorithm in FULL_INFO_KINDS:
                if not self.env.adversarial:
                    raise ConfigError(f"variant {v.name!r}: {v.algorithm} needs an adversarial env")
                if v.eta != "optimal" and not float(v.eta) > 0:
                    raise ConfigError(f"variant {v.name!r}: eta must be positive")
            else:
                raise ConfigError(f"variant {v.name!r}: unknown algorithm {v.algorithm!r}")
        if self.env.adversarial and self.env.losses is not None and self.env.losses.shape[0] < self.steps:
            raise ConfigError("loss matrix has fewer rows than steps")
        bad = set(self.formats) - {"csv", "svg"}
        if bad:
            raise ConfigError(f"unknown output formats {sorted(bad)}")

    def with_overrides(self, **changes) -> "ExperimentConfig":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig(**data)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "env": self.env.to_json(),
            "variants": [v.to_json() for v in self.variants],
            "steps": self.steps,
            "replications": self.replications,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "formats": list(self.formats),
        }


def _env_from_json(raw: Mapping[str, Any], base: Path | None) -> EnvSpec:
    kind = raw.get("kind")
    if kind in ("mnl-env", "nl-env", "nl-large-env"):
        return EnvSpec(kind)
    if kind == "custom":
        if "path" in raw:
            env = envs.StochasticEnv.from_json(_resolve(raw["path"], base))
        else:
            env = envs.StochasticEnv(raw["means"], raw.get("noise_sd", 1.0))
        return EnvSpec("custom", tuple(env.means.tolist()), env.noise_sd)
    if kind == "adversarial":
        if "csv" in raw:
            path = _resolve(raw["csv"], base)
            losses = envs.load_loss_csv(path)
            return EnvSpec("adversarial", losses=losses, n=losses.shape[1], csv=str(path))
        generator = raw.get("generator", "uniform-random")
        if generator not in envs.ADVERSARIAL_KINDS:
            raise ConfigError(f"unknown loss generator {generator!r}")
        return EnvSpec("adversarial", generator=generator, n=int(raw["n"]))
    raise ConfigError(f"unknown env kind {kind!r}")


def _resolve(path, base):
    path = Path(path)
    return path if path.is_absolute() or base is None else base / path


def config_from_json(raw: Mapping[str, Any] | str | Path, base: Path | None = None) -> ExperimentConfig:
    """Parse and validate an experiment config.

    ``raw`` may be a mapping, JSON text, or a path to a JSON file; relative
    paths inside the config (custom env files, loss CSVs) resolve against the
    file's directory.
    """
    try:
        if isinstance(raw, Path) or (isinstance(raw, str) and not raw.lstrip().startswith("{")):
            base = Path(raw).resolve().parent
            raw = json.loads(Path(raw).read_text())
        elif isinstance(raw, str):
            raw = json.loads(raw)
        env = _env_from_json(raw["env"], base)
        variants = tuple(
            AgentSpec(str(v["name"]), str(v["algorithm"]), GnlModel.from_json(v["model"]),
                      float(v.get("alpha", 0.1)),
                      v.get("eta", 1.0) if v.get("eta") == "optimal" else float(v.get("eta", 1.0)))
            for v in raw["variants"])
        formats = raw.get("formats", ["csv", "svg"])
        if isinstance(formats, str):
            formats = ["csv", "svg"] if formats == "both" else [formats]
        return ExperimentConfig(
            name=str(raw["name"]),
            env=env,
            variants=variants,
            steps=int(raw.get("steps", 1000)),
            replications=int(raw.get("replications", 2000)),
            seed=int(raw.get("seed", 0)),
            output_dir=str(raw.get("output_dir", "results")),
            formats=tuple(formats),
            description=str(raw.get("description", "")),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


# -- results --------------------------------------------------------------------


@dataclass
class VariantResult:
    """Per-variant output; ``rewards`` and ``optimal`` are ``(B, T)``."""

    name: str
    algorithm: str
    rewards: np.ndarray
    optimal: np.ndarray
    learned_values: np.ndarray
    pull_counts: np.ndarray
    final_preferences: np.ndarray
    min_prob: float
    regret: np.ndarray | None = None
    bound: float | None = None
    eta: float | None = None
    alpha: float | None = None

    @property
    def mean_reward(self) -> np.ndarray:
        return self.rewards.mean(axis=0)

    @property
    def pct_optimal(self) -> np.ndarray:
        return self.optimal.mean(axis=0)

    @property
    def total_average_reward(self) -> float:
        return float(self.rewards.mean())

    def window(self, size: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Per-replication mean reward and optimal-action rate over the last ``size`` steps."""
        size = self.rewards.shape[1] if size is None else min(size, self.rewards.shape[1])
        return (self.rewards[:, -size:].mean(axis=1),
                self.optimal[:, -size:].mean(axis=1))


@dataclass
class AggregateResult:
    config: ExperimentConfig
    variants: dict[str, VariantResult]
    optimal_arms: np.ndarray
    env_means: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.config.steps

    def __getitem__(self, name: str) -> VariantResult:
        return self.variants[name]

    def paired_gap(self, better: str, worse: str, metric: str = "reward",
                   window: int | None = None) -> tuple[float, float]:
        """Mean and standard error of the per-replication difference ``better - worse``.

        Variants in one replication share the environment and the step
        stream, so the paired difference is the right unit.
        """
        idx = 0 if metric == "reward" else 1
        diff = self[better].window(window)[idx] - self[worse].window(window)[idx]
        se = diff.std(ddof=1) / np.sqrt(diff.size) if diff.size > 1 else np.inf
        return float(diff.mean()), float(se)

    def per_step_gap(self, a: str, b: str, metric: str = "pct_optimal"):
        """Max absolute per-step gap and the standard errors of the two curves."""
        series = "optimal" if metric == "pct_optimal" else "rewards"
        xa, xb = getattr(self[a], series), getattr(self[b], series)
        B = xa.shape[0]
        gap = np.abs(xa.mean(axis=0) - xb.mean(axis=0))
        se = np.sqrt((xa.var(axis=0, ddof=1) + xb.var(axis=0, ddof=1)) / B) if B > 1 else np.full(gap.shape, np.inf)
        return gap, se

    def summary(self) -> dict:
        out = {}
        for name, v in self.variants.items():
            reward, optimal = v.window()
            item = {
                "algorithm": v.algorithm,
                "total_average_reward": v.total_average_reward,
                "average_pct_optimal": float(optimal.mean()),
                "final_pct_optimal": float(v.pct_optimal[-1]),
                "learned_values": [None if np.isnan(x) else float(x) for x in v.learned_values],
                "pull_counts": v.pull_counts.tolist(),
                "final_preferences": v.final_preferences.tolist(),
                "min_sampled_prob": v.min_prob,
            }
            if v.alpha is not None:
                item["alpha"] = v.alpha
            if v.eta is not None:
                item["eta"] = v.eta
            if v.regret is not None:
                item["mean_regret"] = float(v.regret.mean())
                item["max_regret"] = float(v.regret.max())
                item["regret_bound"] = v.bound
            out[name] = item
        return out


# -- simulation -------------------------------------------------------------------


def _replication_streams(seed: int, reps, T: int):
    uniforms = np.empty((len(reps), T))
    normals = np.empty((len(reps), T))
    for k, b in enumerate(reps):
        rng = np.random.default_rng([seed, b, 1])
        uniforms[k] = rng.random(T)
        normals[k] = rng.standard_normal(T)
    return uniforms, normals


def _run_gradient(agent: AgentSpec, reward_fn, uniforms, n: int):
    """Batched gradient-bandit loop; ``reward_fn(t, arm)`` returns one reward per run."""
    variant = agent.gradient_variant()
    c, T = uniforms.shape
    rows = np.arange(c)
    state = gradient.PreferenceState.zeros(n, (c,))
    arms = np.empty((c, T), dtype=np.int64)
    rewards = np.empty((c, T))
    min_prob = 1.0
    for t in range(T):
        arm, factors = gradient.gb_sample(state, variant, uniforms[:, t])
        reward = reward_fn(t, arm)
        state.u = state.u + gradient.preference_delta(variant, factors, arm, reward - state.baseline)
        gradient.baseline_update(state, reward)
        arms[:, t] = arm
        rewards[:, t] = reward
        min_prob = min(min_prob, float(factors.probs[rows, arm].min()))
    return arms, rewards, state.u, min_prob


def _run_chunk(config: ExperimentConfig, reps) -> dict:
    T, env = config.steps, config.env
    built = [env.build(np.random.default_rng([config.seed, b, 0]), T) for b in reps]
    uniforms, normals = _replication_streams(config.seed, reps, T)
    n = env.num_arms()
    rows = np.arange(len(reps))
    out = {}
    if env.adversarial:
        losses = np.stack(built)
        optimal_arm = np.argmax(losses.sum(axis=1), axis=1)
    else:
        means = np.stack([e.means for e in built])
        noise_sd = np.array([e.noise_sd for e in built])
        optimal_arm = np.argmax(means, axis=1)
    for agent in config.variants:
        res = {"regret": None}
        if agent.algorithm in GRADIENT_KINDS:
            if env.adversarial:
                reward_fn = lambda t, arm: losses[rows, t, arm]
            else:
                reward_fn = lambda t, arm: means[rows, arm] + noise_sd * normals[:, t]
            arms, rewards, prefs, min_prob = _run_gradient(agent, reward_fn, uniforms, n)
            res.update(arms=arms, rewards=rewards, prefs=prefs, min_prob=min_prob)
        elif agent.algorithm == "gev-bandit":
            eta = agent.resolved_eta(T)
            probs, arms, regret = adversarial.run_gev_bandit(agent.model, eta, losses, uniforms)
            rewards = losses[rows[:, None], np.arange(T), arms]
            chosen = probs[rows[:, None], np.arange(T), arms]
            res.update(arms=arms, rewards=rewards, prefs=probs[:, -1], min_prob=float(chosen.min()),
                       regret=regret)
        else:
            eta = agent.resolved_eta(T)
            decisions, regret = experts.run_experts(agent.model, eta, losses)
            rewards = np.sum(decisions * losses, axis=-1)
            res.update(arms=None, rewards=rewards, prefs=decisions[:, -1],
                       optimal=decisions[rows, :, optimal_arm],
                       min_prob=float(decisions.min()), regret=regret)
        if res["arms"] is not None:
            res["optimal"] = (res["arms"] == optimal_arm[:, None]).astype(float)
            onehot = res["arms"][..., None] == np.arange(n)
            res["counts"] = onehot.sum(axis=1)
            res["sums"] = np.einsum("bt,btn->bn", res["rewards"], onehot)
        else:
            res["counts"] = np.zeros((len(reps), n))
            res["sums"] = np.zeros((len(reps), n))
        out[agent.name] = res
    out["_optimal_arm"] = optimal_arm
    out["_means"] = None if env.adversarial else means
    return out


def run_experiment(config: ExperimentConfig, threads: int = 1, chunk: int = CHUNK) -> AggregateResult:
    """Run every variant on every replication and gather per-step metrics.

    Output depends only on ``config`` (seed included), never on ``threads``.
    """
    B = config.replications
    chunks = [range(s, min(s + chunk, B)) for s in range(0, B, chunk)]
    log.info("running %s: %d replications x %d steps, %d variants",
             config.name, B, config.steps, len(config.variants))
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda reps: _run_chunk(config, reps), chunks))
    else:
        parts = [_run_chunk(config, reps) for reps in chunks]

    variants = {}
    for agent in config.variants:
        pieces = [p[agent.name] for p in parts]
        cat = lambda key: np.concatenate([p[key] for p in pieces])
        counts, sums = cat("counts"), cat("sums")
        with np.errstate(invalid="ignore", divide="ignore"):
            per_rep_values = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        learned = np.full(counts.shape[1], np.nan)
        seen = np.any(counts > 0, axis=0)
        learned[seen] = np.nanmean(per_rep_values[:, seen], axis=0)
        regret = cat("regret") if pieces[0]["regret"] is not None else None
        bound = eta = None
        if agent.algorithm in FULL_INFO_KINDS:
            eta = agent.resolved_eta(config.steps)
            if agent.algorithm == "experts":
                bound = experts.experts_regret_bound(agent.model, eta, 1.0, config.steps).bound_at_eta
            else:
                bound = adversarial.bandit_regret_bound(agent.model, eta, agent.model.n, config.steps)
        variants[agent.name] = VariantResult(
            name=agent.name,
            algorithm=agent.algorithm,
            rewards=cat("rewards"),
            optimal=cat("optimal"),
            learned_values=learned,
            pull_counts=counts.mean(axis=0),
            final_preferences=cat("prefs").mean(axis=0),
            min_prob=min(p["min_prob"] for p in pieces),
            regret=regret,
            bound=bound,
            eta=eta,
            alpha=agent.alpha if agent.algorithm in GRADIENT_KINDS else None,
        )
    optimal_arms = np.concatenate([p["_optimal_arm"] for p in parts])
    env_means = None if config.env.adversarial else np.concatenate([p["_means"] for p in parts])
    return AggregateResult(config, variants, optimal_arms, env_means)


# -- bound checks -------------------------------------------------------------------


@dataclass
class BoundCheck:
    variant: str
    measured: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.measured

    @property
    def passed(self) -> bool:
        return self.measured <= self.bound


def check_bounds(config: ExperimentConfig, result: AggregateResult) -> list[BoundCheck]:
    """Compare measured regret with the theoretical bound for every bound-carrying variant.

    Experts regret is deterministic, so the worst replication is compared;
    bandit regret is an expectation, so the mean over replications is.
    """
    checks = []
    for agent in config.variants:
        v = result[agent.name]
        if v.regret is None:
            continue
        measured = float(v.regret.max() if agent.algorithm == "experts" else v.regret.mean())
        checks.append(BoundCheck(agent.name, measured, float(v.bound)))
    return checks
