"""Reward-generating environments.

Stochastic testbeds draw per-arm means once and then return
``means[arm] + noise_sd * N(0, 1)`` on every pull.  Adversarial environments
are fixed loss matrices in ``[-1, 0]^(T x n)`` (oblivious adversary).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ADVERSARIAL_KINDS = ("uniform-random", "single-best-arm", "switching-best")


@dataclass(frozen=True)
class StochasticEnv:
    means: np.ndarray
    noise_sd: float = 1.0
    kind: str = "custom"

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        if means.ndim != 1 or means.size < 1 or not np.all(np.isfinite(means)):
            raise ValueError("means must be a non-empty finite vector")
        if not self.noise_sd >= 0:
            raise ValueError("noise_sd must be non-negative")
        means.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "noise_sd", float(self.noise_sd))

    @property
    def n(self) -> int:
        return self.means.size

    @property
    def optimal_arm(self) -> int:
        return int(np.argmax(self.means))

    @classmethod
    def from_json(cls, spec) -> "StochasticEnv":
        """Load ``{"means": [...], "noise_sd": number}`` (object or JSON text)."""
        if isinstance(spec, Path) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
            spec = Path(spec).read_text()
        if isinstance(spec, str):
            spec = json.loads(spec)
        return cls(spec["means"], spec.get("noise_sd", 1.0), "custom")


def make_mnl_env(rng: np.random.Generator) -> StochasticEnv:
    """10 arms, means i.i.d. N(4, 1)."""
    return StochasticEnv(rng.normal(4.0, 1.0, size=10), 1.0, "mnl-env")


def make_nl_env(rng: np.random.Generator) -> StochasticEnv:
    """9 arms; arms 0-2 have means ~ N(7.5, 1), arms 3-8 ~ N(2.5, 1)."""
    good = rng.normal(7.5, 1.0, size=3)
    bad = rng.normal(2.5, 1.0, size=6)
    return StochasticEnv(np.concatenate([good, bad]), 1.0, "nl-env")


def make_nl_large_env(rng: np.random.Generator) -> StochasticEnv:
    """25 arms; arms 1-24 ~ N(2.5, 1) and arm 0 sits 2 above their maximum."""
    rest = rng.normal(2.5, 1.0, size=24)
    return StochasticEnv(np.concatenate([[rest.max() + 2.0], rest]), 1.0, "nl-large-env")


ENV_FACTORIES = {
    "mnl-env": make_mnl_env,
    "nl-env": make_nl_env,
    "nl-large-env": make_nl_large_env,
}


def draw_reward(env: StochasticEnv, arm, rng: np.random.Generator):
    arm = np.asarray(arm)
    noise = rng.standard_normal(arm.shape)
    reward = env.means[arm] + env.noise_sd * noise
    return float(reward) if reward.ndim == 0 else reward


def make_adversarial_losses(kind: str, n: int, T: int, rng: np.random.Generator,
                            best_arm: int = 0, jitter: float = 0.05,
                            period: int | None = None) -> np.ndarray:
    """Loss matrix of shape ``(T, n)`` with entries in ``[-1, 0]``.

    ``uniform-random``
        i.i.d. U[-1, 0].
    ``single-best-arm``
        ``best_arm`` has loss about -0.1, all others about -0.9.
    ``switching-best``
        the good arm rotates every ``period`` steps (default ``T // 4``),
        starting with ``best_arm``.
    """
    if n < 1 or T < 0:
        raise ValueError("need n >= 1 and T >= 0")
    if kind == "uniform-random":
        losses = rng.uniform(-1.0, 0.0, size=(T, n))
    elif kind in ("single-best-arm", "switching-best"):
        good = np.full(T, best_arm % n)
        if kind == "switching-best":
            period = period or max(1, T // 4)
            good = (best_arm + np.arange(T) // period) % n
        losses = np.full((T, n), -0.9) + rng.uniform(-jitter, jitter, size=(T, n))
        losses[np.arange(T), good] = -0.1 + rng.uniform(-jitter, jitter, size=T)
    else:
        raise ValueError(f"unknown loss generator {kind!r}; expected one of {ADVERSARIAL_KINDS}")
    return np.clip(losses, -1.0, 0.0)


def load_loss_csv(path) -> np.ndarray:
    """Read a loss matrix (rows = steps, columns = arms) and validate it."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    try:
        losses = np.array([[float(c) for c in row] for row in rows])
    except ValueError:
        # tolerate a header row
        losses = np.array([[float(c) for c in row] for row in rows[1:]])
    if losses.ndim != 2:
        raise ValueError(f"{path}: rows must all have the same number of columns")
    if np.any(losses < -1.0) or np.any(losses > 0.0):
        raise ValueError(f"{path}: losses must lie in [-1, 0]")
    return losses


def save_loss_csv(losses, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(losses):
            writer.writerow([repr(float(v)) for v in row])
