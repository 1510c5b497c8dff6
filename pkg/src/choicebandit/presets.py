"""Ready-made experiment configurations.

The four stochastic studies use 0-based arm indices throughout, so the
"arms 1, 2, 3" of the nine-arm environment are arms 0, 1, 2 here.
"""
from __future__ import annotations

from .envs import ADVERSARIAL_KINDS
from .gev import GnlModel
from .harness import AgentSpec, EnvSpec, ExperimentConfig

DEFAULT_ALPHA = 0.1

NL_ENV_PARTITION = [[0, 3, 4], [1, 5, 6], [2, 7, 8]]
NL_LARGE_PARTITION = [list(range(0, 5)), list(range(5, 15)), list(range(15, 25))]


def _softmax(n: int, alpha: float) -> AgentSpec:
    return AgentSpec("MNL-GB", "classical-softmax", GnlModel.mnl(n), alpha)


def _nl(name: str, partition, mu_ell, alpha: float) -> AgentSpec:
    return AgentSpec(name, "nested-logit", GnlModel.nl(partition, mu_ell), alpha)


def e1_mnl_env(alpha: float = DEFAULT_ALPHA) -> ExperimentConfig:
    pairs = [[2 * i, 2 * i + 1] for i in range(5)]
    return ExperimentConfig(
        name="e1-mnl-env",
        description="10-arm N(4,1) testbed: softmax vs nested variants without real structure",
        env=EnvSpec("mnl-env"),
        variants=(
            _softmax(10, alpha),
            _nl("NL-trivial", [list(range(10))], 1.0, alpha),
            _nl("NL1", pairs, 0.8, alpha),
            _nl("NL2", [[0, 1], [2, 3, 4], [5, 6], [7, 8, 9]], [0.3, 0.45, 0.3, 0.45], alpha),
        ),
    )


def _nl_env_variants(alpha: float) -> tuple:
    return (
        _softmax(9, alpha),
        _nl("NL1", NL_ENV_PARTITION, 0.25, alpha),
        _nl("NL2", NL_ENV_PARTITION, 0.7, alpha),
        _nl("NL3", NL_ENV_PARTITION, 0.45, alpha),
    )


def e2_nl_env(alpha: float = DEFAULT_ALPHA) -> ExperimentConfig:
    return ExperimentConfig(
        name="e2-nl-env",
        description="9-arm testbed, one good and two poor arms per nest",
        env=EnvSpec("nl-env"),
        variants=_nl_env_variants(alpha),
    )


def e3_learned(steps: int, alpha: float = DEFAULT_ALPHA, seed: int = 0) -> ExperimentConfig:
    softmax, _, _, nl3 = _nl_env_variants(alpha)
    return ExperimentConfig(
        name=f"e3-learned-t{steps}",
        description="single run on the 9-arm testbed; compare per-arm learned average rewards",
        env=EnvSpec("nl-env"),
        variants=(softmax, nl3),
        steps=steps,
        replications=1,
        seed=seed,
    )


def e4_nl_large(alpha: float = DEFAULT_ALPHA) -> ExperimentConfig:
    return ExperimentConfig(
        name="e4-nl-large",
        description="25 arms, arm 0 always best and nested with four others",
        env=EnvSpec("nl-large-env"),
        variants=(
            _softmax(25, alpha),
            _nl("NL1", NL_LARGE_PARTITION, [0.95, 0.35, 0.35], alpha),
            _nl("NL2", NL_LARGE_PARTITION, [0.95, 0.25, 0.25], alpha),
            _nl("NL3", NL_LARGE_PARTITION, [0.65, 0.2, 0.2], alpha),
        ),
    )


def adversarial_bounds(generator: str = "uniform-random", n: int = 5) -> ExperimentConfig:
    partition = [list(range(0, (n + 1) // 2)), list(range((n + 1) // 2, n))]
    return ExperimentConfig(
        name=f"adv-bounds-{generator}",
        description="GEV bandits on an oblivious loss sequence; expected regret vs bound",
        env=EnvSpec("adversarial", generator=generator, n=n),
        variants=(
            AgentSpec("Exp3-MNL", "gev-bandit", GnlModel.mnl(n), eta="optimal"),
            AgentSpec("GEV-NL", "gev-bandit", GnlModel.nl(partition, [0.5, 0.8]), eta="optimal"),
        ),
        steps=1000,
        replications=500,
    )


def experts_bounds(generator: str = "uniform-random", n: int = 10) -> ExperimentConfig:
    partition = [list(range(0, n // 2)), list(range(n // 2, n))]
    return ExperimentConfig(
        name=f"experts-bounds-{generator}",
        description="full-feedback learners; realized regret vs bound",
        env=EnvSpec("adversarial", generator=generator, n=n),
        variants=(
            AgentSpec("EWA-MNL", "experts", GnlModel.mnl(n), eta="optimal"),
            AgentSpec("Experts-NL", "experts", GnlModel.nl(partition, [0.5, 0.7]), eta="optimal"),
        ),
        steps=2000,
        replications=100,
    )


def preset_experiments(alpha: float = DEFAULT_ALPHA) -> list[ExperimentConfig]:
    return [
        e1_mnl_env(alpha),
        e2_nl_env(alpha),
        e3_learned(1000, alpha),
        e3_learned(2000, alpha),
        e4_nl_large(alpha),
        *(adversarial_bounds(g) for g in ADVERSARIAL_KINDS),
        *(experts_bounds(g) for g in ADVERSARIAL_KINDS),
    ]


def get_preset(name: str) -> ExperimentConfig:
    for config in preset_experiments():
        if config.name == name:
            return config
    raise KeyError(name)
