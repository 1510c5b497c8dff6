"""Gradient bandits for the stochastic setting.

Three update rules share the same loop (sample, observe ``R``, move the
preferences by ``alpha * (R - baseline) * d log x[arm] / du``, update the
running-mean baseline):

``classical-softmax``
    the textbook softmax rule, ``+(1 - x_i)`` for the played arm and ``-x_j``
    for the others.
``generalized-gnl``
    any GNL model, driven by the analytic Jacobian row of the played arm.
``nested-logit``
    closed-form three-case rule for nested logit with exclusive nests.

All update functions are vectorized: preferences may carry leading batch
dimensions and ``arm``/``reward`` then have the matching batch shape.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import softmax

from .gev import (ChoiceFactors, GnlModel, ModelError, choice_factors, prob_jacobian_row,
                  sample_index)

KINDS = ("classical-softmax", "generalized-gnl", "nested-logit")


@dataclass(frozen=True)
class GradBanditVariant:
    kind: str
    model: GnlModel
    alpha: float = 0.1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gradient-bandit kind {self.kind!r}; expected one of {KINDS}")
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")
        if self.kind == "classical-softmax" and not (self.model.is_mnl and self.model.mu == 1.0):
            raise ModelError("classical-softmax needs an MNL model with mu = 1")
        if self.kind == "nested-logit" and not self.model.is_nl:
            raise ModelError("nested-logit needs exclusive nests and mu = 1")


@dataclass
class PreferenceState:
    u: np.ndarray
    baseline: np.ndarray | float = 0.0
    t: int = 0

    @classmethod
    def zeros(cls, n: int, batch: tuple = ()) -> "PreferenceState":
        return cls(np.zeros(batch + (n,)), np.zeros(batch) if batch else 0.0, 0)


def _take(a, arm):
    return np.take_along_axis(a, np.asarray(arm)[..., None], axis=-1)[..., 0]


def _one_hot(arm, n):
    return np.asarray(arm)[..., None] == np.arange(n)


def classical_delta(probs, arm, advantage, alpha) -> np.ndarray:
    probs = np.asarray(probs)
    coef = _one_hot(arm, probs.shape[-1]) - probs
    return alpha * np.asarray(advantage)[..., None] * coef


def generic_delta(model: GnlModel, factors: ChoiceFactors, arm, advantage, alpha) -> np.ndarray:
    row = prob_jacobian_row(model, factors, arm)
    coef = row / _take(factors.probs, arm)[..., None]
    return alpha * np.asarray(advantage)[..., None] * coef


def nl_delta(model: GnlModel, factors: ChoiceFactors, arm, advantage, alpha) -> np.ndarray:
    nest_of = model.nest_of
    arm = np.asarray(arm)
    nest = nest_of[arm]
    m = model.nest_mu[nest][..., None]
    x = factors.probs
    x_i = _take(x, arm)[..., None]
    x_cond = np.take_along_axis(
        np.take_along_axis(factors.within, arm[..., None, None], axis=-2)[..., 0, :],
        nest[..., None], axis=-1)
    played = _one_hot(arm, model.n)
    same = (nest_of == nest[..., None]) & ~played
    coef = np.where(played, (1.0 - (1.0 - m) * x_cond - m * x_i) / m,
                    np.where(same, -(x / x_i) * (x_i + (1.0 - m) / m * x_cond), -x))
    return alpha * np.asarray(advantage)[..., None] * coef


def baseline_update(state: PreferenceState, reward) -> PreferenceState:
    """Incremental running mean; ``state.t`` counts rewards seen so far."""
    state.t += 1
    state.baseline = state.baseline + (reward - state.baseline) / state.t
    return state


def _apply(state, delta, reward):
    state.u = state.u + delta
    return baseline_update(state, reward)


def classical_gb_update(state: PreferenceState, arm, reward, alpha: float,
                        probs=None) -> PreferenceState:
    if probs is None:
        probs = softmax(state.u, axis=-1)
    return _apply(state, classical_delta(probs, arm, reward - state.baseline, alpha), reward)


def gb_update_generic(state: PreferenceState, arm, reward, variant: GradBanditVariant,
                      factors: ChoiceFactors | None = None) -> PreferenceState:
    factors = factors or choice_factors(variant.model, state.u)
    delta = generic_delta(variant.model, factors, arm, reward - state.baseline, variant.alpha)
    return _apply(state, delta, reward)


def gb_update_nl(state: PreferenceState, arm, reward, variant: GradBanditVariant,
                 factors: ChoiceFactors | None = None) -> PreferenceState:
    factors = factors or choice_factors(variant.model, state.u)
    delta = nl_delta(variant.model, factors, arm, reward - state.baseline, variant.alpha)
    return _apply(state, delta, reward)


def preference_delta(variant: GradBanditVariant, factors: ChoiceFactors, arm, advantage):
    """Preference change for ``advantage = R - baseline`` without touching any state."""
    if variant.kind == "classical-softmax":
        return classical_delta(factors.probs, arm, advantage, variant.alpha)
    if variant.kind == "nested-logit":
        return nl_delta(variant.model, factors, arm, advantage, variant.alpha)
    return generic_delta(variant.model, factors, arm, advantage, variant.alpha)


def gb_sample(state: PreferenceState, variant: GradBanditVariant, uniform) -> tuple:
    """Inverse-CDF draw given one U[0, 1) per run; returns ``(arm, factors)``."""
    factors = choice_factors(variant.model, state.u)
    return sample_index(factors.probs, uniform), factors


def gb_step(state: PreferenceState, variant: GradBanditVariant, uniform, reward_fn):
    """Sample, observe, update preferences with the old baseline, then the baseline."""
    arm, factors = gb_sample(state, variant, uniform)
    reward = reward_fn(arm)
    delta = preference_delta(variant, factors, arm, reward - state.baseline)
    _apply(state, delta, reward)
    return arm, reward, factors


@dataclass
class GradientBandit:
    """Single-run convenience wrapper around :func:`gb_step`."""

    variant: GradBanditVariant
    state: PreferenceState = field(init=False)
    min_prob: float = field(init=False, default=1.0)

    def __post_init__(self):
        self.state = PreferenceState.zeros(self.variant.model.n)

    @property
    def probs(self) -> np.ndarray:
        return choice_factors(self.variant.model, self.state.u).probs

    def step(self, reward_fn, rng: np.random.Generator):
        arm, reward, factors = gb_step(self.state, self.variant, rng.random(), reward_fn)
        self.min_prob = min(self.min_prob, float(factors.probs[arm]))
        return arm, reward
