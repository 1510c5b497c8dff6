"""Adversarial bandits driven by GNL choice probabilities.

The learner samples ``i_t ~ x_t = grad E~(U_hat_{t-1}; eta)``, observes the
loss ``u_t[i_t]`` in ``[-1, 0]`` and adds the importance-weighted estimate
``u_t[i_t] / x_t[i_t] * e_{i_t}`` to ``U_hat``.  With an MNL model this is
Exp3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gev import GnlModel, choice_probabilities, sample_index, surplus


class LossOnlyViolation(ValueError):
    """An observed reward fell outside ``[-1, 0]``."""


@dataclass
class BanditState:
    U_hat: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "BanditState":
        return cls(np.zeros(n))


def _check_loss(value: float) -> float:
    value = float(value)
    if not -1.0 <= value <= 0.0:
        raise LossOnlyViolation(f"observed reward {value} is outside [-1, 0]")
    return value


def bandit_sample(state: BanditState, model: GnlModel, eta: float,
                  rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Draw an arm by inverse CDF; returns the arm and the distribution used."""
    probs = choice_probabilities(model, state.U_hat, eta)
    return sample_index(probs, rng.random()), probs


def estimate_gain(arm: int, value: float, probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    gain = np.zeros_like(probs)
    gain[arm] = value / probs[arm]
    return gain


def bandit_step(state: BanditState, model: GnlModel, eta: float,
                env_loss_fn: Callable[[int], float],
                rng: np.random.Generator) -> tuple[int, float, BanditState, np.ndarray]:
    """One round: sample, observe, estimate, accumulate.

    Returns ``(arm, observed value, state, sampling distribution)``.
    """
    arm, probs = bandit_sample(state, model, eta, rng)
    value = _check_loss(env_loss_fn(arm))
    state.U_hat = state.U_hat + estimate_gain(arm, value, probs)
    state.t += 1
    return arm, value, state, probs


@dataclass
class GevBandit:
    """Single-run learner that keeps its sampling history."""

    model: GnlModel
    eta: float
    state: BanditState = field(init=False)
    probs: list = field(init=False, default_factory=list)
    arms: list = field(init=False, default_factory=list)

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        self.state = BanditState.zeros(self.model.n)

    def step(self, loss_row, rng: np.random.Generator) -> int:
        loss_row = np.asarray(loss_row, dtype=float)
        arm, _, _, probs = bandit_step(self.state, self.model, self.eta,
                                       lambda i: loss_row[i], rng)
        self.probs.append(probs)
        self.arms.append(arm)
        return arm

    def run(self, losses, rng: np.random.Generator) -> float:
        for row in np.asarray(losses):
            self.step(row, rng)
        return float(expected_regret(np.array(self.probs), losses))


def expected_regret(prob_history, losses, weights=None):
    """Per-run regret ``max_i sum_t u_t[i] - sum_t <x_t, u_t>``.

    ``prob_history`` has shape ``(..., T, n)`` and ``losses`` ``(T, n)`` or
    ``(..., T, n)``.  Averaging the result over independent runs estimates the
    expected regret; with ``weights`` (path probabilities) the weighted sum is
    returned instead.
    """
    probs = np.asarray(prob_history, dtype=float)
    losses = np.asarray(losses, dtype=float)
    if losses.shape[-2] == 0:
        per_run = np.zeros(np.broadcast_shapes(probs.shape, losses.shape)[:-2])
    else:
        best = np.max(np.sum(losses, axis=-2), axis=-1)
        per_run = best - np.sum(probs * losses, axis=(-2, -1))
    if weights is None:
        return per_run
    return float(np.sum(np.asarray(weights) * per_run))


def bandit_regret_bound(model: GnlModel, eta: float, n: int | None = None, T: int = 0) -> float:
    """``eta * E(0) + n T / (eta * min mu_ell)``."""
    n = model.n if n is None else n
    e0 = float(surplus(model, np.zeros(model.n), 1.0))
    return eta * e0 + n * T / (eta * model.min_nest_mu)


def optimal_bandit_eta(model: GnlModel, T: int) -> tuple[float, float]:
    """Minimizer of :func:`bandit_regret_bound` and the minimal value."""
    e0 = float(surplus(model, np.zeros(model.n), 1.0))
    scale = model.n * T / model.min_nest_mu
    if e0 <= 0:
        return math.inf, 0.0
    return math.sqrt(scale / e0), 2.0 * math.sqrt(scale * e0)


def run_gev_bandit(model: GnlModel, eta: float, losses, uniforms):
    """Vectorized runs over a batch of loss matrices.

    ``losses`` is ``(B, T, n)`` (or ``(T, n)`` shared by all runs) and
    ``uniforms`` is ``(B, T)``: one U[0, 1) draw per run and step drives the
    inverse-CDF sampling.  Returns ``(probs (B, T, n), arms (B, T), regret (B,))``.
    """
    uniforms = np.asarray(uniforms, dtype=float)
    B, T = uniforms.shape
    losses = np.broadcast_to(np.asarray(losses, dtype=float), (B, T, model.n))
    if np.any(losses < -1.0) or np.any(losses > 0.0):
        raise LossOnlyViolation("losses must lie in [-1, 0]")
    U_hat = np.zeros((B, model.n))
    probs = np.empty((B, T, model.n))
    arms = np.empty((B, T), dtype=np.int64)
    rows = np.arange(B)
    for t in range(T):
        p = choice_probabilities(model, U_hat, eta)
        a = sample_index(p, uniforms[:, t])
        probs[:, t] = p
        arms[:, t] = a
        U_hat[rows, a] += losses[rows, t, a] / p[rows, a]
    return probs, arms, expected_regret(probs, losses)


def enumerate_expected_regret(model: GnlModel, eta: float, losses) -> float:
    """Exact expected regret by walking every sampling path (small T, n only).

    Regret is linear in the played distributions, so the expectation is the sum
    over steps of the path-weighted expected gain; branches of zero probability
    are pruned.
    """
    losses = np.asarray(losses, dtype=float)
    T, n = losses.shape
    if T == 0:
        return 0.0
    for value in losses.ravel():
        _check_loss(value)
    best = float(np.max(losses.sum(axis=0)))

    def walk(U_hat, t, weight):
        if t == T:
            return 0.0
        probs = choice_probabilities(model, U_hat, eta)
        gain = weight * float(probs @ losses[t])
        for arm in range(n):
            if probs[arm] > 0:
                gain += walk(U_hat + estimate_gain(arm, losses[t, arm], probs), t + 1,
                             weight * probs[arm])
        return gain

    return best - walk(np.zeros(n), 0, 1.0)
