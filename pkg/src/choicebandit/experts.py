"""Full-feedback online learning over n experts with a GNL potential.

At every step the learner plays ``x_t = grad E~(U_{t-1}; eta)``, i.e. the GNL
choice probabilities of the cumulative reward vector, then observes the whole
reward vector.  With an MNL model this is the exponentially weighted average
forecaster.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .gev import GnlModel, choice_probabilities, smoothness_constant, surplus_constants


class BoundViolation(ValueError):
    """A reward vector left the admissible box ``||u||_inf <= K``."""


@dataclass
class ExpertsState:
    U: np.ndarray
    t: int = 0
    realized_gain: float = 0.0
    last_decision: np.ndarray | None = None

    @classmethod
    def zeros(cls, n: int) -> "ExpertsState":
        return cls(np.zeros(n))


@dataclass
class Experts:
    """Stateful learner; call :meth:`decide` then :meth:`observe` once per step."""

    model: GnlModel
    eta: float
    K: float = 1.0
    state: ExpertsState = field(init=False)

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.K > 0:
            raise ValueError("K must be positive")
        self.state = ExpertsState.zeros(self.model.n)

    def decide(self) -> np.ndarray:
        x = experts_decide(self.state, self.model, self.eta)
        self.state.last_decision = x
        return x

    def observe(self, u) -> None:
        experts_observe(self.state, u, self.K)

    def step(self, u) -> np.ndarray:
        x = self.decide()
        self.observe(u)
        return x

    @property
    def regret(self) -> float:
        return experts_regret(self.state)


def experts_decide(state: ExpertsState, model: GnlModel, eta: float) -> np.ndarray:
    return choice_probabilities(model, state.U, eta)


def experts_observe(state: ExpertsState, u, K: float) -> ExpertsState:
    u = np.asarray(u, dtype=float)
    if u.shape != state.U.shape:
        raise ValueError(f"reward vector has shape {u.shape}, expected {state.U.shape}")
    if np.max(np.abs(u)) > K:
        raise BoundViolation(f"reward vector has sup-norm {np.max(np.abs(u))} > K = {K}")
    if state.last_decision is None:
        raise RuntimeError("observe() called before decide() for this step")
    state.realized_gain += float(state.last_decision @ u)
    state.U = state.U + u
    state.t += 1
    state.last_decision = None
    return state


def experts_regret(state: ExpertsState) -> float:
    """``max_i U_T[i] - sum_t <x_t, u_t>``; zero before the first step."""
    if state.t == 0:
        return 0.0
    return float(np.max(state.U) - state.realized_gain)


class ExpertsBound(NamedTuple):
    bound_at_eta: float
    optimized_bound: float
    optimal_eta: float


def experts_regret_bound(model: GnlModel, eta: float, K: float, T: int) -> ExpertsBound:
    """``eta * alpha + L K^2 T / eta`` and its minimum ``2 K sqrt(alpha L T)``.

    ``alpha = E(0)`` and ``L`` is the GNL smoothness constant.
    """
    alpha = surplus_constants(model).alpha_exact
    L = smoothness_constant(model)
    # alpha = 0 (a single expert) sends the tuned eta to infinity; the first term is then 0
    at_eta = (eta * alpha if alpha > 0 else 0.0) + L * K**2 * T / eta
    optimized = 2.0 * math.sqrt(alpha * L * T) * K
    optimal_eta = K * math.sqrt(L * T / alpha) if alpha > 0 else math.inf
    return ExpertsBound(at_eta, optimized, optimal_eta)


def run_experts(model: GnlModel, eta: float, rewards) -> tuple[np.ndarray, np.ndarray]:
    """Play a whole reward sequence at once.

    ``rewards`` has shape ``(..., T, n)``; leading dimensions are independent
    sequences.  Returns the decisions ``(..., T, n)`` and regrets ``(...)``.
    """
    rewards = np.asarray(rewards, dtype=float)
    cumulative = np.cumsum(rewards, axis=-2)
    before = np.concatenate([np.zeros_like(rewards[..., :1, :]), cumulative[..., :-1, :]], axis=-2)
    decisions = choice_probabilities(model, before, eta)
    gain = np.sum(decisions * rewards, axis=(-2, -1))
    if rewards.shape[-2] == 0:
        return decisions, np.zeros(rewards.shape[:-2])
    return decisions, np.max(cumulative[..., -1, :], axis=-1) - gain
