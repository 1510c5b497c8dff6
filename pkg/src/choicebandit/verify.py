"""Quick invariant and bound checks behind ``choicebandit verify``.

Each check is small enough to finish in a few seconds; the full-size versions
live in the test suite.
"""
from __future__ import annotations

import itertools
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import softmax

from . import adversarial, envs, experts, gradient
from .gev import (GnlModel, Nest, check_differential_consistency, choice_factors,
                  choice_probabilities, prob_jacobian, surplus)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def random_gnl(rng: np.random.Generator, n: int, fractional: bool = True) -> GnlModel:
    """Random GNL model; roughly half the arms are split across two nests when ``fractional``."""
    L = int(rng.integers(1, min(n, 5) + 1))
    mu = float(rng.uniform(0.5, 1.5))
    nest_mu = rng.uniform(0.15, 1.0, size=L) * mu
    shares = np.zeros((n, L))
    for i in range(n):
        first = int(rng.integers(L)) if i >= L else i
        if fractional and L > 1 and rng.random() < 0.5:
            second = int(rng.integers(L - 1))
            second += second >= first
            w = rng.uniform(0.1, 0.9)
            shares[i, first], shares[i, second] = w, 1.0 - w
        else:
            shares[i, first] = 1.0
    nests = tuple(Nest(str(k), float(nest_mu[k]),
                       {i: float(shares[i, k]) for i in range(n) if shares[i, k] > 0})
                  for k in range(L))
    return GnlModel(n, mu, nests)


def random_nl(rng: np.random.Generator, n: int) -> GnlModel:
    perm = rng.permutation(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(n - 1, int(rng.integers(0, 4))), replace=False))
    blocks = [b.tolist() for b in np.split(perm, cuts)]
    return GnlModel.nl(blocks, rng.uniform(0.2, 1.0, size=len(blocks)).tolist())


def _gradient_identity(rng) -> CheckResult:
    worst = 0.0
    h = 1e-5
    for _ in range(100):
        n = int(rng.integers(2, 11))
        model = random_gnl(rng, n)
        u = rng.uniform(-50, 50, size=n)
        eye = np.eye(n) * h
        fd = (surplus(model, u + eye) - surplus(model, u - eye)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd - choice_probabilities(model, u)))))
    return CheckResult("gradient identity (FD of surplus vs probabilities)", worst <= 1e-6,
                       f"max abs error {worst:.2e} <= 1e-6")


def _jacobian(rng) -> CheckResult:
    worst_sym = worst_row = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 11))
        model = random_gnl(rng, n)
        J = prob_jacobian(model, rng.uniform(-20, 20, size=n))
        worst_sym = max(worst_sym, float(np.max(np.abs(J - J.T))))
        worst_row = max(worst_row, float(np.max(np.abs(J.sum(axis=1)))))
    ok = worst_sym <= 1e-10 and worst_row <= 1e-10
    return CheckResult("jacobian symmetry and zero row sums", ok,
                       f"asymmetry {worst_sym:.1e}, row sum {worst_row:.1e}")


def _diff_consistency(rng) -> CheckResult:
    worst = -np.inf
    for _ in range(5):
        model = random_nl(rng, int(rng.integers(2, 9)))
        rep = check_differential_consistency(model, 1.0, 200, rng)
        worst = max(worst, rep.max_ratio - rep.bound)
        if not rep.passed:
            return CheckResult("differential consistency", False, f"ratio {rep.max_ratio} > {rep.bound}")
    return CheckResult("differential consistency", True, f"max excess over C {worst:.2e}")


def _experts_bound(rng) -> CheckResult:
    n, T = 10, 500
    models = [GnlModel.mnl(n), GnlModel.nl([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]], [0.5, 0.7])]
    worst = np.inf
    for model in models:
        eta = experts.experts_regret_bound(model, 1.0, 1.0, T).optimal_eta
        bound = experts.experts_regret_bound(model, eta, 1.0, T).bound_at_eta
        rewards = rng.uniform(-1, 1, size=(20, T, n))
        _, regret = experts.run_experts(model, eta, rewards)
        worst = min(worst, bound - float(regret.max()))
    return CheckResult("experts regret bound", worst >= 0, f"smallest margin {worst:.2f}")


def _exp3(rng) -> CheckResult:
    model = GnlModel.mnl(5, 0.7)
    eta = 3.0
    losses = rng.uniform(-1, 0, size=(1000, 5))
    state = adversarial.BanditState.zeros(5)
    worst = 0.0
    for t in range(1000):
        expected = softmax(state.U_hat / (model.mu * eta))
        _, _, state, probs = adversarial.bandit_step(state, model, eta, lambda a: losses[t, a], rng)
        worst = max(worst, float(np.max(np.abs(expected - probs))))
    return CheckResult("Exp3 equivalence of the MNL bandit", worst <= 1e-12, f"max deviation {worst:.1e}")


def _unbiased(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 8))
        p = rng.dirichlet(np.ones(n)) + 1e-3
        p /= p.sum()
        u = rng.uniform(-1, 0, size=n)
        mean = sum(p[i] * adversarial.estimate_gain(i, u[i], p) for i in range(n))
        worst = max(worst, float(np.max(np.abs(mean - u))))
    return CheckResult("importance-weighted estimator unbiased", worst <= 1e-12, f"max error {worst:.1e}")


def _enumeration(rng) -> CheckResult:
    model = GnlModel.mnl(2)
    losses = rng.uniform(-1, 0, size=(3, 2))
    eta = 0.7
    exact = adversarial.enumerate_expected_regret(model, eta, losses)
    oracle = 0.0
    for path in itertools.product(range(2), repeat=3):
        U = np.zeros(2)
        weight, gain = 1.0, 0.0
        for t, arm in enumerate(path):
            p = np.exp(U / eta) / np.exp(U / eta).sum()
            weight *= p[arm]
            gain += p @ losses[t]
            U[arm] += losses[t, arm] / p[arm]
        oracle += weight * (losses.sum(axis=0).max() - gain)
    err = abs(exact - oracle)
    return CheckResult("expected regret vs path enumeration", err <= 1e-12, f"error {err:.1e}")


def _adversarial_bound(rng) -> CheckResult:
    n, T = 5, 300
    model = GnlModel.nl([[0, 1], [2, 3, 4]], [0.5, 0.8])
    eta, _ = adversarial.optimal_bandit_eta(model, T)
    losses = envs.make_adversarial_losses("single-best-arm", n, T, rng)
    _, _, regret = adversarial.run_gev_bandit(model, eta, losses, rng.random((100, T)))
    bound = adversarial.bandit_regret_bound(model, eta, n, T)
    return CheckResult("adversarial expected regret bound", regret.mean() <= bound,
                       f"mean regret {regret.mean():.1f} <= bound {bound:.1f}")


def _reduction(rng) -> CheckResult:
    n, T = 6, 300
    means = rng.normal(0, 1, n)
    classical = gradient.GradBanditVariant("classical-softmax", GnlModel.mnl(n), 0.2)
    nested = gradient.GradBanditVariant("nested-logit", GnlModel.nl([[i] for i in range(n)], 1.0), 0.2)
    generic = gradient.GradBanditVariant("generalized-gnl", GnlModel.mnl(n), 0.2)
    states = [gradient.PreferenceState.zeros(n) for _ in range(3)]
    uniforms, noise = rng.random(T), rng.standard_normal(T)
    worst = 0.0
    for t in range(T):
        for state, variant in zip(states, (classical, nested, generic)):
            gradient.gb_step(state, variant, uniforms[t], lambda a: means[a] + noise[t])
        worst = max(worst, float(np.max(np.abs(states[0].u - states[1].u))),
                    float(np.max(np.abs(states[0].u - states[2].u))))
    return CheckResult("softmax / trivial-nest / generic reduction", worst <= 1e-12,
                       f"max preference divergence {worst:.1e}")


def _closed_form(rng) -> CheckResult:
    worst = 0.0
    for _ in range(200):
        model = random_nl(rng, int(rng.integers(2, 12)))
        u = rng.normal(0, 3, size=model.n)
        f = choice_factors(model, u)
        arm = int(rng.integers(model.n))
        adv = float(rng.normal())
        a = gradient.nl_delta(model, f, arm, adv, 0.3)
        b = gradient.generic_delta(model, f, arm, adv, 0.3)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return CheckResult("closed-form NL update vs Jacobian update", worst <= 1e-9, f"max gap {worst:.1e}")


CHECKS: tuple[Callable, ...] = (
    _gradient_identity, _jacobian, _diff_consistency, _experts_bound, _exp3,
    _unbiased, _enumeration, _adversarial_bound, _reduction, _closed_form,
)


def run_checks(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in CHECKS]
