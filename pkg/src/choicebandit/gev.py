"""Generalized nested logit (GNL) surplus functions and choice probabilities.

A GNL model over ``n`` alternatives is described by a top-level scale ``mu``,
a list of nests with scales ``mu_ell <= mu`` and allocation shares
``sigma[i, ell] >= 0`` that sum to one over nests for every alternative.
Its generating function is

    G(x) = sum_ell ( sum_i (sigma[i, ell] * x_i) ** (1 / mu_ell) ) ** (mu_ell / mu)

and the surplus is ``E(u) = mu * log G(exp(u))``.  Everything below is
evaluated in log space with max-shifted log-sum-exp, and every function accepts
utilities with arbitrary leading batch dimensions ``(..., n)``.

Arms are indexed from 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

SHARE_TOL = 1e-12


class ModelError(ValueError):
    """Raised for GNL parameters that violate the model invariants."""


@dataclass(frozen=True)
class Nest:
    id: str
    mu_ell: float
    alloc: Mapping[int, float]


@dataclass(frozen=True)
class GnlModel:
    """Immutable GNL model.

    Use :meth:`mnl`, :meth:`nl` or :meth:`from_json` rather than building
    nests by hand unless you need fractional allocations.
    """

    n: int
    mu: float
    nests: tuple[Nest, ...]
    shares: np.ndarray = field(init=False, repr=False, compare=False)
    nest_mu: np.ndarray = field(init=False, repr=False, compare=False)
    log_shares: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n, mu = int(self.n), float(self.mu)
        if n < 1:
            raise ModelError("a model needs at least one alternative")
        if not np.isfinite(mu) or mu <= 0:
            raise ModelError(f"mu must be positive, got {mu}")
        if not self.nests:
            raise ModelError("a model needs at least one nest")
        shares = np.zeros((n, len(self.nests)))
        nest_mu = np.empty(len(self.nests))
        ids = set()
        for k, nest in enumerate(self.nests):
            if nest.id in ids:
                raise ModelError(f"duplicate nest id {nest.id!r}")
            ids.add(nest.id)
            if not (0 < nest.mu_ell <= mu):
                raise ModelError(
                    f"nest {nest.id!r}: need 0 < mu_ell <= mu, got mu_ell={nest.mu_ell}, mu={mu}")
            nest_mu[k] = nest.mu_ell
            for arm, share in nest.alloc.items():
                arm = int(arm)
                if not 0 <= arm < n:
                    raise ModelError(f"nest {nest.id!r}: arm {arm} out of range 0..{n - 1}")
                if share < 0 or not np.isfinite(share):
                    raise ModelError(f"nest {nest.id!r}: negative share for arm {arm}")
                shares[arm, k] = share
            if not np.any(shares[:, k] > 0):
                raise ModelError(f"nest {nest.id!r} is empty")
        totals = shares.sum(axis=1)
        bad = np.flatnonzero(np.abs(totals - 1.0) > SHARE_TOL)
        if bad.size:
            raise ModelError(
                f"allocation shares of arm {int(bad[0])} sum to {totals[bad[0]]!r}, not 1")
        with np.errstate(divide="ignore"):
            log_shares = np.log(shares)
        shares.flags.writeable = False
        nest_mu.flags.writeable = False
        log_shares.flags.writeable = False
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nests", tuple(self.nests))
        object.__setattr__(self, "shares", shares)
        object.__setattr__(self, "nest_mu", nest_mu)
        object.__setattr__(self, "log_shares", log_shares)

    # -- constructors -----------------------------------------------------

    @classmethod
    def mnl(cls, n: int, mu: float = 1.0) -> "GnlModel":
        """Multinomial logit: one nest per alternative with ``mu_ell = mu``."""
        return cls(n, mu, tuple(Nest(str(i), mu, {i: 1.0}) for i in range(n)))

    @classmethod
    def nl(cls, partition: Sequence[Sequence[int]], mu_ell: Sequence[float] | float) -> "GnlModel":
        """Nested logit with exclusive nests and top-level ``mu = 1``."""
        partition = [list(map(int, block)) for block in partition]
        if np.isscalar(mu_ell):
            mu_ell = [float(mu_ell)] * len(partition)
        if len(mu_ell) != len(partition):
            raise ModelError("need one nest parameter per block of the partition")
        arms = sorted(a for block in partition for a in block)
        n = len(arms)
        if arms != list(range(n)):
            raise ModelError("partition must cover arms 0..n-1 exactly once")
        nests = tuple(Nest(str(k), float(m), {a: 1.0 for a in block})
                      for k, (block, m) in enumerate(zip(partition, mu_ell)))
        return cls(n, 1.0, nests)

    @classmethod
    def from_json(cls, spec: Mapping[str, Any] | str) -> "GnlModel":
        """Build a model from a JSON object (or its text).

        Accepted forms::

            {"mnl": {"n": 10, "mu": 1.0}}
            {"nl": {"mu_ell": [0.5, 1.0], "partition": [[0, 1], [2]]}}
            {"mu": 1.0, "nests": [{"id": "a", "mu_ell": 0.5, "alloc": {"0": 1.0}}, ...]}
        """
        if isinstance(spec, str):
            spec = json.loads(spec)
        if not isinstance(spec, Mapping):
            raise ModelError("model spec must be a JSON object")
        try:
            if "mnl" in spec:
                body = spec["mnl"]
                return cls.mnl(int(body["n"]), float(body.get("mu", 1.0)))
            if "nl" in spec:
                body = spec["nl"]
                return cls.nl(body["partition"], body["mu_ell"])
            nests = tuple(
                Nest(str(raw["id"]), float(raw["mu_ell"]),
                     {int(k): float(v) for k, v in raw["alloc"].items()})
                for raw in spec["nests"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed model spec: {exc}") from exc
        if not nests:
            raise ModelError("a model needs at least one nest")
        n = spec.get("n")
        if n is None:
            n = 1 + max(a for nest in nests for a in nest.alloc)
        return cls(int(n), float(spec["mu"]), nests)

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "n": self.n,
            "nests": [{"id": nest.id, "mu_ell": nest.mu_ell,
                       "alloc": {str(a): s for a, s in sorted(nest.alloc.items())}}
                      for nest in self.nests],
        }

    # -- structure --------------------------------------------------------

    @property
    def min_nest_mu(self) -> float:
        return float(self.nest_mu.min())

    @property
    def is_partition(self) -> bool:
        """True when shares are 0/1, i.e. every alternative sits in exactly one nest."""
        return bool(np.all((self.shares == 0.0) | (self.shares == 1.0)))

    @property
    def is_mnl(self) -> bool:
        return self.is_partition and bool(np.all(self.nest_mu == self.mu))

    @property
    def is_nl(self) -> bool:
        return self.is_partition and self.mu == 1.0

    @property
    def nest_of(self) -> np.ndarray:
        """Nest index of every alternative (partition models only)."""
        if not self.is_partition:
            raise ModelError("nest_of is only defined when nests partition the alternatives")
        return np.argmax(self.shares, axis=1)


# -- evaluation ----------------------------------------------------------------


class ChoiceFactors(NamedTuple):
    """Two-stage decomposition of GNL choice probabilities.

    ``probs[..., i] = sum_ell nest_probs[..., ell] * within[..., i, ell]``.
    """

    probs: np.ndarray
    nest_probs: np.ndarray
    within: np.ndarray
    nest_utility: np.ndarray


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return eta


def _nest_terms(model: GnlModel, u, eta):
    """Scaled log terms ``(log sigma_il + u_i / eta) / mu_l`` with shape (..., n, L)."""
    y = np.asarray(u, dtype=float) / _check_eta(eta)
    if y.shape[-1] != model.n:
        raise ValueError(f"expected {model.n} utilities, got shape {y.shape}")
    return (model.log_shares + y[..., :, None]) / model.nest_mu


def generating_value(model: GnlModel, x) -> float | np.ndarray:
    """Evaluate ``G(x)`` directly for strictly positive ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("the generating function is evaluated on positive vectors only")
    inner = np.where(model.shares > 0,
                     (model.shares * x[..., :, None]) ** (1.0 / model.nest_mu), 0.0)
    return np.sum(inner.sum(axis=-2) ** (model.nest_mu / model.mu), axis=-1)


def surplus(model: GnlModel, u, eta: float = 1.0) -> float | np.ndarray:
    """Perspective surplus ``eta * mu * log G(exp(u / eta))``."""
    a = _nest_terms(model, u, eta)
    v = model.nest_mu * logsumexp(a, axis=-2)
    return eta * model.mu * logsumexp(v / model.mu, axis=-1)


def choice_factors(model: GnlModel, u, eta: float = 1.0) -> ChoiceFactors:
    a = _nest_terms(model, u, eta)
    # normalized explicitly: exp(a - lse) drifts from summing to 1 when |a| is large
    within = softmax(a, axis=-2)
    v = model.nest_mu * logsumexp(a, axis=-2)
    nest_probs = softmax(v / model.mu, axis=-1)
    probs = np.einsum("...il,...l->...i", within, nest_probs)
    return ChoiceFactors(probs, nest_probs, within, v)


def choice_probabilities(model: GnlModel, u, eta: float = 1.0) -> np.ndarray:
    """Gradient of :func:`surplus` with respect to ``u``."""
    return choice_factors(model, u, eta).probs


def _jacobian_from_factors(model: GnlModel, f: ChoiceFactors, eta: float) -> np.ndarray:
    # dP_i/dy_j = sum_l W_il [delta_ij / mu_l + P_{j|l} (1/mu - 1/mu_l)] - P_i P_j / mu
    weights = f.within * f.nest_probs[..., None, :]
    diag = np.sum(weights / model.nest_mu, axis=-1)
    cross = np.einsum("...il,...jl->...ij",
                      weights * (1.0 / model.mu - 1.0 / model.nest_mu), f.within)
    jac = cross - f.probs[..., :, None] * f.probs[..., None, :] / model.mu
    idx = np.arange(model.n)
    jac[..., idx, idx] += diag
    return jac / eta


def prob_jacobian(model: GnlModel, u, eta: float = 1.0) -> np.ndarray:
    """Analytic Jacobian ``J[..., i, j] = dP_i / du_j``.

    Equal to the Hessian of the perspective surplus, hence symmetric, and
    every row sums to zero.
    """
    eta = _check_eta(eta)
    return _jacobian_from_factors(model, choice_factors(model, u, eta), eta)


def prob_jacobian_row(model: GnlModel, f: ChoiceFactors, arm, eta: float = 1.0) -> np.ndarray:
    """Row ``arm`` of the Jacobian from precomputed factors.

    ``arm`` is an integer array matching the batch shape of ``f.probs``; this
    avoids forming the full ``n x n`` matrix when only one row is needed.
    """
    arm = np.asarray(arm)
    take = arm[..., None]
    w_row = np.take_along_axis(f.within, take[..., None], axis=-2)[..., 0, :] * f.nest_probs
    p_arm = np.take_along_axis(f.probs, take, axis=-1)
    row = np.einsum("...l,...jl->...j",
                    w_row * (1.0 / model.mu - 1.0 / model.nest_mu), f.within)
    row -= p_arm * f.probs / model.mu
    diag = np.sum(w_row / model.nest_mu, axis=-1, keepdims=True)
    np.put_along_axis(row, take, np.take_along_axis(row, take, axis=-1) + diag, axis=-1)
    return row / eta


# -- constants -----------------------------------------------------------------


def smoothness_constant(model: GnlModel) -> float:
    """Strong-smoothness constant of the surplus w.r.t. the max-norm.

    ``2 / min mu_ell - 1 / mu`` in general and ``1 / mu`` for MNL (the two agree
    there, since every nest parameter equals ``mu``).
    """
    if model.is_mnl:
        return 1.0 / model.mu
    return 2.0 / model.min_nest_mu - 1.0 / model.mu


def diff_consistency_constant(model: GnlModel) -> float:
    return 1.0 / model.min_nest_mu


@dataclass(frozen=True)
class ModelConstants:
    smooth_L: float
    diff_C: float
    alpha_exact: float
    alpha_lower: float
    alpha_upper: float


def surplus_constants(model: GnlModel) -> ModelConstants:
    """Constants entering the regret bounds.

    ``alpha_exact`` is ``E(0)``.  For nested logit it is bracketed by
    ``min mu_ell * ln n`` and ``ln n``; for MNL both ends equal ``mu ln n``.
    No bracket is claimed for other GNL models (both ends are ``E(0)``).
    """
    alpha = float(surplus(model, np.zeros(model.n), 1.0))
    log_n = np.log(model.n)
    if model.is_mnl:
        lower = upper = model.mu * log_n
    elif model.is_nl:
        lower, upper = model.min_nest_mu * log_n, log_n
    else:
        lower = upper = alpha
    return ModelConstants(
        smooth_L=smoothness_constant(model),
        diff_C=diff_consistency_constant(model),
        alpha_exact=alpha,
        alpha_lower=float(lower),
        alpha_upper=float(upper),
    )


@dataclass
class ConsistencyReport:
    max_ratio: float
    bound: float
    worst_point: np.ndarray
    worst_arm: int
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.bound * (1 + 1e-3)


def check_differential_consistency(model: GnlModel, eta: float = 1.0, samples: int = 1000,
                                   rng_seed=None, h: float = 1e-4,
                                   low: float = -50.0) -> ConsistencyReport:
    """Finite-difference sweep of ``d2_ii E~ / d_i E~`` over ``U in [low, 0)^n``.

    Second derivatives come from central differences of the choice
    probabilities, independent of the analytic Jacobian.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    eta = _check_eta(eta)
    rng = np.random.default_rng(rng_seed)
    points = rng.uniform(low, 0.0, size=(samples, model.n))
    n = model.n
    eye = np.eye(n) * h
    plus = choice_probabilities(model, points[:, None, :] + eye, eta)
    minus = choice_probabilities(model, points[:, None, :] - eye, eta)
    idx = np.arange(n)
    second = (plus[:, idx, idx] - minus[:, idx, idx]) / (2 * h)
    first = choice_probabilities(model, points, eta)
    ratio = second / first
    flat = int(np.argmax(ratio))
    s, arm = divmod(flat, n)
    return ConsistencyReport(
        max_ratio=float(ratio[s, arm]),
        bound=diff_consistency_constant(model) / eta,
        worst_point=points[s],
        worst_arm=int(arm),
        samples=samples,
    )


# -- sampling --------------------------------------------------------------------


def sample_index(probs, uniform) -> np.ndarray | int:
    """Inverse-CDF draw: one uniform in [0, 1) per distribution in ``probs``."""
    probs = np.asarray(probs, dtype=float)
    cdf = np.cumsum(probs, axis=-1)
    target = np.asarray(uniform, dtype=float)[..., None] * cdf[..., -1:]
    arm = np.sum(cdf <= target, axis=-1)
    arm = np.minimum(arm, probs.shape[-1] - 1)
    return int(arm) if arm.ndim == 0 else arm
