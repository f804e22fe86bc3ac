"""Exact exponential-family quantities at enumeration scale.

Every probability here is computed from a volume table grouped by exact
statistic value, with log-sum-exp accumulation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import NotNested
from .statespace import Configuration, check_guard, size_of
from .statistics import CovariateTable, eval_statistic, evaluate_codes
from .volume import marginal_volume

REL_TOL = 1e-9
ABS_TOL = 1e-12


def close(a, b, rel=REL_TOL, abs_tol=ABS_TOL):
    """Relative comparison with an absolute floor (elementwise, all())."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= np.maximum(rel * np.maximum(np.abs(a), np.abs(b)), abs_tol)))


@dataclass(frozen=True)
class ExpFamModel:
    family: object
    stat: object
    theta: tuple
    covariates: CovariateTable = None

    def __post_init__(self):
        theta = tuple(float(v) for v in np.atleast_1d(self.theta))
        if len(theta) != self.stat.dimension:
            raise ValueError(
                f"theta has {len(theta)} components, statistic has {self.stat.dimension}"
            )
        if not all(math.isfinite(v) for v in theta):
            raise ValueError("theta components must be finite")
        object.__setattr__(self, "theta", theta)
        if self.covariates is not None and not isinstance(self.covariates, CovariateTable):
            object.__setattr__(self, "covariates", CovariateTable(self.covariates))
        self.stat.check_family(self.family)

    def with_theta(self, theta):
        return ExpFamModel(self.family, self.stat, theta, self.covariates)

    @property
    def natural(self):
        """theta multiplied by the component scales (acts on integer stats)."""
        return np.asarray(self.theta) * self.stat.scale_vector()

    def volume(self, A):
        return marginal_volume(self.stat, self.family, A, self.covariates)


@dataclass(frozen=True, eq=False)
class StatDistribution:
    """Law of the integer statistic T_A under a model."""

    keys: np.ndarray  # (K, d) integer stat vectors
    counts: tuple  # v_A(t), exact
    probs: np.ndarray
    scale: np.ndarray

    def as_dict(self):
        return {tuple(int(v) for v in k): float(p) for k, p in zip(self.keys, self.probs)}

    def counts_dict(self):
        return {tuple(int(v) for v in k): c for k, c in zip(self.keys, self.counts)}

    def prob(self, t):
        return self.as_dict().get(tuple(t), 0.0)

    def values(self):
        """Real-valued (scaled) statistic per key."""
        return self.keys * self.scale

    def mean(self):
        return self.probs @ self.values()

    def covariance(self):
        v = self.values()
        c = v - self.mean()
        return (c * self.probs[:, None]).T @ c


def _log_weights(model, vol, theta=None):
    eta = model.natural if theta is None else np.asarray(theta) * model.stat.scale_vector()
    return vol.log_counts() + vol.keys @ eta


def log_partition(model, A, theta=None, volume=None):
    """log z_A(theta), defaulting to the model's own theta."""
    vol = model.volume(A) if volume is None else volume
    return float(logsumexp(_log_weights(model, vol, theta)))


def log_probability(model, A, x):
    n = size_of(A)
    if x.n != n or x.base:
        raise ValueError(f"configuration lives on {{1..{x.n}}}, expected {{1..{n}}}")
    t = np.asarray(eval_statistic(model.stat, model.family, x, model.covariates), dtype=float)
    return float(t @ model.natural) - log_partition(model, n)


def statistic_distribution(model, A, theta=None):
    vol = model.volume(A)
    lw = _log_weights(model, vol, theta)
    probs = np.exp(lw - logsumexp(lw))
    return StatDistribution(vol.keys, vol.counts, probs, model.stat.scale_vector())


def moments(model, A, theta=None):
    """(E[T], Cov[T]) of the scaled statistic, exact."""
    dist = statistic_distribution(model, A, theta)
    return dist.mean(), dist.covariance()


@dataclass(frozen=True, eq=False)
class PredictiveDistribution:
    """Law of the new sites given X_A = x."""

    x: Configuration
    ys: tuple  # Configuration objects with base = n_sub
    increments: np.ndarray  # (M, d) integer
    probs: np.ndarray

    def as_dict(self):
        return {y: float(p) for y, p in zip(self.ys, self.probs)}

    def increment_law(self):
        out = {}
        for inc, p in zip(self.increments, self.probs):
            k = tuple(int(v) for v in inc)
            out[k] = out.get(k, 0.0) + float(p)
        return out


def _check_nested(A, B):
    nA, nB = size_of(A), size_of(B)
    if nA > nB:
        raise NotNested(f"{{1..{nA}}} is not contained in {{1..{nB}}}")
    return nA, nB


def increments_given(model, A, B, x, guard=None):
    """Integer increments t_B(x, y) - t_A(x) for every y, canonical order."""
    nA, nB = _check_nested(A, B)
    fam = model.family
    NA = fam.size(nA)
    M = fam.new_size(nA, nB)
    check_guard(M, guard)
    codes = x.code + NA * np.arange(M, dtype=np.int64)
    tB = evaluate_codes(model.stat, fam, nB, codes, model.covariates)
    tA = np.asarray(eval_statistic(model.stat, fam, x, model.covariates), dtype=np.int64)
    return tB - tA


def predictive_distribution(model, A, B, x, guard=None):
    nA, nB = _check_nested(A, B)
    if x.n != nA or x.base:
        raise ValueError(f"x must be a configuration on {{1..{nA}}}")
    inc = increments_given(model, nA, nB, x, guard)
    logits = inc @ model.natural
    probs = np.exp(logits - logsumexp(logits))
    ys = tuple(Configuration(nB, y, base=nA) for y in range(inc.shape[0]))
    return PredictiveDistribution(x, ys, inc, probs)


def increment_mgf(model, A, B, phi):
    """E[exp<phi, T_B - T_A>] from partition functions alone."""
    nA, nB = _check_nested(A, B)
    th = np.asarray(model.theta)
    shifted = th + np.atleast_1d(np.asarray(phi, dtype=float))
    log_m = (
        log_partition(model, nB, shifted)
        - log_partition(model, nB)
        - log_partition(model, nA, shifted)
        + log_partition(model, nA)
    )
    return math.exp(log_m)


def empirical_increment_mgf(model, A, B, phi, x):
    """E[exp<phi, T_B - T_A> | X_A = x] from the predictive distribution."""
    pred = predictive_distribution(model, A, B, x)
    eta = np.atleast_1d(np.asarray(phi, dtype=float)) * model.stat.scale_vector()
    return float(pred.probs @ np.exp(pred.increments @ eta))
