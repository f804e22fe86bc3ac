"""Log-partition scaling with size, and the associated rate function.

``scaling_profile`` tabulates a_A(theta) / r_|A| over a list of sizes.
``rate_function`` evaluates the Legendre-type transform

    J(t) = sup_phi <phi, t> - [a(theta + phi) - a(theta)]

for a per-unit-size log-partition ``a`` supplied as a handle.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from ..expfam import ExpFamModel, log_partition, moments
from ..statespace import size_of


def default_size_measure(family):
    """r(n): dyads for graphs, adjacent pairs for chains, n otherwise."""
    if family.kind == "undirected-graph":
        return lambda n: n * (n - 1) / 2
    if family.kind == "directed-graph":
        return lambda n: float(n * (n - 1))
    if family.kind in ("binary-sequence", "spin-sequence"):
        return lambda n: float(n - 1)
    return float


@dataclass
class ScalingProfile:
    theta: list
    rows: list  # (n, r, a_A, a_A / r)
    regime: str  # "exact" or "approximate"
    differences: list
    limit_estimate: float

    def ratios(self):
        return [row[3] for row in self.rows]

    def to_json(self):
        return {
            "theta": self.theta,
            "rows": [dict(zip(("size", "r", "log_partition", "ratio"), r)) for r in self.rows],
            "regime": self.regime,
            "successive_differences": self.differences,
            "limit_estimate": self.limit_estimate,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["size", "r", "log_partition", "ratio"])
        for n, r, a, q in self.rows:
            w.writerow([n, repr(r), repr(a), repr(q)])
        return buf.getvalue()


def scaling_profile(stat, family, sizes, theta, r_fn=None, cov=None, rel_tol=1e-12):
    """a_A(theta)/r_|A| per size, with an exact-vs-approximate verdict."""
    r_fn = default_size_measure(family) if r_fn is None else r_fn
    model = ExpFamModel(family, stat, theta, cov)
    rows = []
    for n in sorted(size_of(s) for s in sizes):
        r = float(r_fn(n))
        if r <= 0:
            raise ValueError(f"size measure must be positive, r({n}) = {r}")
        a = log_partition(model, n)
        rows.append((n, r, a, a / r))
    rs = [row[1] for row in rows]
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("size measure must increase strictly with size")
    q = [row[3] for row in rows]
    diffs = [b - a for a, b in zip(q, q[1:])]
    ref = max(1.0, max(abs(v) for v in q))
    exact = all(abs(v - q[0]) <= rel_tol * ref for v in q)
    return ScalingProfile(list(model.theta), rows, "exact" if exact else "approximate",
                          diffs, q[-1])


# ---------------------------------------------------------------------------
# rate function


class ExactLogPartition:
    """a(theta) = a_n(theta) / r for a fixed size, with exact derivatives."""

    def __init__(self, stat, family, n, r=None, cov=None):
        self.stat = stat
        self.family = family
        self.n = size_of(n)
        self.r = float(default_size_measure(family)(self.n) if r is None else r)
        self.cov = cov
        self._model = ExpFamModel(family, stat, np.zeros(stat.dimension), cov)
        vol = self._model.volume(self.n)
        self.keys = (vol.keys * stat.scale_vector()) / self.r

    def value(self, theta):
        return log_partition(self._model, self.n, np.atleast_1d(theta)) / self.r

    def grad(self, theta):
        return moments(self._model, self.n, np.atleast_1d(theta))[0] / self.r

    def hess(self, theta):
        return moments(self._model, self.n, np.atleast_1d(theta))[1] / self.r

    def in_closure(self, t):
        """Whether t lies in the closed convex hull of attainable T/r."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        K = self.keys.shape[0]
        if self.keys.shape[1] == 1:
            lo, hi = self.keys.min(), self.keys.max()
            return bool(lo - 1e-12 <= t[0] <= hi + 1e-12)
        A_eq = np.vstack([self.keys.T, np.ones((1, K))])
        b_eq = np.concatenate([t, [1.0]])
        res = linprog(np.zeros(K), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * K,
                      method="highs")
        return res.status == 0


class ClosedFormLogPartition:
    """Wrap a callable a(theta); derivatives by central differences if absent."""

    def __init__(self, fn, grad=None, hess=None, lower=None, upper=None, h=1e-5):
        self.fn = fn
        self._grad = grad
        self._hess = hess
        self.lower = None if lower is None else np.atleast_1d(lower).astype(float)
        self.upper = None if upper is None else np.atleast_1d(upper).astype(float)
        self.h = h

    def value(self, theta):
        return float(self.fn(np.atleast_1d(np.asarray(theta, dtype=float))))

    def grad(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self._grad is not None:
            return np.atleast_1d(self._grad(theta)).astype(float)
        g = np.empty_like(theta)
        for i in range(theta.size):
            e = np.zeros_like(theta)
            e[i] = self.h
            g[i] = (self.value(theta + e) - self.value(theta - e)) / (2 * self.h)
        return g

    def hess(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self._hess is not None:
            return np.atleast_2d(self._hess(theta)).astype(float)
        d = theta.size
        H = np.empty((d, d))
        for i in range(d):
            e = np.zeros(d)
            e[i] = self.h
            H[:, i] = (self.grad(theta + e) - self.grad(theta - e)) / (2 * self.h)
        return 0.5 * (H + H.T)

    def in_closure(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.lower is not None and np.any(t < self.lower):
            return False
        if self.upper is not None and np.any(t > self.upper):
            return False
        return True


@dataclass
class RateFunctionEval:
    t: list
    J: float
    phi_star: list
    theta: list
    r: float
    unbounded: bool = False
    converged: bool = True

    def to_json(self):
        return {
            "t": self.t,
            "J": self.J if math.isfinite(self.J) else "inf",
            "phi_star": self.phi_star,
            "theta": self.theta,
            "r": self.r,
            "unbounded": self.unbounded,
            "converged": self.converged,
        }


def rate_function(a, theta, t, tol=1e-13, max_iter=200, phi_cap=60.0):
    """Evaluate J(t) by damped Newton ascent on the concave objective.

    Points outside the closed mean range give ``J = inf`` with the
    ``unbounded`` flag set.  On the boundary of the range the supremum is
    approached as |phi| grows; the search stops at ``phi_cap``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r = float(getattr(a, "r", 1.0))
    if not a.in_closure(t):
        return RateFunctionEval(t.tolist(), math.inf, [math.nan] * t.size, theta.tolist(), r,
                                unbounded=True, converged=False)
    a0 = a.value(theta)

    def objective(phi):
        return float(phi @ t - (a.value(theta + phi) - a0))

    phi = np.zeros_like(t)
    f = objective(phi)
    converged = False
    for _ in range(max_iter):
        g = t - a.grad(theta + phi)
        if np.abs(g).max() <= tol:
            converged = True
            break
        H = a.hess(theta + phi)
        step = np.linalg.lstsq(H, g, rcond=None)[0]
        lam = 1.0
        while lam > 1e-12:
            cand = phi + lam * step
            if np.abs(cand).max() > phi_cap:
                cand = phi + lam * step * (phi_cap / max(np.abs(cand).max(), 1e-300))
            fc = objective(cand)
            if fc >= f - 1e-15:
                break
            lam *= 0.5
        if np.allclose(cand, phi, rtol=0, atol=1e-15):
            converged = True
            break
        phi, f = cand, fc
        if np.abs(phi).max() >= phi_cap:
            break
    return RateFunctionEval(t.tolist(), max(f, 0.0), phi.tolist(), theta.tolist(), r,
                            unbounded=False, converged=converged)
