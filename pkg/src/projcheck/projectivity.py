"""Projectibility diagnostics over a nested pair of index sets.

The battery combines integer criteria on volume tables (tolerance-free) with
per-parameter probabilistic checks over a finite grid of theta values.  The
probabilistic checks can only falsify; the integer criteria carry the claims
that hold for every theta.

Implications enforced on every report::

    separable increments  <=>  direct marginalization
    separable increments   =>  joint factorization
    direct marginalization =>  increment independent of X_A
    direct marginalization =>  predictive sufficiency

A report whose verdicts break one of these raises ``InternalInconsistency``.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import InternalInconsistency, NotNested
from .statespace import Configuration, configuration_codes, size_of
from .statistics import evaluate_codes
from .volume import build_volume_tables

SEPARABLE = "separable-increments"
JOINT = "joint-factorization"
DIRECT = "direct-marginalization"
INCREMENT_INDEP = "increment-independence"
PREDICTIVE = "predictive-sufficiency"
CRITERIA = (SEPARABLE, JOINT, DIRECT, INCREMENT_INDEP, PREDICTIVE)

DEFAULT_TOL = 1e-9
SCALAR_GRID = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)


@dataclass
class CheckResult:
    criterion: str
    passed: bool
    witness: dict = None
    detail: str = ""

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"

    def to_json(self):
        out = {"criterion": self.criterion, "verdict": self.verdict}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = self.detail
        return out


def default_theta_grid(d, seed=0):
    """Falsification grid for a d-dimensional parameter."""
    if d == 1:
        return [np.array([v]) for v in SCALAR_GRID]
    pts = [np.array(p, dtype=float) for p in itertools.islice(
        itertools.product((-1.0, 0.0, 1.0), repeat=d), 64)]
    if not any(not p.any() for p in pts):
        # the cap cut off the origin (d >= 5); keep it, it is always informative
        pts[-1] = np.zeros(d)
    rng = np.random.default_rng(seed)
    for _ in range(8):
        v = rng.standard_normal(d)
        pts.append(v / np.linalg.norm(v))
    return pts


def _as_grid(theta_grid, d):
    if theta_grid is None:
        return default_theta_grid(d)
    grid = [np.atleast_1d(np.asarray(t, dtype=float)) for t in theta_grid]
    if not grid:
        raise ValueError("theta grid must be non-empty")
    for t in grid:
        if t.size != d:
            raise ValueError(f"grid point {t.tolist()} has wrong dimension (need {d})")
    return grid


def _natural(stat, theta):
    return np.asarray(theta, dtype=float) * stat.scale_vector()


def _decode(family, n, code):
    if family is None:
        return None
    return [_plain(s) for s in family.decode(Configuration(n, int(code)))]


def _plain(v):
    return v.item() if hasattr(v, "item") else v


def _vec(row):
    return [int(v) for v in row]


# ---------------------------------------------------------------------------
# integer criteria


def check_separable_increments(tables, family=None):
    """Same increment support and conditional counts for every base x."""
    ref = tables.conditional[0]
    # scan larger increments first so witnesses are stable and readable
    for xp in range(1, tables.size_sub):
        row = tables.conditional[xp]
        if np.array_equal(row, ref):
            continue
        for j in range(row.size - 1, -1, -1):
            if row[j] != ref[j]:
                delta = _vec(tables.delta_keys[j])
                w = {
                    "x": 0,
                    "x_prime": int(xp),
                    "delta": delta,
                    "count_x": int(ref[j]),
                    "count_x_prime": int(row[j]),
                    "support_differs": bool((ref[j] == 0) != (row[j] == 0)),
                }
                if family is not None:
                    w["x_symbols"] = _decode(family, tables.n_sub, 0)
                    w["x_prime_symbols"] = _decode(family, tables.n_sub, xp)
                return CheckResult(
                    SEPARABLE, False, w,
                    f"v(delta={delta} | x) is {ref[j]} at x=0 but {row[j]} at x={xp}",
                )
    return CheckResult(SEPARABLE, True, None, "conditional volume factor constant in x")


def check_joint_factorization(tables):
    """Exact rank-one test: N * joint(t, delta) == R(t) * C(delta)."""
    N = tables.size_sub * tables.size_new
    joint = tables.joint
    wide = N > 2**31 or (joint.size and int(joint.max()) > 2**31)
    J = joint.astype(object) if wide else joint
    R = J.sum(axis=1)
    C = J.sum(axis=0)
    lhs = J * N
    rhs = np.outer(R, C) if not wide else np.array([[r * c for c in C] for r in R], dtype=object)
    bad = np.argwhere(lhs != rhs)
    if bad.size == 0:
        return CheckResult(JOINT, True, None, "joint volume table is rank one")
    i, j = bad[0]
    w = {
        "t": _vec(tables.t_keys[i]),
        "delta": _vec(tables.delta_keys[j]),
        "joint": int(joint[i, j]),
        "N_times_joint": int(lhs[i, j]),
        "row_times_col": int(rhs[i, j]),
        "N": int(N),
    }
    return CheckResult(JOINT, False, w, "joint volume table does not factorize")


# ---------------------------------------------------------------------------
# per-theta criteria


def _conditional_logits(tables, eta):
    with np.errstate(divide="ignore"):
        logc = np.log(tables.conditional.astype(float))
    return logc + (tables.delta_keys @ eta)[None, :]


def check_increment_independence_of_x(tables, theta_grid, stat=None, tol=DEFAULT_TOL, family=None):
    """Law of the increment given X_A = x must not depend on x."""
    d = tables.delta_keys.shape[1]
    grid = _as_grid(theta_grid, d)
    scale = stat.scale_vector() if stat is not None else np.ones(d)
    for th in grid:
        lg = _conditional_logits(tables, th * scale)
        P = np.exp(lg - logsumexp(lg, axis=1, keepdims=True))
        diff = np.abs(P - P[0][None, :])
        k = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[k] > tol:
            xp, j = int(k[0]), int(k[1])
            w = {
                "theta": th.tolist(),
                "x": 0,
                "x_prime": xp,
                "delta": _vec(tables.delta_keys[j]),
                "p_x": float(P[0, j]),
                "p_x_prime": float(P[xp, j]),
                "discrepancy": float(diff[k]),
            }
            if family is not None:
                w["x_symbols"] = _decode(family, tables.n_sub, 0)
                w["x_prime_symbols"] = _decode(family, tables.n_sub, xp)
            return CheckResult(INCREMENT_INDEP, False, w, "increment law depends on x")
    return CheckResult(INCREMENT_INDEP, True, None, f"max discrepancy <= {tol} on grid")


def check_predictive_sufficiency(tables, theta_grid, stat=None, tol=DEFAULT_TOL, family=None):
    """p(y | x) must be a function of the increment t_B(x, y) - t_A(x) alone."""
    d = tables.delta_keys.shape[1]
    grid = _as_grid(theta_grid, d)
    scale = stat.scale_vector() if stat is not None else np.ones(d)
    present = tables.conditional > 0
    for th in grid:
        eta = th * scale
        lg = _conditional_logits(tables, eta)
        log_norm = logsumexp(lg, axis=1)
        # probability of one particular y with increment delta, given x
        logp = (tables.delta_keys @ eta)[None, :] - log_norm[:, None]
        P = np.where(present, np.exp(logp), np.nan)
        for j in range(P.shape[1]):
            col = P[:, j]
            ok = ~np.isnan(col)
            if ok.sum() < 2:
                continue
            lo, hi = int(np.nanargmin(col)), int(np.nanargmax(col))
            if col[hi] - col[lo] > tol:
                w = {
                    "theta": th.tolist(),
                    "delta": _vec(tables.delta_keys[j]),
                    "x": lo,
                    "x_prime": hi,
                    "p_y_given_x": float(col[lo]),
                    "p_y_given_x_prime": float(col[hi]),
                    "discrepancy": float(col[hi] - col[lo]),
                }
                if family is not None:
                    w["x_symbols"] = _decode(family, tables.n_sub, lo)
                    w["x_prime_symbols"] = _decode(family, tables.n_sub, hi)
                return CheckResult(PREDICTIVE, False, w,
                                   "predictive law not determined by the increment")
    return CheckResult(PREDICTIVE, True, None, f"max discrepancy <= {tol} on grid")


def marginal_discrepancy(stat, family, A, B, theta, cov=None, guard=None):
    """(p_A, marginal of p_B onto X_A) at one theta, by direct enumeration."""
    nA, nB = size_of(A), size_of(B)
    NA = family.size(nA)
    M = family.new_size(nA, nB)
    eta = _natural(stat, theta)
    tA = evaluate_codes(stat, family, nA, configuration_codes(family, nA, guard=guard), cov)
    tB = evaluate_codes(stat, family, nB, configuration_codes(family, nB, guard=guard), cov)
    lwA = tA @ eta
    lwB = tB @ eta
    log_pA = lwA - logsumexp(lwA)
    # code_B = x + NA * y, so row y of the reshape is one extension of every x
    fibers = (lwB - logsumexp(lwB)).reshape(M, NA)
    log_marg = logsumexp(fibers, axis=0)
    return np.exp(log_pA), np.exp(log_marg)


def check_projective_direct(stat, family, A, B, theta_grid=None, cov=None, tol=DEFAULT_TOL,
                            guard=None):
    """Marginalize the B-level law onto X_A and compare with the A-level law."""
    nA, nB = size_of(A), size_of(B)
    if nA > nB:
        raise NotNested(f"{{1..{nA}}} is not contained in {{1..{nB}}}")
    stat.check_family(family)
    grid = _as_grid(theta_grid, stat.dimension)
    worst = 0.0
    for th in grid:
        pA, pM = marginal_discrepancy(stat, family, nA, nB, th, cov, guard)
        diff = np.abs(pA - pM)
        x = int(np.argmax(diff))
        worst = max(worst, float(diff[x]))
        if diff[x] > tol:
            w = {
                "theta": th.tolist(),
                "x": x,
                "x_symbols": _decode(family, nA, x),
                "p_A": float(pA[x]),
                "p_B_marginal": float(pM[x]),
                "discrepancy": float(diff[x]),
            }
            return CheckResult(DIRECT, False, w, "marginal of the larger model differs")
    return CheckResult(DIRECT, True, None, f"max discrepancy {worst:.3g} <= {tol}")


# ---------------------------------------------------------------------------


@dataclass
class ProjectivityReport:
    n_sub: int
    n_super: int
    checks: dict
    theta_grid: list
    tolerance: float
    table_checksum: str
    consistent: bool = True
    violations: list = field(default_factory=list)

    def verdict(self, criterion):
        return self.checks[criterion].passed

    @property
    def all_pass(self):
        return all(c.passed for c in self.checks.values())

    def pattern(self):
        return {k: c.verdict for k, c in self.checks.items()}

    def to_json(self):
        return {
            "sub": self.n_sub,
            "super": self.n_super,
            "checks": {k: c.to_json() for k, c in self.checks.items()},
            "theta_grid": [list(map(float, t)) for t in self.theta_grid],
            "tolerance": self.tolerance,
            "table_checksum": self.table_checksum,
            "implication_consistent": self.consistent,
            "all_pass": self.all_pass,
        }


def implication_violations(verdicts):
    """Names of broken implications for a dict criterion -> bool."""
    s, j, dm = verdicts[SEPARABLE], verdicts[JOINT], verdicts[DIRECT]
    out = []
    if s != dm:
        out.append("separable <=> direct-marginalization")
    if s and not j:
        out.append("separable => joint-factorization")
    if dm and not verdicts[INCREMENT_INDEP]:
        out.append("direct-marginalization => increment-independence")
    if dm and not verdicts.get(PREDICTIVE, True):
        out.append("direct-marginalization => predictive-sufficiency")
    return out


def projectivity_report(stat, family, A, B, theta_grid=None, cov=None, tol=DEFAULT_TOL,
                        guard=None, strict=True):
    nA, nB = size_of(A), size_of(B)
    tables = build_volume_tables(stat, family, nA, nB, cov, guard)
    grid = _as_grid(theta_grid, stat.dimension)
    checks = {
        SEPARABLE: check_separable_increments(tables, family),
        JOINT: check_joint_factorization(tables),
        DIRECT: check_projective_direct(stat, family, nA, nB, grid, cov, tol, guard),
        INCREMENT_INDEP: check_increment_independence_of_x(tables, grid, stat, tol, family),
        PREDICTIVE: check_predictive_sufficiency(tables, grid, stat, tol, family),
    }
    broken = implication_violations({k: c.passed for k, c in checks.items()})
    report = ProjectivityReport(nA, nB, checks, grid, tol, tables.checksum(),
                                consistent=not broken, violations=broken)
    if broken and strict:
        raise InternalInconsistency(
            f"verdicts {report.pattern()} break: {'; '.join(broken)}"
        )
    return report
