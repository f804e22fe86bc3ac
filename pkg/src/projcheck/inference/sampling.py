"""Systematic-scan single-site Gibbs sampling.

Binary-site families with motif, Ising or dyadic statistics run through the
compiled sweep kernel; anything else (lookup tables, general alphabets)
takes a slower generic path that evaluates the statistic at every candidate
symbol.  Both paths draw their uniforms from one ``numpy`` Generator seeded
by :class:`SamplerConfig`, so runs are reproducible bit for bit.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..statespace import check_guard, from_digits, size_of
from ..statistics import (
    DyadicTerm,
    EdgeCount,
    IsingNearestNeighbor,
    KStarCount,
    TriangleCount,
    evaluate_codes,
    evaluate_digits,
)

# uniforms generated per batch (sweeps * sites)
_BATCH = 1 << 20


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    burn_in: int = 100
    thinning: int = 1
    samples: int = 1000

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.burn_in < 0 or self.thinning < 1 or self.samples < 1:
            raise ValueError("need burn_in >= 0, thinning >= 1, samples >= 1")

    def rng(self):
        return np.random.default_rng(int(self.seed))


@dataclass(frozen=True, eq=False)
class GibbsRun:
    """Recorded states (m, sites) and their integer statistics (m, d)."""

    n: int
    states: np.ndarray
    stats: np.ndarray
    final_state: np.ndarray


def _kernel_spec(stat, family, n, cov):
    if family.kind == "explicit-product":
        return None
    C = stat.dimension
    nd = n * (n - 1) // 2 if family.is_graph else 0
    kinds = np.zeros(C, dtype=np.int64)
    params = np.zeros(C, dtype=np.int64)
    vals = np.zeros((C, max(nd, 1), 4), dtype=np.int64)
    for c, comp in enumerate(stat.components):
        if isinstance(comp, (EdgeCount, DyadicTerm)):
            kinds[c] = kernels.KIND_DYADIC
            vals[c, :nd] = comp.dyad_values(family, n, cov)
        elif isinstance(comp, TriangleCount):
            kinds[c] = kernels.KIND_TRIANGLE
        elif isinstance(comp, KStarCount):
            kinds[c] = kernels.KIND_KSTAR
            params[c] = int(comp.k)
        elif isinstance(comp, IsingNearestNeighbor):
            kinds[c] = kernels.KIND_ISING
        else:
            return None
    if family.is_graph:
        lo, hi = kernels.dyad_endpoints(n)
    else:
        lo = hi = np.zeros(1, dtype=np.int64)
    return kinds, params, vals, lo, hi


def _schedule(cfg):
    total = cfg.burn_in + cfg.samples * cfg.thinning
    w = np.arange(total)
    keep = (w >= cfg.burn_in) & ((w - cfg.burn_in + 1) % cfg.thinning == 0)
    return total, keep


def gibbs_chain(stat, family, A, theta, cfg, cov=None, init=None, rng=None):
    """Run a Gibbs chain and return the kept states and statistics.

    ``init`` is an optional digit vector; by default the start is drawn
    uniformly.  Pass ``rng`` to continue an existing random stream.
    """
    n = size_of(A)
    stat.check_family(family)
    rng = cfg.rng() if rng is None else rng
    radices = np.asarray(family.radices(n), dtype=np.int64)
    S = radices.size
    if init is None:
        x = (rng.random(S) * radices).astype(np.uint8)
    else:
        x = np.array(init, dtype=np.uint8)
    theta = np.atleast_1d(np.asarray(theta, dtype=float)) * stat.scale_vector()
    total, keep = _schedule(cfg)
    states = np.empty((cfg.samples, S), dtype=np.uint8)
    stats = np.empty((cfg.samples, stat.dimension), dtype=np.int64)
    spec = _kernel_spec(stat, family, n, cov) if np.all(radices == 2) else None
    if S == 0:
        t0 = evaluate_digits(stat, family, n, x[None, :], np.zeros(1, np.int64), cov)[0]
        states[:] = x
        stats[:] = t0
        return GibbsRun(n, states, stats, x)
    if spec is None:
        _generic_sweeps(stat, family, n, x, theta, rng, total, keep, states, stats, cov)
        return GibbsRun(n, states, stats, x)

    kinds, params, vals, lo, hi = spec
    t = evaluate_digits(stat, family, n, x[None, :], None, cov)[0].copy()
    per = max(1, _BATCH // S)
    row = 0
    for w0 in range(0, total, per):
        w1 = min(total, w0 + per)
        u = rng.random((w1 - w0, S))
        row += kernels.gibbs_sweeps(
            x, t, kinds, params, vals, theta, n, family.directed, lo, hi,
            u, keep[w0:w1], states[row:], stats[row:],
        )
    return GibbsRun(n, states, stats, x)


def _generic_sweeps(stat, family, n, x, theta, rng, total, keep, states, stats, cov):
    radices = family.radices(n)
    check_guard(family.size(n))
    place = np.cumprod((1,) + tuple(radices[:-1])).astype(np.int64)
    code = int((x.astype(np.int64) * place).sum())
    row = 0
    for w in range(total):
        u = rng.random(len(radices))
        for s, r in enumerate(radices):
            base = code - int(x[s]) * int(place[s])
            cand = base + place[s] * np.arange(r, dtype=np.int64)
            t = evaluate_codes(stat, family, n, cand, cov)
            logits = t @ theta
            p = np.exp(logits - logits.max())
            cdf = np.cumsum(p / p.sum())
            v = min(int(np.searchsorted(cdf, u[s], side="right")), r - 1)
            x[s] = v
            code = int(cand[v])
        if keep[w]:
            states[row] = x
            stats[row] = evaluate_codes(stat, family, n, np.array([code]), cov)[0]
            row += 1


def gibbs_sample(stat, family, A, theta, cfg, cov=None):
    """Kept configurations of a seeded Gibbs chain."""
    run = gibbs_chain(stat, family, A, theta, cfg, cov)
    n = size_of(A)
    return [from_digits(family, n, row) for row in run.states]
