"""Volume factors: exact counts of configurations per statistic value.

Three tables matter for a nested pair A = {1..n} inside B = {1..m}:

* marginal ``v_A(t)``: configurations of X_A with statistic t;
* joint ``v(t, delta)``: pairs (x, y) with t_A(x) = t and increment delta;
* conditional ``v(delta | x)``: extensions y of a fixed x with increment delta.

Marginal tables of purely dyadic statistics on graphs are also available
without enumeration, by convolving the per-dyad value distributions.
"""

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InternalInconsistency, NotNested, SpaceTooLarge
from .statespace import check_guard, configuration_codes, enumeration_guard, size_of
from .statistics import CHUNK, evaluate_codes


@dataclass(frozen=True, eq=False)
class MarginalVolume:
    """Sorted statistic keys (K, d) with exact integer counts."""

    keys: np.ndarray
    counts: tuple

    @property
    def total(self):
        return sum(self.counts)

    def log_counts(self):
        return np.array([math.log(c) for c in self.counts])

    def as_dict(self):
        return {tuple(int(v) for v in k): c for k, c in zip(self.keys, self.counts)}


def _unique_rows(a):
    keys, inv, cnt = np.unique(a, axis=0, return_inverse=True, return_counts=True)
    return keys, inv.reshape(-1), cnt


@lru_cache(maxsize=256)
def _marginal_enumerated(stat, family, n, cov):
    t = evaluate_codes(stat, family, n, configuration_codes(family, n, guard=-1), cov)
    keys, _, cnt = _unique_rows(t)
    keys.setflags(write=False)
    return MarginalVolume(keys, tuple(int(c) for c in cnt))


def _convolve(a, b):
    out = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            out[k] = out.get(k, 0) + ca * cb
    return out


def _power(dist, m, d):
    result = {(0,) * d: 1}
    base = dist
    while m:
        if m & 1:
            result = _convolve(result, base)
        m >>= 1
        if m:
            base = _convolve(base, base)
    return result


@lru_cache(maxsize=64)
def _marginal_dyadic(stat, family, n, cov):
    d = stat.dimension
    per = [c.dyad_values(family, n, cov) for c in stat.components]
    nd = n * (n - 1) // 2
    states = range(4) if family.directed else range(2)
    groups = {}
    for s in range(nd):
        dist = {}
        for st in states:
            k = tuple(int(p[s, st]) for p in per)
            dist[k] = dist.get(k, 0) + 1
        key = tuple(sorted(dist.items()))
        groups[key] = groups.get(key, 0) + 1
    total = {(0,) * d: 1}
    for key, m in sorted(groups.items()):
        total = _convolve(total, _power(dict(key), m, d))
    items = sorted(total.items())
    keys = np.array([k for k, _ in items], dtype=np.int64).reshape(len(items), d)
    keys.setflags(write=False)
    return MarginalVolume(keys, tuple(c for _, c in items))


def marginal_volume(stat, family, A, cov=None, guard=None):
    """Volume table v_A(t).

    Enumerates X_A when it fits under the guard; otherwise falls back to
    dyad-wise convolution for dyadic statistics on graphs.
    """
    n = size_of(A)
    stat.check_family(family)
    N = family.size(n)
    limit = enumeration_guard() if guard is None else guard
    if limit < 0 or N <= limit:
        return _marginal_enumerated(stat, family, n, cov)
    if family.is_graph and stat.is_dyadic:
        return _marginal_dyadic(stat, family, n, cov)
    raise SpaceTooLarge(N, limit)


def marginal_volume_by_convolution(stat, family, A, cov=None):
    """Dyad-wise convolution route (no enumeration); dyadic statistics only."""
    if not (family.is_graph and stat.is_dyadic):
        raise ValueError("convolution needs a dyadic statistic on a graph family")
    stat.check_family(family)
    return _marginal_dyadic(stat, family, size_of(A), cov)


@dataclass(frozen=True, eq=False)
class VolumeTables:
    """Marginal, joint and conditional volume factors for A inside B.

    Row ``x`` of ``conditional`` is indexed by the canonical code of x;
    columns follow the sorted ``delta_keys``.
    """

    n_sub: int
    n_super: int
    size_sub: int
    size_new: int
    stats_sub: np.ndarray  # (|X_A|, d) t_A(x)
    t_keys: np.ndarray  # (K, d)
    t_index: np.ndarray  # (|X_A|,) row of t_keys for each x
    marginal: np.ndarray  # (K,)
    delta_keys: np.ndarray  # (D, d)
    conditional: np.ndarray  # (|X_A|, D)
    joint: np.ndarray  # (K, D)

    def marginal_dict(self):
        return {_key(k): int(c) for k, c in zip(self.t_keys, self.marginal)}

    def joint_dict(self):
        out = {}
        for i, t in enumerate(self.t_keys):
            for j, dl in enumerate(self.delta_keys):
                if self.joint[i, j]:
                    out[(_key(t), _key(dl))] = int(self.joint[i, j])
        return out

    def delta_index(self, delta):
        delta = tuple(delta)
        for j, dl in enumerate(self.delta_keys):
            if _key(dl) == delta:
                return j
        return None

    def conditional_count(self, delta, x):
        """v(delta | x); ``x`` is a Configuration or a code."""
        code = getattr(x, "code", x)
        j = self.delta_index(delta)
        return 0 if j is None else int(self.conditional[code, j])

    def joint_count(self, t, delta):
        t = tuple(t)
        j = self.delta_index(delta)
        for i, k in enumerate(self.t_keys):
            if _key(k) == t and j is not None:
                return int(self.joint[i, j])
        return 0

    def validate(self):
        """Check the cardinality sum rules; returns self."""
        rebuilt = np.zeros_like(self.joint)
        np.add.at(rebuilt, self.t_index, self.conditional)
        rules = {
            "nonnegative counts": (self.marginal >= 0).all() and (self.conditional >= 0).all(),
            "sum_t v_A(t) = |X_A|": int(self.marginal.sum()) == self.size_sub,
            "sum_delta v(delta|x) = |X_new|": (self.conditional.sum(axis=1) == self.size_new).all(),
            "sum joint = |X_B|": int(self.joint.sum()) == self.size_sub * self.size_new,
            "joint = sum of conditional rows": (rebuilt == self.joint).all(),
        }
        broken = [k for k, ok in rules.items() if not ok]
        if broken:
            raise InternalInconsistency(f"volume tables violate: {', '.join(broken)}")
        return self

    def checksum(self):
        h = hashlib.sha256()
        for arr in (self.t_keys, self.marginal, self.delta_keys, self.conditional, self.joint):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        return h.hexdigest()


def _key(row):
    return tuple(int(v) for v in row)


def build_volume_tables(stat, family, A, B, cov=None, guard=None):
    """Exact marginal, joint and conditional tables by enumerating X_B."""
    nA, nB = size_of(A), size_of(B)
    if nA > nB:
        raise NotNested(f"{{1..{nA}}} is not contained in {{1..{nB}}}")
    stat.check_family(family)
    NA = family.size(nA)
    NB = family.size(nB)
    M = NB // NA
    check_guard(NB, guard)
    d = stat.dimension

    codes_A = np.arange(NA, dtype=np.int64)
    stats_sub = evaluate_codes(stat, family, nA, codes_A, cov)
    t_keys, t_index, t_counts = _unique_rows(stats_sub)

    delta_ids = {}
    pieces = []  # (x, global delta id, count)
    ys_per_chunk = max(1, CHUNK // NA)
    for y0 in range(0, M, ys_per_chunk):
        ys = np.arange(y0, min(M, y0 + ys_per_chunk), dtype=np.int64)
        codes = (codes_A[None, :] + NA * ys[:, None]).reshape(-1)
        x = np.tile(codes_A, ys.size)
        inc = evaluate_codes(stat, family, nB, codes, cov) - stats_sub[x]
        keys, inv, _ = _unique_rows(inc)
        gid = np.array([delta_ids.setdefault(_key(k), len(delta_ids)) for k in keys],
                       dtype=np.int64)
        pair = gid[inv] * NA + x
        u, c = np.unique(pair, return_counts=True)
        pieces.append((u, c))

    D = len(delta_ids)
    cond = np.zeros((NA, D), dtype=np.int64)
    for u, c in pieces:
        np.add.at(cond, (u % NA, u // NA), c)
    listed = list(delta_ids)
    order = sorted(range(D), key=listed.__getitem__)
    delta_keys = np.array(sorted(delta_ids), dtype=np.int64).reshape(D, d)
    cond = cond[:, order]

    joint = np.zeros((t_keys.shape[0], D), dtype=np.int64)
    np.add.at(joint, t_index, cond)
    return VolumeTables(
        n_sub=nA,
        n_super=nB,
        size_sub=NA,
        size_new=M,
        stats_sub=stats_sub,
        t_keys=t_keys,
        t_index=t_index,
        marginal=t_counts.astype(np.int64),
        delta_keys=delta_keys,
        conditional=cond,
        joint=joint,
    ).validate()
