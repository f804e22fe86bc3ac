"""Hot numeric kernels.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy version
with identical results.  The numba path is used unless numba is missing or
the environment variable ``PROJCHECK_DISABLE_NUMBA`` is set to a non-empty
value other than ``0``.  The flag is read once, at import time.

Configurations reach the kernels as a ``uint8`` digit matrix with one row
per configuration and one column per site (see :mod:`projcheck.statespace`
for the site order).
"""

import os
import types

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_flag = os.environ.get("PROJCHECK_DISABLE_NUMBA", "")
USE_NUMBA = numba is not None and _flag in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"

# component kinds understood by the Gibbs kernel
KIND_DYADIC = 0
KIND_TRIANGLE = 1
KIND_KSTAR = 2
KIND_ISING = 3


def dyad_index(i, j):
    """Site index of the undirected dyad {i, j} (0-based nodes)."""
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


def dyad_endpoints(n):
    """Arrays (lo, hi) of node indices for each dyad among n nodes."""
    m = n * (n - 1) // 2
    lo = np.empty(m, dtype=np.int64)
    hi = np.empty(m, dtype=np.int64)
    for j in range(1, n):
        for i in range(j):
            s = j * (j - 1) // 2 + i
            lo[s] = i
            hi[s] = j
    return lo, hi


def digits_from_codes(codes, radices):
    """Mixed-radix decode; site 0 is the least significant digit."""
    codes = np.asarray(codes, dtype=np.int64)
    radices = np.asarray(radices, dtype=np.int64)
    S = radices.size
    out = np.empty((codes.size, S), dtype=np.uint8)
    if S == 0:
        return out
    if np.all(radices == 2):
        shifts = np.arange(S, dtype=np.int64)
        out[:] = (codes[:, None] >> shifts[None, :]) & 1
        return out
    rest = codes.copy()
    for s in range(S):
        out[:, s] = rest % radices[s]
        rest //= radices[s]
    return out


# ---------------------------------------------------------------------------
# batch statistic evaluation


def _triangles_py(D, n):
    m = D.shape[0]
    out = np.zeros(m, dtype=np.int64)
    for r in range(m):
        c = 0
        for k in range(2, n):
            bk = k * (k - 1) // 2
            for j in range(1, k):
                if D[r, bk + j] == 0:
                    continue
                bj = j * (j - 1) // 2
                for i in range(j):
                    if D[r, bj + i] != 0 and D[r, bk + i] != 0:
                        c += 1
        out[r] = c
    return out


def _triangles_numpy(D, n):
    out = np.zeros(D.shape[0], dtype=np.int64)
    for k in range(2, n):
        bk = k * (k - 1) // 2
        for j in range(1, k):
            bj = j * (j - 1) // 2
            jk = D[:, bk + j]
            for i in range(j):
                out += jk & D[:, bj + i] & D[:, bk + i]
    return out


def _comb_small(d, k):
    if k < 0 or d < k:
        return 0
    c = 1
    for q in range(k):
        c = c * (d - q) // (q + 1)
    return c


def _kstars_py(D, n, k):
    m = D.shape[0]
    out = np.zeros(m, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    for r in range(m):
        for v in range(n):
            deg[v] = 0
        for j in range(1, n):
            bj = j * (j - 1) // 2
            for i in range(j):
                if D[r, bj + i] != 0:
                    deg[i] += 1
                    deg[j] += 1
        c = 0
        for v in range(n):
            c += _comb_small(deg[v], k)
        out[r] = c
    return out


def _kstars_numpy(D, n, k):
    from scipy.special import comb

    lo, hi = dyad_endpoints(n)
    deg = np.zeros((D.shape[0], n), dtype=np.int64)
    for s in range(lo.size):
        col = D[:, s].astype(np.int64)
        deg[:, lo[s]] += col
        deg[:, hi[s]] += col
    return comb(deg, k, exact=False).round().astype(np.int64).sum(axis=1)


def _ising_py(D):
    m, S = D.shape
    out = np.zeros(m, dtype=np.int64)
    for r in range(m):
        c = 0
        for s in range(S - 1):
            c += (2 * np.int64(D[r, s]) - 1) * (2 * np.int64(D[r, s + 1]) - 1)
        out[r] = c
    return out


def _ising_numpy(D):
    spins = 2 * D.astype(np.int64) - 1
    return (spins[:, :-1] * spins[:, 1:]).sum(axis=1)


def _dyadic_numpy(D, vals, directed):
    """Sum of per-dyad values; ``vals`` has shape (n_dyads, 4)."""
    nd = vals.shape[0]
    if directed:
        state = D[:, 0 : 2 * nd : 2].astype(np.int64) + 2 * D[:, 1 : 2 * nd : 2]
    else:
        state = D[:, :nd].astype(np.int64)
    return vals[np.arange(nd)[None, :], state].sum(axis=1)


def _dyadic_py(D, vals, directed):
    m = D.shape[0]
    nd = vals.shape[0]
    out = np.zeros(m, dtype=np.int64)
    for r in range(m):
        c = 0
        for d in range(nd):
            if directed:
                st = np.int64(D[r, 2 * d]) + 2 * np.int64(D[r, 2 * d + 1])
            else:
                st = np.int64(D[r, d])
            c += vals[d, st]
        out[r] = c
    return out


# ---------------------------------------------------------------------------
# systematic-scan Gibbs sweeps over binary sites


def _change_stat(x, s, kind, param, vals, c, n, directed, lo, hi):
    """Statistic change when site s goes 0 -> 1, other sites held fixed."""
    if kind == KIND_DYADIC:
        if directed:
            d = s // 2
            b = s % 2
            p = np.int64(x[s ^ 1])
            on = (1 << b) | (p << (1 - b))
            off = p << (1 - b)
            return vals[c, d, on] - vals[c, d, off]
        return vals[c, s, 1] - vals[c, s, 0]
    if kind == KIND_TRIANGLE:
        i = lo[s]
        j = hi[s]
        tot = 0
        for k in range(n):
            if k == i or k == j:
                continue
            a, b = (i, k) if i < k else (k, i)
            e, f = (j, k) if j < k else (k, j)
            if x[b * (b - 1) // 2 + a] != 0 and x[f * (f - 1) // 2 + e] != 0:
                tot += 1
        return tot
    if kind == KIND_KSTAR:
        i = lo[s]
        j = hi[s]
        di = 0
        dj = 0
        for k in range(n):
            if k != i and k != j:
                a, b = (i, k) if i < k else (k, i)
                if x[b * (b - 1) // 2 + a] != 0:
                    di += 1
                e, f = (j, k) if j < k else (k, j)
                if x[f * (f - 1) // 2 + e] != 0:
                    dj += 1
        return _comb_small(di, param - 1) + _comb_small(dj, param - 1)
    # KIND_ISING: chain of spins, digit 1 is spin +1
    S = x.shape[0]
    nb = 0
    if s > 0:
        nb += 2 * np.int64(x[s - 1]) - 1
    if s < S - 1:
        nb += 2 * np.int64(x[s + 1]) - 1
    return 2 * nb


def _gibbs_py(x, t, kinds, params, vals, theta, n, directed, lo, hi,
              uniforms, keep, states_out, stats_out):
    """Run ``uniforms.shape[0]`` sweeps in place.

    After sweep ``w`` the state and statistic are written to the next free
    row of the outputs when ``keep[w]`` is true.  Returns rows written.
    """
    S = x.shape[0]
    C = kinds.shape[0]
    delta = np.zeros(C, dtype=np.int64)
    row = 0
    for w in range(uniforms.shape[0]):
        for s in range(S):
            eta = 0.0
            for c in range(C):
                delta[c] = _change_stat(x, s, kinds[c], params[c], vals,
                                            c, n, directed, lo, hi)
                eta += theta[c] * delta[c]
            # P(site = 1 | rest) = 1 / (1 + exp(-eta))
            if eta >= 0:
                p1 = 1.0 / (1.0 + np.exp(-eta))
            else:
                e = np.exp(eta)
                p1 = e / (1.0 + e)
            new = 1 if uniforms[w, s] < p1 else 0
            old = x[s]
            if new != old:
                x[s] = new
                sign = 1 if new == 1 else -1
                for c in range(C):
                    t[c] += sign * delta[c]
        if keep[w]:
            for s in range(S):
                states_out[row, s] = x[s]
            for c in range(C):
                stats_out[row, c] = t[c]
            row += 1
    return row


# ---------------------------------------------------------------------------
# backend binding

triangle_counts_numpy = _triangles_numpy
kstar_counts_numpy = _kstars_numpy
ising_energy_numpy = _ising_numpy
dyadic_sum_numpy = _dyadic_numpy
gibbs_sweeps_python = _gibbs_py


def _compile_all():
    # Jitted copies share a private namespace so that helper calls inside
    # a kernel resolve to the jitted helpers, while the plain functions above
    # keep calling plain Python.
    ns = dict(globals())

    def jit(fn):
        return numba.njit(cache=True)(types.FunctionType(fn.__code__, ns, fn.__name__))

    ns["_comb_small"] = jit(_comb_small)
    ns["_change_stat"] = jit(_change_stat)
    return {
        "triangle_counts": jit(_triangles_py),
        "kstar_counts": jit(_kstars_py),
        "ising_energy": jit(_ising_py),
        "dyadic_sum": jit(_dyadic_py),
        "gibbs_sweeps": jit(_gibbs_py),
    }


if numba is not None:
    _compiled = _compile_all()
    triangle_counts_numba = _compiled["triangle_counts"]
    kstar_counts_numba = _compiled["kstar_counts"]
    ising_energy_numba = _compiled["ising_energy"]
    dyadic_sum_numba = _compiled["dyadic_sum"]
    gibbs_sweeps_numba = _compiled["gibbs_sweeps"]
else:  # pragma: no cover
    triangle_counts_numba = kstar_counts_numba = ising_energy_numba = None
    dyadic_sum_numba = gibbs_sweeps_numba = None

if USE_NUMBA:
    triangle_counts = triangle_counts_numba
    kstar_counts = kstar_counts_numba
    ising_energy = ising_energy_numba
    dyadic_sum = dyadic_sum_numba
    gibbs_sweeps = gibbs_sweeps_numba
else:
    triangle_counts = triangle_counts_numpy
    kstar_counts = kstar_counts_numpy
    ising_energy = ising_energy_numpy
    dyadic_sum = dyadic_sum_numpy
    gibbs_sweeps = gibbs_sweeps_python
