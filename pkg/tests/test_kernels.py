import os
import subprocess
import sys

import numpy as np
import pytest

from projcheck import kernels

needs_numba = pytest.mark.skipif(kernels.triangle_counts_numba is None, reason="numba not installed")


def _all_graphs(n):
    S = n * (n - 1) // 2
    return kernels.digits_from_codes(np.arange(2 ** S), (2,) * S)


class TestDigits:
    def test_mixed_radix(self):
        D = kernels.digits_from_codes(np.arange(20), (4, 5))
        assert D[7].tolist() == [3, 1]
        assert (D[:, 0] + 4 * D[:, 1]).tolist() == list(range(20))

    def test_dyad_layout(self):
        lo, hi = kernels.dyad_endpoints(4)
        assert list(zip(lo.tolist(), hi.tolist())) == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]
        assert all(kernels.dyad_index(i, j) == d for d, (i, j) in enumerate(zip(lo, hi)))


@needs_numba
class TestBackendsAgree:
    @pytest.mark.parametrize("n", [3, 5, 6])
    def test_triangles(self, n):
        D = _all_graphs(n)
        assert np.array_equal(kernels.triangle_counts_numba(D, n), kernels.triangle_counts_numpy(D, n))

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_kstars(self, k):
        D = _all_graphs(5)
        assert np.array_equal(kernels.kstar_counts_numba(D, 5, k), kernels.kstar_counts_numpy(D, 5, k))

    def test_ising(self):
        D = kernels.digits_from_codes(np.arange(2 ** 9), (2,) * 9)
        assert np.array_equal(kernels.ising_energy_numba(D), kernels.ising_energy_numpy(D))

    @pytest.mark.parametrize("directed", [False, True])
    def test_dyadic(self, directed, rng):
        n = 4
        nd = n * (n - 1) // 2
        S = 2 * nd if directed else nd
        vals = rng.integers(-3, 4, size=(nd, 4))
        D = kernels.digits_from_codes(np.arange(2 ** S), (2,) * S)
        assert np.array_equal(kernels.dyadic_sum_numba(D, vals, directed), kernels.dyadic_sum_numpy(D, vals, directed))

    def test_gibbs_bitwise(self, rng):
        n = 5
        nd = 10
        kinds = np.array([kernels.KIND_DYADIC, kernels.KIND_TRIANGLE, kernels.KIND_KSTAR])
        params = np.array([0, 0, 2])
        vals = np.zeros((3, nd, 4), dtype=np.int64)
        vals[0, :, 1] = 1
        lo, hi = kernels.dyad_endpoints(n)
        theta = np.array([-0.3, 0.4, -0.1])
        u = rng.random((200, nd))
        keep = np.ones(200, dtype=bool)
        outs = []
        for fn in (kernels.gibbs_sweeps_numba, kernels.gibbs_sweeps_python):
            x = np.zeros(nd, dtype=np.uint8)
            t = np.zeros(3, dtype=np.int64)
            st = np.empty((200, nd), dtype=np.uint8)
            ss = np.empty((200, 3), dtype=np.int64)
            assert fn(x, t, kinds, params, vals, theta, n, False, lo, hi, u, keep, st, ss) == 200
            outs.append((st.copy(), ss.copy()))
        assert np.array_equal(outs[0][0], outs[1][0]) and np.array_equal(outs[0][1], outs[1][1])


def test_env_flag_selects_numpy():
    code = "import projcheck.kernels as k; print(k.BACKEND, k.triangle_counts is k.triangle_counts_numpy)"
    env = dict(os.environ, PROJCHECK_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


def test_backends_give_same_chain():
    """A seeded chain is bit-identical under either backend."""
    code = (
        "from projcheck.inference.sampling import SamplerConfig, gibbs_chain;"
        "from projcheck.statespace import SiteSpaceFamily;"
        "from projcheck.statistics import StatisticSpec, EdgeCount, TriangleCount;"
        "import hashlib;"
        "r = gibbs_chain(StatisticSpec((EdgeCount(), TriangleCount())), SiteSpaceFamily('undirected-graph'),"
        " 6, [-0.5, 0.3], SamplerConfig(seed=99, burn_in=10, samples=300));"
        "print(hashlib.sha256(r.states.tobytes() + r.stats.tobytes()).hexdigest())"
    )
    digests = set()
    for flag in ("0", "1"):
        env = dict(os.environ, PROJCHECK_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        digests.add(out.stdout.strip())
    assert len(digests) == 1

