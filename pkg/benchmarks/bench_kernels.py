"""Compare the numba and pure-numpy kernel backends.

Each backend runs in its own interpreter because the backend is chosen
once, at import time, from PROJCHECK_DISABLE_NUMBA.

    python3 benchmarks/bench_kernels.py --repeat 3
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _best(fn, repeat):
    fn()  # warm-up, includes JIT compilation or cache load
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def worker(repeat, tri_n, chain_n, sweeps):
    import numpy as np

    from projcheck import kernels
    from projcheck.inference.sampling import SamplerConfig, gibbs_chain
    from projcheck.projectivity import projectivity_report
    from projcheck.statespace import SiteSpaceFamily
    from projcheck.statistics import EdgeCount, StatisticSpec, TriangleCount

    graph = SiteSpaceFamily("undirected-graph")
    stat = StatisticSpec((EdgeCount(), TriangleCount()))
    S = tri_n * (tri_n - 1) // 2
    D = kernels.digits_from_codes(np.arange(2**S), (2,) * S)
    cfg = SamplerConfig(seed=1, burn_in=0, samples=sweeps)

    cases = {
        f"triangles all graphs n={tri_n}": lambda: kernels.triangle_counts(D, tri_n),
        f"gibbs edge+triangle n={chain_n} x{sweeps}": lambda: gibbs_chain(stat, graph, chain_n, [-1.0, 0.1], cfg),
        "report edge+triangle 4->6": lambda: projectivity_report(stat, graph, 4, 6, strict=False),
    }
    out = {"backend": kernels.BACKEND, "seconds": {k: _best(f, repeat) for k, f in cases.items()}}
    print(json.dumps(out))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--tri-n", type=int, default=7)
    ap.add_argument("--chain-n", type=int, default=20)
    ap.add_argument("--sweeps", type=int, default=2000)
    ap.add_argument("--json", action="store_true", help="print raw results")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.worker:
        worker(args.repeat, args.tri_n, args.chain_n, args.sweeps)
        return 0

    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, PROJCHECK_DISABLE_NUMBA=flag)
        cmd = [sys.executable, __file__, "--worker", "--repeat", str(args.repeat),
               "--tri-n", str(args.tri_n), "--chain-n", str(args.chain_n), "--sweeps", str(args.sweeps)]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        res = json.loads(proc.stdout)
        results[res["backend"]] = res["seconds"]

    if args.json:
        print(json.dumps(results, indent=2))
        return 0
    if "numba" not in results:
        print("numba is not installed; numpy timings only")
    fast, slow = results.get("numba", {}), results["numpy"]
    print(f"{'case':<40} {'numba s':>10} {'numpy s':>10} {'speedup':>8}")
    for case, t_np in slow.items():
        t_nb = fast.get(case)
        if t_nb is None:
            print(f"{case:<40} {'-':>10} {t_np:>10.4f} {'-':>8}")
        else:
            print(f"{case:<40} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
