"""Consistency and extrapolation experiments.

Two variants:

``fresh``
    For every size n and replicate, simulate a graph on n nodes from
    theta*, fit at n, record the error.  Error should shrink with n for a
    projective model with exact log-partition scaling.
``projection``
    For every replicate, simulate once at the largest size and fit each
    induced prefix sub-configuration.  For non-projective models the
    estimates drift with the sub-configuration size.

Tasks are seeded ``seed ^ task_index`` so results do not depend on the
number of workers.
"""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..errors import BoundaryObservation, ProjcheckError
from ..statespace import size_of
from ..statistics import evaluate_codes, evaluate_digits
from .mle import fit_mle_exact
from .sampling import SamplerConfig, gibbs_chain


@dataclass
class ExperimentTable:
    variant: str
    theta_star: list
    rows: list  # dicts: size, replicate, seed, theta_hat (list), error, status

    def median_errors(self):
        """size -> median error over replicates with a fitted estimate."""
        out = {}
        for n in sorted({r["size"] for r in self.rows}):
            errs = [r["error"] for r in self.rows if r["size"] == n and r["status"] == "ok"]
            out[n] = float(np.median(errs)) if errs else float("nan")
        return out

    def status_counts(self):
        out = {}
        for r in self.rows:
            out[r["status"]] = out.get(r["status"], 0) + 1
        return out

    def to_csv(self):
        d = len(self.theta_star)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["size", "replicate", "seed"] + [f"theta_hat_{i}" for i in range(d)]
                   + ["error", "status"])
        for r in self.rows:
            th = r["theta_hat"] if r["theta_hat"] is not None else [float("nan")] * d
            w.writerow([r["size"], r["replicate"], r["seed"]] + [repr(float(v)) for v in th]
                       + [repr(float(r["error"])), r["status"]])
        return buf.getvalue()

    def to_json(self):
        return {
            "variant": self.variant,
            "theta_star": self.theta_star,
            "median_error": {str(k): v for k, v in self.median_errors().items()},
            "status_counts": self.status_counts(),
            "rows": len(self.rows),
        }


def _fit(stat, family, n, observed, theta_star, cov):
    try:
        res = fit_mle_exact(stat, family, n, observed, cov)
    except BoundaryObservation:
        return None, float("nan"), "boundary"
    except ProjcheckError as exc:
        return None, float("nan"), exc.code
    err = float(np.linalg.norm(res.theta_hat - theta_star))
    return [float(v) for v in res.theta_hat], err, "ok"


def _simulate(stat, family, n, theta_star, cfg, seed, cov):
    one = replace(cfg, seed=seed, samples=1, thinning=1)
    return gibbs_chain(stat, family, n, theta_star, one, cov)


def consistency_experiment(stat, family, theta_star, sizes, replicates, cfg=None,
                           variant="fresh", cov=None, workers=1):
    cfg = SamplerConfig(seed=0, burn_in=100) if cfg is None else cfg
    theta_star = np.atleast_1d(np.asarray(theta_star, dtype=float))
    sizes = sorted(size_of(s) for s in sizes)
    if variant not in ("fresh", "projection"):
        raise ValueError(f"unknown experiment variant {variant!r}")

    if variant == "fresh":
        tasks = [(n, rep) for n in sizes for rep in range(replicates)]

        def work(k):
            n, rep = tasks[k]
            seed = int(cfg.seed) ^ k
            run = _simulate(stat, family, n, theta_star, cfg, seed, cov)
            th, err, status = _fit(stat, family, n, tuple(run.stats[0]), theta_star, cov)
            return [dict(size=n, replicate=rep, seed=seed, theta_hat=th, error=err,
                         status=status)]
    else:
        top = sizes[-1]

        def work(k):
            seed = int(cfg.seed) ^ k
            run = _simulate(stat, family, top, theta_star, cfg, seed, cov)
            row = run.states[0]
            out = []
            for n in sizes:
                S = family.site_count(n)
                sub = row[None, :S]
                codes = None
                if family.size(n) < 2**62:
                    place = np.cumprod((1,) + family.radices(n)[:-1]) if S else np.ones(0)
                    codes = np.array([int((sub[0].astype(np.int64) * place).sum())])
                obs = evaluate_digits(stat, family, n, sub, codes, cov)[0]
                th, err, status = _fit(stat, family, n, tuple(obs), theta_star, cov)
                out.append(dict(size=n, replicate=k, seed=seed, theta_hat=th, error=err,
                                status=status))
            return out

        tasks = list(range(replicates))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(work, range(len(tasks))))
    else:
        chunks = [work(k) for k in range(len(tasks))]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (r["size"], r["replicate"]))
    return ExperimentTable(variant, theta_star.tolist(), rows)


def observed_statistic(stat, family, n, code, cov=None):
    """Integer statistic of a configuration code (convenience for callers)."""
    return tuple(int(v) for v in evaluate_codes(stat, family, n, np.array([code]), cov)[0])
