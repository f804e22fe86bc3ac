"""``projcheck`` command-line interface.

Every command writes one JSON report (stdout or ``--out``).  Exit codes:
0 success, 1 a check failed (the report is still complete), 2 usage or
spec error, 3 internal inconsistency or unexpected failure.
"""

import argparse
import json
import os
import sys
import time
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InternalInconsistency, ProjcheckError
from .inference.experiments import consistency_experiment
from .inference.mle import fit_mle_exact, fit_mle_mcmc
from .inference.sampling import SamplerConfig, gibbs_chain
from .inference.scaling import ExactLogPartition, rate_function, scaling_profile
from .projectivity import DEFAULT_TOL, projectivity_report
from .spec_io import load_spec
from .statespace import enumeration_guard

COMMANDS = ("check", "fit", "sample", "scale", "rate", "experiment")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text, what):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{what}: expected comma-separated numbers, got {text!r}") from None


def _ints(text, what):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{what}: expected comma-separated integers, got {text!r}") from None


def _grid(text):
    """Points separated by ';', components by ','.  A plain list of
    scalars (no ';') is read as one point per value."""
    if ";" in text:
        return [_floats(p, "theta-grid") for p in text.split(";") if p.strip()]
    return [[v] for v in _floats(text, "theta-grid")]


def build_parser():
    p = argparse.ArgumentParser(
        prog="projcheck",
        description="Exact projectibility checks and inference for discrete exponential families.",
    )
    p.add_argument("--version", action="version", version=f"projcheck {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", required=True, help="model spec file or bundled fixture name")
    common.add_argument("--sub", type=int, help="smaller index set size n")
    common.add_argument("--super", type=int, help="larger index set size m")
    common.add_argument("--theta", help="parameter vector, comma separated")
    common.add_argument("--theta-grid", help="grid points: '1,2;3,4' or scalar list '-1,0,1'")
    common.add_argument("--observed", help="observed statistic, comma separated integers")
    common.add_argument("--sizes", help="index set sizes, comma separated")
    common.add_argument("--t", help="rate function argument (per unit size)")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    common.add_argument("--reps", type=int, help="replicates per size")
    common.add_argument("--samples", type=int, help="kept Gibbs samples")
    common.add_argument("--burn-in", type=int, help="Gibbs burn-in sweeps")
    common.add_argument("--thinning", type=int, help="keep every k-th sweep")
    common.add_argument("--method", choices=("exact", "mcmc"), default="exact")
    common.add_argument("--variant", choices=("fresh", "projection"))
    common.add_argument("--csv", help="also write the tabular result to this CSV file")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker cap")
    common.add_argument("--tol", type=float, help="comparison tolerance")
    common.add_argument("--force-large", action="store_true",
                        help="disable the enumeration guard for this run")

    helps = {
        "check": "run every projectivity criterion for sub -> super",
        "fit": "maximum-likelihood fit for an observed statistic",
        "sample": "draw Gibbs samples",
        "scale": "log-partition scaling profile over sizes",
        "rate": "evaluate the rate function at t",
        "experiment": "consistency experiment over sizes and replicates",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


class Context:
    """Spec plus flag values with spec-block fallbacks."""

    def __init__(self, args):
        self.args = args
        self.spec, self.digest = load_spec(args.spec)
        self.exp = self.spec.experiment
        self.used = {}

    def get(self, name, flag_value, default=None, required=False):
        if flag_value is not None:
            v = flag_value
        elif name in self.exp:
            v = self.exp[name]
        elif required:
            raise UsageError(f"{name} not given on the command line or in the model spec")
        else:
            v = default
        self.used[name] = v
        return v

    @property
    def d(self):
        return self.spec.stat.dimension

    def theta(self):
        a = self.args
        th = _floats(a.theta, "theta") if a.theta else list(self.spec.theta)
        if len(th) != self.d:
            raise UsageError(f"theta has {len(th)} components, statistic has {self.d}")
        self.used["theta"] = th
        return np.array(th)

    def size(self):
        return self.get("size", self.args.sub if self.args.sub is not None else None,
                        required=True)

    def sizes(self):
        raw = _ints(self.args.sizes, "sizes") if self.args.sizes else None
        return self.get("sizes", raw, required=True)

    def tol(self, default):
        return self.get("tolerance", self.args.tol, default)

    def sampler(self, samples_default=1000):
        a = self.args
        return SamplerConfig(
            seed=self.get("seed", a.seed, 0),
            burn_in=self.get("burn_in", a.burn_in, 100),
            thinning=self.get("thinning", a.thinning, 1),
            samples=self.get("samples", a.samples, samples_default),
        )


def cmd_check(ctx):
    a = ctx.args
    n_sub = ctx.get("sub", a.sub, required=True)
    n_super = ctx.get("super", a.super, required=True)
    grid = _grid(a.theta_grid) if a.theta_grid else ctx.exp.get("theta_grid")
    tol = ctx.tol(DEFAULT_TOL)
    report = projectivity_report(ctx.spec.stat, ctx.spec.family, n_sub, n_super, grid,
                                 ctx.spec.covariates, tol)
    ctx.used["theta_grid"] = [list(map(float, t)) for t in report.theta_grid]
    return report.to_json(), EXIT_OK if report.all_pass else EXIT_FAIL


def cmd_fit(ctx):
    a = ctx.args
    n = ctx.size()
    obs = ctx.get("observed", _ints(a.observed, "observed") if a.observed else None,
                  required=True)
    if len(obs) != ctx.d:
        raise UsageError(f"observed has {len(obs)} components, statistic has {ctx.d}")
    ctx.used["method"] = a.method
    if a.method == "exact":
        tol = ctx.tol(1e-9)
        res = fit_mle_exact(ctx.spec.stat, ctx.spec.family, n, obs, ctx.spec.covariates, tol)
    else:
        cfg = ctx.sampler(2000)
        theta0 = ctx.theta() if a.theta else None
        res = fit_mle_mcmc(ctx.spec.stat, ctx.spec.family, n, obs, cfg, theta0,
                           ctx.spec.covariates)
    return res.to_json(), EXIT_OK


def cmd_sample(ctx):
    n = ctx.size()
    theta = ctx.theta()
    cfg = ctx.sampler()
    run = gibbs_chain(ctx.spec.stat, ctx.spec.family, n, theta, cfg, ctx.spec.covariates)
    if ctx.args.csv:
        S = run.states.shape[1]
        header = ",".join([f"site_{s}" for s in range(S)] +
                          [f"stat_{k}" for k in range(ctx.d)])
        rows = np.hstack([run.states.astype(np.int64), run.stats])
        np.savetxt(ctx.args.csv, rows, fmt="%d", delimiter=",", header=header, comments="")
    payload = {
        "size": n,
        "samples": int(run.stats.shape[0]),
        "mean_statistic": run.stats.mean(axis=0).tolist(),
        "statistics": run.stats.tolist(),
        "csv": ctx.args.csv,
    }
    return payload, EXIT_OK


def cmd_scale(ctx):
    sizes = ctx.sizes()
    theta = ctx.theta()
    prof = scaling_profile(ctx.spec.stat, ctx.spec.family, sizes, theta,
                           cov=ctx.spec.covariates)
    if ctx.args.csv:
        Path(ctx.args.csv).write_text(prof.to_csv())
    return prof.to_json(), EXIT_OK


def cmd_rate(ctx):
    a = ctx.args
    n = ctx.size()
    theta = ctx.theta()
    t = ctx.get("t", _floats(a.t, "t") if a.t else None, required=True)
    if len(t) != ctx.d:
        raise UsageError(f"t has {len(t)} components, statistic has {ctx.d}")
    handle = ExactLogPartition(ctx.spec.stat, ctx.spec.family, n, cov=ctx.spec.covariates)
    res = rate_function(handle, theta, t)
    out = res.to_json()
    out["mean_at_theta"] = handle.grad(theta).tolist()
    return out, EXIT_OK


def cmd_experiment(ctx):
    a = ctx.args
    sizes = ctx.sizes()
    reps = ctx.get("replicates", a.reps, 20)
    variant = ctx.get("variant", a.variant, "fresh")
    theta = ctx.theta()
    cfg = ctx.sampler(1)
    ctx.used["threads"] = a.threads
    table = consistency_experiment(ctx.spec.stat, ctx.spec.family, theta, sizes, reps, cfg,
                                   variant, ctx.spec.covariates, workers=max(1, a.threads))
    payload = table.to_json()
    csv_path = a.csv or (str(Path(a.out).with_suffix(".csv")) if a.out else None)
    if csv_path:
        Path(csv_path).write_text(table.to_csv())
        payload["table"] = csv_path
    else:
        payload["table"] = table.to_csv()
    return payload, EXIT_OK


HANDLERS = {
    "check": cmd_check,
    "fit": cmd_fit,
    "sample": cmd_sample,
    "scale": cmd_scale,
    "rate": cmd_rate,
    "experiment": cmd_experiment,
}


def _error_json(exc):
    out = {"code": getattr(exc, "code", type(exc).__name__), "message": str(exc)}
    for attr in ("violations", "face", "observed", "size", "guard"):
        if hasattr(exc, attr):
            v = getattr(exc, attr)
            out[attr] = [list(x) for x in v] if attr == "violations" else v
    return out


def run_command(args):
    """Execute one command; returns (report dict, exit code)."""
    t0 = time.perf_counter()
    if args.force_large:
        os.environ["PROJCHECK_GUARD"] = "-1"
    report = {
        "command": args.command,
        "tool_version": __version__,
        "spec": args.spec,
        "inputs_digest": None,
    }
    payload, code, error = None, EXIT_OK, None
    ctx = None
    try:
        ctx = Context(args)
        report["inputs_digest"] = {"algorithm": "sha256", "value": ctx.digest}
        report["spec_name"] = ctx.spec.name
        payload, code = HANDLERS[args.command](ctx)
    except InternalInconsistency as exc:
        code, error = EXIT_INTERNAL, _error_json(exc)
    except (ProjcheckError, UsageError, FileNotFoundError, ValueError) as exc:
        code, error = EXIT_USAGE, _error_json(exc)
    except Exception as exc:  # bug: report it rather than crash without a report
        traceback.print_exc()
        code, error = EXIT_INTERNAL, _error_json(exc)
    report["parameters"] = ctx.used if ctx is not None else {}
    report["parameters"]["enumeration_guard"] = enumeration_guard()
    report["status"] = {EXIT_OK: "ok", EXIT_FAIL: "fail"}.get(code, "error")
    report["exit_code"] = code
    report["wall_time_s"] = time.perf_counter() - t0
    report["payload"] = payload
    if error is not None:
        report["error"] = error
    return report, code


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    return str(o)


def main(argv=None):
    args = build_parser().parse_args(argv)
    report, code = run_command(args)
    text = json.dumps(report, indent=2, default=_default, allow_nan=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if "error" in report:
        print(f"projcheck: {report['error']['code']}: {report['error']['message']}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
