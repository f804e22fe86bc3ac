"""Maximum-likelihood fitting: solve E_theta[T] = observed.

``fit_mle_exact`` runs damped Newton with the exact mean and covariance
from the volume table.  ``fit_mle_mcmc`` replaces both with Gibbs-sample
estimates (stochastic-approximation Newton).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from ..errors import BoundaryObservation, Degenerate, MaxIterations
from ..expfam import ExpFamModel, moments
from ..statespace import size_of
from ..volume import marginal_volume
from .sampling import gibbs_chain

MAX_HALVINGS = 50


@dataclass
class MLEResult:
    theta_hat: np.ndarray
    observed: tuple
    fitted_mean: np.ndarray
    iterations: int
    converged: bool
    grad_norm: float
    method: str
    std_error: np.ndarray = None
    trace: list = field(default_factory=list)

    def to_json(self):
        out = {
            "method": self.method,
            "theta_hat": [float(v) for v in self.theta_hat],
            "observed": list(self.observed),
            "fitted_mean": [float(v) for v in self.fitted_mean],
            "iterations": self.iterations,
            "converged": self.converged,
            "grad_norm": self.grad_norm,
        }
        if self.std_error is not None:
            out["std_error"] = [float(v) for v in self.std_error]
        return out


def _lp_max_slack(keys, obs):
    """Largest s with obs = sum lam_i k_i, sum lam = 1, lam_i >= s."""
    K, d = keys.shape
    c = np.zeros(K + 1)
    c[-1] = -1.0
    A_eq = np.zeros((d + 1, K + 1))
    A_eq[:d, :K] = keys.T
    A_eq[d, :K] = 1.0
    b_eq = np.concatenate([obs, [1.0]])
    A_ub = np.hstack([-np.eye(K), np.ones((K, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(K), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0, None)] * K + [(None, 1.0)], method="highs")
    if res.status != 0:
        return None
    return -res.fun


def _minimal_face(keys, obs):
    """Attainable keys carrying positive weight in some representation of obs."""
    K, d = keys.shape
    A_eq = np.vstack([keys.T, np.ones((1, K))])
    b_eq = np.concatenate([obs, [1.0]])
    face = []
    for i in range(K):
        c = np.zeros(K)
        c[i] = -1.0
        res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * K, method="highs")
        if res.status == 0 and -res.fun > 1e-9:
            face.append([int(v) for v in keys[i]])
    return face


def check_interior(keys, observed):
    """Raise BoundaryObservation unless observed is in the relative interior.

    Exact linear programming for d <= 3; per-component bounds beyond.
    """
    keys = np.asarray(keys, dtype=float)
    obs = np.asarray(observed, dtype=float)
    K, d = keys.shape
    if d > 3:
        lo, hi = keys.min(axis=0), keys.max(axis=0)
        bad = [i for i in range(d) if not lo[i] < obs[i] < hi[i]]
        if bad:
            i = bad[0]
            raise BoundaryObservation(
                tuple(observed), {"component": i, "bounds": [float(lo[i]), float(hi[i])]}
            )
        return
    if K == 1:
        if np.array_equal(keys[0], obs):
            return
        raise BoundaryObservation(tuple(observed), None, "observed statistic is not attainable")
    slack = _lp_max_slack(keys, obs)
    if slack is None:
        raise BoundaryObservation(
            tuple(observed), None,
            f"observed statistic {tuple(observed)} is outside the attainable hull",
        )
    if slack <= 1e-12:
        raise BoundaryObservation(tuple(observed), _minimal_face(keys, obs))


def fit_mle_exact(stat, family, A, observed, cov=None, tol=1e-9, max_iter=200, theta0=None):
    """Exact MLE for integer observed statistic on X_A."""
    n = size_of(A)
    observed = tuple(int(v) for v in np.atleast_1d(observed))
    d = stat.dimension
    if len(observed) != d:
        raise ValueError(f"observed has {len(observed)} components, statistic has {d}")
    vol = marginal_volume(stat, family, n, cov)
    check_interior(vol.keys, observed)
    model = ExpFamModel(family, stat, np.zeros(d) if theta0 is None else theta0, cov)
    target = np.asarray(observed, dtype=float) * stat.scale_vector()
    thresh = tol * max(1.0, float(np.abs(target).max()))

    theta = np.asarray(model.theta, dtype=float)
    mean, H = moments(model, n, theta)
    g = mean - target
    gn = float(np.abs(g).max())
    trace = [(theta.copy(), gn)]
    for it in range(1, max_iter + 1):
        if gn <= thresh:
            # one undamped polishing step: Newton is quadratic here
            cand = theta - np.linalg.lstsq(H, g, rcond=None)[0]
            m2, _ = moments(model, n, cand)
            g2 = float(np.abs(m2 - target).max())
            if g2 < gn:
                theta, mean, gn = cand, m2, g2
                trace.append((theta.copy(), gn))
            return MLEResult(theta, observed, mean, it - 1, True, gn, "exact", trace=trace)
        step = np.linalg.lstsq(H, g, rcond=None)[0]
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            cand = theta - lam * step
            m2, H2 = moments(model, n, cand)
            g2 = m2 - target
            if np.all(np.isfinite(g2)) and np.abs(g2).max() < gn:
                break
            lam *= 0.5
        else:
            # no decrease possible: at floating-point resolution of the root
            return MLEResult(theta, observed, mean, it, gn <= 1e3 * thresh, gn, "exact",
                             trace=trace)
        theta, mean, H, g = cand, m2, H2, g2
        gn = float(np.abs(g).max())
        trace.append((theta.copy(), gn))
    if gn <= thresh:
        return MLEResult(theta, observed, mean, max_iter, True, gn, "exact", trace=trace)
    raise MaxIterations(f"Newton did not converge in {max_iter} iterations (|g|={gn:.3g})")


def fit_mle_mcmc(stat, family, A, observed, cfg, theta0=None, cov=None, max_iter=100,
                 patience=3, max_step=1.0):
    """Stochastic-approximation Newton with Gibbs-estimated moments.

    Stops once every gradient component is within three Monte-Carlo standard
    errors for ``patience`` consecutive iterations; the estimate is the mean
    of the parameters used in those iterations.
    """
    n = size_of(A)
    observed = tuple(int(v) for v in np.atleast_1d(observed))
    d = stat.dimension
    scale = stat.scale_vector()
    target = np.asarray(observed, dtype=float) * scale
    theta = np.zeros(d) if theta0 is None else np.atleast_1d(np.asarray(theta0, dtype=float))
    rng = cfg.rng()
    state = None
    streak = []
    trace = []
    for it in range(1, max_iter + 1):
        run = gibbs_chain(stat, family, n, theta, cfg, cov, init=state, rng=rng)
        state = run.final_state.copy()
        T = run.stats * scale
        m = T.shape[0]
        mean = T.mean(axis=0)
        H = np.atleast_2d(np.cov(T, rowvar=False, ddof=1))
        var = np.diag(H)
        if np.any(var <= 1e-12 * max(1.0, float(np.abs(mean).max()) ** 2)):
            raise Degenerate(
                f"sampled statistic is (nearly) constant at theta={theta.tolist()}; "
                "the model is degenerate there"
            )
        se = np.sqrt(var / m)
        g = mean - target
        trace.append((theta.copy(), float(np.abs(g).max())))
        if np.all(np.abs(g) <= 3.0 * se):
            streak.append((theta.copy(), H, g))
            if len(streak) >= patience:
                est = np.mean([s[0] for s in streak], axis=0)
                Hbar = np.mean([s[1] for s in streak], axis=0)
                Hinv = np.linalg.pinv(Hbar)
                std = np.sqrt(np.clip(np.diag(Hinv), 0, None) / (m * patience))
                gbar = np.mean([s[2] for s in streak], axis=0)
                return MLEResult(est, observed, target + gbar, it, True,
                                 float(np.abs(gbar).max()), "mcmc", std_error=std, trace=trace)
        else:
            streak = []
        step = np.linalg.lstsq(H, g, rcond=None)[0]
        norm = np.linalg.norm(step)
        if norm > max_step:
            step *= max_step / norm
        theta = theta - step
    raise MaxIterations(f"MCMC-MLE did not settle in {max_iter} iterations")
