"""Maximum likelihood estimation and location tests for GCPC samples.

The likelihood in omega is periodic-looking with period pi/2 when the
distribution is bimodal: besides the global maximum there are three local
maxima, roughly a quarter turn apart.  A single local optimizer started at the
sample circular mean can therefore stop at the wrong one.  :func:`fit_gcpc`
starts from omega0 + k pi/2 (k = 0..3) crossed with several anisotropy values
and keeps the best optimum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats

from .core import GcpcParams, canonical_angle, logpdf_polar
from .errors import ConvergenceError, DegenerateError, ParameterError
from .specfun import chi2_sf

log = logging.getLogger(__name__)

__all__ = [
    "FitOptions",
    "FitResult",
    "LocationCI",
    "LrtResult",
    "circular_mean",
    "fit_cipc",
    "fit_gcpc",
    "lrt_gcpc_vs_cipc",
    "location_ci",
    "loglik_gcpc",
    "lrt_one_location",
    "lrt_two_locations",
    "std_errors",
]

DEFAULT_LAMBDA_STARTS = (0.2, 1.0, 5.0)
# unconstrained coordinates are clipped here; exp(-30) is numerically gamma = 0
_LOG_BOUNDS = (-30.0, 12.0)
NEAR_UNIFORM_GAMMA = 1e-6


@dataclass(frozen=True)
class FitOptions:
    lambda_starts: tuple = DEFAULT_LAMBDA_STARTS
    omega_shifts: int = 4
    nm_maxiter: int = 600
    nm_xatol: float = 1e-5
    nm_fatol: float = 1e-7
    bfgs_gtol: float = 1e-8
    bfgs_maxiter: int = 500
    compute_se: bool = True


@dataclass
class FitResult:
    """Outcome of a maximum likelihood fit.

    ``starts_tried`` holds ``(start, loglik)`` pairs for every start, with the
    start given in natural coordinates ``(omega, gamma, lam)``.
    """

    params: GcpcParams
    loglik: float
    family: str
    n_obs: int
    std_errors: dict | None = None
    n_starts: int = 1
    starts_tried: list = field(default_factory=list)
    converged: bool = True
    near_uniform: bool = False
    at_boundary: bool = False
    diagnostics: list = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return 2 if self.family == "cipc" else 3

    @property
    def wc(self):
        return self.params.to_wc()

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "omega": self.params.omega,
            "gamma": self.params.gamma,
            "lambda": self.params.lam,
            "loglik": self.loglik,
            "n_obs": self.n_obs,
            "std_errors": self.std_errors,
            "n_starts": self.n_starts,
            "converged": self.converged,
            "near_uniform": self.near_uniform,
            "at_boundary": self.at_boundary,
            "starts_tried": [
                {"start": list(s), "loglik": ll} for s, ll in self.starts_tried
            ],
            "diagnostics": list(self.diagnostics),
        }


# -- likelihood -------------------------------------------------------------------


def _as_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("data must be non-empty")
    if not np.all(np.isfinite(x)):
        raise ParameterError("data contain non-finite angles")
    return x


def loglik_gcpc(data, params: GcpcParams) -> float:
    """Sum of log-densities of ``data`` under ``params``."""
    x = _as_data(data)
    return float(np.sum(logpdf_polar(x, params.omega, params.gamma, params.lam)))


def logpdf_grad(theta, omega, gamma, lam):
    """Log-density and its partial derivatives in (omega, gamma, lam).

    Returns ``(logf, d_omega, d_gamma, d_lam)``, each broadcast to ``theta``.
    """
    phi = np.asarray(theta, dtype=float) - omega
    cp, sp = np.cos(phi), np.sin(phi)
    b = cp * cp + sp * sp / lam
    rb = np.sqrt(b)
    c = np.sqrt(gamma * gamma + 1.0)
    direct = c * rb - gamma * cp
    stable = (cp * cp + (c * c) * sp * sp / lam) / (c * rb + gamma * cp)
    D = np.where(cp > 0, stable, direct)
    logf = -np.log(2 * np.pi) - 0.5 * np.log(lam) - 0.5 * np.log(b) - np.log(D)

    db_dphi = 2 * cp * sp * (1.0 / lam - 1.0)
    dD_dphi = c * db_dphi / (2 * rb) + gamma * sp
    dlogf_dphi = -db_dphi / (2 * b) - dD_dphi / D
    dD_dgamma = (gamma / c) * rb - cp
    db_dlam = -sp * sp / (lam * lam)
    dD_dlam = c * db_dlam / (2 * rb)
    d_lam = -0.5 / lam - db_dlam / (2 * b) - dD_dlam / D
    return logf, -dlogf_dphi, -dD_dgamma / D, d_lam


def _clip(v):
    return np.clip(v, *_LOG_BOUNDS)


class _Objective:
    """Negative log-likelihood over a subset of the unconstrained coordinates.

    Full coordinates are (omega, log gamma, log lam); ``fixed`` pins any of
    them by name.
    """

    names = ("omega", "g", "l")

    def __init__(self, data, fixed=None):
        self.x = data
        self.fixed = dict(fixed or {})
        self.free = [k for k in self.names if k not in self.fixed]
        self.log_idx = [i for i, k in enumerate(self.free) if k != "omega"]

    def full(self, v):
        vals = dict(self.fixed)
        vals.update(zip(self.free, v))
        return vals["omega"], float(_clip(vals["g"])), float(_clip(vals["l"]))

    def __call__(self, v):
        om, g, l = self.full(v)
        out = -np.sum(logpdf_polar(self.x, om, math.exp(g), math.exp(l)))
        return float(out) if np.isfinite(out) else 1e300

    def grad(self, v):
        om, g, l = self.full(v)
        gam, lam = math.exp(g), math.exp(l)
        _, d_om, d_g, d_l = logpdf_grad(self.x, om, gam, lam)
        full = {"omega": -np.sum(d_om), "g": -np.sum(d_g) * gam, "l": -np.sum(d_l) * lam}
        return np.array([full[k] for k in self.free])


def _optimize(obj, v0, opts: FitOptions, log_idx=()):
    """Nelder-Mead followed by BFGS; returns (v, negll, converged, at_bound).

    Coordinates in ``log_idx`` are clipped inside the objective, so at a clip
    bound the gradient component pointing outward is dropped before the
    convergence check (a projected gradient).
    """
    nm = optimize.minimize(
        obj,
        np.asarray(v0, dtype=float),
        method="Nelder-Mead",
        options={"maxiter": opts.nm_maxiter * len(v0), "xatol": opts.nm_xatol, "fatol": opts.nm_fatol},
    )
    bf = optimize.minimize(
        obj,
        nm.x,
        jac=obj.grad,
        method="BFGS",
        options={"gtol": opts.bfgs_gtol, "maxiter": opts.bfgs_maxiter},
    )
    best = bf if bf.fun <= nm.fun else nm
    v = np.array(best.x, dtype=float)
    g = obj.grad(v)
    lo, hi = _LOG_BOUNDS
    at_bound = False
    for i in log_idx:
        v[i] = min(max(v[i], lo), hi)
        if (v[i] >= hi and g[i] < 0) or (v[i] <= lo and g[i] > 0):
            g[i] = 0.0
            at_bound = True
    gnorm = float(np.max(np.abs(g)))
    converged = bool(bf.success or gnorm < 1e-4 * max(1.0, abs(best.fun)))
    return v, float(best.fun), converged, at_bound


def circular_mean(data) -> tuple[float, float]:
    """Mean direction and mean resultant length of a sample."""
    x = _as_data(data)
    C, S = np.mean(np.cos(x)), np.mean(np.sin(x))
    return float(math.atan2(S, C)), float(math.hypot(C, S))


def _gamma_start(rbar: float) -> float:
    d = min(max(rbar, 0.05), 0.95)
    return 2 * d / (1 - d * d)


def _start_grid(omega0: float, n_starts: int | None, opts: FitOptions):
    lams = list(opts.lambda_starts)
    shifts = [omega0 + 2 * np.pi * k / opts.omega_shifts for k in range(opts.omega_shifts)]
    # ordered so the plain circular-mean start with lam = 1 comes first
    lams.sort(key=lambda v: abs(math.log(v)))
    grid = [(om, lam) for lam in lams for om in shifts]
    if n_starts is None:
        return grid
    if n_starts < 1:
        raise ParameterError("n_starts must be >= 1")
    if n_starts <= len(grid):
        return grid[:n_starts]
    extra = np.geomspace(0.05, 20.0, int(math.ceil((n_starts - len(grid)) / len(shifts))) + 2)[1:-1]
    more = [(om, float(lam)) for lam in extra for om in shifts]
    return (grid + more)[:n_starts]


def fit_gcpc(
    data,
    n_starts: int | None = None,
    options: FitOptions | None = None,
    *,
    omega: float | None = None,
    starts: Sequence[tuple[float, float, float]] | None = None,
) -> FitResult:
    """Maximum likelihood fit of GCPC(omega, gamma, lam).

    Parameters
    ----------
    data : array_like
        Angles in radians.
    n_starts : int, optional
        Number of starting points taken from the (omega0 + k pi/2) x lam grid;
        all twelve by default.
    omega : float, optional
        Fix the location (restricted fit used by the location tests).
    starts : sequence of (omega, gamma, lam), optional
        Explicit starting points, replacing the grid.
    """
    opts = options or FitOptions()
    x = _as_data(data)
    if x.size < 4:
        raise ParameterError("fit_gcpc needs at least 4 observations")
    omega0, rbar = circular_mean(x)
    g0 = _gamma_start(rbar)
    if starts is None:
        if omega is not None:
            starts = [(omega, g0, lam) for lam in opts.lambda_starts]
        else:
            starts = [(om, g0, lam) for om, lam in _start_grid(omega0, n_starts, opts)]
    fixed = {"omega": canonical_angle(omega)} if omega is not None else None
    obj = _Objective(x, fixed)

    tried = []
    best = None
    for om, gam, lam in starts:
        full0 = {"omega": om, "g": math.log(max(gam, 1e-12)), "l": math.log(lam)}
        v0 = [full0[k] for k in obj.free]
        v, f, ok, edge = _optimize(obj, v0, opts, obj.log_idx)
        tried.append(((float(om), float(gam), float(lam)), -f))
        if ok and (best is None or f < best[1]):
            best = (v, f, edge)
    if best is None:
        raise ConvergenceError("optimizer failed to converge from every start")

    om, g, l = obj.full(best[0])
    params = GcpcParams(om, math.exp(g), math.exp(l))
    fit = FitResult(
        params=params,
        loglik=loglik_gcpc(x, params),
        family="gcpc",
        n_obs=int(x.size),
        n_starts=len(tried),
        starts_tried=tried,
        near_uniform=params.gamma < NEAR_UNIFORM_GAMMA,
        at_boundary=best[2] and params.gamma >= NEAR_UNIFORM_GAMMA,
    )
    if fit.near_uniform:
        fit.diagnostics.append("near-uniform: gamma estimate below 1e-6")
    if fit.at_boundary:
        fit.diagnostics.append(
            "boundary: the likelihood keeps increasing towards the edge of the "
            f"clipped parameter range (log bounds {_LOG_BOUNDS}); no interior maximum"
        )
    if omega is None and opts.compute_se:
        _attach_se(fit, x)
    return fit


def fit_cipc(data, options: FitOptions | None = None, *, omega: float | None = None) -> FitResult:
    """Maximum likelihood fit with lam pinned to 1 (wrapped Cauchy)."""
    opts = options or FitOptions()
    x = _as_data(data)
    if x.size < 3:
        raise ParameterError("fit_cipc needs at least 3 observations")
    omega0, rbar = circular_mean(x)
    g0 = _gamma_start(rbar)
    fixed = {"l": 0.0}
    if omega is not None:
        fixed["omega"] = canonical_angle(omega)
        start_oms = [omega]
    else:
        start_oms = [omega0, omega0 + np.pi]
    obj = _Objective(x, fixed)
    tried, best = [], None
    for om in start_oms:
        full0 = {"omega": om, "g": math.log(g0)}
        v, f, ok, edge = _optimize(obj, [full0[k] for k in obj.free], opts, obj.log_idx)
        tried.append(((float(om), g0, 1.0), -f))
        if ok and (best is None or f < best[1]):
            best = (v, f)
    if best is None:
        raise ConvergenceError("optimizer failed to converge from every start")
    om, g, _ = obj.full(best[0])
    params = GcpcParams(om, math.exp(g), 1.0)
    fit = FitResult(
        params=params,
        loglik=loglik_gcpc(x, params),
        family="cipc",
        n_obs=int(x.size),
        n_starts=len(tried),
        starts_tried=tried,
        near_uniform=params.gamma < NEAR_UNIFORM_GAMMA,
    )
    if omega is None and opts.compute_se:
        _attach_se(fit, x)
    return fit


# -- standard errors ------------------------------------------------------------------


def _hessian_from_grad(grad, v, h=1e-5):
    k = len(v)
    H = np.empty((k, k))
    for i in range(k):
        e = np.zeros(k)
        e[i] = h * max(1.0, abs(v[i]))
        H[:, i] = (grad(v + e) - grad(v - e)) / (2 * e[i])
    return 0.5 * (H + H.T)


def std_errors(fit: FitResult, data) -> dict:
    """Observed-information standard errors of (omega, gamma[, lam]).

    The Hessian is taken by central differences of the analytic score in
    (omega, log gamma, log lam) and mapped back to natural coordinates.
    Raises :class:`DegenerateError` if ``fit`` is not a stationary point or the
    Hessian is not positive definite.
    """
    x = _as_data(data)
    fixed = {"l": 0.0} if fit.family == "cipc" else None
    obj = _Objective(x, fixed)
    p = fit.params
    if p.gamma <= 0:
        raise DegenerateError("standard errors unavailable at gamma = 0")
    full = {"omega": p.omega, "g": math.log(p.gamma), "l": math.log(p.lam)}
    v = np.array([full[k] for k in obj.free])
    g = obj.grad(v)
    H = _hessian_from_grad(obj.grad, v)
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise DegenerateError("observed information is not positive definite") from None
    cov = np.linalg.inv(H)
    # score statistic g' H^-1 g is ~0 at an optimum regardless of scaling
    if float(g @ cov @ g) > 1e-4:
        raise DegenerateError("not a stationary point: score is not close to zero")
    scale = {"omega": 1.0, "g": p.gamma, "l": p.lam}
    names = {"omega": "omega", "g": "gamma", "l": "lambda"}
    return {
        names[k]: float(scale[k] * math.sqrt(cov[i, i])) for i, k in enumerate(obj.free)
    }


def _attach_se(fit: FitResult, x):
    try:
        fit.std_errors = std_errors(fit, x)
    except DegenerateError as exc:
        fit.std_errors = None
        fit.diagnostics.append(f"standard errors unavailable: {exc}")


# -- tests and intervals ----------------------------------------------------------------


@dataclass
class LrtResult:
    statistic: float
    df: int
    p_value: float
    fit_h0: object
    fit_h1: object
    loglik_h0: float
    loglik_h1: float

    def to_dict(self) -> dict:
        def dump(f):
            if isinstance(f, (tuple, list)):
                return [dump(g) for g in f]
            return f.to_dict() if hasattr(f, "to_dict") else f

        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "loglik_h0": self.loglik_h0,
            "loglik_h1": self.loglik_h1,
            "fit_h0": dump(self.fit_h0),
            "fit_h1": dump(self.fit_h1),
        }


def _lrt(l0, l1, df, fit_h0, fit_h1) -> LrtResult:
    stat = 2.0 * (l1 - l0)
    if stat < -1e-6:
        log.warning("negative likelihood ratio statistic %g clipped to 0", stat)
    stat = max(stat, 0.0)
    return LrtResult(stat, df, float(chi2_sf(stat, df)), fit_h0, fit_h1, l0, l1)


def lrt_one_location(data, omega0: float, options: FitOptions | None = None) -> LrtResult:
    """Likelihood ratio test of H0: omega = omega0 against a free location."""
    x = _as_data(data)
    opts = options or FitOptions()
    fit1 = fit_gcpc(x, options=opts)
    fit0 = fit_gcpc(x, options=opts, omega=omega0)
    # the restricted start set also includes the unrestricted nuisance estimates
    try:
        alt = fit_gcpc(
            x, options=opts, omega=omega0, starts=[(omega0, fit1.params.gamma, fit1.params.lam)]
        )
    except ConvergenceError:
        # an extra start only; a flat surface near the clip bounds can stall it
        alt = None
    if alt is not None and alt.loglik > fit0.loglik:
        alt.starts_tried = fit0.starts_tried + alt.starts_tried
        alt.n_starts = len(alt.starts_tried)
        fit0 = alt
    return _lrt(fit0.loglik, fit1.loglik, 1, fit0, fit1)


def lrt_gcpc_vs_cipc(data, options: FitOptions | None = None) -> LrtResult:
    """Likelihood ratio test of lam = 1 (CIPC) within the GCPC family."""
    x = _as_data(data)
    f1 = fit_gcpc(x, options=options)
    f0 = fit_cipc(x, options=options)
    return _lrt(f0.loglik, f1.loglik, 1, f0, f1)


@dataclass(frozen=True)
class LocationCI:
    """Likelihood-ratio interval for omega.

    ``lower`` and ``upper`` are unwrapped so that lower < omega_hat < upper;
    reduce them with :func:`gcpc.core.canonical_angle` if needed.
    """

    level: float
    lower: float
    upper: float
    omega_hat: float
    profile: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, omega: float) -> bool:
        off = canonical_angle(omega - self.omega_hat)
        return self.lower - self.omega_hat < off < self.upper - self.omega_hat


def location_ci(
    data,
    level: float = 0.95,
    fit: FitResult | None = None,
    *,
    profile: bool = False,
    step: float = 2e-3,
    xtol: float = 1e-6,
) -> LocationCI:
    """Confidence interval {omega: l(omega, g, l) > l_max - chi2_1(level) / 2}.

    By default gamma and lam are held at their MLE (plug-in).  With
    ``profile=True`` they are re-maximised at every omega instead.
    """
    if not (0.5 < level < 1):
        raise ParameterError("level must lie in (0.5, 1)")
    x = _as_data(data)
    if fit is None:
        fit = fit_gcpc(x)
    p = fit.params
    cut = fit.loglik - stats.chi2.ppf(level, 1) / 2.0

    if profile:
        def ell(om):
            r = fit_gcpc(
                x,
                omega=om,
                starts=[(om, p.gamma, p.lam)],
                options=FitOptions(compute_se=False),
            )
            return r.loglik
    else:
        def ell(om):
            return float(np.sum(logpdf_polar(x, om, p.gamma, p.lam)))

    def ell_many(offsets):
        if profile:
            return np.array([ell(p.omega + o) for o in offsets])
        phi = x[:, None] - (p.omega + offsets[None, :])
        return np.sum(logpdf_polar(phi, 0.0, p.gamma, p.lam), axis=0)

    if ell(p.omega) <= cut:
        raise ConvergenceError("confidence region does not contain the estimate")

    ends = []
    for sign in (1.0, -1.0):
        offs = sign * np.arange(1, int(np.pi / step) + 1) * step
        if profile:
            # walk outward step by step to avoid refitting the whole grid
            below = None
            prev = 0.0
            for o in offs:
                if ell(p.omega + o) <= cut:
                    below = o
                    break
                prev = o
        else:
            vals = ell_many(offs)
            idx = np.flatnonzero(vals <= cut)
            below = offs[idx[0]] if idx.size else None
            prev = offs[idx[0] - 1] if idx.size and idx[0] > 0 else 0.0
        if below is None:
            ends.append(sign * np.pi)
            log.warning("confidence region extends over the half circle on one side")
            continue
        inside, outside = prev, below
        while abs(outside - inside) > xtol:
            mid = 0.5 * (inside + outside)
            if ell(p.omega + mid) > cut:
                inside = mid
            else:
                outside = mid
        ends.append(0.5 * (inside + outside))
    return LocationCI(level, p.omega + ends[1], p.omega + ends[0], p.omega, profile)


def _joint_two_sample(x1, x2, family: str, omega_starts, nuis1, nuis2, opts: FitOptions):
    """Shared-location fit; nuisances are (gamma, lam) per sample."""
    pinned = family == "cipc"

    def unpack(v):
        om = v[0]
        if pinned:
            return om, math.exp(_clip(v[1])), 1.0, math.exp(_clip(v[2])), 1.0
        g1, l1, g2, l2 = (math.exp(_clip(t)) for t in v[1:])
        return om, g1, l1, g2, l2

    def negll(v):
        om, g1, l1, g2, l2 = unpack(v)
        out = -(np.sum(logpdf_polar(x1, om, g1, l1)) + np.sum(logpdf_polar(x2, om, g2, l2)))
        return float(out) if np.isfinite(out) else 1e300

    def grad(v):
        om, g1, l1, g2, l2 = unpack(v)
        _, a0, a1, a2 = logpdf_grad(x1, om, g1, l1)
        _, b0, b1, b2 = logpdf_grad(x2, om, g2, l2)
        if pinned:
            return -np.array([a0.sum() + b0.sum(), a1.sum() * g1, b1.sum() * g2])
        return -np.array(
            [a0.sum() + b0.sum(), a1.sum() * g1, a2.sum() * l1, b1.sum() * g2, b2.sum() * l2]
        )

    negll.grad = grad
    best = None
    tried = []
    for om in omega_starts:
        if pinned:
            v0 = [om, math.log(nuis1[0]), math.log(nuis2[0])]
        else:
            v0 = [om, math.log(nuis1[0]), math.log(nuis1[1]), math.log(nuis2[0]), math.log(nuis2[1])]
        v, f, ok, _ = _optimize(negll, v0, opts, range(1, len(v0)))
        tried.append((float(om), -f))
        if ok and (best is None or f < best[1]):
            best = (v, f)
    if best is None:
        raise ConvergenceError("shared-location fit failed from every start")
    om, g1, l1, g2, l2 = unpack(best[0])
    return (GcpcParams(om, g1, l1), GcpcParams(om, g2, l2)), -best[1], tried


def _refit_from(x, fit: FitResult, q: GcpcParams, opts: FitOptions) -> FitResult:
    if loglik_gcpc(x, q) <= fit.loglik:
        return fit
    try:
        alt = fit_gcpc(x, options=opts, starts=[(q.omega, max(q.gamma, 1e-3), q.lam)])
    except ConvergenceError:
        return fit
    if alt.loglik <= fit.loglik:
        return fit
    alt.starts_tried = fit.starts_tried + alt.starts_tried
    alt.n_starts = len(alt.starts_tried)
    return alt


def lrt_two_locations(data1, data2, family: str = "gcpc", options: FitOptions | None = None) -> LrtResult:
    """Likelihood ratio test of a common location for two independent samples.

    Concentrations (and, for ``family="gcpc"``, anisotropies) are free in
    each sample under both hypotheses.  ``family="cipc"`` pins both lam to 1.
    """
    family = family.lower()
    if family not in ("gcpc", "cipc"):
        raise ParameterError("family must be 'gcpc' or 'cipc'")
    x1, x2 = _as_data(data1), _as_data(data2)
    if min(x1.size, x2.size) < 4:
        raise ParameterError("each sample needs at least 4 observations")
    opts = options or FitOptions()
    fitter = fit_gcpc if family == "gcpc" else fit_cipc
    h1 = (fitter(x1, options=opts), fitter(x2, options=opts))
    l1 = h1[0].loglik + h1[1].loglik

    p1, p2 = h1[0].params, h1[1].params
    n1, n2 = x1.size, x2.size
    pooled = math.atan2(
        n1 * math.sin(p1.omega) + n2 * math.sin(p2.omega),
        n1 * math.cos(p1.omega) + n2 * math.cos(p2.omega),
    )
    pooled_data, _ = circular_mean(np.concatenate([x1, x2]))
    oms = [pooled, p1.omega, p2.omega, pooled_data]
    nu1 = (max(p1.gamma, 1e-3), p1.lam)
    nu2 = (max(p2.gamma, 1e-3), p2.lam)
    (q1, q2), l0, tried = _joint_two_sample(x1, x2, family, oms, nu1, nu2, opts)
    if family == "gcpc" and l0 > l1:
        # the shared-location optimum beats the separate fits, so at least one
        # separate fit stopped short; restart it from the restricted estimate
        h1 = tuple(_refit_from(x, f, q, opts) for x, f, q in ((x1, h1[0], q1), (x2, h1[1], q2)))
        l1 = h1[0].loglik + h1[1].loglik
    starts = [((om, float("nan"), float("nan")), ll) for om, ll in tried]
    h0 = tuple(
        FitResult(
            params=q,
            loglik=loglik_gcpc(x, q),
            family=family,
            n_obs=int(x.size),
            n_starts=len(tried),
            starts_tried=starts,
            diagnostics=["location shared across samples"],
        )
        for q, x in ((q1, x1), (q2, x2))
    )
    return _lrt(l0, l1, 1, h0, h1)
