"""GCPC regression for a circular response.

Each observation i has mu_i = B' x_i (B is p x 2), gamma_i = |mu_i|, location
atan2(mu_2i, mu_1i) and a common anisotropy lam, so that

    l(B, lam) = -sum log(Q_i sqrt(|mu_i|^2 + 1) - y_i' mu_i sqrt(Q_i)) - n/2 log lam - n log 2 pi,
    Q_i = (y_1i xi_2i - y_2i xi_1i)^2 / lam + (y_1i xi_1i + y_2i xi_2i)^2,

with y_i = (cos theta_i, sin theta_i) and xi_i = mu_i / |mu_i|.  Circular
covariates enter as (cos x, sin x); compositions through the additive
log-ratio transform.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import ConvergenceError, DegenerateError, ParameterError
from .inference import LrtResult, _lrt, logpdf_grad

log = logging.getLogger(__name__)

__all__ = [
    "Design",
    "Predictor",
    "RegressionFit",
    "build_design",
    "compare_regressions",
    "fit_regression",
    "loglik_gcpc_regression",
    "loglik_regression_full_form",
    "parse_predictor",
    "predict",
    "quadratic_form",
]

LOG_LAMBDA_BRACKET = (-3 * math.log(10), 3 * math.log(10))
_SIMPLEX_TOL = 1e-9
_BFGS_RESTARTS = 5
_START_SCALES = (1.0, 3.0, 10.0)
_START_LOGLAMS = (math.log(0.2), math.log(5.0))


@dataclass(frozen=True)
class Predictor:
    """A predictor block: ``kind`` is continuous, circular or simplex."""

    kind: str
    columns: tuple

    def __post_init__(self):
        if self.kind not in ("continuous", "circular", "simplex"):
            raise ParameterError(f"unknown predictor kind {self.kind!r}")
        if self.kind == "simplex" and len(self.columns) < 2:
            raise ParameterError("a composition needs at least two parts")
        if self.kind != "simplex" and len(self.columns) != 1:
            raise ParameterError(f"{self.kind} predictor takes exactly one column")


def parse_predictor(spec: str) -> Predictor:
    """Parse ``continuous:speed``, ``circular:dir`` or ``simplex:a,b,c``."""
    kind, sep, cols = spec.partition(":")
    if not sep or not cols:
        raise ParameterError(f"predictor spec {spec!r} is not of the form kind:column[,column...]")
    aliases = {"simplicial": "simplex", "alr": "simplex"}
    kind = aliases.get(kind.strip(), kind.strip())
    return Predictor(kind, tuple(c.strip() for c in cols.split(",")))


@dataclass(frozen=True)
class Design:
    names: tuple
    blocks: tuple
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.matrix).tobytes()).hexdigest()


def build_design(predictors: Sequence[Predictor], rows: dict, n: int | None = None) -> Design:
    """Assemble the design matrix; the intercept always comes first.

    ``rows`` maps column names to equal-length sequences.  Circular columns
    are in radians.
    """
    lengths = {len(v) for v in rows.values()}
    if n is None:
        if not lengths:
            raise ParameterError("cannot infer the number of rows for an intercept-only design")
        n = lengths.pop() if len(lengths) == 1 else None
        if n is None:
            raise ParameterError("predictor columns have different lengths")
    cols = [np.ones(n)]
    names = ["(intercept)"]
    blocks = [("intercept", ("(intercept)",))]
    for pred in predictors:
        for c in pred.columns:
            if c not in rows:
                raise ParameterError(f"unknown column {c!r}")
            if len(rows[c]) != n:
                raise ParameterError(f"column {c!r} has {len(rows[c])} rows, expected {n}")
        if pred.kind == "continuous":
            (c,) = pred.columns
            v = np.asarray(rows[c], dtype=float)
            cols.append(v)
            names.append(c)
            blocks.append(("continuous", (c,)))
        elif pred.kind == "circular":
            (c,) = pred.columns
            v = np.asarray(rows[c], dtype=float)
            cols += [np.cos(v), np.sin(v)]
            new = (f"cos({c})", f"sin({c})")
            names += new
            blocks.append(("circular", new))
        else:
            comp = np.column_stack([np.asarray(rows[c], dtype=float) for c in pred.columns])
            if np.any(comp <= 0):
                raise ParameterError(
                    "composition parts must be strictly positive for the additive log-ratio; "
                    "compositions with zeros need the alpha-transformation, which is not supported"
                )
            sums = comp.sum(axis=1)
            if np.any(np.abs(sums - 1) > _SIMPLEX_TOL):
                raise ParameterError("composition rows must sum to 1")
            comp = comp / sums[:, None]
            ref = pred.columns[-1]
            new = []
            for j, c in enumerate(pred.columns[:-1]):
                cols.append(np.log(comp[:, j] / comp[:, -1]))
                new.append(f"alr({c}/{ref})")
            names += new
            blocks.append(("simplex", tuple(new)))
    X = np.column_stack(cols)
    if not np.all(np.isfinite(X)):
        raise ParameterError("design matrix has non-finite entries")
    return Design(tuple(names), tuple(blocks), X)


def _unit_response(y):
    y = np.asarray(y, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise ParameterError("response contains non-finite angles")
    return y


def _mu(design_matrix, coef):
    mu = design_matrix @ coef
    gam = np.hypot(mu[:, 0], mu[:, 1])
    if np.any(gam == 0):
        raise DegenerateError("degenerate linear predictor: |mu_i| = 0 for some rows")
    return mu, gam


def quadratic_form(th, mu, lam: float):
    """y_i' S_i^{-1} y_i in the simplified form, S_i with eigenvector mu_i / |mu_i|."""
    th = np.asarray(th, dtype=float)
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    gam = np.hypot(mu[:, 0], mu[:, 1])
    xi1, xi2 = mu[:, 0] / gam, mu[:, 1] / gam
    y1, y2 = np.cos(th), np.sin(th)
    return (y1 * xi2 - y2 * xi1) ** 2 / lam + (y1 * xi1 + y2 * xi2) ** 2


def loglik_gcpc_regression(design: Design | np.ndarray, y, coef, lam: float) -> float:
    """Regression log-likelihood with the simplified quadratic form."""
    X = design.matrix if isinstance(design, Design) else np.asarray(design, dtype=float)
    coef = np.asarray(coef, dtype=float).reshape(X.shape[1], 2)
    th = _unit_response(y)
    y1, y2 = np.cos(th), np.sin(th)
    mu, gam = _mu(X, coef)
    q = quadratic_form(th, mu, lam)
    ymu = y1 * mu[:, 0] + y2 * mu[:, 1]
    n = th.size
    return float(
        -np.sum(np.log(q * np.sqrt(gam * gam + 1) - ymu * np.sqrt(q)))
        - 0.5 * n * math.log(lam)
        - n * math.log(2 * math.pi)
    )


def loglik_regression_full_form(design, y, coef, lam: float) -> float:
    """Same log-likelihood written with y' (e1 e1'/lam + e2 e2') y.

    ``e2 = mu / |mu|`` and ``e1`` its left rotation.  Kept as an independent
    check on :func:`loglik_gcpc_regression`.
    """
    X = design.matrix if isinstance(design, Design) else np.asarray(design, dtype=float)
    coef = np.asarray(coef, dtype=float).reshape(X.shape[1], 2)
    th = _unit_response(y)
    total = 0.0
    for i in range(th.size):
        mu = X[i] @ coef
        g = math.hypot(mu[0], mu[1])
        e2 = mu / g
        e1 = np.array([-e2[1], e2[0]])
        s_inv = np.outer(e1, e1) / lam + np.outer(e2, e2)
        yi = np.array([math.cos(th[i]), math.sin(th[i])])
        q = yi @ s_inv @ yi
        total -= math.log(q * math.sqrt(mu @ mu + 1) - (yi @ mu) * math.sqrt(q))
    n = th.size
    return total - 0.5 * n * math.log(lam) - n * math.log(2 * math.pi)


@dataclass
class RegressionFit:
    coef: np.ndarray
    lam: float
    loglik: float
    family: str
    names: tuple
    n_obs: int
    coef_se: np.ndarray | None = None
    lam_se: float | None = None
    rho_hat: float = float("nan")
    rho_se: float = float("nan")
    stage_logliks: tuple = ()
    converged: bool = True
    design_digest: str = ""
    response_digest: str = ""
    diagnostics: list = field(default_factory=list)

    def to_dict(self) -> dict:
        se = None if self.coef_se is None else self.coef_se.tolist()
        return {
            "family": self.family,
            "columns": list(self.names),
            "coef": self.coef.tolist(),
            "coef_se": se,
            "lambda": self.lam,
            "lambda_se": self.lam_se,
            "loglik": self.loglik,
            "rho_hat": self.rho_hat,
            "rho_se": self.rho_se,
            "n_obs": self.n_obs,
            "stage_logliks": list(self.stage_logliks),
            "converged": self.converged,
            "diagnostics": list(self.diagnostics),
        }


class _RegObjective:
    def __init__(self, X, th, pinned: bool):
        self.X = X
        self.th = th
        self.p = X.shape[1]
        self.pinned = pinned

    def unpack(self, v):
        B = np.asarray(v[: 2 * self.p]).reshape(self.p, 2)
        lam = 1.0 if self.pinned else math.exp(float(np.clip(v[2 * self.p], -20, 20)))
        return B, lam

    def _terms(self, v):
        B, lam = self.unpack(v)
        mu = self.X @ B
        gam = np.hypot(mu[:, 0], mu[:, 1])
        gam = np.maximum(gam, 1e-300)
        om = np.arctan2(mu[:, 1], mu[:, 0])
        return B, lam, mu, gam, om

    def __call__(self, v):
        _, lam, _, gam, om = self._terms(v)
        f, *_ = logpdf_grad(self.th, om, gam, lam)
        out = -np.sum(f)
        return float(out) if np.isfinite(out) else 1e300

    def grad(self, v):
        _, lam, mu, gam, om = self._terms(v)
        _, d_om, d_g, d_l = logpdf_grad(self.th, om, gam, lam)
        # d omega / d mu = (-mu2, mu1) / gam^2, d gam / d mu = mu / gam
        dmu1 = d_g * mu[:, 0] / gam - d_om * mu[:, 1] / gam**2
        dmu2 = d_g * mu[:, 1] / gam + d_om * mu[:, 0] / gam**2
        gB = self.X.T @ np.column_stack([dmu1, dmu2])
        g = -gB.ravel()
        if not self.pinned:
            g = np.append(g, -np.sum(d_l) * lam)
        return g


def _bfgs_restarted(obj, v, gtol, maxiter):
    vb, fb = v, obj(v)
    converged, message = False, ""
    for _ in range(_BFGS_RESTARTS):
        # a stalled line search leaves a bad inverse Hessian; restarting resets it
        bf = optimize.minimize(obj, vb, jac=obj.grad, method="BFGS", options={"gtol": gtol, "maxiter": maxiter})
        if bf.fun <= fb:
            vb, fb = bf.x, float(bf.fun)
        gmax = float(np.max(np.abs(obj.grad(vb))))
        converged = bool(bf.success or gmax < 1e-4 * max(1.0, abs(fb)))
        message = bf.message
        if converged:
            break
    return vb, fb, converged, message


def _rho_residual(th, om):
    r = th - om
    C, S = np.mean(np.cos(r)), np.mean(np.sin(r))
    R = math.hypot(C, S)
    mbar = math.atan2(S, C)
    rho2 = float(np.mean(np.cos(2 * (r - mbar))))
    n = th.size
    var = max((1 - 2 * R * R + rho2) / (2 * n), 0.0)
    return R, math.sqrt(var)


def fit_regression(
    design: Design,
    y,
    family: str = "gcpc",
    *,
    gtol: float = 1e-7,
    maxiter: int = 2000,
    compute_se: bool = True,
    multistart: bool = True,
) -> RegressionFit:
    """Fit the GCPC (or CIPC, lam = 1) regression in three stages.

    1. B from least squares of (cos theta, sin theta) on the design.
    2. lam by bounded Brent search over log lam with B held fixed.
    3. joint BFGS over (B, log lam).

    The likelihood is multimodal once a covariate can drive some mu_i
    through zero, so by default stage 3 is also run from rescaled
    least-squares starts and from the CIPC solution, keeping the best.
    """
    family = family.lower()
    if family not in ("gcpc", "cipc"):
        raise ParameterError("family must be 'gcpc' or 'cipc'")
    X = design.matrix
    th = _unit_response(y)
    n, p = X.shape
    if th.size != n:
        raise ParameterError("response length does not match the design")
    if n <= 2 * p + 1:
        raise ParameterError(f"need more than {2 * p + 1} observations for {p} design columns")
    if np.linalg.matrix_rank(X) < p:
        raise DegenerateError("design matrix is rank deficient")

    Y = np.column_stack([np.cos(th), np.sin(th)])
    B0, *_ = np.linalg.lstsq(X, Y, rcond=None)
    pinned = family == "cipc"
    obj = _RegObjective(X, th, pinned)
    l1 = -obj(np.append(B0.ravel(), 0.0))

    if pinned:
        v = B0.ravel()
        l2 = l1
    else:
        def prof(loglam):
            return obj(np.append(B0.ravel(), loglam))

        lo, hi = LOG_LAMBDA_BRACKET
        res = optimize.minimize_scalar(prof, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
        ll = float(res.x)
        if min(ll - lo, hi - ll) < 1e-3:
            log.warning("Brent search for log lambda hit the bracket edge; widening once")
            lo, hi = 2 * lo, 2 * hi
            res = optimize.minimize_scalar(prof, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
            ll = float(res.x)
        v = np.append(B0.ravel(), ll)
        l2 = -float(res.fun)

    starts = [v]
    if multistart and pinned:
        starts += [c * B0.ravel() for c in _START_SCALES[1:]]
    elif multistart:
        starts += [np.append(c * B0.ravel(), ll) for c in _START_SCALES for ll in _START_LOGLAMS]
        cipc = _RegObjective(X, th, True)
        vc = optimize.minimize(cipc, B0.ravel(), jac=cipc.grad, method="BFGS", options={"gtol": gtol}).x
        starts.append(np.append(vc, 0.0))
    runs = [_bfgs_restarted(obj, s0, gtol, maxiter) for s0 in starts]
    ok = [r for r in runs if r[2]]
    if not ok:
        raise ConvergenceError(f"regression optimizer did not converge: {runs[0][3]}")
    vb, fb, converged, _ = min(ok, key=lambda r: r[1])
    B, lam = obj.unpack(vb)

    loglik = loglik_gcpc_regression(X, th, B, lam)
    mu = X @ B
    rho, rho_se = _rho_residual(th, np.arctan2(mu[:, 1], mu[:, 0]))
    fit = RegressionFit(
        coef=B,
        lam=lam,
        loglik=loglik,
        family=family,
        names=design.names,
        n_obs=n,
        rho_hat=rho,
        rho_se=rho_se,
        stage_logliks=(l1, l2, max(-fb, l2)),
        converged=converged,
        design_digest=design.digest(),
        response_digest=hashlib.sha256(th.tobytes()).hexdigest(),
    )
    if compute_se:
        try:
            cov = _covariance(obj, vb)
            sd = np.sqrt(np.diag(cov))
            fit.coef_se = sd[: 2 * p].reshape(p, 2)
            fit.lam_se = None if pinned else float(lam * sd[2 * p])
        except DegenerateError as exc:
            fit.diagnostics.append(f"standard errors unavailable: {exc}")
    return fit


def _covariance(obj, v):
    k = len(v)
    H = np.empty((k, k))
    for i in range(k):
        h = 1e-5 * max(1.0, abs(v[i]))
        e = np.zeros(k)
        e[i] = h
        H[:, i] = (obj.grad(v + e) - obj.grad(v - e)) / (2 * h)
    H = 0.5 * (H + H.T)
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise DegenerateError("observed information is not positive definite") from None
    return np.linalg.inv(H)


def predict(fit: RegressionFit, newdesign: Design | np.ndarray):
    """Fitted directions atan2(mu_2, mu_1) for each row of ``newdesign``."""
    X = newdesign.matrix if isinstance(newdesign, Design) else np.asarray(newdesign, dtype=float)
    if isinstance(newdesign, Design) and tuple(newdesign.names) != tuple(fit.names):
        raise ParameterError("design columns do not match the fitted model")
    if X.shape[1] != fit.coef.shape[0]:
        raise ParameterError("design has the wrong number of columns")
    mu = X @ fit.coef
    if np.any(np.hypot(mu[:, 0], mu[:, 1]) == 0):
        raise DegenerateError("some rows have |mu_i| = 0; their direction is undefined")
    return np.arctan2(mu[:, 1], mu[:, 0])


def compare_regressions(fit_gcpc: RegressionFit, fit_cipc: RegressionFit) -> LrtResult:
    """Likelihood ratio test of lam = 1 between nested regression fits."""
    if fit_gcpc.family != "gcpc" or fit_cipc.family != "cipc":
        raise ParameterError("expected a GCPC fit and a CIPC fit")
    if (
        fit_gcpc.design_digest != fit_cipc.design_digest
        or fit_gcpc.response_digest != fit_cipc.response_digest
    ):
        raise ParameterError("fits were computed on different designs or responses")
    return _lrt(fit_cipc.loglik, fit_gcpc.loglik, 1, fit_cipc, fit_gcpc)
