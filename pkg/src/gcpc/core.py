"""The generalized circular projected Cauchy (GCPC) distribution.

Density in polar form, with phi = theta - omega,

    f(theta) = 1 / (2 pi sqrt(lam) (b sqrt(gamma^2 + 1) - gamma cos(phi) sqrt(b))),
    b = cos^2 phi + sin^2 phi / lam.

At ``lam == 1`` this is the wrapped Cauchy law with ``delta = (sqrt(gamma^2+1)-1)/gamma``.
The map ``psi = atan2(sin phi, sqrt(lam) cos phi)`` sends GCPC(0, gamma, lam)
to WC(0, delta); it drives the CDF and the sampler below.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .specfun import _wc_quantile_unchecked, wc_cdf, wc_pdf

log = logging.getLogger(__name__)

__all__ = [
    "GcpcEuclideanForm",
    "GcpcParams",
    "UnimodalityVerdict",
    "WcParams",
    "canonical_angle",
    "classify_unimodality",
    "delta_to_gamma",
    "euclidean_form",
    "from_wc_angle",
    "gamma_to_delta",
    "interval_probability",
    "logpdf_polar",
    "pdf_euclidean",
    "pdf_polar",
    "sample",
    "to_wc_angle",
]

TWO_PI = 2.0 * np.pi


def canonical_angle(x):
    """Map angles (radians) to the representative in [-pi, pi)."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ParameterError("angles must be finite")
    out = np.remainder(x + np.pi, TWO_PI) - np.pi
    return out if out.ndim else float(out)


def gamma_to_delta(gamma):
    """Wrapped Cauchy concentration for a CIPC concentration ``gamma >= 0``."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ParameterError("gamma must be finite and non-negative")
    # (sqrt(g^2+1) - 1) / g rewritten without the 0/0 at g = 0
    out = g / (np.sqrt(g * g + 1.0) + 1.0)
    return out if out.ndim else float(out)


def delta_to_gamma(delta):
    d = np.asarray(delta, dtype=float)
    if np.any((d < 0) | (d >= 1)) or not np.all(np.isfinite(d)):
        raise ParameterError("delta must lie in [0, 1)")
    out = 2.0 * d / (1.0 - d * d)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GcpcParams:
    """Location ``omega``, concentration ``gamma`` and anisotropy ``lam``."""

    omega: float
    gamma: float
    lam: float = 1.0

    def __post_init__(self):
        for name in ("omega", "gamma", "lam"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"{name} must be finite (got {v})")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0 (got {self.gamma})")
        if self.lam <= 0:
            raise ParameterError(f"lambda must be > 0 (got {self.lam})")
        object.__setattr__(self, "omega", canonical_angle(float(self.omega)))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def c(self) -> float:
        return math.sqrt(self.gamma**2 + 1.0)

    @property
    def delta(self) -> float:
        return gamma_to_delta(self.gamma)

    @property
    def M(self) -> float:
        return self.lam - self.gamma**2 - 1.0

    def b(self, phi):
        return np.cos(phi) ** 2 + np.sin(phi) ** 2 / self.lam

    def D(self, phi):
        return _d_term(np.asarray(phi, dtype=float), self.gamma, self.lam)

    def to_wc(self) -> "WcParams":
        if self.lam != 1.0:
            raise ParameterError("only lambda = 1 reduces to the wrapped Cauchy")
        return WcParams(self.omega, self.delta)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.omega, self.gamma, self.lam)


@dataclass(frozen=True)
class WcParams:
    omega: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.omega) and math.isfinite(self.delta)):
            raise ParameterError("wrapped Cauchy parameters must be finite")
        if not (0 <= self.delta < 1):
            raise ParameterError(f"delta must lie in [0, 1) (got {self.delta})")
        object.__setattr__(self, "omega", canonical_angle(float(self.omega)))

    def to_gcpc(self) -> GcpcParams:
        return GcpcParams(self.omega, delta_to_gamma(self.delta), 1.0)


def _d_term(phi, gamma, lam):
    """D = c sqrt(b) - gamma cos(phi), free of cancellation near phi = 0.

    For cos(phi) > 0 use D = (cos^2 phi + c^2 sin^2 phi / lam) / (c sqrt(b) + gamma cos phi).
    """
    cp, sp = np.cos(phi), np.sin(phi)
    b = cp * cp + sp * sp / lam
    c = np.sqrt(gamma * gamma + 1.0)
    rb = np.sqrt(b)
    direct = c * rb - gamma * cp
    stable = (cp * cp + (c * c) * sp * sp / lam) / (c * rb + gamma * cp)
    return np.where(cp > 0, stable, direct)


def logpdf_polar(theta, omega, gamma, lam):
    """Vectorised log-density; parameters may be arrays broadcasting with ``theta``."""
    phi = np.asarray(theta, dtype=float) - omega
    cp, sp = np.cos(phi), np.sin(phi)
    b = cp * cp + sp * sp / lam
    return (
        -np.log(TWO_PI) - 0.5 * np.log(lam) - 0.5 * np.log(b) - np.log(_d_term(phi, gamma, lam))
    )


def pdf_polar(theta, params: GcpcParams):
    """GCPC density at angle(s) ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ParameterError("theta must be finite")
    out = np.exp(logpdf_polar(theta, params.omega, params.gamma, params.lam))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GcpcEuclideanForm:
    """Bivariate-Cauchy view of the distribution: mu, eigenvectors of Sigma, Sigma^-1.

    ``xi2 = mu / |mu|`` has eigenvalue 1, ``xi1`` (its left-rotation) has
    eigenvalue ``lam``.  When gamma = 0 the direction is taken from omega.
    """

    mu: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    sigma_inv: np.ndarray
    gamma_sq: float
    lam: float

    def capital_a(self, y) -> float:
        return float(np.asarray(y) @ self.sigma_inv @ self.mu)

    def capital_b(self, y) -> float:
        y = np.asarray(y)
        return float(y @ self.sigma_inv @ y)

    @property
    def sigma(self) -> np.ndarray:
        return self.lam * np.outer(self.xi1, self.xi1) + np.outer(self.xi2, self.xi2)


def euclidean_form(params: GcpcParams) -> GcpcEuclideanForm:
    xi2 = np.array([math.cos(params.omega), math.sin(params.omega)])
    xi1 = np.array([-xi2[1], xi2[0]])
    mu = params.gamma * xi2
    sigma_inv = np.outer(xi1, xi1) / params.lam + np.outer(xi2, xi2)
    return GcpcEuclideanForm(
        mu=mu,
        xi1=xi1,
        xi2=xi2,
        sigma_inv=sigma_inv,
        gamma_sq=float(mu @ sigma_inv @ mu),
        lam=params.lam,
    )


def pdf_euclidean(y, form: GcpcEuclideanForm) -> float:
    """Density of the unit vector ``y`` in the Euclidean parameterisation."""
    y = np.asarray(y, dtype=float)
    if y.shape != (2,) or not np.all(np.isfinite(y)):
        raise ParameterError("y must be a finite 2-vector")
    if abs(math.hypot(y[0], y[1]) - 1.0) > 1e-12:
        raise ParameterError("y must be a unit vector")
    a = form.capital_a(y)
    bq = form.capital_b(y)
    return 1.0 / (
        2 * math.pi * math.sqrt(form.lam) * (bq * math.sqrt(form.gamma_sq + 1) - a * math.sqrt(bq))
    )


def to_wc_angle(phi, lam):
    """psi = atan2(sin phi, sqrt(lam) cos phi): centred GCPC angle to its WC image."""
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise ParameterError("lambda must be > 0")
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise ParameterError("angles must be finite")
    out = np.arctan2(np.sin(phi), np.sqrt(lam) * np.cos(phi))
    return out if out.ndim else float(out)


def from_wc_angle(psi, lam):
    """phi = atan2(sqrt(lam) sin psi, cos psi); inverse of :func:`to_wc_angle`."""
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise ParameterError("lambda must be > 0")
    psi = np.asarray(psi, dtype=float)
    if not np.all(np.isfinite(psi)):
        raise ParameterError("angles must be finite")
    out = np.arctan2(np.sqrt(lam) * np.sin(psi), np.cos(psi))
    return out if out.ndim else float(out)


def _unwrapped_cdf(t, params: GcpcParams):
    """Cumulative mass from omega - pi, continued so that H(t + 2 pi) = H(t) + 1."""
    x = np.asarray(t, dtype=float) - params.omega
    turns = np.floor((x + np.pi) / TWO_PI)
    phi = x - TWO_PI * turns
    # phi in [-pi, pi); the WC CDF of the mapped angle is monotone there
    psi = to_wc_angle(phi, params.lam)
    # atan2 returns +pi at phi = -pi; that point carries zero mass from the base
    psi = np.where(phi <= -np.pi, -np.pi, psi)
    return turns + wc_cdf(psi, params.delta)


def interval_probability(a: float, b: float, params: GcpcParams) -> float:
    """P(a <= theta <= b) for the arc running counter-clockwise from ``a`` to ``b``.

    ``a`` and ``b`` are positions on the real line with ``a <= b <= a + 2 pi``;
    the arc may cross the -pi/pi seam.
    """
    a, b = float(a), float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ParameterError("interval endpoints must be finite")
    if b < a:
        raise ParameterError("interval requires a <= b")
    if b - a > TWO_PI * (1 + 1e-15):
        raise ParameterError("interval longer than the full circle")
    p = float(_unwrapped_cdf(b, params) - _unwrapped_cdf(a, params))
    return min(max(p, 0.0), 1.0)


def sample(params: GcpcParams, n: int, seed=None, *, rng: np.random.Generator | None = None):
    """Draw ``n`` angles in [-pi, pi).

    psi is drawn from WC(0, delta) by inverse CDF and mapped through
    ``from_wc_angle``; the result is shifted by omega.  Pass either ``seed``
    (anything accepted by ``numpy.random.default_rng``) or a generator.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    return sample_array(params.omega, params.gamma, params.lam, int(n), rng)


def sample_array(omega, gamma, lam, n: int, rng: np.random.Generator):
    """Vectorised sampler; ``omega`` and ``gamma`` may be length-``n`` arrays."""
    u = rng.random(n)
    delta = np.asarray(gamma, dtype=float) / (np.sqrt(np.asarray(gamma, dtype=float) ** 2 + 1) + 1)
    psi = _wc_quantile_unchecked(u, delta)
    phi = np.arctan2(np.sqrt(lam) * np.sin(psi), np.cos(psi))
    return canonical_angle(phi + omega)


# -- unimodality --------------------------------------------------------------

_ROOT_TOL = 1e-9


@dataclass(frozen=True)
class UnimodalityVerdict:
    """Result of :func:`classify_unimodality`.

    ``critical_roots`` are the admissible values t* = cos^2(theta - omega) of
    off-axis critical points.  ``mode_angles`` lists the local maxima of the
    density (one entry when unimodal); ``antimode_angles`` the local minima.
    """

    unimodal: bool
    case_label: str
    critical_roots: list = field(default_factory=list)
    mode_angles: list = field(default_factory=list)
    antimode_angles: list = field(default_factory=list)
    inequality_verdict: bool | None = None


def _case_label(gamma: float, lam: float) -> str:
    g2 = gamma * gamma
    if lam == 1.0:
        return "LambdaOne"
    if 1.0 < lam <= g2 + 1.0:
        # lam = gamma^2 + 1 closes Case A
        return "A"
    if lam > g2 + 1.0:
        return "B"
    if 0.5 < lam < 1.0:
        return "C"
    return "D"


def _inequality_unimodal(gamma: float, lam: float, label: str) -> bool:
    """Polynomial inequalities of Cases B and C; A is unimodal and D bimodal."""
    g2 = gamma * gamma
    if label in ("LambdaOne", "A"):
        return True
    if label == "B":
        return (g2 + 1) * (lam - 1) > (lam - g2 - 1) * (2 * lam - 1) ** 2
    if label == "C":
        return (g2 + 1 - lam) * (1 - 2 * lam) ** 2 > (g2 + 1) * (1 - lam)
    return False


def critical_bracket(u, gamma: float, lam: float):
    """Bracketed factor of d log f / d theta as a function of u = cos(theta - omega)."""
    u = np.asarray(u, dtype=float)
    c = math.sqrt(gamma * gamma + 1)
    return (
        2 * (lam - 1) * c * u * np.sqrt(((lam - 1) * u * u + 1) / lam)
        - 2 * (lam - 1) * gamma * u * u
        - gamma
    )


def condition_margin(gamma: float, lam: float) -> float:
    """Signed size of the expression deciding the case; near zero at case boundaries."""
    if lam == 1.0:
        return math.inf
    g2 = gamma * gamma
    margins = [lam - 1.0, lam - g2 - 1.0, lam - 0.5]
    if lam > g2 + 1:
        margins.append((g2 + 1) * (lam - 1) - (lam - g2 - 1) * (2 * lam - 1) ** 2)
    elif 0.5 < lam < 1:
        margins.append((g2 + 1 - lam) * (1 - 2 * lam) ** 2 - (g2 + 1) * (1 - lam))
    return min(abs(m) for m in margins)


def _candidate_roots(gamma: float, lam: float) -> list[float]:
    M = lam - gamma * gamma - 1.0
    if lam == 1.0:
        return []
    if M == 0.0:
        # quadratic degenerates to -lam gamma^2 = 0: no off-axis roots for gamma > 0
        return []
    g2 = gamma * gamma
    # 4 (lam-1)^2 M t^2 + 4 (lam-1) M t - lam gamma^2 = 0
    qa = 4 * (lam - 1) ** 2 * M
    qb = 4 * (lam - 1) * M
    qc = -lam * g2
    disc = qb * qb - 4 * qa * qc
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    # numerically stable pair of roots
    qq = -0.5 * (qb + math.copysign(sq, qb))
    roots = [qq / qa]
    if qq != 0:
        roots.append(qc / qq)
    else:
        roots.append(-qb / qa - roots[0])
    return roots


def classify_unimodality(params: GcpcParams) -> UnimodalityVerdict:
    """Decide whether the density has one or two modes.

    The case label follows the parameter regions LambdaOne (lam = 1),
    A (1 < lam <= gamma^2+1), B (lam > gamma^2+1), C (1/2 < lam < 1) and
    D (lam <= 1/2); the uniform law (gamma = 0, lam = 1) is MDegenerate.  Modality itself comes from the
    critical points: theta = omega, omega + pi and omega +- arccos(u*) for
    each root t* = u*^2 of the squared stationarity equation that also solves
    the unsquared one.  Local maxima are then read off by comparing density
    values of neighbouring critical points.
    """
    gamma, lam, omega = params.gamma, params.lam, params.omega
    label = _case_label(gamma, lam)
    by_inequality = _inequality_unimodal(gamma, lam, label)

    if lam == 1.0:
        if gamma == 0.0:
            # uniform: flat, no mode
            return UnimodalityVerdict(True, "MDegenerate", [], [], [], by_inequality)
        return UnimodalityVerdict(True, label, [], [omega], [canonical_angle(omega + np.pi)], by_inequality)

    verified_t = []
    offaxis = []
    scale = 2 * abs(lam - 1) * math.sqrt(gamma**2 + 1) + 2 * abs(lam - 1) * gamma + gamma + 1
    for t in _candidate_roots(gamma, lam):
        if not (0.0 <= t < 1.0):
            continue
        for u in {math.sqrt(t), -math.sqrt(t)}:
            if abs(critical_bracket(u, gamma, lam)) <= _ROOT_TOL * scale:
                verified_t.append(t)
                offaxis.append(math.acos(u))

    # critical points in (-pi, pi], centred at omega
    crit = sorted({0.0, math.pi, *offaxis, *(-x for x in offaxis)})
    vals = np.exp(logpdf_polar(np.array(crit), 0.0, gamma, lam))
    k = len(crit)
    modes, antimodes = [], []
    for i in range(k):
        prev, nxt = vals[(i - 1) % k], vals[(i + 1) % k]
        if k == 1 or (vals[i] > prev and vals[i] > nxt):
            modes.append(crit[i])
        elif vals[i] < prev and vals[i] < nxt:
            antimodes.append(crit[i])
    unimodal = len(modes) == 1
    if unimodal != by_inequality:
        log.info(
            "case %s inequality (%s) disagrees with verified critical points (%s) at gamma=%g lam=%g",
            label, by_inequality, unimodal, gamma, lam,
        )
    return UnimodalityVerdict(
        unimodal=unimodal,
        case_label=label,
        critical_roots=sorted(set(verified_t)),
        mode_angles=[canonical_angle(omega + m) for m in modes],
        antimode_angles=[canonical_angle(omega + m) for m in antimodes],
        inequality_verdict=by_inequality,
    )
