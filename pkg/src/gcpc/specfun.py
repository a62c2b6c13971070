"""Special functions and quadrature used throughout the package.

Carlson's symmetric elliptic integrals are evaluated with the duplication
theorem (Carlson 1995, Numer. Algorithms 10).  The complete integral of the
third kind is expressed through them as

    Pi(n | m) = R_F(0, 1 - m, 1) + (n / 3) R_J(0, 1 - m, 1, 1 - n),

which stays real and non-singular for every m < 1, n < 1 (negative parameter
and characteristic included).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, ParameterError

__all__ = [
    "EllipticPiArgs",
    "QuadratureResult",
    "carlson_rc",
    "carlson_rf",
    "carlson_rj",
    "chi2_sf",
    "ellint_k_complete",
    "ellint_pi_complete",
    "quad_adaptive",
    "wc_cdf",
    "wc_pdf",
    "wc_quantile",
]

# Carlson's r: the truncated series then has relative error well below 1e-15.
_CARLSON_R = 1e-16
_CARLSON_MAXITER = 100
_DEFAULT_MAX_EVALS = 10_000
# scipy's QAGS applies a 21-point Kronrod rule per subinterval, and each
# bisection evaluates two new panels.
_KRONROD_POINTS = 21


def carlson_rc(x: float, y: float) -> float:
    """Degenerate Carlson integral R_C(x, y) = R_F(x, y, y), for x >= 0, y > 0."""
    if x < 0 or y <= 0:
        raise ParameterError(f"carlson_rc requires x >= 0, y > 0 (got {x}, {y})")
    if x == y:
        return 1.0 / math.sqrt(x)
    e = (y - x) / x if x > 0 else math.inf
    if x > 0 and abs(e) < 1e-4:
        # series in e = y/x - 1
        return (1 - e / 3 + e * e / 5 - e**3 / 7 + e**4 / 9) / math.sqrt(x)
    if y > x:
        return math.atan(math.sqrt((y - x) / x)) / math.sqrt(y - x) if x > 0 else math.pi / (2 * math.sqrt(y))
    return math.atanh(math.sqrt((x - y) / x)) / math.sqrt(x - y)


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral of the first kind.

    R_F(x, y, z) = 1/2 int_0^inf dt / sqrt((t+x)(t+y)(t+z)), with all
    arguments non-negative and at most one of them zero.
    """
    x, y, z = float(x), float(y), float(z)
    if min(x, y, z) < 0:
        raise ParameterError("carlson_rf arguments must be non-negative")
    if (x == 0) + (y == 0) + (z == 0) > 1:
        raise ParameterError("carlson_rf allows at most one zero argument")
    if not all(math.isfinite(v) for v in (x, y, z)):
        raise ParameterError("carlson_rf arguments must be finite")

    a0 = (x + y + z) / 3.0
    q = (3.0 * _CARLSON_R) ** (-1.0 / 6.0) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    xm, ym, zm, am = x, y, z, a0
    scale = 1.0
    for _ in range(_CARLSON_MAXITER):
        if scale * q < abs(am):
            break
        sx, sy, sz = math.sqrt(xm), math.sqrt(ym), math.sqrt(zm)
        lam = sx * sy + sx * sz + sy * sz
        xm, ym, zm, am = (xm + lam) / 4, (ym + lam) / 4, (zm + lam) / 4, (am + lam) / 4
        scale /= 4.0
    else:  # pragma: no cover - duplication converges geometrically
        raise ConvergenceError("carlson_rf did not converge")

    dx = (a0 - x) * scale / am
    dy = (a0 - y) * scale / am
    dz = -dx - dy
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    poly = 1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44
    return poly / math.sqrt(am)


def carlson_rj(x: float, y: float, z: float, p: float) -> float:
    """Carlson's symmetric integral of the third kind.

    R_J(x, y, z, p) = 3/2 int_0^inf dt / ((t+p) sqrt((t+x)(t+y)(t+z))).

    Only p > 0 is supported; the Cauchy principal value branch is rejected.
    """
    x, y, z, p = float(x), float(y), float(z), float(p)
    if p <= 0:
        raise ParameterError("carlson_rj requires p > 0 (principal value not supported)")
    if min(x, y, z) < 0:
        raise ParameterError("carlson_rj arguments x, y, z must be non-negative")
    if (x == 0) + (y == 0) + (z == 0) > 1:
        raise ParameterError("carlson_rj allows at most one zero among x, y, z")
    if not all(math.isfinite(v) for v in (x, y, z, p)):
        raise ParameterError("carlson_rj arguments must be finite")

    a0 = (x + y + z + 2 * p) / 5.0
    delta = (p - x) * (p - y) * (p - z)
    q = (_CARLSON_R / 4.0) ** (-1.0 / 6.0) * max(
        abs(a0 - x), abs(a0 - y), abs(a0 - z), abs(a0 - p)
    )
    xm, ym, zm, pm, am = x, y, z, p, a0
    scale = 1.0
    total = 0.0
    for _ in range(_CARLSON_MAXITER):
        if scale * q < abs(am):
            break
        sx, sy, sz, sp = math.sqrt(xm), math.sqrt(ym), math.sqrt(zm), math.sqrt(pm)
        lam = sx * sy + sx * sz + sy * sz
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = scale**3 * delta / (d * d)
        total += scale * carlson_rc(1.0, 1.0 + e) / d
        xm, ym, zm = (xm + lam) / 4, (ym + lam) / 4, (zm + lam) / 4
        pm, am = (pm + lam) / 4, (am + lam) / 4
        scale /= 4.0
    else:  # pragma: no cover
        raise ConvergenceError("carlson_rj did not converge")

    dx = (a0 - x) * scale / am
    dy = (a0 - y) * scale / am
    dz = (a0 - z) * scale / am
    dp = (-dx - dy - dz) / 2
    e2 = dx * dy + dx * dz + dy * dz - 3 * dp * dp
    e3 = dx * dy * dz + 2 * e2 * dp + 4 * dp**3
    e4 = (2 * dx * dy * dz + e2 * dp + 3 * dp**3) * dp
    e5 = dx * dy * dz * dp * dp
    poly = (
        1
        - 3 * e2 / 14
        + e3 / 6
        + 9 * e2 * e2 / 88
        - 3 * e4 / 22
        - 9 * e2 * e3 / 52
        + 3 * e5 / 26
    )
    return scale * am ** (-1.5) * poly + 6 * total


@dataclass(frozen=True)
class EllipticPiArgs:
    """Arguments of Pi(n, k): characteristic ``n`` and parameter ``m = k**2``.

    ``m`` is stored rather than the modulus so that negative parameters
    (imaginary modulus) remain representable.
    """

    n: float
    m: float

    def __post_init__(self):
        if not (math.isfinite(self.n) and math.isfinite(self.m)):
            raise ParameterError("elliptic arguments must be finite")
        if self.m >= 1:
            raise ParameterError(f"parameter m = k^2 must be < 1 (got {self.m})")
        if self.n >= 1:
            raise ParameterError(f"characteristic n must be < 1 (got {self.n})")

    @classmethod
    def from_modulus(cls, n: float, k: float) -> "EllipticPiArgs":
        return cls(n=float(n), m=float(k) ** 2)

    @property
    def k(self) -> float:
        if self.m < 0:
            raise ParameterError("modulus is imaginary for m < 0")
        return math.sqrt(self.m)


def ellint_k_complete(m: float) -> float:
    """Complete elliptic integral of the first kind K(m), m = k**2 < 1."""
    if m >= 1:
        raise ParameterError(f"K(m) requires m < 1 (got {m})")
    return carlson_rf(0.0, 1.0 - m, 1.0)


def ellint_pi_complete(args: EllipticPiArgs | float, k: float | None = None) -> float:
    """Complete elliptic integral of the third kind.

    Pi(n, k) = int_0^{pi/2} dt / ((1 - n sin^2 t) sqrt(1 - k^2 sin^2 t)).

    Call as ``ellint_pi_complete(EllipticPiArgs(n, m))`` or with the modulus,
    ``ellint_pi_complete(n, k)``.
    """
    if not isinstance(args, EllipticPiArgs):
        if k is None:
            raise TypeError("pass EllipticPiArgs or both n and k")
        args = EllipticPiArgs.from_modulus(args, k)
    n, m = args.n, args.m
    rf = carlson_rf(0.0, 1.0 - m, 1.0)
    if n == 0:
        return rf
    return rf + n / 3.0 * carlson_rj(0.0, 1.0 - m, 1.0, 1.0 - n)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


def quad_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    *,
    rel_tol: float = 0.0,
    max_evals: int = _DEFAULT_MAX_EVALS,
    points=None,
) -> QuadratureResult:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over [a, b].

    Backed by QUADPACK (``scipy.integrate.quad``).  Infinite limits are
    allowed.  Raises :class:`ConvergenceError` when the evaluation budget is
    exhausted before the error estimate drops below ``tol``.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    limit = max(1, max_evals // (2 * _KRONROD_POINTS))
    kwargs = {}
    if points is not None and np.isfinite(a) and np.isfinite(b):
        kwargs["points"] = points
    out = integrate.quad(
        f, a, b, epsabs=tol, epsrel=rel_tol, limit=limit, full_output=1, **kwargs
    )
    value, abserr, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else 1
    if ier and abserr > max(tol, rel_tol * abs(value)):
        raise ConvergenceError(
            f"quadrature did not reach tol={tol:g} (estimate {abserr:.3g}): {out[3]}"
        )
    return QuadratureResult(float(value), float(abserr), int(info["neval"]))


def wc_pdf(psi, delta: float, omega: float = 0.0):
    """Wrapped Cauchy density with location ``omega`` and concentration ``delta``."""
    _check_delta(delta)
    psi = np.asarray(psi, dtype=float)
    # 1 + d^2 - 2 d cos x written without cancellation near x = 0
    den = (1 - delta) ** 2 + 4 * delta * np.sin(0.5 * (psi - omega)) ** 2
    out = (1 - delta) * (1 + delta) / (2 * np.pi * den)
    return out if out.ndim else float(out)


def wc_cdf(psi, delta: float):
    """Wrapped Cauchy CDF (location 0) with base point -pi.

    Inside [-pi, pi] this is 1/2 + atan2((1+d) sin(psi/2), (1-d) cos(psi/2)) / pi;
    outside, the cumulative mass is continued so that F(psi + 2 pi) = F(psi) + 1.
    """
    _check_delta(delta)
    psi = np.asarray(psi, dtype=float)
    turns = np.round(psi / (2 * np.pi))
    r = psi - 2 * np.pi * turns
    h = 0.5 * r
    out = turns + 0.5 + np.arctan2((1 + delta) * np.sin(h), (1 - delta) * np.cos(h)) / np.pi
    return out if out.ndim else float(out)


def wc_quantile(u, delta: float):
    """Inverse of :func:`wc_cdf` on (0, 1); returns angles in (-pi, pi)."""
    _check_delta(delta)
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)) or not np.all(np.isfinite(u)):
        raise ParameterError("wc_quantile requires u in the open interval (0, 1)")
    out = _wc_quantile_unchecked(u, delta)
    return out if out.ndim else float(out)


def _wc_quantile_unchecked(u, delta):
    h = np.pi * (u - 0.5)
    return 2 * np.arctan2((1 - delta) * np.sin(h), (1 + delta) * np.cos(h))


def _check_delta(delta):
    if not (0 <= delta < 1):
        raise ParameterError(f"wrapped Cauchy concentration must lie in [0, 1) (got {delta})")


def chi2_sf(x, df: int):
    """Upper tail of the chi-square distribution via the regularized gamma function."""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    out = special.gammaincc(df / 2.0, x / 2.0)
    return out if np.ndim(out) else float(out)
