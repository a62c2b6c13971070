"""Mean resultant length, circular spread, entropy and KL divergence.

Mean resultant length
---------------------
With psi the wrapped Cauchy image of theta - omega, rho = E[cos(theta - omega)]
becomes

    rho = (1 - d^2) / (2 pi) int cos(psi) / ((1 + d^2 - 2 d cos psi) sqrt(1 + (lam-1) sin^2 psi)) dpsi.

Folding psi -> pi - psi and substituting u = pi/2 - psi reduces it to

    rho = (1 - d^2) / (pi d sqrt(lam)) [Pi(n | m) - K(m)],
    n = 4 d^2 / (1 + d^2)^2,  m = 1 - 1/lam,

and since Pi(n | m) - K(m) = (n/3) R_J(0, 1 - m, 1, 1 - n) no cancellation
remains for small d.  Single-Pi closed forms such as
Pi((r^2 / lam) - 1, 1 - 1/lam^2) and Pi(r^2 (1/lam - 1), sqrt(1 - 1/lam^2))
with r = (1+d)/(1-d) and prefactor 2 r / (pi sqrt(lam)), do not reproduce the
quadrature value under either modulus convention; see
``tests/test_summaries.py::test_single_pi_conventions_disagree_with_quadrature``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import GcpcParams, logpdf_polar
from .errors import ConvergenceError, ParameterError
from .specfun import carlson_rj, ellint_k_complete, ellint_pi_complete, EllipticPiArgs, quad_adaptive, wc_pdf

log = logging.getLogger(__name__)

__all__ = [
    "CircularSummary",
    "circular_summary",
    "entropy",
    "kl_gcpc_from_cipc",
    "mean_resultant_length",
    "rho_by_quadrature",
]

_KL_QUAD_TOL = 1e-10


def rho_by_quadrature(params: GcpcParams, tol: float = 1e-12) -> float:
    """E[cos(theta - omega)] by direct adaptive quadrature of cos(phi) f(phi)."""
    g, lam = params.gamma, params.lam

    def integrand(phi):
        return math.cos(phi) * math.exp(logpdf_polar(phi, 0.0, g, lam))

    return quad_adaptive(integrand, -math.pi, math.pi, tol, points=[0.0]).value


def mean_resultant_length(params: GcpcParams) -> float:
    gamma, lam = params.gamma, params.lam
    if gamma == 0.0:
        # f(phi) = f(phi + pi) when gamma = 0
        return 0.0
    d = params.delta
    if lam == 1.0:
        return d
    n = 4 * d * d / (1 + d * d) ** 2
    m = 1 - 1 / lam
    try:
        EllipticPiArgs(n, m)
        rj = carlson_rj(0.0, 1.0 - m, 1.0, 1.0 - n)
    except (ParameterError, ConvergenceError):
        log.warning("elliptic route out of domain at gamma=%g lam=%g, using quadrature", gamma, lam)
        return rho_by_quadrature(params)
    # (1 - d^2) / (pi d sqrt(lam)) * (n / 3) R_J
    return 4 * d * (1 - d * d) * rj / (3 * math.pi * math.sqrt(lam) * (1 + d * d) ** 2)


def rho_pi_minus_k(params: GcpcParams) -> float:
    """Same quantity through Pi(n | m) - K(m); loses accuracy as gamma -> 0."""
    d = params.delta
    n = 4 * d * d / (1 + d * d) ** 2
    m = 1 - 1 / params.lam
    pi_nm = ellint_pi_complete(EllipticPiArgs(n, m))
    return (1 - d * d) / (math.pi * d * math.sqrt(params.lam)) * (pi_nm - ellint_k_complete(m))


def _sqrt_lam_term(params: GcpcParams) -> float:
    d2 = params.delta ** 2
    return math.sqrt(params.lam) * (1 - d2) + 1 + d2


def entropy(params: GcpcParams) -> float:
    """Differential entropy log{8 pi sqrt(lam) (1-d^2) / [sqrt(lam)(1-d^2) + 1 + d^2]^2}."""
    d2 = params.delta ** 2
    s = _sqrt_lam_term(params)
    return math.log(8 * math.pi * math.sqrt(params.lam) * (1 - d2) / (s * s))


def kl_gcpc_from_cipc(params: GcpcParams) -> float:
    """KL(GCPC(omega, gamma, lam) || CIPC(omega, gamma)).

    Closed-form terms plus E_WC[log(c - gamma cos psi / sqrt(1 + (lam-1) sin^2 psi))]
    under psi ~ WC(0, delta), the expectation by quadrature.
    """
    gamma, lam = params.gamma, params.lam
    if lam == 1.0:
        return 0.0
    d = params.delta
    c = params.c

    def integrand(psi):
        s = math.sin(psi)
        inner = c - gamma * math.cos(psi) / math.sqrt(1 + (lam - 1) * s * s)
        return wc_pdf(psi, d) * math.log(inner)

    expect = quad_adaptive(integrand, -math.pi, math.pi, _KL_QUAD_TOL, points=[0.0]).value
    kl = (
        -0.5 * math.log(lam)
        + 2 * math.log(_sqrt_lam_term(params) / 2)
        - math.log(1 - d * d)
        + expect
    )
    return max(kl, 0.0)


@dataclass(frozen=True)
class CircularSummary:
    rho: float
    circ_variance: float
    circ_sd: float
    entropy: float
    kl_from_cipc: float | None = None

    @property
    def sd_infinite(self) -> bool:
        return math.isinf(self.circ_sd)


def circular_summary(params: GcpcParams, with_kl: bool = True) -> CircularSummary:
    rho = mean_resultant_length(params)
    sd = math.sqrt(-2 * math.log(rho)) if rho > 0 else math.inf
    return CircularSummary(
        rho=rho,
        circ_variance=1 - rho,
        circ_sd=sd,
        entropy=entropy(params),
        kl_from_cipc=kl_gcpc_from_cipc(params) if with_kl else None,
    )
