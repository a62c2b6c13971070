import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcpc.core import GcpcParams, delta_to_gamma, pdf_polar
from gcpc.errors import ParameterError
from gcpc.specfun import EllipticPiArgs, ellint_pi_complete, quad_adaptive, wc_pdf
from gcpc.summaries import (
    circular_summary,
    entropy,
    kl_gcpc_from_cipc,
    mean_resultant_length,
    rho_by_quadrature,
    rho_pi_minus_k,
)

from conftest import GAMMAS, LAMBDAS, PARAM_GRID

# mpmath quadrature at 30 digits
RHO_2_3_2 = 0.685965851531713395792902887228
RHO_0_05_03 = 0.263837630490363063671930792477
RHO_0_10_10 = 0.817793790774306689509883216416
H_2_3_05 = 0.904322224976608369326748028179
KL_0_2_4 = 0.133006125103213414901883037789


def entropy_by_quadrature(p):
    def integrand(t):
        f = float(pdf_polar(t, p))
        return -f * math.log(f)

    return quad_adaptive(integrand, p.omega - math.pi, p.omega + math.pi, 1e-13, points=[p.omega]).value


def kl_by_quadrature(p):
    def integrand(t):
        f = float(pdf_polar(t, p))
        return f * math.log(f / wc_pdf(t, p.delta, p.omega))

    return quad_adaptive(integrand, p.omega - math.pi, p.omega + math.pi, 1e-13, points=[p.omega]).value


def test_rho_special_cases():
    assert mean_resultant_length(GcpcParams(1.0, 0.0, 1.0)) == 0.0
    assert mean_resultant_length(GcpcParams(1.0, 0.0, 3.0)) == 0.0
    assert mean_resultant_length(GcpcParams(0.0, 4 / 3, 1.0)) == pytest.approx(0.5, abs=1e-15)


def test_rho_reference_values():
    assert mean_resultant_length(GcpcParams(2, 3, 2)) == pytest.approx(RHO_2_3_2, abs=1e-13)
    assert mean_resultant_length(GcpcParams(0, 0.5, 0.3)) == pytest.approx(RHO_0_05_03, abs=1e-13)
    assert mean_resultant_length(GcpcParams(0, 10, 10)) == pytest.approx(RHO_0_10_10, abs=1e-13)


@pytest.mark.parametrize("g,lam", PARAM_GRID)
def test_rho_against_quadrature(g, lam):
    p = GcpcParams(0.0, g, lam)
    assert abs(mean_resultant_length(p) - rho_by_quadrature(p)) < 1e-8


def test_rho_equals_delta_at_lambda_one():
    for d in np.linspace(0, 0.98, 15):
        p = GcpcParams(0.0, delta_to_gamma(d), 1.0)
        assert abs(mean_resultant_length(p) - d) < 1e-10


def test_rho_pi_minus_k_route_agrees_away_from_zero():
    for g, lam in ((2.0, 2.0), (0.5, 0.3), (10.0, 10.0)):
        p = GcpcParams(0.0, g, lam)
        assert rho_pi_minus_k(p) == pytest.approx(mean_resultant_length(p), rel=1e-12)


def _single_pi_forms(p):
    d, lam = p.delta, p.lam
    r = (1 + d) / (1 - d)
    pref = 2 * r / (math.pi * math.sqrt(lam))
    out = []
    # statement form: characteristic r^2/lam - 1, second argument 1 - 1/lam^2
    # proof form: characteristic r^2 (1/lam - 1), second argument sqrt(1 - 1/lam^2)
    chars = (r * r / lam - 1, r * r * (1 / lam - 1))
    seconds = (1 - 1 / lam**2, math.sqrt(1 - 1 / lam**2))
    for n in chars:
        for s in seconds:
            for m in (s, s * s):  # read the second argument as parameter or as modulus
                try:
                    out.append(pref * ellint_pi_complete(EllipticPiArgs(n, m)))
                except ParameterError:
                    out.append(None)
    return out


def test_single_pi_conventions_disagree_with_quadrature():
    # pins the choice of the Pi - K form: no reading of the single-Pi
    # expressions reproduces E[cos(theta - omega)] on this grid
    for g, lam in ((2.0, 2.0), (0.5, 4.0), (3.0, 10.0)):
        p = GcpcParams(0.0, g, lam)
        target = rho_by_quadrature(p)
        for v in _single_pi_forms(p):
            assert v is None or abs(v - target) > 1e-3
        assert abs(mean_resultant_length(p) - target) < 1e-10


def test_rho_monotone_in_gamma_and_lambda():
    for lam in LAMBDAS:
        r = [mean_resultant_length(GcpcParams(0, g, lam)) for g in np.geomspace(0.01, 50, 30)]
        assert np.all(np.diff(r) > 0)
    for g in GAMMAS[1:]:
        r = [mean_resultant_length(GcpcParams(0, g, lam)) for lam in np.geomspace(0.05, 50, 30)]
        assert np.all(np.diff(r) < 0)


@given(st.floats(0.0, 30.0), st.floats(0.01, 100.0))
def test_rho_in_unit_interval(g, lam):
    r = mean_resultant_length(GcpcParams(0, g, lam))
    assert 0.0 <= r <= 1.0


def test_entropy_special_cases():
    for d in (0.0, 0.3, 0.8):
        p = GcpcParams(0, delta_to_gamma(d), 1.0)
        assert abs(entropy(p) - math.log(2 * math.pi * (1 - d * d))) < 1e-12
    for lam in (0.1, 1.0, 4.0, 25.0):
        s = math.sqrt(lam)
        assert abs(entropy(GcpcParams(0, 0, lam)) - math.log(8 * math.pi * s / (s + 1) ** 2)) < 1e-12
        assert entropy(GcpcParams(0, 0, lam)) <= math.log(2 * math.pi) + 1e-15


def test_entropy_reference():
    assert entropy(GcpcParams(2, 3, 0.5)) == pytest.approx(H_2_3_05, abs=1e-13)


def test_entropy_against_quadrature_grid():
    worst = max(abs(entropy(GcpcParams(0.4, g, lam)) - entropy_by_quadrature(GcpcParams(0.4, g, lam))) for g, lam in PARAM_GRID)
    assert worst < 1e-8


def test_entropy_monotonicity():
    # decreasing in gamma for lam <= 9 (dH/d(d^2) at d = 0 is
    # -1 - 2 (1 - s) / (1 + s), s = sqrt(lam)); increasing in lambda up to
    # lam = ((1 + d^2) / (1 - d^2))^2, where the closed form peaks
    for lam in (0.1, 0.5, 1.0, 2.0, 9.0):
        h = [entropy(GcpcParams(0, g, lam)) for g in np.geomspace(0.01, 50, 30)]
        assert np.all(np.diff(h) < 0)
    assert entropy(GcpcParams(0, 0.1, 10.0)) > entropy(GcpcParams(0, 0.0, 10.0))
    for g in GAMMAS:
        d2 = GcpcParams(0, g, 1).delta ** 2
        top = ((1 + d2) / (1 - d2)) ** 2
        lams = np.geomspace(0.01, top, 30)
        h = [entropy(GcpcParams(0, g, lam)) for lam in lams]
        assert np.all(np.diff(h) > -1e-15)


def test_kl_values():
    assert kl_gcpc_from_cipc(GcpcParams(0, 2, 1)) == 0.0
    assert kl_gcpc_from_cipc(GcpcParams(0, 2, 4)) == pytest.approx(KL_0_2_4, abs=1e-10)


def test_kl_against_definition_grid():
    for g, lam in PARAM_GRID:
        p = GcpcParams(0.3, g, lam)
        k = kl_gcpc_from_cipc(p)
        assert k >= 0
        assert abs(k - kl_by_quadrature(p)) < 1e-8


def test_circular_summary_fields():
    s = circular_summary(GcpcParams(0, 0, 1))
    assert s.rho == 0 and s.circ_variance == 1 and s.sd_infinite
    assert s.entropy == pytest.approx(math.log(2 * math.pi))
    s = circular_summary(GcpcParams(1, 2, 3))
    assert s.circ_variance == 1 - s.rho
    assert s.circ_sd == pytest.approx(math.sqrt(-2 * math.log(s.rho)))
    assert circular_summary(GcpcParams(1, 2, 3), with_kl=False).kl_from_cipc is None
