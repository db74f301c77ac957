import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from klpoly.convolutions import (
    COMPOSED_GRID,
    POLY_SCALE,
    PolyconvInput,
    kernel_bound_audit,
    kernel_phi,
    polyconv_composed,
    polyconv_direct,
    polyconv_spectral,
    polyconv_spectral_at,
    sneddon_conv,
    sneddon_function,
    sneddon_table,
    yb_conv,
    yb_function,
)
from klpoly.errors import DomainError
from klpoly.family import REGISTERED_TRIPLES
from klpoly.funcmodel import ExpDecay, Gaussian, GridSpec, Indicator, PowExp, Scaled, zero
from klpoly.special import k0, sech
from klpoly.transforms import DEFAULT_YGRID, fourier_values, kl_values

XS = np.array([0.5, 1.0, 2.0, 4.0, 8.0])
STANDARD = PolyconvInput(ExpDecay(1.0), ExpDecay(1.0), Indicator(1.0, 2.0), 0.5)
# independent oracle: scipy quad of the one-dimensional YB form with the closed-form profile
STANDARD_VALUES = np.array([
    0.014093294764239648,
    0.023367132434647088,
    0.02388355267426697,
    0.007717394075719538,
    0.0003057624147288589,
])


def test_scale_constant():
    assert POLY_SCALE == pytest.approx(1.0 / (2.0 * math.sqrt(2.0 * math.pi)))


def test_kernel_phi_example():
    expected = math.exp(-math.cosh(1.0)) - math.exp(-math.cosh(3.0))
    assert kernel_phi(1.0, 1.0, 1.0, 1.0) == pytest.approx(expected, rel=1e-15)


@given(st.floats(0, 10), st.floats(0, 10), st.floats(1e-3, 10))
def test_kernel_phi_vanishes_at_zero_x_or_u(a, b, w):
    assert kernel_phi(0.0, a, b, w) == 0.0
    assert kernel_phi(a, 0.0, b, w) == 0.0


def test_kernel_phi_underflow_and_domain():
    assert kernel_phi(30.0, 1.0, 1.0, 5.0) == 0.0
    with pytest.raises(DomainError):
        kernel_phi(1.0, 1.0, 1.0, 0.0)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 2.5, 7.0])
def test_sneddon_closed_form(x):
    got = sneddon_conv(ExpDecay(1.0), ExpDecay(1.0), x)
    assert got == pytest.approx(x * math.exp(-x) / math.sqrt(2 * math.pi), abs=1e-12)


def test_sneddon_against_scipy():
    f, g = Gaussian(0.7), Indicator(0.5, 1.5)
    x = 1.2
    ref = sp_integrate.quad(lambda u: f(u) * (g(abs(x - u)) - g(x + u)), 0, 12,
                            points=[0.3, 1.7, 2.7], epsabs=1e-13, limit=200)[0]
    assert sneddon_conv(f, g, x) == pytest.approx(ref / math.sqrt(2 * math.pi), abs=1e-11)


def test_yb_frozen_value():
    # mpmath, 30 digits
    assert yb_conv(ExpDecay(1.0), ExpDecay(1.0), 1.0) == pytest.approx(
        0.0937055802428780509, abs=1e-11
    )


def test_yb_against_scipy_double_integral():
    f, g, x = ExpDecay(1.0), Indicator(1.0, 2.0), 1.0
    inner = lambda v: (math.exp(-math.cosh(v - x)) - math.exp(-2 * math.cosh(v - x))) / math.cosh(
        v - x
    ) - (math.exp(-math.cosh(v + x)) - math.exp(-2 * math.cosh(v + x))) / math.cosh(v + x)
    ref = 0.5 * sp_integrate.quad(lambda v: f(v) * inner(v), 0, 60, points=[1.0], epsabs=1e-14,
                                  limit=200)[0]
    assert yb_conv(f, g, x) == pytest.approx(ref, abs=1e-11)


@pytest.mark.parametrize("fn", [sneddon_conv, yb_conv])
def test_two_function_convolutions_vanish(fn):
    assert fn(ExpDecay(1.0), Indicator(1.0, 2.0), 0.0) == pytest.approx(0.0, abs=1e-15)
    assert not np.any(fn(zero(), ExpDecay(1.0), XS))


def test_sneddon_factorization():
    f, g = PowExp(1, 1.5), Gaussian(1.0)
    y = DEFAULT_YGRID.points()
    lhs = fourier_values(sneddon_function(f, g), y, "sine")[0]
    rhs = fourier_values(f, y, "sine")[0] * fourier_values(g, y, "cosine")[0]
    assert np.max(np.abs(lhs - rhs)) <= 1e-5


def test_yb_factorization():
    f, h = Gaussian(0.5), PowExp(2, 1.0)
    y = DEFAULT_YGRID.points()
    lhs = fourier_values(yb_function(f, h), y, "sine")[0]
    rhs = fourier_values(f, y, "sine")[0] * kl_values(h, y)[0]
    assert np.max(np.abs(lhs - rhs)) <= 1e-4


def test_sneddon_table_grid():
    t = sneddon_table(ExpDecay(1.0), ExpDecay(1.0))
    assert t.sampled.grid == COMPOSED_GRID
    x = COMPOSED_GRID.points()
    np.testing.assert_allclose(t.sampled.y, x * np.exp(-x) / math.sqrt(2 * math.pi), rtol=0,
                               atol=1e-10)


@pytest.mark.parametrize(
    "path",
    [
        polyconv_direct,
        polyconv_spectral_at,
        polyconv_composed,
    ],
)
def test_standard_triple_against_oracle(path):
    got = np.asarray(path(STANDARD, XS))
    np.testing.assert_allclose(got, STANDARD_VALUES, atol=1e-5)


def test_spectral_on_grid_matches_pointwise():
    grid = GridSpec.explicit(XS.tolist())
    s = polyconv_spectral(STANDARD, grid)
    np.testing.assert_allclose(s.y, STANDARD_VALUES, atol=1e-8)


def test_direct_vanishes_at_origin_and_with_zero_slot():
    assert polyconv_direct(STANDARD, 0.0) == pytest.approx(0.0, abs=1e-15)
    inp = PolyconvInput(ExpDecay(1.0), ExpDecay(1.0), zero())
    assert polyconv_direct(inp, 1.0) == 0.0
    assert polyconv_composed(inp, 1.0) == 0.0
    assert not np.any(polyconv_spectral(inp, GridSpec.uniform(0, 5, 6)).y)


@pytest.mark.parametrize("slot", [0, 1, 2])
def test_multilinearity(slot):
    c = -2.5
    parts = [STANDARD.f, STANDARD.g, STANDARD.h]
    parts[slot] = Scaled(c, parts[slot])
    scaled = polyconv_spectral_at(PolyconvInput(*parts, 0.5), XS)
    np.testing.assert_allclose(scaled, c * STANDARD_VALUES, atol=1e-8)


def test_c0_decay():
    grid = GridSpec.uniform(0.0, 30.0, 301)
    s = polyconv_spectral(STANDARD, grid).y
    assert abs(s[-1]) < 1e-3 * np.max(np.abs(s))


def test_polyconv_input_validation():
    with pytest.raises(DomainError):
        PolyconvInput(ExpDecay(1.0), ExpDecay(1.0), ExpDecay(1.0), beta=1.5)


@pytest.mark.parametrize("triple", REGISTERED_TRIPLES[:2])
def test_three_paths_agree(triple):
    inp = PolyconvInput(*triple, 0.5)
    paths = [np.asarray(p(inp, XS)) for p in (polyconv_direct, polyconv_spectral_at,
                                                polyconv_composed)]
    for a, b in itertools.combinations(paths, 2):
        assert np.max(np.abs(a - b)) <= 1e-3


def test_kernel_audit_example():
    reports = kernel_bound_audit(1.0, 1.0, 1.0)
    assert [r.name for r in reports] == ["I1", "I2", "I3", "I4"]
    for r in reports[:3]:
        assert r.rhs == pytest.approx(4 * 0.421024438240708333, rel=1e-10)
        assert r.passed and r.margin >= 0
    assert reports[3].rhs == pytest.approx(4 * sech(1.0))
    assert reports[3].passed


def test_kernel_audit_i1_against_scipy():
    u, v, w = 0.5, 2.0, 1.0
    ref = sp_integrate.quad(lambda x: abs(kernel_phi(x, u, v, w)), 0, 20,
                            points=[1.5, 2.5], epsabs=1e-13, limit=400)[0]
    assert kernel_bound_audit(u, v, w)[0].lhs == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("a, b, c", list(itertools.product([0.5, 1.0, 2.0], repeat=3)))
def test_kernel_audit_grid(a, b, c):
    for r in kernel_bound_audit(a, b, c):
        assert r.passed, r.summary()
        assert r.margin >= 0


def test_kernel_audit_requires_positive_w():
    with pytest.raises(DomainError):
        kernel_bound_audit(1.0, 1.0, 0.0)


def test_kernel_audit_k0_bound_uses_w():
    r = kernel_bound_audit(1.0, 1.0, 2.0)[0]
    assert r.rhs == pytest.approx(4 * k0(2.0))
