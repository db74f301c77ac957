import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sp_special

from klpoly.errors import DomainError
from klpoly.quadrature import composite_rule, panel_edges
from klpoly.special import gamma_fn, k0, kl_decay_factor, macdonald_iy, sech

# mpmath at 30 digits
K0_VALUES = [
    (1.0, 0.421024438240708333),
    (0.5, 0.924419071227665862),
]
KIY_VALUES = [
    (1.0, 1.0, 0.289428037025992128),
    (0.5, 2.0, 0.108128332409114134),
    (3.0, 0.5, -0.0113625307524798695),
    (10.0, 1.0, 1.12945508216818024e-7),
]


@pytest.mark.parametrize("x, expected", K0_VALUES)
def test_k0_frozen_values(x, expected):
    assert k0(x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("x", [1e-2, 0.1, 3.0, 10.0, 50.0])
def test_k0_against_scipy(x):
    assert k0(x) == pytest.approx(sp_special.k0(x), rel=1e-9, abs=1e-14)


def test_k0_array_shape():
    out = k0(np.array([[0.5, 1.0], [2.0, 4.0]]))
    assert out.shape == (2, 2)
    np.testing.assert_allclose(out, sp_special.k0([[0.5, 1.0], [2.0, 4.0]]), rtol=1e-9)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_k0_domain(x):
    with pytest.raises(DomainError):
        k0(x)


@pytest.mark.parametrize("y, x, expected", KIY_VALUES)
def test_macdonald_frozen_values(y, x, expected):
    assert macdonald_iy(y, x) == pytest.approx(expected, abs=1e-11)


def test_macdonald_order_zero_is_k0():
    assert macdonald_iy(0.0, 1.3) == pytest.approx(sp_special.k0(1.3), rel=1e-10)


@pytest.mark.parametrize("y, x", [(2.5, 0.3), (7.0, 4.0), (15.0, 2.0)])
def test_macdonald_against_mpmath(y, x):
    mpmath.mp.dps = 30
    ref = float(mpmath.re(mpmath.besselk(1j * y, x)))
    assert macdonald_iy(y, x) == pytest.approx(ref, abs=1e-11)


def test_macdonald_broadcast():
    out = macdonald_iy(np.array([0.0, 1.0, 2.0])[:, None], np.array([0.5, 1.0]))
    assert out.shape == (3, 2)
    assert out[1, 1] == pytest.approx(0.289428037025992128, abs=1e-11)


@pytest.mark.parametrize("y, x", [(1.0, 0.0), (-1.0, 1.0)])
def test_macdonald_domain(y, x):
    with pytest.raises(DomainError):
        macdonald_iy(y, x)


@given(
    st.floats(0.0, 20.0),
    st.floats(1e-2, 50.0),
    st.floats(1e-3, 1.0),
)
def test_bound_chain(y, x, beta):
    kiy = abs(macdonald_iy(y, x))
    kx = k0(x)
    assert kiy <= kx + 1e-9
    assert kx <= k0(beta * x) + 1e-9
    assert kiy <= kl_decay_factor(y, beta) * k0(beta * x) + 1e-9


def cosine_projection(x, t, Y=40.0):
    y, w = composite_rule(panel_edges(0.0, Y, max_width=0.25), 16)
    return float(w @ (macdonald_iy(y, x) * np.cos(t * y)))


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_cosine_projection_uses_cosh(x, t):
    assert cosine_projection(x, t) == pytest.approx(0.5 * math.pi * math.exp(-x * math.cosh(t)),
                                                    abs=1e-6)


def test_cosine_projection_not_cos():
    # the cos-variant of the identity is off by far more than the tolerance
    assert abs(cosine_projection(1.0, 1.0) - 0.5 * math.pi * math.exp(-math.cos(1.0))) > 1e-2


@pytest.mark.parametrize(
    "x, expected", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (5.0, 24.0), (170.5, None)]
)
def test_gamma_values(x, expected):
    if expected is None:
        expected = sp_special.gamma(x)
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-12)


@given(st.floats(1e-3, 100.0))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-12)


@given(st.floats(1e-3, 0.999))
def test_gamma_reflection(x):
    assert gamma_fn(x) * gamma_fn(1 - x) == pytest.approx(math.pi / math.sin(math.pi * x),
                                                          rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -2.0, 172.0])
def test_gamma_domain(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_sech_examples():
    assert sech(0.0) == 1.0
    assert sech(20.0) < 1e-8
    assert sech(1e4) == 0.0


@given(st.floats(-700.0, 700.0))
def test_sech_even_and_bounded(t):
    s = sech(t)
    assert s == sech(-t)
    assert 0.0 <= s <= 1.0
    if abs(t) < 50:
        assert s == pytest.approx(1.0 / math.cosh(t), rel=1e-14)


def test_kl_decay_factor():
    assert kl_decay_factor(2.0, 0.5) == pytest.approx(math.exp(-2.0 * math.pi / 3.0))
    assert kl_decay_factor(3.0, 1.0) == 1.0
