import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy import special as sp_special

from klpoly.errors import DomainError, TailNotResolvable
from klpoly.quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    composite_rule,
    cosh_envelope,
    exp_envelope,
    filon_linear,
    find_cutoff,
    integrate_finite,
    integrate_oscillatory,
    integrate_semi_infinite,
    integrate_tanh_sinh,
    panel_edges,
    safe_exp,
)


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (np.sin, 0.0, math.pi, 2.0),
        (lambda x: x**7, -1.0, 2.0, (2.0**8 - 1.0) / 8.0),
        (lambda x: 1.0 / (1.0 + x * x), 0.0, 10.0, math.atan(10.0)),
    ],
)
def test_integrate_finite_closed_forms(f, a, b, exact):
    res = integrate_finite(f, a, b)
    assert res.value == pytest.approx(exact, abs=1e-10, rel=1e-10)
    assert res.error_estimate >= 0


def test_integrate_finite_kink_with_breakpoint():
    res = integrate_finite(lambda x: np.abs(x - 0.3), 0.0, 1.0, breakpoints=[0.3])
    assert res.value == pytest.approx(0.5 * (0.3**2 + 0.7**2), abs=1e-13)


def test_integrate_finite_empty_and_reversed():
    assert integrate_finite(np.exp, 1.0, 1.0).value == 0.0
    with pytest.raises(DomainError):
        integrate_finite(np.exp, 1.0, 0.0)


@pytest.mark.parametrize(
    "f, exact",
    [
        (lambda x: 1.0 / np.sqrt(x), 2.0),
        (lambda x: np.log(x), -1.0),
        (lambda x: x**-0.25 * (1 - x) ** -0.5, sp_special.beta(0.75, 0.5)),
    ],
)
def test_tanh_sinh_endpoint_singularities(f, exact):
    res = integrate_tanh_sinh(f, 0.0, 1.0)
    # nodes closer than one ulp to x = 1 are lost; for (1-x)**-0.5 that mass is ~2e-8
    assert res.value == pytest.approx(exact, rel=5e-8)


@pytest.mark.parametrize(
    "f, env, exact",
    [
        (lambda x: np.exp(-x), exp_envelope(1.0, 1.0), 1.0),
        (lambda x: x**2 * np.exp(-2 * x), exp_envelope(1.0, 1.0), 0.25),
        (lambda x: np.exp(-x * x), exp_envelope(1.0, 1.0), 0.5 * math.sqrt(math.pi)),
    ],
)
def test_semi_infinite_closed_forms(f, env, exact):
    res = integrate_semi_infinite(f, 0.0, env, graded=True)
    assert res.value == pytest.approx(exact, abs=1e-10)
    assert math.isfinite(res.truncation_point)


def test_semi_infinite_with_cosh_envelope_is_k0():
    # int_0^inf exp(-x cosh t) dt = K_0(x)
    res = integrate_semi_infinite(lambda t: np.exp(-np.cosh(t)), 0.0, cosh_envelope(1.0))
    assert res.value == pytest.approx(0.421024438240708333, abs=1e-11)


def test_semi_infinite_plain_callable_envelope():
    res = integrate_semi_infinite(lambda x: np.exp(-3 * x), 0.0, lambda t: math.exp(-3 * t))
    assert res.value == pytest.approx(1.0 / 3.0, abs=1e-10)


def test_semi_infinite_rejects_negative_start():
    with pytest.raises(DomainError):
        integrate_semi_infinite(np.exp, -1.0, exp_envelope(1.0, 1.0))


@pytest.mark.parametrize("freq", [0.5, 3.0, 40.0])
def test_oscillatory_against_closed_forms(freq):
    f = lambda t: np.exp(-t)  # noqa: E731
    c = integrate_oscillatory(f, freq, "cosine", decay_bound=exp_envelope(1.0, 1.0))
    s = integrate_oscillatory(f, freq, "sine", decay_bound=exp_envelope(1.0, 1.0))
    assert c.value == pytest.approx(1.0 / (1.0 + freq**2), abs=1e-10)
    assert s.value == pytest.approx(freq / (1.0 + freq**2), abs=1e-10)


def test_oscillatory_bad_kind():
    with pytest.raises(DomainError):
        integrate_oscillatory(np.exp, 1.0, "tangent")


def filon_reference(nodes, values, y, kind):
    trig = np.sin if kind == "sine" else np.cos
    total = 0.0
    for a, b, fa, fb in zip(nodes[:-1], nodes[1:], values[:-1], values[1:]):
        lin = lambda t: fa + (fb - fa) * (t - a) / (b - a)  # noqa: E731
        total += sp_integrate.quad(lambda t: lin(t) * trig(y * t), a, b, epsabs=1e-14,
                                   epsrel=1e-13, limit=200)[0]
    return total


@pytest.mark.parametrize("kind", ["sine", "cosine"])
@pytest.mark.parametrize("y", [0.0, 1e-6, 0.7, 25.0])
def test_filon_exact_for_piecewise_linear(kind, y):
    nodes = np.array([0.0, 0.3, 1.1, 2.0, 3.7])
    values = np.array([1.0, -0.5, 2.0, 0.25, 0.0])
    got = filon_linear(nodes, values, np.array([y]), kind)[0]
    assert got == pytest.approx(filon_reference(nodes, values, y, kind), abs=1e-12)


@given(st.floats(0.0, 50.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_filon_exact_for_single_segment(y, fa, fb):
    nodes = np.array([0.5, 2.0])
    got = filon_linear(nodes, np.array([fa, fb]), np.array([y]), "cosine")[0]
    assert got == pytest.approx(filon_reference(nodes, [fa, fb], y, "cosine"), abs=1e-11)


def test_find_cutoff_exponential():
    T = find_cutoff(lambda T: math.exp(-T), 1e-6, step=1.0 / 64.0)
    assert math.exp(-T) < 1e-6
    assert math.exp(-(T - 1.0 / 64.0)) >= 1e-6


def test_find_cutoff_unresolvable():
    with pytest.raises(TailNotResolvable):
        find_cutoff(lambda T: 1.0, 1e-3, ceiling=100.0)


@given(st.floats(1e-12, 1e-2), st.floats(1e-12, 1e-2))
def test_find_cutoff_monotone_in_eps(e1, e2):
    lo, hi = sorted((e1, e2))
    tail = lambda T: 1.0 / (1.0 + T) ** 3  # noqa: E731
    assert find_cutoff(tail, lo) >= find_cutoff(tail, hi)


def test_panel_edges_graded_and_width():
    e = panel_edges(0.0, 4.0, breakpoints=[1.5, 9.0], max_width=0.5, graded=True)
    assert e[0] == 0.0 and e[-1] == 4.0
    assert 1.5 in e and 9.0 not in e
    assert np.all(np.diff(e) > 0)
    assert np.max(np.diff(e)) <= 0.5 + 1e-15
    assert e[1] <= 2.0**-40


def test_composite_rule_integrates_polynomials():
    x, w = composite_rule(np.array([0.0, 1.0, 3.0]), 8)
    assert float(w @ x**15) == pytest.approx(3.0**16 / 16, rel=1e-13)


def test_safe_exp_underflow_policy():
    out = safe_exp(np.array([-1e4, 0.0, 1.0]))
    assert out[0] == 0.0 and out[1] == 1.0 and out[2] == pytest.approx(math.e)


@pytest.mark.parametrize(
    "kwargs", [{"abs_tol": 0.0}, {"max_refinement": 0}, {"min_nodes_per_period": 2}]
)
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureConfig(**kwargs)


def test_config_tolerance_and_dict():
    assert DEFAULT_CONFIG.tolerance(1e6) == pytest.approx(1e-2)
    assert DEFAULT_CONFIG.tolerance(0.0) == pytest.approx(1e-10)
    assert set(DEFAULT_CONFIG.to_dict()) >= {"abs_tol", "rel_tol", "tail_epsilon"}
