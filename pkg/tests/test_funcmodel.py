import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from klpoly.errors import DomainError, InputError, NonIntegrable
from klpoly.funcmodel import (
    Computed,
    Const,
    Custom,
    ExpDecay,
    Gaussian,
    GridSpec,
    Indicator,
    NormSpec,
    PowExp,
    Product,
    SampledFunction,
    Scaled,
    Sum,
    Tabulated,
    ThreeParam,
    TwoParam,
    Unit,
    dumps_csv,
    evaluate,
    interpolate,
    load_csv,
    norm,
    sample,
    save_csv,
    tabulate,
    zero,
)

INF = math.inf


@pytest.mark.parametrize(
    "f, x, expected",
    [
        (ExpDecay(1.0), 0.0, 1.0),
        (Indicator(1.0, 2.0), 1.5, 1.0),
        (Indicator(1.0, 2.0), 3.0, 0.0),
        (Scaled(math.sqrt(math.pi / 2), ExpDecay(1.0)), 1.0, math.sqrt(math.pi / 2) / math.e),
        (PowExp(2, 1.0), 2.0, 4.0 * math.exp(-2.0)),
        (Gaussian(0.5), 2.0, math.exp(-2.0)),
        (Sum(ExpDecay(1.0), Indicator(0.0, 1.0)), 0.5, math.exp(-0.5) + 1.0),
        (Product(ExpDecay(1.0), Indicator(0.0, 1.0)), 1.5, 0.0),
        (Const(3.0), 7.0, 3.0),
    ],
)
def test_evaluate_examples(f, x, expected):
    assert evaluate(f, x) == pytest.approx(expected, rel=1e-15)


def test_evaluate_rejects_negative_x():
    with pytest.raises(DomainError):
        ExpDecay(1.0)(-0.1)


@pytest.mark.parametrize(
    "ctor, args",
    [
        (ExpDecay, (0.0,)),
        (PowExp, (1.5, 1.0)),
        (PowExp, (-1, 1.0)),
        (Gaussian, (-1.0,)),
        (Indicator, (2.0, 1.0)),
        (Indicator, (-1.0, 1.0)),
        (Scaled, (math.inf, ExpDecay(1.0))),
    ],
)
def test_constructor_validation(ctor, args):
    with pytest.raises(DomainError):
        ctor(*args)


@pytest.mark.parametrize(
    "f, grid, expected",
    [
        (ExpDecay(1.0), GridSpec.uniform(0, 1, 2), (1.0, math.exp(-1))),
        (zero(), GridSpec.uniform(0, 5, 4), (0.0, 0.0, 0.0, 0.0)),
        (Gaussian(1.0), GridSpec.uniform(0, 2, 3), (1.0, math.exp(-1), math.exp(-4))),
    ],
)
def test_sample_examples(f, grid, expected):
    np.testing.assert_allclose(sample(f, grid).values, expected, rtol=1e-15)


def test_grid_kinds():
    np.testing.assert_allclose(GridSpec.log_uniform(1e-2, 1, 3).points(), [1e-2, 1e-1, 1])
    g = GridSpec.explicit([0.5, 1, 2])
    assert g.kind == "explicit" and g.lo == 0.5 and g.hi == 2.0 and g.n == 3


@pytest.mark.parametrize(
    "args",
    [
        ("uniform", -1.0, 1.0, 3),
        ("uniform", 1.0, 1.0, 3),
        ("uniform", 0.0, 1.0, 1),
        ("log-uniform", 0.0, 1.0, 3),
        ("spiral", 0.0, 1.0, 3),
        ("uniform", 0.0, math.inf, 3),
    ],
)
def test_grid_validation(args):
    with pytest.raises(DomainError):
        GridSpec(*args)


def test_explicit_grid_must_increase():
    with pytest.raises(DomainError):
        GridSpec.explicit([0.0, 2.0, 1.0])


def test_sampled_function_validation():
    with pytest.raises(DomainError):
        SampledFunction(GridSpec.uniform(0, 1, 3), (1.0, 2.0))
    with pytest.raises(DomainError):
        SampledFunction(GridSpec.uniform(0, 1, 2), (1.0, math.nan))


def test_interpolate_conventions():
    s = SampledFunction(GridSpec.explicit([1.0, 2.0, 4.0]), (3.0, 5.0, 1.0))
    assert interpolate(s, 2.0) == 5.0
    assert interpolate(s, 1.5) == pytest.approx(4.0)
    assert interpolate(s, 3.0) == pytest.approx(3.0)
    assert interpolate(s, 0.2) == 3.0
    assert interpolate(s, 4.5) == 0.0


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=30))
def test_interpolate_reproduces_nodes(values):
    grid = GridSpec.uniform(0.0, 3.0, len(values))
    s = SampledFunction.from_arrays(grid, values)
    np.testing.assert_allclose(interpolate(s, grid.points()), values, atol=1e-12)
    mids = 0.5 * (grid.points()[1:] + grid.points()[:-1])
    np.testing.assert_allclose(
        interpolate(s, mids), 0.5 * (np.array(values[1:]) + np.array(values[:-1])), atol=1e-12
    )


def test_csv_round_trip(tmp_path):
    s = sample(PowExp(1, 1.3), GridSpec.log_uniform(1e-3, 20, 57))
    path = tmp_path / "f.csv"
    save_csv(s, str(path))
    back = load_csv(str(path))
    assert back.values == s.values
    np.testing.assert_array_equal(back.x, s.x)
    assert dumps_csv(back) == path.read_text()


def test_csv_without_header(tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("0,1\n1,0.5\n2,0\n")
    s = load_csv(str(path))
    assert s.grid.kind == "explicit" and s.values == (1.0, 0.5, 0.0)


@pytest.mark.parametrize(
    "text", ["x,value\n0,1\n", "0,1\n0,2\n", "0,1,2\n1,2,3\n", "0,1\n1,abc\n"]
)
def test_csv_rejects_bad_files(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(InputError):
        load_csv(str(path))


def test_csv_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_csv(str(tmp_path / "missing.csv"))


def test_tabulated_behaves_like_linear_interpolant():
    t = tabulate(ExpDecay(1.0), GridSpec.uniform(0.0, 10.0, 11))
    assert t(0.5) == pytest.approx(0.5 * (1 + math.exp(-1)))
    assert t(11.0) == 0.0
    assert t.support() == (0.0, 10.0)


@pytest.mark.parametrize(
    "f, spec, expected",
    [
        (ExpDecay(1.0), NormSpec(1.0), 1.0),
        (ExpDecay(1.0), NormSpec(2.0), 1.0 / math.sqrt(2.0)),
        (ExpDecay(2.0), NormSpec(1.5), (1.0 / 3.0) ** (2.0 / 3.0)),
        (PowExp(2, 1.0), NormSpec(1.0), 2.0),
        (Gaussian(1.0), NormSpec(2.0), (math.pi / 8.0) ** 0.25),
        (Indicator(1.0, 3.0), NormSpec(4.0), 2.0**0.25),
        (Scaled(-2.0, ExpDecay(1.0)), NormSpec(1.0), 2.0),
        (Sum(ExpDecay(1.0), Scaled(-1.0, ExpDecay(2.0))), NormSpec(1.0), 0.5),
        # int e^{-x} K0(x) dx = 1
        (ExpDecay(1.0), NormSpec(1.0, TwoParam(0.0, 1.0)), 1.0),
        # = arccosh(2)/sqrt(3/4), frozen with mpmath
        (ExpDecay(1.0), NormSpec(1.0, TwoParam(0.0, 0.5)), 1.52069199260189270),
        (Indicator(1.0, 2.0), NormSpec(1.0, TwoParam(0.0, 0.5)), 0.630814655385258386),
        (ExpDecay(1.0), NormSpec(INF), 1.0),
        (Indicator(1.0, 2.0), NormSpec(INF), 1.0),
        (zero(), NormSpec(2.0), 0.0),
    ],
)
def test_norm_closed_forms(f, spec, expected):
    assert norm(f, spec) == pytest.approx(expected, rel=1e-8, abs=1e-12)


def test_sup_norm_is_grid_surrogate():
    # 4096 log-spaced points: never above the true peak, close to it at grid resolution
    got = norm(PowExp(1, 1.0), NormSpec(INF))
    assert got <= math.exp(-1.0)
    assert got == pytest.approx(math.exp(-1.0), rel=1e-5)


def test_norm_sign_change_integrand():
    # e^{-x} - 2 e^{-2x} changes sign at ln 2
    f = Sum(ExpDecay(1.0), Scaled(-2.0, ExpDecay(2.0)))
    r = math.log(2.0)
    exact = -(1 - math.exp(-r) - (1 - math.exp(-2 * r))) + (math.exp(-r) - math.exp(-2 * r))
    assert norm(f, NormSpec(1.0)) == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize(
    "alpha, beta, p",
    [(0.5, 0.5, 1.0), (-0.5, 0.8, 2.0), (1.0, 1.0, 1.5)],
)
def test_two_param_norm_against_mpmath(alpha, beta, p):
    mpmath.mp.dps = 20
    ref = mpmath.quad(
        lambda x: mpmath.e ** (-p * x) * mpmath.besselk(0, beta * x) * x**alpha, [0, 1, mpmath.inf]
    ) ** (1.0 / p)
    got = norm(ExpDecay(1.0), NormSpec(p, TwoParam(alpha, beta)))
    assert got == pytest.approx(float(ref), rel=1e-8)


@pytest.mark.parametrize(
    "a1, b1, g1, s", [(0.0, 1.0, 1.0, 1.0), (0.5, 2.0, 1.5, 2.0), (2.0, 0.5, 0.7, 3.0)]
)
def test_three_param_norm_of_one_is_gamma_form(a1, b1, g1, s):
    closed = (b1 ** (-(a1 + 1) / g1) * math.gamma((a1 + 1) / g1) / g1) ** (1.0 / s)
    assert norm(Const(1.0), NormSpec(s, ThreeParam(a1, b1, g1))) == pytest.approx(closed, rel=1e-8)


def test_three_param_norm_against_mpmath():
    mpmath.mp.dps = 20
    ref = mpmath.sqrt(mpmath.quad(lambda t: t**0.5 * mpmath.e ** (-2 * t**1.5 - 2 * t),
                                  [0, 1, mpmath.inf]))
    got = norm(ExpDecay(1.0), NormSpec(2.0, ThreeParam(0.5, 2.0, 1.5)))
    assert got == pytest.approx(float(ref), rel=1e-8)


def test_custom_weight_norm():
    got = norm(ExpDecay(1.0), NormSpec(2.0, Custom(ExpDecay(1.0))))
    assert got == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-9)


def test_norm_of_constant_diverges():
    with pytest.raises(NonIntegrable):
        norm(Const(1.0), NormSpec(1.0))


@pytest.mark.parametrize("args", [(0.5,), (math.nan,)])
def test_norm_spec_rejects_small_p(args):
    with pytest.raises(DomainError):
        NormSpec(*args)


@pytest.mark.parametrize(
    "weight",
    [Unit(), TwoParam(0.0, 0.5), TwoParam(0.7, 1.0), ThreeParam(0.3, 1.2, 0.8),
     Custom(ExpDecay(0.5))],
)
@given(c=st.floats(0.01, 100.0) | st.floats(-100.0, -0.01), p=st.sampled_from([1.0, 1.5, 2.0]))
def test_norm_homogeneity(weight, c, p):
    f = PowExp(1, 1.5)
    spec = NormSpec(p, weight)
    assert norm(Scaled(c, f), spec) == pytest.approx(abs(c) * norm(f, spec), rel=1e-8)


@given(st.floats(0.3, 4.0), st.integers(2, 200))
def test_sample_matches_grid_size(a, n):
    grid = GridSpec.uniform(0.0, 5.0, n)
    s = sample(ExpDecay(a), grid)
    assert len(s.values) == n
    assert s.values[0] == 1.0
    assert all(0 < v <= 1 for v in s.values)


@given(st.floats(0.0, 30.0))
def test_tail_mass_dominates_true_tail(T):
    for f, exact in [
        (ExpDecay(0.7), math.exp(-0.7 * T) / 0.7),
        (Gaussian(0.5), math.sqrt(math.pi / 2) * math.erfc(math.sqrt(0.5) * T)),
        (PowExp(1, 1.0), (T + 1) * math.exp(-T)),
    ]:
        assert f.tail_mass(T) >= exact * (1 - 1e-12)


def test_render_forms():
    assert ExpDecay(1.0).render() == "exp(-1*x)"
    assert Gaussian(0.5).render() == "exp(-0.5*x^2)"
    assert PowExp(2, 3.0).render() == "x^2*exp(-3*x)"
    assert Indicator(1.0, 2.0).render() == "indicator(1,2)"
    assert Scaled(2.0, Sum(ExpDecay(1.0), Const(1.0))).render() == "2*(exp(-1*x)+1)"


def test_unrenderable_variants():
    with pytest.raises(InputError):
        Computed(lambda x: x, 1.0, 1.0).render()
    with pytest.raises(InputError):
        tabulate(ExpDecay(1.0), GridSpec.uniform(0, 1, 3)).render()


def test_support_and_zero():
    assert Product(Indicator(0.0, 1.0), Indicator(2.0, 3.0)).support() == (0.0, 0.0)
    assert Scaled(0.0, ExpDecay(1.0)).is_zero()
    assert Sum(zero(), Indicator(1.0, 2.0)).support() == (1.0, 2.0)
    assert not Tabulated(sample(ExpDecay(1.0), GridSpec.uniform(0, 1, 3))).is_zero()
