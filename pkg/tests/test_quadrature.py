import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import gamma

from lphardy.errors import DivergentIntegral
from lphardy.polyalg import MultiPoly, SeparableRational, UniPoly, binomial_power, one_plus_square_power
from lphardy.quadrature import (
    angular_factor_bound,
    angular_factor_integral,
    bound_constant,
    lp_quasinorm,
    lp_quasinorm_sum,
    norm_slice_profile,
    screen,
)


def lorentz(q, n=1):
    return SeparableRational(MultiPoly.constant(n, 1.0), [one_plus_square_power(q)] * n)


def closed_form(s):
    """integral (1 + x^2)^(-s) dx."""
    return math.sqrt(math.pi) * gamma(s - 0.5) / gamma(s)


def test_inverse_cube_lorentzian_value():
    assert abs(lp_quasinorm(lorentz(3), 0.5).value - 2.0) <= 1e-6


def test_real_pole_fixture():
    R = SeparableRational(MultiPoly.constant(1, 1.0), [binomial_power(0.0, 1.0, 1) * one_plus_square_power(1)])
    ref = gamma(0.25) ** 2 / gamma(0.5)
    assert lp_quasinorm(R, 0.5).value == pytest.approx(ref, rel=1e-5)


@pytest.mark.parametrize("q,p", [(1, 0.7), (2, 0.4), (2, 0.9), (3, 0.3), (5, 0.25)])
def test_lorentzian_family(q, p):
    assert lp_quasinorm(lorentz(q), p).value == pytest.approx(closed_form(q * p), rel=1e-6)


def test_independent_scipy_oracle():
    # (x + 2) / ((x - 1)^2 + 1)^2 with p = 0.6, checked against scipy.integrate.quad
    den = UniPoly.from_roots([(1 + 1j, 2), (1 - 1j, 2)])
    R = SeparableRational(MultiPoly(np.array([2.0, 1.0]), 1), [den])
    f = lambda x: abs((x + 2) / ((x - 1) ** 2 + 1) ** 2) ** 0.6
    ref = sum(integrate.quad(f, a, b, limit=200, points=[-2.0] if a < -2 < b else None)[0] for a, b in [(-np.inf, -2), (-2, 1), (1, np.inf)])
    assert lp_quasinorm(R, 0.6).value == pytest.approx(ref, rel=1e-6)


@settings(max_examples=15, deadline=None)
@given(re=st.floats(-5, 5), im=st.floats(-5, 5), p=st.floats(0.3, 0.95))
def test_scaling(re, im, p):
    c = complex(re, im)
    if abs(c) < 1e-3:
        return
    R = lorentz(2)
    S = SeparableRational(MultiPoly.constant(1, c), R.denominators)
    assert lp_quasinorm(S, p).value == pytest.approx(abs(c) ** p * lp_quasinorm(R, p).value, rel=1e-10)


def test_tensor_consistency():
    r1 = SeparableRational(MultiPoly(np.array([1.0, 0.5]), 1), [one_plus_square_power(2)])
    r2 = SeparableRational(MultiPoly.constant(1, 1.0), [binomial_power(1j, 1.0, 3)])
    R2 = SeparableRational(MultiPoly(np.outer([1.0, 0.5], [1.0]), 2), [one_plus_square_power(2), binomial_power(1j, 1.0, 3)])
    p = 0.5
    assert lp_quasinorm(R2, p).value == pytest.approx(lp_quasinorm(r1, p).value * lp_quasinorm(r2, p).value, rel=1e-8)


def test_divergent_tail():
    R = lorentz(1)
    with pytest.raises(DivergentIntegral):
        screen(R, 0.4)


def test_divergent_real_pole():
    R = SeparableRational(MultiPoly.constant(1, 1.0), [binomial_power(0.0, 1.0, 2) * one_plus_square_power(2)])
    with pytest.raises(DivergentIntegral):
        lp_quasinorm(R, 0.6)


def test_slices_below_boundary():
    R = SeparableRational(MultiPoly.constant(1, 1.0), [binomial_power(1j, 1.0, 3)])
    prof = norm_slice_profile(R, 0.5, (1,), [[0.0], [0.1], [1.0], [4.0]])
    assert all(r.value <= prof[0].value * (1 + 1e-6) + r.abs_error + prof[0].abs_error for r in prof[1:])
    # closed form: integral ((x^2 + (1 + y)^2))^(-3/4) = (1 + y)^(-1/2) * closed_form(3/4)
    for y, r in zip([0.0, 0.1, 1.0, 4.0], prof):
        assert r.value == pytest.approx((1 + y) ** -0.5 * closed_form(0.75), rel=1e-6)


def test_sum_equals_norm_of_sum():
    A, B = lorentz(2), SeparableRational(MultiPoly(np.array([0.0, 1.0]), 1), [one_plus_square_power(3)])
    p = 0.5
    assert lp_quasinorm_sum([A, B], p).value == pytest.approx(lp_quasinorm(A + B, p).value, rel=1e-6)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_angular_constants(p):
    f = lambda t: abs(2 * math.sin(t / 2)) ** -p
    ref = 2 * integrate.quad(f, 0, math.pi)[0]
    assert angular_factor_integral(p) == pytest.approx(ref, rel=1e-8)
    assert angular_factor_integral(p) <= angular_factor_bound(p)
    assert bound_constant(2, p) == pytest.approx(4 * angular_factor_bound(p) ** 2)


def test_zero_curve_of_real_numerator():
    # |1 + x1 x2|^(1/2) / ((1 + x1^2)(1 + x2^2)): in t = arctan x coordinates the
    # integrand is |1 + tan t1 tan t2|^(1/2) on a square, with a kink along a curve
    from scipy import integrate as si

    def inner(t):
        T = math.tan(t)
        pts = [math.atan(-1.0 / T)] if T != 0 else None
        f = lambda u: abs(1.0 + T * math.tan(u)) ** 0.5
        return si.quad(f, -math.pi / 2, math.pi / 2, points=pts, limit=200, epsabs=1e-11, epsrel=1e-11)[0]

    ref = sum(si.quad(inner, a, b, limit=200, epsabs=1e-11, epsrel=1e-11)[0] for a, b in [(-math.pi / 2, 0), (0, math.pi / 2)])
    R = SeparableRational(MultiPoly.from_terms(2, [((0, 0), 1.0), ((1, 1), 1.0)]), [binomial_power(1j, 1.0, 4)] * 2)
    got = lp_quasinorm(R, 0.5, tol=1e-9)
    assert got.converged
    assert abs(got.value - ref) <= max(got.abs_error, 1e-8 * ref)
    assert abs(got.value - ref) <= 1e-8 * ref


def test_numerator_factors():
    from lphardy.quadrature import numerator_factors, real_up_to_phase

    P = MultiPoly(np.outer([1.0, 2.0, 0.5], [3.0, -1.0]), 2)
    fac = numerator_factors(P)
    assert fac is not None and [f.degree for f in fac] == [2, 1]
    assert numerator_factors(MultiPoly.from_terms(2, [((0, 0), 1.0), ((1, 1), 1.0)])) is None
    assert real_up_to_phase(MultiPoly(np.array([[1.0, 2.0]]) * (0.6 + 0.8j), 2))
    assert not real_up_to_phase(MultiPoly(np.array([[1.0, 2j]]), 2))
