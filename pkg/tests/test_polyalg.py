import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as npoly

from lphardy.errors import DimensionMismatch, NonConvergence, PoleProximity
from lphardy.polyalg import (
    MultiPoly,
    SeparableRational,
    UniPoly,
    binomial_power,
    one_plus_square_power,
    poly_eval,
    rational_combine,
    rational_eval,
    roots,
)

complexes = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def rand_rational(rng, n, dmax=3):
    shape = tuple(int(rng.integers(1, dmax + 1)) for _ in range(n))
    num = MultiPoly(rng.normal(size=shape) + 1j * rng.normal(size=shape), n)
    dens = []
    for _ in range(n):
        rts = [(complex(rng.normal(), rng.choice([-1, 1]) * rng.uniform(0.5, 2)), 1) for _ in range(int(rng.integers(1, 4)))]
        dens.append(UniPoly.from_roots(rts))
    return SeparableRational(num, dens)


def test_horner_matches_numpy(rng):
    c = rng.normal(size=7) + 1j * rng.normal(size=7)
    z = rng.normal(size=20) + 1j * rng.normal(size=20)
    assert np.allclose(UniPoly(c)(z), npoly.polyval(z, c), rtol=1e-13)


def test_arithmetic_and_shift(rng):
    a = UniPoly(rng.normal(size=4))
    b = UniPoly(rng.normal(size=3) + 1j)
    z = rng.normal(size=9) + 0.3j
    assert np.allclose((a * b)(z), a(z) * b(z), rtol=1e-12)
    assert np.allclose((a + b)(z), a(z) + b(z), rtol=1e-12)
    assert np.allclose(a.shift(0.7 - 0.2j)(z), a(z + 0.7 - 0.2j), rtol=1e-12)
    assert np.allclose(a.derivative()(z), npoly.polyval(z, npoly.polyder(a.coeffs)))
    q = (a * b).divide_exact(b)
    assert q is not None and q.allclose(a, rtol=1e-10)


def test_zero_polynomial_degree():
    assert UniPoly([0.0]).degree == -1
    assert UniPoly([0.0]).is_zero


@settings(max_examples=40, deadline=None)
@given(a=complexes, b=complexes.filter(lambda v: abs(v) > 0.1), m=st.integers(0, 12), z=complexes)
def test_binomial_power_matches_repeated_product(a, b, m, z):
    ref = complex(1.0)
    for _ in range(m):
        ref *= a + b * z
    got = binomial_power(a, b, m)(np.array([z]))[0]
    # expanded coefficients cancel near the root, so scale by the term sizes
    scale = max(1.0, (abs(a) + abs(b) * abs(z)) ** m)
    assert abs(got - ref) <= 1e-13 * scale * (m + 1)


def test_binomial_power_hint():
    q = binomial_power(2.0, -4.0, 3)
    assert q.root_hint == ((0.5 + 0j, 3),)


def test_roots_of_known_polynomial():
    q = UniPoly.from_roots([(1.0, 1), (-2.0, 1), (1j, 1)])
    q = UniPoly(q.coeffs)
    got = sorted((r.value for r in roots(q)), key=lambda v: (v.real, v.imag))
    want = sorted([1.0, -2.0, 1j], key=lambda v: (v.real, v.imag))
    assert np.allclose(got, want, atol=1e-10)


def test_roots_cluster_multiplicity():
    q = UniPoly(np.poly1d([1.0, -1.0], r=False).c[::-1])
    q = UniPoly((UniPoly([-1.0, 1.0]) * UniPoly([-1.0, 1.0]) * UniPoly([-1.0, 1.0]) * UniPoly([2.0, 1.0])).coeffs)
    rs = roots(q)
    mults = sorted(r.multiplicity for r in rs)
    assert mults == [1, 3]


@settings(max_examples=30, deadline=None)
@given(st.lists(complexes, min_size=1, max_size=8))
def test_root_residual(rts):
    q = UniPoly(np.poly(np.asarray(rts))[::-1])
    tau = 1e-10
    for r in roots(q, tau_root=tau):
        assert abs(q(np.array([r.value]))[0]) <= tau * (1 + np.abs(q.coeffs).max()) * 1e4 * max(1, abs(r.value)) ** q.degree


def test_roots_nonconvergence_is_reported():
    q = UniPoly([1.0, 0.0, 0.0, 1e300])
    with pytest.raises((NonConvergence, FloatingPointError, ValueError)):
        roots(q, max_iter=0, tau_root=1e-300)


def test_multipoly_terms_roundtrip():
    P = MultiPoly.from_terms(2, [((0, 0), 1.0), ((2, 1), 3 - 1j)])
    assert P.degrees == (2, 1)
    assert P.terms == {(0, 0): 1.0, (2, 1): 3 - 1j}
    assert P(np.array([2.0, 1j])) == pytest.approx(1.0 + (3 - 1j) * 4 * 1j)


def test_multipoly_restrict_and_shift(rng):
    P = MultiPoly(rng.normal(size=(3, 2)), 2)
    z = np.array([0.3 + 0.1j, -0.7])
    r = P.restrict(0, z[0])
    assert poly_eval(r, [z[1]]) == pytest.approx(P(z))
    S = P.shift([0.5, -1j])
    assert S(z) == pytest.approx(P(z + np.array([0.5, -1j])))


def test_dimension_mismatch():
    P = MultiPoly.constant(2, 1.0)
    with pytest.raises(DimensionMismatch):
        poly_eval(P, [1.0, 2.0, 3.0])


@pytest.mark.parametrize("op", ["add", "multiply"])
def test_evaluation_homomorphism(op, rng):
    for n in (1, 2, 3):
        A, B = rand_rational(rng, n), rand_rational(rng, n)
        C = rational_combine(op, A, B)
        Z = rng.normal(size=(25, n)) * 2 + 0.05j
        va, vb, vc = (R.evaluate_points(Z) for R in (A, B, C))
        want = va + vb if op == "add" else va * vb
        assert np.max(np.abs(vc - want) / np.maximum(np.abs(want), 1e-300)) <= 1e-12 or np.allclose(vc, want, rtol=1e-11)


def test_scale_combination(rng):
    A = rand_rational(rng, 2)
    C = rational_combine("scale", A, 2 - 1j)
    Z = rng.normal(size=(10, 2))
    assert np.allclose(C.evaluate_points(Z), (2 - 1j) * A.evaluate_points(Z), rtol=1e-13)


def test_pole_proximity():
    R = SeparableRational(MultiPoly.constant(1, 1.0), [UniPoly([-1.0, 1.0])])
    with pytest.raises(PoleProximity):
        rational_eval(R, [1.0])


def test_shift_of_rational(rng):
    R = rand_rational(rng, 2)
    c = [0.5j, -0.25j]
    Z = rng.normal(size=(8, 2)) + 3j
    assert np.allclose(R.shift(c).evaluate_points(Z), R.evaluate_points(Z + np.array(c)), rtol=1e-10)


def test_json_roundtrip(rng):
    R = rand_rational(rng, 2)
    S = SeparableRational.from_json(R.to_json())
    Z = rng.normal(size=(6, 2))
    assert np.allclose(S.evaluate_points(Z), R.evaluate_points(Z), rtol=1e-14)


def test_factored_evaluation_far_out():
    q = one_plus_square_power(20)
    x = np.array([1e8])
    # (1 + x^2)^20 overflows in plain powers but the scaled path stays finite
    s = np.array([1e8])
    v = q.scaled_eval(x.astype(complex), s)
    assert np.isfinite(v).all() and abs(v[0]) == pytest.approx(1.0, rel=1e-10)


def test_sum_with_shared_factored_denominators():
    d1 = UniPoly.from_roots([(-1.0, 1), (1.0, 1), (-1j, 3)])
    d2 = UniPoly.from_roots([(-1.0, 1), (1.0, 1), (1j, 3)])
    A = SeparableRational(MultiPoly.constant(1, 2.0), [d1])
    B = SeparableRational(MultiPoly.constant(1, -1.0), [d2.scale(3.0)])
    C = A + B
    # shared real factors are not squared
    assert C.denominators[0].degree == 8
    z = np.array([[0.3 + 0.1j], [-4.0], [2.5 - 0.2j]])
    assert np.allclose(C.evaluate_points(z), A.evaluate_points(z) + B.evaluate_points(z), rtol=1e-12)
