import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers as h
from lphardy import split as split_mod
from lphardy.errors import DegeneratePhase, DimensionMismatch, PhaseSearchFailed
from lphardy.polyalg import SeparableRational, UniPoly, binomial_power
from lphardy.quadrature import bound_constant, lp_quasinorm
from lphardy.split import (
    SplitParams,
    check_phase,
    default_m,
    half_degrees,
    peel,
    phase_factors,
    phase_grid,
    select_phase,
    split_atom,
    split_components,
    split_denominator,
)

phases = st.floats(-math.pi + 1e-3, math.pi - 1e-3)


def good_phase(m, phi):
    return abs((-1) ** m - np.exp(1j * phi)) > 1e-3


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 9), phi=phases, x=st.floats(-50, 50))
def test_phase_factors_sum_to_one(m, phi, x):
    if not good_phase(m, phi):
        return
    fp, fm = phase_factors(m, phi)
    z = np.array([[x + 0j]])
    if np.min(np.abs(z[0, 0] - np.array([r for r, _ in split_denominator(m, phi).root_hint]))) < 1e-6:
        return
    total = fp.evaluate_points(z, check_poles=False) + fm.evaluate_points(z, check_poles=False)
    assert abs(total[0] - 1.0) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 12), phi=phases)
def test_split_denominator_roots_real_and_counted(m, phi):
    if not good_phase(m, phi):
        return
    D = split_denominator(m, phi)
    hint = D.root_hint
    assert sum(k for _, k in hint) == m
    assert all(abs(r.imag) == 0 for r, _ in hint)
    vals = np.abs(D(np.array([r for r, _ in hint])))
    assert np.all(vals <= 1e-9 * np.abs(D.coeffs).sum() * max(1.0, max(abs(r) for r, _ in hint)) ** m)


def test_degenerate_phase_rejected():
    with pytest.raises(DegeneratePhase):
        check_phase(2, 0.0)
    with pytest.raises(DegeneratePhase):
        SplitParams((1,), (math.pi - 1e-9,))


def test_peel_recovers_exponents():
    q = binomial_power(-1j, 1.0, 2) * binomial_power(1j, 1.0, 3) * binomial_power(-0.5, 1.0, 1)
    pk = peel(UniPoly(q.coeffs))
    assert (pk.a, pk.b, pk.l) == (2, 3, 3)
    assert pk.rest.degree == 1
    assert pk.rest.root_hint[0][0] == pytest.approx(0.5)


def test_peel_rejects_other_complex_roots():
    with pytest.raises(ValueError):
        peel(UniPoly.from_roots([(2j, 1), (-1j, 1)]))


def test_default_m():
    R = h.class_a_atom({(0, 0): 1.0}, [2, 3])
    assert half_degrees(R) == (2, 3)
    assert default_m(R) == (5, 6)


@pytest.mark.parametrize("n", [1, 2])
def test_reconstruction(n, rng):
    R = h.random_class_a_atom(rng, n)
    m = default_m(R)
    phis = tuple(rng.uniform(-2.5, 2.5) for _ in range(n))
    comps = split_components(R, SplitParams(m, phis))
    Z = rng.normal(size=(300, n)) * 3
    got = sum(c.evaluate_points(Z, check_poles=False) for c in comps.values())
    want = R.evaluate_points(Z)
    assert np.max(np.abs(got - want)) <= 1e-9 * np.max(np.abs(want))


def test_components_keep_integrability_gap(rng):
    R = h.random_class_a_atom(rng, 2)
    comps = split_components(R, SplitParams(default_m(R), (0.4, -1.1)))
    for c in comps.values():
        assert min(c.gaps) >= min(R.gaps)


def test_components_certified_in_their_octants():
    R = h.class_a_atom({(0,): 1.0, (1,): 0.5}, [3])
    sp = split_atom(R, 0.5, SplitParams(default_m(R), (0.7,)), with_certificates=True)
    assert all(c.valid for c in sp.certificates.values())
    # the + component has no poles in the upper half-plane
    plus = sp.components[(1,)]
    from lphardy.polyalg import roots

    assert all(r.value.imag <= 1e-8 for r in roots(UniPoly(plus.denominators[0].coeffs)))


def test_m_too_small_rejected():
    R = h.class_a_atom({(0,): 1.0}, [2])
    with pytest.raises(ValueError):
        split_components(R, SplitParams((3,), (0.5,)))
    with pytest.raises(DimensionMismatch):
        split_components(R, SplitParams((5, 5), (0.5, 0.5)))


def test_phase_grid_is_seeded_and_skips_degenerate():
    a = phase_grid(2, 8, 7)
    assert a == phase_grid(2, 8, 7)
    assert len(a) == 64
    assert all(-math.pi < v < math.pi for pt in a for v in pt)


def test_select_phase_meets_bound():
    R = h.class_a_atom({(0,): 1.0, (2,): -0.3}, [3])
    rn = lp_quasinorm(R, 0.5)
    phis, sp = select_phase(R, 0.5, grid_per_dim=8)
    assert sp.norm_sum <= bound_constant(1, 0.5) * rn.value + sp.norm_error + rn.abs_error * bound_constant(1, 0.5)
    assert sp.grid_mean is not None and sp.grid_size > 0
    assert sp.achieved_ratio == pytest.approx(sp.norm_sum / rn.value)


def test_phase_search_failure_reported(monkeypatch):
    monkeypatch.setattr(split_mod, "bound_constant", lambda n, p: 1e-6)
    R = h.class_a_atom({(0,): 1.0}, [3])
    with pytest.raises(PhaseSearchFailed) as info:
        select_phase(R, 0.5, grid_per_dim=8)
    assert info.value.best is not None


def test_split_json_roundtrip():
    R = h.class_a_atom({(0,): 1.0}, [2])
    doc = split_atom(R, 0.5, SplitParams((4,), (0.3,))).to_json()
    assert set(doc["components"]) == {"+", "-"}
    back = SeparableRational.from_json(doc["components"]["+"])
    assert back.n == 1
