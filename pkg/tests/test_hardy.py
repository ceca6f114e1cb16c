import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lphardy.errors import DimensionMismatch
from lphardy.hardy import (
    Status,
    all_octants,
    certify,
    certify_all,
    interior_constant,
    interior_sup_check,
    octant_label,
    sign_vector,
)
from lphardy.polyalg import MultiPoly, SeparableRational, UniPoly, binomial_power


def pole_atom(poles, n=1, num=1.0):
    """``num / prod (z - r)`` in one variable, or a tensor of copies."""
    q = UniPoly.from_roots([(complex(r), 1) for r in poles])
    return SeparableRational(MultiPoly.constant(n, num), [q] * n)


def test_sign_vector_and_labels():
    assert sign_vector("+-") == (1, -1)
    assert sign_vector([1, -1, 1]) == (1, -1, 1)
    assert octant_label((1, -1)) == "+-"
    assert all_octants(2) == [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def test_lower_poles_are_valid_in_upper_octant():
    R = pole_atom([-1j, -2j, -0.5j + 1])
    cert = certify(R, (1,), 0.5)
    assert cert.status is Status.VALID
    assert cert.min_margin == pytest.approx(0.5)
    assert cert.quasi_norm.value > 0


def test_upper_pole_is_invalid_in_upper_octant():
    R = pole_atom([-1j, 1j + 0.3, -2j])
    cert = certify(R, (1,), 0.5)
    assert cert.status is Status.INVALID
    assert cert.min_margin < 0


def test_divergent_norm_is_invalid():
    R = pole_atom([-1j])  # |1/(x+i)|^0.5 is not integrable
    cert = certify(R, (1,), 0.5)
    assert cert.status is Status.INVALID
    assert not cert.lp_finite


def test_indeterminate_when_root_finding_fails(monkeypatch):
    from lphardy import hardy
    from lphardy.errors import NonConvergence

    def boom(q, *a, **k):
        raise NonConvergence("forced", partial=[])

    monkeypatch.setattr(hardy, "roots", boom)
    cert = certify(pole_atom([-1j, -1j, -1j]), (1,), 0.5)
    assert cert.status is Status.INDETERMINATE


def test_real_pole_orders_recorded():
    q = binomial_power(0.0, 1.0, 1) * binomial_power(1j, 1.0, 2)
    R = SeparableRational(MultiPoly.constant(1, 1.0), [q])
    cert = certify(R, (1,), 0.5)
    assert cert.status is Status.VALID
    assert cert.per_variable[0].real_pole_orders == (1,)
    assert cert.min_margin == pytest.approx(0.0, abs=1e-12)


def test_octant_length_checked():
    with pytest.raises(DimensionMismatch):
        certify(pole_atom([-1j] * 3), (1, 1), 0.5)


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(0.1, 3.0),
    b=st.floats(0.1, 3.0),
    shift=st.floats(0.0, 2.0),
)
def test_margin_monotone_under_downward_shift(a, b, shift):
    """Moving every pole further down never shrinks the upper-octant margin."""
    R = pole_atom([-a * 1j, -b * 1j + 1.0, -1j])
    S = R.shift([shift * 1j])  # S(z) = R(z + i shift): poles move down by shift
    m0 = certify(R, (1,), 0.5, compute_norm=False).min_margin
    m1 = certify(S, (1,), 0.5, compute_norm=False).min_margin
    assert m1 >= m0 - 1e-9


def test_certify_all_splits_valid_and_invalid():
    R = pole_atom([-1j, -1j, -2j], n=2)
    certs = certify_all(R, 0.6)
    assert certs[(1, 1)].valid
    assert all(not certs[s].valid for s in [(1, -1), (-1, 1), (-1, -1)])


def test_interior_constant():
    assert interior_constant(2, 0.5) == pytest.approx((2 / math.pi) ** 4)


@pytest.mark.parametrize("delta", [0.1, 0.5, 2.0])
def test_interior_sup_bound_holds(delta):
    R = pole_atom([-1j, -1j, -1.5j + 0.5])
    rep = interior_sup_check(R, (1,), 0.5, [delta], sample_points=np.linspace(-20, 20, 401)[:, None])
    assert rep.passed
    assert rep.max_ratio <= 1.0


def test_interior_sup_needs_valid_certificate():
    R = pole_atom([1j, 1j, 1j])
    with pytest.raises(ValueError):
        interior_sup_check(R, (1,), 0.5, [0.5])


def test_interior_sup_in_lower_octant_2d():
    R = pole_atom([1j, 1j, 2j], n=2)
    rep = interior_sup_check(R, (-1, -1), 0.6, [0.3, 0.7])
    assert rep.delta == (-0.3, -0.7)
    assert rep.passed


def test_certificate_json():
    doc = certify(pole_atom([-1j] * 3), (1,), 0.5).to_json()
    assert doc["status"] == "VALID" and doc["octant"] == "+"
    assert doc["per_variable"][0]["multiplicities"] == [3]
