"""Atoms that lie in every octant Hardy space, and what they imply.

A rational function whose poles are all real (and simple enough to be
p-integrable) belongs to all ``2**n`` octant Hardy spaces at once.  Adding
such an atom to one octant piece and subtracting it from another leaves the
reconstruction untouched, so octant decompositions are not unique.  The
glue operator merges per-octant approximants of one function into a single
rational with real poles only.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DistinctnessViolation, IntegrabilityViolation
from .hardy import HardyCertificate, all_octants, certify, octant_label
from .polyalg import MultiPoly, SeparableRational, UniPoly, roots
from .quadrature import QuasiNormResult, angular_factor_bound, lp_quasinorm, lp_quasinorm_sum
from .split import check_phase, peel, phase_grid, split_denominator

TAU_DISTINCT = 1e-8
TAU_REAL_POLE = 1e-8


@dataclass
class XpAtom:
    a: np.ndarray
    P: MultiPoly
    m: int
    p: float
    rational: SeparableRational
    certificates: dict[tuple[int, ...], HardyCertificate] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.rational.n

    @property
    def all_valid(self) -> bool:
        return len(self.certificates) == 2**self.n and all(c.valid for c in self.certificates.values())

    @property
    def norm(self) -> QuasiNormResult | None:
        c = next(iter(self.certificates.values()), None)
        return None if c is None else c.quasi_norm

    def to_json(self) -> dict:
        return {
            "poles": self.a.tolist(),
            "m": self.m,
            "p": self.p,
            "rational": self.rational.to_json(),
            "certificates": {octant_label(s): c.status.value for s, c in self.certificates.items()},
        }


def make_xp_atom(a, P: MultiPoly | None = None, p: float = 0.5, certify_octants: bool = True, tol: float | None = None) -> XpAtom:
    """``P(x) / prod_k prod_j (x_k - a_kj)`` with real, distinct poles per row.

    ``a`` is an ``n x m`` real matrix.  ``P`` defaults to the constant 1.
    """
    A = np.atleast_2d(np.asarray(a, dtype=float))
    n, m = A.shape
    if P is None:
        P = MultiPoly.constant(n, 1.0)
    if P.n != n:
        raise ValueError(f"numerator has n={P.n}, pole matrix has {n} rows")
    for k, row in enumerate(A):
        d = np.abs(row[:, None] - row[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min(initial=np.inf) <= TAU_DISTINCT:
            raise DistinctnessViolation(f"row {k} has poles closer than {TAU_DISTINCT}")
    degs = P.degrees
    l = max(degs) if degs else 0
    if not (m - l) * p > 1:
        raise IntegrabilityViolation(f"(m - l) p = ({m} - {l}) * {p} <= 1")
    dens = [UniPoly.from_roots([(complex(v), 1) for v in row]) for row in A]
    R = SeparableRational(P, dens)
    atom = XpAtom(A, P, m, p, R)
    if certify_octants:
        octs = all_octants(n)
        atom.certificates = dict(zip(octs, ordered_map(lambda s: certify(R, s, p, tol=tol), octs)))
    return atom


# ---------------------------------------------------------------------------
# non-uniqueness


def default_signs(n: int) -> dict[tuple[int, ...], int]:
    octs = all_octants(n)
    return {octs[0]: 1, octs[1]: -1}


def alternative_decomposition(dec, g: XpAtom, signs: Mapping | None = None, tol: float | None = None):
    """A second decomposition with ``+-g`` moved between octants.

    ``signs`` maps octants to +1, -1 (missing octants get 0) and must sum to
    zero so that the added atoms cancel.
    """
    from .decompose import DecomposeConfig, _checks

    n = dec.n
    if g.n != n:
        raise ValueError("atom dimension does not match the decomposition")
    signs = default_signs(n) if signs is None else {tuple(k): int(v) for k, v in signs.items()}
    if any(v not in (-1, 0, 1) for v in signs.values()) or sum(signs.values()) != 0:
        raise ValueError("signs must be +-1 and cancel overall")
    if any(s not in dec.per_octant for s in signs):
        raise ValueError("signs refer to an unknown octant")
    if g.rational.is_zero:
        return copy.copy(dec)
    if not g.all_valid:
        raise ValueError("atom is not certified VALID in every octant")
    out = copy.copy(dec)
    out.per_octant = {}
    for s, ser in dec.per_octant.items():
        new = copy.copy(ser)
        new.atoms = list(ser.atoms)
        new.atom_norms = list(ser.atom_norms)
        new.certificates = list(ser.certificates)
        sg = signs.get(s, 0)
        if sg:
            new.atoms.append(SeparableRational(g.rational.numerator.scale(float(sg)), g.rational.denominators))
            new.atom_norms.append(g.norm)
            new.certificates.append(g.certificates[s])
            new.norm = lp_quasinorm_sum(new.atoms, dec.p, tol=tol)
            new.partial_norms = list(ser.partial_norms) + [new.norm]
        out.per_octant[s] = new
    out.total_norm_sum = math.fsum(r.value for s in out.per_octant.values() for r in s.atom_norms)
    out.total_norm_error = math.fsum(r.abs_error for s in out.per_octant.values() for r in s.atom_norms)
    out.mode = dec.mode + "+moved-atom"
    out.checks = _checks(out, DecomposeConfig(tol=tol))
    return out


def decomposition_diff(a, b, points) -> dict:
    """Per-octant norm changes and the pointwise reconstruction gap."""
    Z = np.atleast_2d(np.asarray(points, dtype=complex))
    va, vb = a.evaluate(Z), b.evaluate(Z)
    scale = max(1.0, float(np.abs(va).max(initial=0.0)))
    return {
        "per_octant_norm_change": {
            octant_label(s): b.per_octant[s].norm.value - a.per_octant[s].norm.value for s in a.per_octant
        },
        "max_norm_change": max(abs(b.per_octant[s].norm.value - a.per_octant[s].norm.value) for s in a.per_octant),
        "max_reconstruction_gap": float(np.abs(va - vb).max(initial=0.0)),
        "relative_reconstruction_gap": float(np.abs(va - vb).max(initial=0.0)) / scale,
        "n_points": len(Z),
    }


# ---------------------------------------------------------------------------
# glue


def _per_axis(v, n: int, kind):
    if np.ndim(v) == 0:
        return tuple(kind(v) for _ in range(n))
    out = tuple(kind(x) for x in v)
    if len(out) != n:
        raise ValueError(f"expected {n} values, got {len(out)}")
    return out


def _glued_term(R: SeparableRational, sigma, m, phis) -> SeparableRational:
    """``R * prod_k F_sigma_k(z_k)`` with the poles at ``-sigma_k i`` cancelled.

    ``F_+ = -e^{i phi} (z + i)**m / D`` and ``F_- = (i - z)**m / D`` where
    ``D = (i - z)**m - e^{i phi} (i + z)**m``.
    """
    num = R.numerator
    dens = []
    for k, (q, s, mk, ph) in enumerate(zip(R.denominators, sigma, m, phis)):
        pk = peel(q)
        own, other = (pk.b, pk.a) if s > 0 else (pk.a, pk.b)
        if own > mk:
            raise ValueError(f"variable {k}: pole order {own} exceeds m={mk}")
        if s > 0:
            fac = UniPoly.from_roots([(-1j, mk - own)]).scale(-np.exp(1j * ph))
            left = UniPoly.from_roots([(1j, other)]) if other else None
        else:
            fac = UniPoly.from_roots([(1j, mk - own)]).scale((-1.0) ** mk)
            left = UniPoly.from_roots([(-1j, other)]) if other else None
        num = num.mul_univariate(fac.scale(1.0 / pk.c), k)
        den = split_denominator(mk, ph)
        if left is not None:
            den = den * left
        if pk.rest.degree >= 1:
            den = den * pk.rest
        dens.append(den)
    return SeparableRational(num, dens)


def _identical(components: Sequence[SeparableRational]) -> bool:
    first = components[0]
    for c in components[1:]:
        if c.n != first.n or not c.numerator.allclose(first.numerator, rtol=0.0, atol=0.0):
            return False
        if any(not a.allclose(b, rtol=0.0) for a, b in zip(c.denominators, first.denominators)):
            return False
    return True


def glue_common_approximant(components: Mapping, m, phi) -> SeparableRational:
    """Merge per-octant approximants into one rational with real poles only.

    ``components`` maps every sign vector to a component that is holomorphic
    in its own octant tube with poles only at ``-sigma_k i`` (and on the real
    axis).  The result is ``sum_j R_j prod_k F_(sigma_j(k))(z_k)``, which
    equals ``R_(+..+)`` plus the weighted differences.
    """
    comps = {tuple(k): v for k, v in components.items()}
    n = len(next(iter(comps)))
    octs = all_octants(n)
    if set(comps) != set(octs):
        raise ValueError("components must cover every octant")
    m = _per_axis(m, n, int)
    phis = _per_axis(phi, n, float)
    for mk, ph in zip(m, phis):
        check_phase(mk, ph)
    ordered = [comps[s] for s in octs]
    if _identical(ordered):
        return ordered[0]
    out = None
    for s, R in zip(octs, ordered):
        if R.is_zero:
            continue
        term = _glued_term(R, s, m, phis)
        out = term if out is None else out + term
    if out is None:
        return ordered[0]
    return out


def glue_pole_orders(components: Mapping) -> int:
    """Largest pole order a component has at its own ``-sigma_k i``."""
    worst = 0
    for s, R in components.items():
        for q, sk in zip(R.denominators, s):
            pk = peel(q)
            worst = max(worst, pk.b if sk > 0 else pk.a)
    return worst


def max_imag_pole(R: SeparableRational) -> float:
    out = 0.0
    for q in R.denominators:
        if q.degree >= 1:
            out = max(out, max(abs(r.value.imag) for r in roots(q)))
    return out


@dataclass
class GlueReport:
    m: tuple[int, ...]
    p: float
    grid: list[tuple[float, ...]]
    distances: dict[tuple[int, ...], QuasiNormResult]
    phase_errors: list[QuasiNormResult]
    mean: float
    mean_error: float
    bound: float
    selected_phi: tuple[float, ...]
    selected_error: float
    combined_bound: float | None
    max_imag_pole: float

    @property
    def real_poles_only(self) -> bool:
        return self.max_imag_pole <= TAU_REAL_POLE

    @property
    def passed(self) -> bool:
        return self.real_poles_only and self.mean <= self.bound + 3.0 * self.mean_error

    def to_json(self) -> dict:
        return {
            "m": list(self.m),
            "p": self.p,
            "grid_size": len(self.grid),
            "pair_distances": {octant_label(s): r.to_json() for s, r in self.distances.items()},
            "phase_mean": self.mean,
            "phase_mean_error": self.mean_error,
            "bound": self.bound,
            "selected_phi": list(self.selected_phi),
            "selected_error": self.selected_error,
            "combined_bound": self.combined_bound,
            "max_imag_pole": self.max_imag_pole,
            "real_poles_only": self.real_poles_only,
            "passed": self.passed,
        }


def glue_report(
    components: Mapping,
    p: float,
    m=None,
    grid_per_dim: int = 8,
    seed: int = 42,
    epsilon: float | None = None,
    tol: float | None = None,
) -> GlueReport:
    """Average ``||R(., phi) - R_(+..+)||_p^p`` over a jittered phase grid.

    The bound is ``(2**(1-p) pi / (1-p))**n * max_j ||R_j - R_(+..+)||_p^p``.
    With ``epsilon`` the combined error ``(2 pi / (1-p))**n eps + eps / 4`` is
    also reported.  ``m`` defaults to the smallest integer with
    ``(m - order) p > 1``.
    """
    comps = {tuple(k): v for k, v in components.items()}
    n = len(next(iter(comps)))
    octs = all_octants(n)
    order = glue_pole_orders(comps)
    if m is None:
        m = order + int(math.floor(1.0 / p)) + 1
    m = _per_axis(m, n, int)
    if any(not (mk - order) * p > 1 for mk in m):
        raise ValueError(f"need (m - {order}) p > 1")
    base = comps[octs[0]]
    dists = {s: lp_quasinorm(comps[s] - base, p, tol=tol) for s in octs[1:]}
    worst = max((r.value for r in dists.values()), default=0.0)
    grid = phase_grid(n, grid_per_dim, seed, m)

    def one(phis):
        G = glue_common_approximant(comps, m, phis)
        return lp_quasinorm(G - base, p, tol=tol)

    errs = ordered_map(one, grid)
    vals = np.array([e.value for e in errs])
    mean = float(vals.mean()) if len(vals) else 0.0
    mean_err = float(np.mean([e.abs_error for e in errs])) if errs else 0.0
    j = int(np.argmin(vals)) if len(vals) else 0
    sel = grid[j] if grid else tuple(0.0 for _ in range(n))
    combined = None if epsilon is None else (2 * math.pi / (1 - p)) ** n * epsilon + epsilon / 4
    G = glue_common_approximant(comps, m, sel)
    return GlueReport(
        m=m,
        p=p,
        grid=grid,
        distances=dists,
        phase_errors=errs,
        mean=mean,
        mean_error=mean_err,
        bound=angular_factor_bound(p) ** n * worst,
        selected_phi=tuple(sel),
        selected_error=float(vals[j]) if len(vals) else 0.0,
        combined_bound=combined,
        max_imag_pole=max_imag_pole(G),
    )
