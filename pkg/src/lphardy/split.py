"""Octant splitting of separable rational atoms.

Per variable, the identity ``1 = F_plus + F_minus`` with

    F_plus  = (i - z)**m / D,   F_minus = -exp(i phi) (i + z)**m / D,
    D       = (i - z)**m - exp(i phi) (i + z)**m,

splits an atom into ``2**n`` pieces, one per octant.  ``D`` has exactly ``m``
real roots ``tan((phi + 2 pi j) / (2m))`` so the pieces only acquire poles on
the real axis, and the factor ``(z - i)**m`` (resp. ``(z + i)**m``) absorbs
the atom's poles at ``+i`` (resp. ``-i``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DegeneratePhase, DimensionMismatch, DivergentIntegral, PhaseSearchFailed
from .hardy import HardyCertificate, all_octants, certify, octant_label
from .polyalg import (
    MultiPoly,
    SeparableRational,
    UniPoly,
    binomial_power,
    roots,
)
from .quadrature import QuasiNormResult, bound_constant, lp_quasinorm

TAU_DEGENERATE = 1e-6
TAU_PEEL = 1e-8
SCAN_TOL = 1e-3
SCAN_ORDER = 8


@dataclass(frozen=True)
class SplitParams:
    m: tuple[int, ...]
    phis: tuple[float, ...]

    def __post_init__(self):
        if len(self.m) != len(self.phis):
            raise DimensionMismatch("m and phis must have the same length")
        if any(int(mk) < 1 for mk in self.m):
            raise ValueError("m entries must be positive integers")
        for mk, ph in zip(self.m, self.phis):
            if not -math.pi < ph < math.pi:
                raise ValueError(f"phase {ph} outside (-pi, pi)")
            check_phase(int(mk), ph)

    def to_json(self) -> dict:
        return {"m": list(self.m), "phis": list(self.phis)}


def check_phase(m: int, phi: float, tau: float = TAU_DEGENERATE) -> complex:
    """Leading coefficient ``(-1)**m - exp(i phi)`` of ``D``; raises if degenerate."""
    lead = (-1) ** m - np.exp(1j * phi)
    if abs(lead) <= tau:
        raise DegeneratePhase(f"|(-1)^{m} - e^(i*{phi:.6g})| = {abs(lead):.3g} <= {tau:g}")
    return complex(lead)


def split_denominator(m: int, phi: float) -> UniPoly:
    """``D(z) = (i - z)**m - exp(i phi) (i + z)**m`` with its real roots attached."""
    lead = check_phase(m, phi)
    e = np.exp(1j * phi)
    coeffs = binomial_power(1j, -1.0, m).coeffs - e * binomial_power(1j, 1.0, m).coeffs
    rts = []
    for j in range(-m, m + 1):
        ang = (phi + 2.0 * math.pi * j) / m
        if -math.pi < ang < math.pi:
            rts.append((complex(math.tan(0.5 * ang)), 1))
    if len(rts) != m:
        raise DegeneratePhase(f"expected {m} real roots of D, found {len(rts)}")
    D = UniPoly(coeffs)
    # keep the coefficient vector but evaluate in factored form
    return UniPoly(D.coeffs * (lead / D.leading), root_hint=rts)


def phase_factors(m: int, phi: float) -> tuple[SeparableRational, SeparableRational]:
    """The two one-variable factors ``(F_plus, F_minus)`` over the common ``D``."""
    D = split_denominator(m, phi)
    fp = MultiPoly.from_univariate(binomial_power(1j, -1.0, m), 0, 1)
    fm = MultiPoly.from_univariate(binomial_power(1j, 1.0, m).scale(-np.exp(1j * phi)), 0, 1)
    return SeparableRational(fp, [D]), SeparableRational(fm, [D])


# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class Peeled:
    """``Q = c (z - i)**a (z + i)**b * rest`` with ``rest`` monic, real roots only."""

    c: complex
    a: int
    b: int
    rest: UniPoly

    @property
    def l(self) -> int:
        return max(self.a, self.b)


def _strip_factor(q: UniPoly, r: complex) -> tuple[UniPoly, int]:
    count = 0
    lin = binomial_power(-r, 1.0, 1)
    while q.degree >= 1:
        scale = np.abs(q.coeffs).sum()
        if abs(q(r)) > TAU_PEEL * scale * max(1.0, abs(r)) ** q.degree:
            break
        nxt = q.divide_exact(lin, rtol=1e-7)
        if nxt is None:
            break
        q, count = nxt, count + 1
    return q, count


def peel(q: UniPoly) -> Peeled:
    """Factor out the powers of ``z - i`` and ``z + i`` from ``q``.

    Raises ``ValueError`` when the remaining factor has non-real roots.
    """
    if q.root_hint is not None:
        a = sum(m for r, m in q.root_hint if abs(r - 1j) <= TAU_PEEL)
        b = sum(m for r, m in q.root_hint if abs(r + 1j) <= TAU_PEEL)
        rest_roots = [(r, m) for r, m in q.root_hint if abs(r - 1j) > TAU_PEEL and abs(r + 1j) > TAU_PEEL]
        for r, _ in rest_roots:
            if abs(r.imag) > TAU_PEEL * max(1.0, abs(r)):
                raise ValueError(f"denominator root {r} is neither real nor +-i")
        rest = UniPoly.from_roots([(complex(r.real), m) for r, m in rest_roots])
        return Peeled(q.leading, a, b, rest)
    rest, a = _strip_factor(q, 1j)
    rest, b = _strip_factor(rest, -1j)
    c = rest.leading
    rest = rest.scale(1.0 / c)
    if rest.degree >= 1:
        rts = roots(rest)
        for r in rts:
            if abs(r.value.imag) > TAU_PEEL * max(1.0, abs(r.value)) * 1e2:
                raise ValueError(f"denominator root {r.value} is neither real nor +-i")
        rest = UniPoly(rest.coeffs, root_hint=[(complex(r.value.real), r.multiplicity) for r in rts])
    return Peeled(c, a, b, rest)


def half_degrees(R: SeparableRational) -> tuple[int, ...]:
    """``l_k = max(a_k, b_k)`` from the peeled denominators."""
    return tuple(peel(q).l for q in R.denominators)


def default_m(R: SeparableRational) -> tuple[int, ...]:
    n = R.n
    return tuple(l + n + 1 for l in half_degrees(R))


@dataclass
class OctantSplit:
    components: dict[tuple[int, ...], SeparableRational]
    params: SplitParams
    norms: dict[tuple[int, ...], QuasiNormResult]
    bound_constant: float
    input_norm: QuasiNormResult | None = None
    certificates: dict[tuple[int, ...], HardyCertificate] = field(default_factory=dict)
    grid_mean: float | None = None
    grid_mean_error: float | None = None
    grid_size: int | None = None

    @property
    def norm_sum(self) -> float:
        return math.fsum(r.value for r in self.norms.values())

    @property
    def norm_error(self) -> float:
        return math.fsum(r.abs_error for r in self.norms.values())

    @property
    def achieved_ratio(self) -> float | None:
        if self.input_norm is None or self.input_norm.value == 0:
            return None
        return self.norm_sum / self.input_norm.value

    def evaluate(self, Z) -> np.ndarray:
        return sum(R.evaluate_points(Z, check_poles=False) for R in self.components.values())

    def to_json(self) -> dict:
        out = {
            "params": self.params.to_json(),
            "bound_constant": self.bound_constant,
            "input_norm": None if self.input_norm is None else self.input_norm.to_json(),
            "norm_sum": self.norm_sum,
            "norm_error": self.norm_error,
            "achieved_ratio": self.achieved_ratio,
            "components": {octant_label(s): R.to_json() for s, R in self.components.items()},
            "norms": {octant_label(s): r.to_json() for s, r in self.norms.items()},
        }
        if self.certificates:
            out["certificates"] = {octant_label(s): c.to_json() for s, c in self.certificates.items()}
        if self.grid_mean is not None:
            out["phase_grid"] = {
                "mean_norm_sum": self.grid_mean,
                "mean_abs_error": self.grid_mean_error,
                "points": self.grid_size,
            }
        return out


def split_components(R: SeparableRational, params: SplitParams) -> dict[tuple[int, ...], SeparableRational]:
    """The ``2**n`` components in closed form; no quadrature."""
    n = R.n
    if len(params.m) != n:
        raise DimensionMismatch(f"params have {len(params.m)} variables, atom has {n}")
    factors = []
    for k, (q, mk, ph) in enumerate(zip(R.denominators, params.m, params.phis)):
        pk = peel(q)
        if mk <= pk.l + n:
            raise ValueError(f"variable {k}: m={mk} must exceed l + n = {pk.l + n}")
        D = split_denominator(mk, ph).scale(pk.c)
        e = np.exp(1j * ph)
        plus_num = binomial_power(-1j, 1.0, mk - pk.a).scale((-1) ** mk)
        plus_den = D * binomial_power(1j, 1.0, pk.b) * pk.rest if pk.b else D * pk.rest
        minus_num = binomial_power(1j, 1.0, mk - pk.b).scale(-e)
        minus_den = D * binomial_power(-1j, 1.0, pk.a) * pk.rest if pk.a else D * pk.rest
        factors.append({1: (plus_num, plus_den), -1: (minus_num, minus_den)})
    out = {}
    for sigma in all_octants(n):
        num = R.numerator
        dens = []
        for k, s in enumerate(sigma):
            fn, fd = factors[k][s]
            num = num.mul_univariate(fn, k)
            dens.append(fd)
        out[sigma] = SeparableRational(num, dens)
    return out


def split_atom(
    R: SeparableRational,
    p: float,
    params: SplitParams | None = None,
    tol: float | None = None,
    with_certificates: bool = False,
    input_norm: QuasiNormResult | None = None,
    order: int = 10,
) -> OctantSplit:
    """Split ``R`` into octant components and measure their quasi-norms."""
    if params is None:
        raise ValueError("split_atom needs SplitParams; use select_phase for an automatic choice")
    comps = split_components(R, params)
    octs = list(comps)
    norms = dict(zip(octs, ordered_map(lambda s: lp_quasinorm(comps[s], p, tol=tol, order=order), octs)))
    certs = {}
    if with_certificates:
        for s in octs:
            c = certify(comps[s], s, p, compute_norm=False)
            certs[s] = HardyCertificate(
                c.octant, c.p, c.per_variable, c.lp_finite, norms[s], c.status, c.reason
            )
    return OctantSplit(comps, params, norms, bound_constant(R.n, p), input_norm, certs)


def _degenerate(m: int, phi: float) -> bool:
    return abs((-1) ** m - np.exp(1j * phi)) <= TAU_DEGENERATE


def phase_grid(n: int, grid_per_dim: int, seed: int, m: Sequence[int] | None = None) -> list[tuple[float, ...]]:
    """Jittered cell-midpoint grid on ``(-pi, pi)**n``; degenerate phases dropped."""
    if grid_per_dim < 1:
        raise ValueError("grid_per_dim must be positive")
    rng = np.random.default_rng(seed)
    axes = []
    for _ in range(n):
        jitter = rng.uniform(-0.25, 0.25)
        axes.append(-math.pi + 2.0 * math.pi * (np.arange(grid_per_dim) + 0.5 + jitter) / grid_per_dim)
    pts = [tuple(float(v) for v in pt) for pt in product(*axes)]
    if m is not None:
        pts = [pt for pt in pts if not any(_degenerate(mk, ph) for mk, ph in zip(m, pt))]
    return pts


def _scan(R, p, m, grid, tol, order):
    def one(phis):
        try:
            s = split_atom(R, p, SplitParams(tuple(m), phis), tol=tol, order=order)
        except (DegeneratePhase, DivergentIntegral):
            return math.inf, math.inf
        return s.norm_sum, s.norm_error

    return ordered_map(one, grid)


def select_phase(
    R: SeparableRational,
    p: float,
    m: Sequence[int] | None = None,
    grid_per_dim: int = 16,
    seed: int = 42,
    tol: float | None = None,
    scan_tol: float = SCAN_TOL,
    input_norm: QuasiNormResult | None = None,
    with_certificates: bool = True,
) -> tuple[tuple[float, ...], OctantSplit]:
    """Pick a phase on a seeded grid so the summed component norms meet ``C_np``.

    The grid is scanned at loose tolerance; the minimiser is re-split at full
    tolerance and checked against ``C_np * ||R||_p^p``.  The grid is doubled
    once before :class:`PhaseSearchFailed` is raised.
    """
    if grid_per_dim < 8:
        raise ValueError("grid_per_dim must be >= 8")
    m = tuple(default_m(R) if m is None else (int(v) for v in m))
    if len(m) != R.n:
        raise DimensionMismatch("m has the wrong length")
    rn = input_norm or lp_quasinorm(R, p, tol=tol)
    cnp = bound_constant(R.n, p)
    best = None
    g = grid_per_dim
    for attempt in range(2):
        grid = phase_grid(R.n, g, seed + attempt, m)
        vals = _scan(R, p, m, grid, scan_tol, SCAN_ORDER)
        finite = [(v, e, i) for i, (v, e) in enumerate(vals) if math.isfinite(v)]
        if not finite:
            g *= 2
            continue
        mean = math.fsum(v for v, _, _ in finite) / len(finite)
        mean_err = math.fsum(e for _, e, _ in finite) / len(finite)
        _, _, i_best = min(finite)
        phis = grid[i_best]
        s = split_atom(
            R, p, SplitParams(m, phis), tol=tol, with_certificates=with_certificates, input_norm=rn
        )
        s.grid_mean, s.grid_mean_error, s.grid_size = mean, mean_err, len(finite)
        best = (phis, s)
        if s.norm_sum <= cnp * rn.value + s.norm_error + cnp * rn.abs_error:
            return best
        g *= 2
    raise PhaseSearchFailed("no phase on the refined grid meets the C_np bound", best=best)
