"""L^p quasi-norm integrals for 0 < p < 1.

Each real axis is compactified with ``x = tan t``.  The interval
``(-pi/2, pi/2)`` is cut at every real pole (and, in one dimension, at every
real numerator zero), and every cell carries Gauss-Jacobi weights matched to
the algebraic endpoint behaviour ``|t - t0|**e``.  Tails become endpoint
singularities at ``t = +-pi/2`` with exponent ``p * gap - 2``.

One-dimensional integrals are adaptive: the cell with the largest
``|Q_2k - Q_k|`` is bisected until the summed estimate meets the tolerance.
In two and three dimensions a per-axis rule is grown adaptively on a
separable proxy of the integrand, and the tensor product is refined
uniformly until two successive levels agree.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma, roots_jacobi

from ._parallel import ordered_map
from .errors import DimensionMismatch, DivergentIntegral, NonConvergence, ToleranceNotMet
from .polyalg import MultiPoly, SeparableRational, UniPoly, _scaled_vandermonde, roots

DEFAULT_TOL = {1: 1e-7, 2: 1e-5, 3: 1e-4}
MAX_DIM = 3
TAU_REAL = 1e-8
NEAR_REAL = 0.5
MAX_CELLS = 4000
MAX_GRID_POINTS = 2_000_000
HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class QuasiNormResult:
    """``value`` approximates the integral of ``|R(x + iy)|**p``."""

    value: float
    abs_error: float
    p: float
    y_offset: tuple[float, ...]
    converged: bool = True

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly inside (0, 1)")
        if self.value < 0 or self.abs_error < 0:
            raise ValueError("value and abs_error must be nonnegative")

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "abs_error": self.abs_error,
            "p": self.p,
            "y_offset": list(self.y_offset),
            "converged": self.converged,
        }


@dataclass(frozen=True)
class SingularitySchedule:
    """Per-variable sorted real pole locations with their orders."""

    locations: tuple[tuple[tuple[float, int], ...], ...]

    def __post_init__(self):
        for row in self.locations:
            xs = [x for x, _ in row]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("pole locations must be strictly increasing")
            if any(o < 1 for _, o in row):
                raise ValueError("pole orders must be >= 1")


@dataclass(frozen=True)
class AxisSpec:
    """Singular structure of the integrand along one axis.

    ``breaks`` lists ``(x0, e)``: the integrand behaves like ``|x - x0|**e``
    near ``x0`` (``e = 0`` marks a plain cut).  ``tail`` is the exponent
    ``p * gap`` of the decay ``|x|**(-p * gap)`` at infinity.
    """

    breaks: tuple[tuple[float, float], ...] = ()
    tail: float = 2.0
    proxy: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def proxy_values(self, x: np.ndarray) -> np.ndarray:
        if self.proxy is not None:
            return self.proxy(x)
        out = (1.0 + x * x) ** (-0.5 * self.tail)
        for x0, e in self.breaks:
            if e != 0:
                out = out * np.abs(x - x0) ** e
        return out


# ---------------------------------------------------------------------------
# one-dimensional rules


@lru_cache(maxsize=512)
def _jacobi(order: int, a_right: float, b_left: float) -> tuple[np.ndarray, np.ndarray]:
    # weight (1 - u)**a_right (1 + u)**b_left on [-1, 1]; divided back out so
    # the returned weights integrate the full integrand
    u, w = roots_jacobi(order, a_right, b_left)
    w = w / ((1.0 - u) ** a_right * (1.0 + u) ** b_left)
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


def _key(e: float) -> float:
    return round(float(e), 12)


def _cell_rule(cells: Sequence[tuple], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights in ``t`` for all ``cells`` = (a, b, ea, eb)."""
    ts, ws = [], []
    for a, b, ea, eb in cells:
        u, w = _jacobi(order, _key(eb), _key(ea))
        h = 0.5 * (b - a)
        ts.append(0.5 * (a + b) + h * u)
        ws.append(h * w)
    if not ts:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(ts), np.concatenate(ws)


def _to_x(t: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.tan(t)
    return x, w * (1.0 + x * x)


def axis_rule(cells: Sequence[tuple], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Real nodes and weights on the whole line for a cell partition in ``t``."""
    return _to_x(*_cell_rule(cells, order))


def _initial_cells(spec: AxisSpec) -> list[tuple]:
    pts: dict[float, float] = {}
    for x0, e in spec.breaks:
        t0 = float(np.arctan(x0))
        hit = next((k for k in pts if abs(k - t0) <= 1e-13), None)
        if hit is None:
            pts[t0] = float(e)
        else:
            pts[hit] += float(e)
    tail = spec.tail - 2.0
    knots = [(-HALF_PI, tail)] + sorted(pts.items()) + [(HALF_PI, tail)]
    for t0, e in knots:
        if e <= -1.0:
            raise DivergentIntegral(f"non-integrable singularity (exponent {e:.3g}) at t={t0:.6g}")
    return [(a, b, ea, eb) for (a, ea), (b, eb) in zip(knots, knots[1:]) if b > a]


def _split(cell: tuple, parts: int) -> list[tuple]:
    a, b, ea, eb = cell
    edges = np.linspace(a, b, parts + 1)
    out = []
    for j in range(parts):
        out.append((edges[j], edges[j + 1], ea if j == 0 else 0.0, eb if j == parts - 1 else 0.0))
    return out


def _cell_values(F, cells, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    x1, w1 = axis_rule(cells, lo)
    x2, w2 = axis_rule(cells, hi)
    v1 = w1 * F(x1)
    v2 = w2 * F(x2)
    q1 = v1.reshape(len(cells), lo).sum(axis=1)
    q2 = v2.reshape(len(cells), hi).sum(axis=1)
    return q2, np.abs(q2 - q1)


def adaptive_1d(
    F: Callable[[np.ndarray], np.ndarray],
    spec: AxisSpec,
    tol: float,
    order: int = 10,
    max_cells: int = MAX_CELLS,
) -> tuple[float, float, list[tuple], bool]:
    """Integrate the nonnegative ``F`` over the real line.

    Returns ``(value, abs_error, cells, converged)``; ``tol`` is relative.
    """
    lo, hi = order, 2 * order
    cells = _initial_cells(spec)
    q, e = _cell_values(F, cells, lo, hi)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(e))):
        raise DivergentIntegral("integrand is not finite at quadrature nodes")
    heap = [(-ei, i) for i, ei in enumerate(e)]
    heapq.heapify(heap)
    store = {i: (c, qi, ei) for i, (c, qi, ei) in enumerate(zip(cells, q, e))}
    nxt = len(cells)
    total = float(q.sum())
    err = float(e.sum())
    while err > tol * abs(total) and err > 1e-300 and len(store) < max_cells:
        # split the worst few cells at once to keep evaluations batched
        target = err - 0.5 * tol * abs(total)
        batch, removed = [], 0.0
        while heap and removed < target and len(batch) < 64:
            _, i = heapq.heappop(heap)
            batch.append(i)
            removed += store[i][2]
        children = [ch for i in batch for ch in _split(store[i][0], 2)]
        cq, ce = _cell_values(F, children, lo, hi)
        for i in batch:
            _, qi, ei = store.pop(i)
            total -= qi
            err -= ei
        for ch, qi, ei in zip(children, cq, ce):
            store[nxt] = (ch, qi, ei)
            heapq.heappush(heap, (-ei, nxt))
            nxt += 1
            total += qi
            err += ei
        # re-sum occasionally to avoid drift from incremental updates
        total = float(sum(v[1] for v in store.values()))
        err = float(sum(v[2] for v in store.values()))
    final = [store[i][0] for i in sorted(store, key=lambda i: store[i][0][0])]
    return total, err, final, err <= tol * abs(total) or err <= 1e-300


# ---------------------------------------------------------------------------
# tensor products


def _grid_sum(grid_fn, xs, ws, p) -> float:
    """``sum W * |grid_fn(xs)|**p`` over the tensor grid, chunked on axis 0."""
    inner = int(np.prod([len(x) for x in xs[1:]])) or 1
    step = max(1, MAX_GRID_POINTS // inner)
    chunks = [slice(i, i + step) for i in range(0, len(xs[0]), step)]

    def part(sl):
        vals = np.abs(grid_fn([xs[0][sl]] + list(xs[1:]))) ** p
        out = vals
        for w in reversed([ws[0][sl]] + list(ws[1:])):
            out = out @ w
        return float(out)

    return math.fsum(ordered_map(part, chunks))


def _grid_sum_pow(abs_pow_fn, xs, ws) -> float:
    inner = int(np.prod([len(x) for x in xs[1:]])) or 1
    step = max(1, MAX_GRID_POINTS // inner)
    chunks = [slice(i, i + step) for i in range(0, len(xs[0]), step)]

    def part(sl):
        out = abs_pow_fn([xs[0][sl]] + list(xs[1:]))
        for w in reversed([ws[0][sl]] + list(ws[1:])):
            out = out @ w
        return float(out)

    return math.fsum(ordered_map(part, chunks))


def tensor_integrate(
    abs_pow_fn: Callable[[list[np.ndarray]], np.ndarray],
    specs: Sequence[AxisSpec],
    tol: float,
    order: int = 10,
    max_level: int = 3,
) -> tuple[float, float, bool]:
    """Integrate a nonnegative grid function over R^n, n >= 2.

    ``abs_pow_fn(axes)`` returns integrand values on the tensor grid spanned
    by ``axes``.  Returns ``(value, abs_error, converged)``.
    """
    n = len(specs)
    axis_cells = []
    for spec in specs:
        _, _, cells, _ = adaptive_1d(spec.proxy_values, spec, tol / (4 * n), order=order)
        axis_cells.append(cells)
    prev = None
    best, err = 0.0, math.inf
    for level in range(max_level + 1):
        parts = 2**level
        rules = [axis_rule([s for c in cells for s in _split(c, parts)], 2 * order) for cells in axis_cells]
        npts = int(np.prod([len(r[0]) for r in rules]))
        if level > 0 and npts > 20 * MAX_GRID_POINTS:
            break
        val = _grid_sum_pow(abs_pow_fn, [r[0] for r in rules], [r[1] for r in rules])
        if not math.isfinite(val):
            raise DivergentIntegral("integrand is not finite at quadrature nodes")
        if prev is not None:
            best, err = val, abs(val - prev)
            if err <= tol * abs(val) or err <= 1e-300:
                return best, err, True
        prev = val
    if err == math.inf:
        best, err = prev, abs(prev)
    return best, err, False


def _batched_real_roots(rows: np.ndarray) -> list[list[tuple[float, int]]]:
    """Real roots with multiplicities of each row (ascending coefficients).

    Rows are grouped by effective degree so one stacked eigenvalue call
    serves each group.
    """
    L = rows.shape[0]
    out: list[list[tuple[float, int]]] = [[] for _ in range(L)]
    mag = np.abs(rows)
    keep = mag > 1e-14 * mag.max(axis=1, initial=0.0)[:, None]
    deg = np.where(keep.any(axis=1), rows.shape[1] - 1 - np.argmax(keep[:, ::-1], axis=1), 0)
    for d in np.unique(deg):
        if d < 1:
            continue
        idx = np.flatnonzero(deg == d)
        monic = rows[idx, :d] / rows[idx, d][:, None]
        comp = np.zeros((len(idx), d, d), dtype=rows.dtype)
        comp[:, 1:, :-1] = np.eye(d - 1)
        comp[:, :, -1] = -monic
        eig = np.linalg.eigvals(comp)
        for i, rts in zip(idx, eig):
            scale = np.maximum(1.0, np.abs(rts))
            is_real = np.abs(rts.imag) <= 1e2 * TAU_REAL * scale
            real = np.sort(rts.real[is_real])
            merged: list[list] = []
            for r in real:
                if merged and abs(r - merged[-1][0]) <= 1e-7 * max(1.0, abs(r)):
                    merged[-1][1] += 1
                else:
                    merged.append([float(r), 1])
            near = rts.real[~is_real & (np.abs(rts.imag) <= NEAR_REAL * scale)]
            # near-real roots become plain cuts (multiplicity 0)
            out[i] = [(r, m) for r, m in merged] + [(float(r), 0) for r in near]
    return out


def _split_cells(cells: np.ndarray, parts: int) -> np.ndarray:
    """Split each ``(a, b, ea, eb)`` row into ``parts`` equal pieces."""
    if parts == 1:
        return cells
    a, b, ea, eb = cells.T
    j = np.arange(parts)
    lo = a[:, None] + (b - a)[:, None] * j / parts
    hi = a[:, None] + (b - a)[:, None] * (j + 1) / parts
    el = np.where(j == 0, ea[:, None], 0.0)
    er = np.where(j == parts - 1, eb[:, None], 0.0)
    return np.stack([lo, hi, el, er], axis=-1).reshape(-1, 4)


def _cell_sums(cells: np.ndarray, order: int, F) -> np.ndarray:
    """Gauss-Jacobi sum per cell; ``F(x, rows_idx)`` evaluates at real nodes."""
    out = np.zeros(len(cells))
    keys = np.round(cells[:, 2:], 12)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    for g, (ea, eb) in enumerate(uniq):
        sel = np.flatnonzero(inv == g)
        u, w = _jacobi(order, float(eb), float(ea))
        a, b = cells[sel, 0], cells[sel, 1]
        h = 0.5 * (b - a)
        t = (0.5 * (a + b))[:, None] + h[:, None] * u[None, :]
        x = np.tan(t)
        W = h[:, None] * w[None, :] * (1.0 + x * x)
        out[sel] = (W * F(x, sel)).sum(axis=1)
    return out


def _line_integrals(rows, base_breaks, tail, line_fn, p, tol, order, max_rounds=14):
    """Integrals over ``x2`` of a batch of lines with per-cell refinement.

    ``line_fn(x, owner)`` evaluates the integrand at nodes ``x`` (shape
    ``(cells, order)``) on the lines ``owner``.  Returns values and a
    per-line convergence flag.
    """
    L = len(rows)
    vals = np.zeros(L)
    ok = np.ones(L, dtype=bool)
    live = np.flatnonzero(np.any(rows != 0, axis=1))
    if live.size == 0:
        return vals, ok
    pieces, owners = [], []
    for i, rl in zip(live, _batched_real_roots(rows[live])):
        spec = AxisSpec(tuple(base_breaks) + tuple((r, p * m) for r, m in rl), tail)
        c = np.asarray(_initial_cells(spec), dtype=float)
        pieces.append(c)
        owners.append(np.full(len(c), i))
    cells = np.concatenate(pieces)
    owner = np.concatenate(owners)
    q = np.zeros(len(cells))
    e = np.zeros(len(cells))
    fresh = np.arange(len(cells))
    for _ in range(max_rounds):
        sub, sub_owner = cells[fresh], owner[fresh]
        F = lambda x, sel: line_fn(x, sub_owner[sel])
        lo = _cell_sums(sub, order, F)
        hi = _cell_sums(sub, 2 * order, F)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DivergentIntegral("integrand is not finite at quadrature nodes")
        q[fresh], e[fresh] = hi, np.abs(hi - lo)
        v = np.bincount(owner, q, minlength=L)
        err = np.bincount(owner, e, minlength=L)
        count = np.bincount(owner, minlength=L)
        bad = (err > tol * np.abs(v)) & (err > 1e-300)
        if not bad.any():
            break
        # split the cells carrying more than their share of a failing line's budget
        share = tol * np.abs(v[owner]) / (2.0 * np.maximum(count[owner], 1))
        split = bad[owner] & (e > share)
        if not split.any():
            split = bad[owner]
        keep = ~split
        halves = _split_cells(cells[split], 2)
        cells = np.concatenate([cells[keep], halves])
        owner = np.concatenate([owner[keep], np.repeat(owner[split], 2)])
        q = np.concatenate([q[keep], np.zeros(len(halves))])
        e = np.concatenate([e[keep], np.zeros(len(halves))])
        fresh = np.arange(int(keep.sum()), len(cells))
    else:
        ok[bad] = False
    vals[:] = np.bincount(owner, q, minlength=L)
    return vals, ok


def iterated_integrate_2d(
    R: SeparableRational,
    p: float,
    specs: Sequence[AxisSpec],
    tol: float,
    order: int = 10,
) -> tuple[float, float, bool]:
    """``integral |R|**p`` over ``R^2`` as an outer integral of line integrals.

    Each line ``x1 = const`` gets breakpoints at the real zeros of the
    numerator restricted to it, so zero curves of the numerator are resolved
    exactly instead of being smeared across a tensor grid.
    """
    C = np.asarray(R.numerator.coef, dtype=complex)
    if real_up_to_phase(R.numerator):
        # |P| is unchanged by a unit factor; real arithmetic is much cheaper
        big = C.ravel()[np.argmax(np.abs(C))]
        C = (C * (np.conj(big) / abs(big))).real
    d1, d2 = C.shape[0] - 1, C.shape[1] - 1
    q1, q2 = R.denominators
    inner_tol = 0.25 * tol
    state = {"ok": True}
    lead = [(r, 0.0) for r, _ in _batched_real_roots(C[:, -1][None, :])[0]]
    outer = AxisSpec(tuple(specs[0].breaks) + tuple(lead), specs[0].tail)

    def G(xs):
        xs = np.asarray(xs, dtype=float)
        z = xs.astype(complex)
        s1 = np.maximum(1.0, np.abs(xs))
        rows = _scaled_vandermonde(z, s1, d1) @ C
        if np.isrealobj(C):
            rows = rows.real
        with np.errstate(divide="ignore"):
            k1 = np.abs(q1.scaled_eval(z, s1)) ** (-p) * s1 ** (p * (d1 - q1.degree))

        def line_fn(x, owner):
            zz = x.astype(complex)
            s2 = np.maximum(1.0, np.abs(x))
            u = x / s2
            inv = 1.0 / s2
            ip = np.ones(x.shape)
            acc = np.broadcast_to(rows[owner, d2][:, None], x.shape).astype(rows.dtype)
            for j in range(d2 - 1, -1, -1):
                ip = ip * inv
                acc = acc * u + rows[owner, j][:, None] * ip
            with np.errstate(divide="ignore"):
                den = np.abs(q2.scaled_eval(zz, s2)) ** (-p) * s2 ** (p * (d2 - q2.degree))
            return np.abs(acc) ** p * den

        vals, ok = _line_integrals(rows, specs[1].breaks, specs[1].tail, line_fn, p, inner_tol, order)
        state["ok"] &= bool(ok.all())
        with np.errstate(invalid="ignore"):
            return np.where(k1 > 0, k1 * vals, 0.0)

    value, err, _, ok = adaptive_1d(G, outer, 0.5 * tol, order=order)
    return value, err + inner_tol * abs(value), ok and state["ok"]


def real_up_to_phase(P: MultiPoly, rtol: float = 1e-12) -> bool:
    """True when ``P`` is a real polynomial times a unit constant."""
    C = np.asarray(P.coef, dtype=complex).ravel()
    big = C[np.argmax(np.abs(C))]
    if big == 0:
        return False
    D = C * (np.conj(big) / abs(big))
    return bool(np.abs(D.imag).max() <= rtol * np.abs(D).max())


# ---------------------------------------------------------------------------
# rationals


def _root_list(q: UniPoly) -> list:
    if q.degree < 1:
        return []
    try:
        return roots(q)
    except NonConvergence as exc:
        return list(exc.partial or [])


def _is_real(r: complex) -> bool:
    return abs(r.imag) <= TAU_REAL * max(1.0, abs(r))


def _axis_breaks(q: UniPoly, p: float, sign: float) -> tuple[list[tuple[float, float]], list[tuple[float, int]]]:
    """Breakpoints from the roots of ``q``; ``sign=-1`` for denominators."""
    breaks, real = [], []
    for r in _root_list(q):
        z = r.value
        if _is_real(z):
            breaks.append((z.real, sign * p * r.multiplicity))
            real.append((z.real, r.multiplicity))
        elif abs(z.imag) <= NEAR_REAL * max(1.0, abs(z)):
            breaks.append((z.real, 0.0))
    return breaks, real


def singularity_schedule(R: SeparableRational, y: Sequence[float] | None = None) -> SingularitySchedule:
    """Real poles of ``x -> R(x + iy)`` per variable."""
    y = np.zeros(R.n) if y is None else np.asarray(y, float)
    rows = []
    for k, q in enumerate(R.denominators):
        _, real = _axis_breaks(q.shift(1j * y[k]), 1.0, -1.0)
        merged: dict[float, int] = {}
        for x0, m in sorted(real):
            hit = next((k2 for k2 in merged if abs(k2 - x0) <= TAU_REAL * max(1.0, abs(x0))), None)
            if hit is None:
                merged[x0] = m
            else:
                merged[hit] += m
        rows.append(tuple(sorted(merged.items())))
    return SingularitySchedule(tuple(rows))


def screen(R: SeparableRational, p: float, y: Sequence[float] | None = None) -> SingularitySchedule:
    """Static integrability screening; raises :class:`DivergentIntegral`."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    for k, g in enumerate(R.gaps):
        if p * g <= 1.0:
            raise DivergentIntegral(f"variable {k}: p*gap = {p * g:.4g} <= 1, tail not integrable")
    sched = singularity_schedule(R, y)
    for k, row in enumerate(sched.locations):
        for x0, order in row:
            if p * order >= 1.0:
                raise DivergentIntegral(
                    f"variable {k}: real pole at {x0:.6g} of order {order}, p*order = {p * order:.4g} >= 1"
                )
    return sched


def _check_p(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")


def _default_tol(n: int) -> float:
    if n > MAX_DIM:
        raise DimensionMismatch(f"quadrature supports n <= {MAX_DIM}, got n={n}")
    return DEFAULT_TOL[n]


def numerator_factors(P: MultiPoly, rtol: float = 1e-13) -> list[UniPoly] | None:
    """Univariate factors when ``P`` is a product ``prod_k u_k(x_k)``, else None."""
    C = np.asarray(P.coef)
    if P.n == 1:
        return [P.as_univariate()]
    if not np.any(C):
        return None
    out = []
    for k in range(P.n):
        M = np.moveaxis(C, k, 0).reshape(C.shape[k], -1)
        u, sv, _ = np.linalg.svd(M, full_matrices=False)
        if len(sv) > 1 and sv[1] > rtol * sv[0]:
            return None
        out.append(UniPoly(u[:, 0]))
    return out


def rational_axis_specs(R: SeparableRational, p: float, with_numerator: bool = False) -> list[AxisSpec]:
    """Axis specs for ``|R|**p`` on the real grid (``R`` already shifted)."""
    specs = []
    degs = R.numerator.degrees
    factors = numerator_factors(R.numerator) if with_numerator else None
    for k, q in enumerate(R.denominators):
        breaks, _ = _axis_breaks(q, p, -1.0)
        if with_numerator and factors is not None and factors[k].degree >= 1:
            # approximate locations suffice for breakpoints
            rl = _batched_real_roots(np.asarray(factors[k].coeffs)[None, :])[0]
            breaks = breaks + [(r, p * m) for r, m in rl if m > 0]
        tail = p * R.gaps[k]
        d = max(degs[k], 0)

        def proxy(x, q=q, d=d, tail=tail):
            s = np.maximum(1.0, np.abs(x))
            den = np.abs(q.scaled_eval(x.astype(complex), s)) ** (-p)
            return den * s ** (-tail) * ((1.0 + x * x) / (s * s)) ** (0.5 * p * d)

        specs.append(AxisSpec(tuple(breaks), tail, proxy))
    return specs


def lp_quasinorm(
    R: SeparableRational,
    p: float,
    y: Sequence[float] | None = None,
    tol: float | None = None,
    strict: bool = False,
    order: int = 10,
) -> QuasiNormResult:
    """Integral of ``|R(x + iy)|**p`` over ``R^n``.

    Raises :class:`DivergentIntegral` when static screening fails.  When the
    error estimate misses ``tol`` the best estimate is returned with
    ``converged=False``, or :class:`ToleranceNotMet` is raised if ``strict``.
    """
    _check_p(p)
    n = R.n
    tol = _default_tol(n) if tol is None else float(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = tuple(0.0 for _ in range(n)) if y is None else tuple(float(v) for v in y)
    if len(y) != n:
        raise DimensionMismatch(f"y has length {len(y)}, rational has n={n}")
    if R.is_zero:
        return QuasiNormResult(0.0, 0.0, p, y)
    screen(R, p, y)
    Ry = R.shift([1j * v for v in y]) if any(y) else R
    specs = rational_axis_specs(Ry, p, with_numerator=True)
    if n == 1:
        F = lambda x: Ry.abs_pow_points(x[:, None].astype(complex), p)
        value, err, _, ok = adaptive_1d(F, specs[0], tol, order=order)
    elif (
        n == 2
        and min(Ry.numerator.degrees) >= 1
        and real_up_to_phase(Ry.numerator)
        and numerator_factors(Ry.numerator) is None
    ):
        # a real numerator vanishes on curves, which tensor rules resolve poorly
        value, err, ok = iterated_integrate_2d(Ry, p, specs, tol, order=order)
    else:
        value, err, ok = tensor_integrate(lambda axes: Ry.abs_pow_grid(axes, p), specs, tol, order=order)
    res = QuasiNormResult(float(value), float(err), p, y, bool(ok))
    if not ok and strict:
        raise ToleranceNotMet(f"estimated error {err:.3g} above tolerance {tol:.3g}", best=res)
    return res


def integrate_abs_pow(
    values_fn: Callable[[list[np.ndarray]], np.ndarray],
    specs: Sequence[AxisSpec],
    p: float,
    tol: float | None = None,
    strict: bool = False,
    order: int = 10,
) -> QuasiNormResult:
    """Integral of ``|F|**p`` for a general grid function ``F``.

    ``values_fn(axes)`` returns ``F`` on the tensor grid spanned by the real
    coordinate arrays ``axes``; ``specs`` describe its singular structure.
    """
    _check_p(p)
    n = len(specs)
    tol = _default_tol(n) if tol is None else float(tol)
    if n == 1:
        F = lambda x: np.abs(values_fn([x])) ** p
        value, err, _, ok = adaptive_1d(F, specs[0], tol, order=order)
    else:
        value, err, ok = tensor_integrate(lambda axes: np.abs(values_fn(axes)) ** p, specs, tol, order=order)
    res = QuasiNormResult(float(value), float(err), p, tuple(0.0 for _ in range(n)), bool(ok))
    if not ok and strict:
        raise ToleranceNotMet(f"estimated error {err:.3g} above tolerance {tol:.3g}", best=res)
    return res


def merge_specs(spec_lists: Sequence[Sequence[AxisSpec]]) -> list[AxisSpec]:
    """Axis specs for a sum: union of breakpoints, slowest tail."""
    n = len(spec_lists[0])
    out = []
    for k in range(n):
        breaks: dict[float, float] = {}
        for specs in spec_lists:
            for x0, e in specs[k].breaks:
                breaks[x0] = min(breaks.get(x0, 0.0), e)
        tail = min(specs[k].tail for specs in spec_lists)
        out.append(AxisSpec(tuple(sorted(breaks.items())), tail))
    return out


def lp_quasinorm_sum(
    Rs: Sequence[SeparableRational],
    p: float,
    tol: float | None = None,
    strict: bool = False,
    order: int = 10,
) -> QuasiNormResult:
    """Quasi-norm of ``sum(Rs)`` on the real grid without forming the sum."""
    Rs = [R for R in Rs if not R.is_zero]
    if not Rs:
        return QuasiNormResult(0.0, 0.0, p, ())
    for R in Rs:
        screen(R, p)
    specs = merge_specs([rational_axis_specs(R, p) for R in Rs])

    def values(axes):
        axes = [np.asarray(a, dtype=complex) for a in axes]
        return sum(R.values_grid(axes) for R in Rs)

    return integrate_abs_pow(values, specs, p, tol, strict, order)


def norm_slice_profile(
    R: SeparableRational,
    p: float,
    octant: Sequence[int],
    y_grid: Sequence[Sequence[float]],
    tol: float | None = None,
) -> list[QuasiNormResult]:
    """Slices ``y -> integral |R(x + iy)|**p`` at points of the closed octant."""
    octant = tuple(int(s) for s in octant)
    if len(octant) != R.n:
        raise DimensionMismatch("octant length does not match the rational")
    out = []
    for y in y_grid:
        y = np.asarray(y, float)
        if len(y) != R.n:
            raise DimensionMismatch("y has the wrong length")
        if np.any(np.asarray(octant) * y < 0):
            raise ValueError(f"y={y.tolist()} is outside the closed octant {octant}")
        out.append(lp_quasinorm(R, p, y, tol))
    return out


def angular_factor_integral(p: float) -> float:
    """``integral_{-pi}^{pi} dtheta / (2**p |sin(theta/2)|**p)``, closed form."""
    _check_p(p)
    return 2.0 * math.pi * gamma(1.0 - p) / gamma(1.0 - 0.5 * p) ** 2


def angular_factor_bound(p: float) -> float:
    """The elementary upper bound ``2**(1-p) pi / (1-p)`` for the angular integral."""
    _check_p(p)
    return 2.0 ** (1.0 - p) * math.pi / (1.0 - p)


def bound_constant(n: int, p: float) -> float:
    """``2**n (2**(1-p) pi / (1-p))**n``."""
    return 2.0**n * angular_factor_bound(p) ** n


def mean_over_phase(
    R: SeparableRational,
    p: float,
    m: Sequence[int],
    grid_per_dim: int = 8,
    seed: int = 42,
    tol: float | None = None,
) -> tuple[float, float]:
    """Mean over a phase grid of the summed octant quasi-norms of the split.

    Returns ``(mean, mean_abs_error)``.
    """
    from .split import phase_grid, split_atom, SplitParams

    if grid_per_dim < 8:
        raise ValueError("grid_per_dim must be >= 8")
    if R.is_zero:
        return 0.0, 0.0
    grid = phase_grid(R.n, grid_per_dim, seed, m)

    def one(phis):
        s = split_atom(R, p, SplitParams(tuple(m), tuple(phis)), tol=tol)
        return sum(r.value for r in s.norms.values()), sum(r.abs_error for r in s.norms.values())

    vals = ordered_map(one, grid)
    return (
        math.fsum(v for v, _ in vals) / len(vals),
        math.fsum(e for _, e in vals) / len(vals),
    )
