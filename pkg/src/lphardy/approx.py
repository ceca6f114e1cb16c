"""Rational approximation of L^p functions by atoms ``P / prod (1 + x_k**2)**L_k``.

Fitting works in the variable ``t = arctan x``.  Since
``(1 + ix)**(l+k) (1 - ix)**(l-k) = (1 + x**2)**l exp(2ikt)``, a polynomial
``P`` of degree at most ``2l`` divided by ``(1 + x**2)**l`` is exactly a
trigonometric polynomial of degree ``l`` in ``2t``.  The target
``f(x) (1 + x**2)**w`` is sampled on a uniform ``t`` grid and projected onto
that space by a discrete Fourier transform, subject to the linear constraints
that cap the degree of ``P``.  Dividing back by ``(1 + x**2)**w`` gives the
atom.  The Fourier coefficients are then converted to monomial form.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import LinearNDInterpolator

from .errors import DimensionMismatch, IllConditionedFit, SchemaError
from .io import check_samples_header
from .polyalg import MultiPoly, SeparableRational, binomial_power, one_plus_square_power
from .quadrature import (
    AxisSpec,
    QuasiNormResult,
    integrate_abs_pow,
    lp_quasinorm,
    merge_specs,
    rational_axis_specs,
)

MAX_AMPLIFICATION = 1e9
ROUNDING_FLOOR = 1e3 * np.finfo(float).eps
MAX_TRIG_DEGREE = {1: 40, 2: 32, 3: 16}


# ---------------------------------------------------------------------------
# sampled functions


@dataclass(frozen=True)
class SampledFunction:
    """A function on ``R^n`` given by a vectorised evaluator on ``(M, n)`` arrays.

    ``support`` is the half-width of a box containing the essential support
    and ``clip_level`` bounds the values; both feed truncation.  ``rational``
    optionally records an exact separable rational form.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    n: int
    support: float = 10.0
    clip_level: float = math.inf
    name: str = "f"
    rational: SeparableRational | None = field(default=None, compare=False)
    breaks: tuple[tuple[float, ...], ...] | None = None
    decay: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.support > 0 or not self.clip_level > 0:
            raise ValueError("support and clip level must be positive")

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise DimensionMismatch(f"points have dimension {X.shape[1]}, function has {self.n}")
        return np.asarray(self.evaluator(X))

    def grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid spanned by real ``axes``."""
        axes = [np.real(np.asarray(a)) for a in axes]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        return self(pts).reshape(mesh[0].shape)

    def axis_specs(self, p: float) -> list[AxisSpec]:
        """Quadrature hints: cuts at the support edges and known kinks."""
        if self.rational is not None:
            return rational_axis_specs(self.rational, p)
        specs = []
        for k in range(self.n):
            cuts = [(-self.support, 0.0), (self.support, 0.0), (0.0, 0.0)]
            if self.breaks is not None:
                cuts += [(b, 0.0) for b in self.breaks[k]]
            tail = p * self.decay if self.decay is not None else 2.0
            specs.append(AxisSpec(tuple(cuts), tail))
        return specs


def from_rational(R: SeparableRational, name: str = "rational") -> SampledFunction:
    """Boundary values of ``R`` on the real grid as a sampled function."""
    return SampledFunction(
        lambda X: R.evaluate_points(X.astype(complex), check_poles=False),
        R.n,
        support=10.0,
        name=name,
        rational=R,
    )


def gaussian(n: int) -> SampledFunction:
    """``exp(-|x|**2)``."""
    return SampledFunction(lambda X: np.exp(-np.sum(X * X, axis=1)), n, support=10.0, name="gaussian")


def bump(n: int) -> SampledFunction:
    """Smooth compactly supported ``exp(1 - 1/(1 - |x|**2))`` on the unit ball."""

    def ev(X):
        r2 = np.sum(X * X, axis=1)
        out = np.zeros(len(X))
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out

    return SampledFunction(ev, n, support=1.0, name="bump", breaks=tuple((-1.0, 1.0) for _ in range(n)))


def sinc_squared(n: int) -> SampledFunction:
    """``prod sinc(x_k)**2``; lies in L^p only for ``p > 1/2``."""
    return SampledFunction(
        lambda X: np.prod(np.sinc(X / np.pi) ** 2, axis=1), n, support=50.0, name="sinc-squared", decay=2.0
    )


def from_csv(path: str) -> SampledFunction:
    """Piecewise-linear interpolant of ``x1,...,xn,value`` samples, zero outside the hull."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        header = [h.strip() for h in header]
        n = check_samples_header(header)
        rows = []
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != n + 1:
                raise SchemaError(f"row has {len(row)} fields, expected {n + 1}", pointer=f"/{i + 1}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise SchemaError(f"non-numeric field: {exc}", pointer=f"/{i + 1}") from exc
    data = np.asarray(rows, dtype=float)
    if len(data) < 2:
        raise SchemaError("need at least two sample rows", pointer="")
    return from_samples(data[:, :n], data[:, n], name=f"csv:{path}")


def from_samples(points, values, name: str = "samples") -> SampledFunction:
    """Piecewise-linear interpolant of scattered samples, zero outside their hull."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    vals = np.asarray(values)
    if pts.shape[0] != vals.shape[0]:
        raise DimensionMismatch(f"{pts.shape[0]} points but {vals.shape[0]} values")
    n = pts.shape[1]
    half = float(np.abs(pts).max())
    if n == 1:
        order = np.argsort(pts[:, 0])
        xs, ys = pts[order, 0], vals[order]
        if np.iscomplexobj(ys):
            ev = lambda X: np.interp(X[:, 0], xs, ys.real, left=0.0, right=0.0) + 1j * np.interp(
                X[:, 0], xs, ys.imag, left=0.0, right=0.0
            )
        else:
            ev = lambda X: np.interp(X[:, 0], xs, ys, left=0.0, right=0.0)
        knots = (tuple(float(v) for v in xs),) if len(xs) <= 64 else None
    else:
        interp = LinearNDInterpolator(pts, vals, fill_value=0.0)
        ev = lambda X: interp(X)
        knots = None
    return SampledFunction(ev, n, support=max(half, 1e-9), name=name, breaks=knots)


BUILTINS = {"gaussian": gaussian, "bump": bump, "sinc-squared": sinc_squared}


def builtin(spec: str, n: int = 1) -> SampledFunction:
    """Resolve ``gaussian``, ``bump``, ``sinc-squared`` or ``csv:<path>``."""
    name = spec.split(":", 1)[1] if spec.startswith("builtin:") else spec
    if name.startswith("csv:"):
        return from_csv(name[4:])
    if name not in BUILTINS:
        raise ValueError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)} or csv:<path>")
    return BUILTINS[name](n)


# ---------------------------------------------------------------------------
# truncation


@dataclass
class Truncation:
    function: SampledFunction
    N: float
    mode: str
    error: QuasiNormResult | None


def truncate(f: SampledFunction, N: float, p: float | None = None, mode: str = "indicator") -> Truncation:
    """Restrict ``f`` to the ball ``|x| <= N`` and to values ``|f| <= N``.

    ``mode="indicator"`` zeroes points where ``|f| > N``; ``mode="clip"``
    clips those values to modulus ``N`` instead.  With ``p`` given, the
    quasi-norm ``||f_N - f||_p^p`` is estimated over the ball of radius
    ``f.support``.
    """
    if not N > 0:
        raise ValueError("N must be positive")
    if mode not in ("indicator", "clip"):
        raise ValueError("mode must be 'indicator' or 'clip'")

    def ev(X):
        v = f(X)
        inside = np.sum(X * X, axis=1) <= N * N
        big = np.abs(v) > N
        if mode == "indicator":
            v = np.where(big, 0.0, v)
        else:
            with np.errstate(invalid="ignore", divide="ignore"):
                v = np.where(big, v / np.abs(v) * N, v)
        return np.where(inside, v, 0.0)

    g = SampledFunction(
        ev, f.n, support=min(f.support, N), clip_level=N, name=f"{f.name}|N={N:g}", breaks=f.breaks
    )
    err = None
    if p is not None:
        diff = lambda axes: f.grid(axes) - g.grid(axes)
        specs = [
            AxisSpec(tuple(sorted({(-N, 0.0), (N, 0.0)} | set(s.breaks))), s.tail) for s in f.axis_specs(p)
        ]
        if f.rational is not None:
            specs = merge_specs([f.axis_specs(p), [AxisSpec(((-N, 0.0), (N, 0.0)), 2.0)] * f.n])
        err = integrate_abs_pow(diff, specs, p)
    return Truncation(g, N, mode, err)


def lp_norm_function(f: SampledFunction, p: float, tol: float | None = None) -> QuasiNormResult:
    """``||f||_p^p`` by quadrature (exact rational path when available)."""
    if f.rational is not None:
        return lp_quasinorm(f.rational, p, tol=tol)
    return integrate_abs_pow(lambda axes: f.grid(axes), f.axis_specs(p), p, tol)


# ---------------------------------------------------------------------------
# fitting


@lru_cache(maxsize=64)
def _basis(l: int) -> np.ndarray:
    """Row ``k + l``: monomial coefficients of ``(1 + ix)**(l+k) (1 - ix)**(l-k)``."""
    B = np.zeros((2 * l + 1, 2 * l + 1), dtype=complex)
    for j, k in enumerate(range(-l, l + 1)):
        a = binomial_power(1.0, 1j, l + k).coeffs if l + k > 0 else np.ones(1)
        b = binomial_power(1.0, -1j, l - k).coeffs if l - k > 0 else np.ones(1)
        c = np.convolve(a, b)
        B[j, : len(c)] = c
    B.setflags(write=False)
    return B


@lru_cache(maxsize=64)
def _projector(l: int, d: int) -> np.ndarray:
    """Orthogonal projector onto Fourier vectors whose monomial form has degree <= d."""
    B = _basis(l)
    A = B[:, d + 1 :].T  # rows: coefficient of x**j for j > d
    eye = np.eye(2 * l + 1, dtype=complex)
    if A.shape[0] == 0:
        return eye
    # null-space projector I - A^+ A via a least-squares solve
    Q, _ = np.linalg.qr(A.conj().T)
    P = eye - Q @ Q.conj().T
    P.setflags(write=False)
    return P


def _grid_t(M: int) -> np.ndarray:
    return -0.5 * math.pi + math.pi * (np.arange(M) + 0.5) / M


@dataclass
class FitResult:
    atom: SeparableRational
    l: tuple[int, ...]
    l_tilde: tuple[int, ...]
    max_degree: tuple[int, ...]
    residual_pp: QuasiNormResult | None
    amplification: float
    weight: tuple[int, ...]

    @property
    def residual(self) -> float | None:
        """``||f - Q||_p`` (the quasi-norm itself, not its p-th power)."""
        if self.residual_pp is None:
            return None
        return self.residual_pp.value ** (1.0 / self.residual_pp.p)


def _as_tuple(v, n: int, name: str) -> tuple[int, ...]:
    if v is None:
        return None
    if np.isscalar(v):
        return tuple(int(v) for _ in range(n))
    v = tuple(int(x) for x in v)
    if len(v) != n:
        raise DimensionMismatch(f"{name} has length {len(v)}, expected {n}")
    return v


def default_l_tilde(p: float) -> int:
    return math.ceil(1.0 / p) + 1


def fit_atom(
    f: SampledFunction,
    p: float,
    l: Sequence[int] | int,
    l_tilde: Sequence[int] | int | None = None,
    max_degree: Sequence[int] | int | None = None,
    samples: int | None = None,
    measure: bool = True,
    tol: float | None = None,
) -> FitResult:
    """Fit ``Q = P / prod (1 + x_k**2)**(l_k + l_tilde_k)`` to ``f``.

    ``deg_k P <= max_degree_k`` (default ``2 l_k + 2 l_tilde_k - 1``).  The fit
    minimises the discrete L2 error of ``(f - Q) (1 + x**2)**w`` on a uniform
    ``arctan`` grid, where ``w = L - ceil((max_degree + 1) / 2)``.  The
    p-quasi-norm residual is measured by quadrature when ``measure`` is set.
    """
    n = f.n
    if not 0 < p < 1:
        raise ValueError("p must lie strictly inside (0, 1)")
    l = _as_tuple(l, n, "l")
    lt = _as_tuple(l_tilde if l_tilde is not None else default_l_tilde(p), n, "l_tilde")
    if any(p * v <= 1 for v in lt):
        raise ValueError(f"need p * l_tilde > 1, got l_tilde={lt}")
    L = tuple(a + b for a, b in zip(l, lt))
    d = _as_tuple(max_degree, n, "max_degree") or tuple(2 * v - 1 for v in L)
    if any(dk >= 2 * Lk for dk, Lk in zip(d, L)):
        raise ValueError("max_degree must be < 2 (l + l_tilde)")
    if any(dk < 0 for dk in d):
        raise ValueError("max_degree must be nonnegative")
    try:
        return _fit(f, p, l, lt, L, d, samples, measure, tol)
    except IllConditionedFit:
        # lower the degree and the denominator together so the weight is unchanged
        d2 = tuple(max(0, math.ceil(0.75 * dk)) for dk in d)
        if d2 == d:
            raise
        shrink = tuple(math.ceil((a + 1) / 2) - math.ceil((b + 1) / 2) for a, b in zip(d, d2))
        l2 = tuple(max(0, lk - sk) for lk, sk in zip(l, shrink))
        L2 = tuple(a + b for a, b in zip(l2, lt))
        d2 = tuple(min(dk, 2 * Lk - 1) for dk, Lk in zip(d2, L2))
        return _fit(f, p, l2, lt, L2, d2, samples, measure, tol)


def _fit(f, p, l, lt, L, d, samples, measure, tol) -> FitResult:
    n = f.n
    lf = tuple(max(1, math.ceil((dk + 1) / 2)) for dk in d)
    w = tuple(Lk - lk for Lk, lk in zip(L, lf))
    if any(wk < 0 for wk in w):
        raise ValueError("max_degree too large for the denominator power")
    cap = MAX_TRIG_DEGREE.get(n, 12)
    if max(lf) > cap:
        raise IllConditionedFit(f"trigonometric degree {max(lf)} above {cap} for n={n}")
    Ms = [samples or max(128, 8 * (2 * lk + 1)) for lk in lf]
    ts = [_grid_t(M) for M in Ms]
    xs = [np.tan(t) for t in ts]
    G = np.asarray(f.grid(xs), dtype=complex)
    for k in range(n):
        shape = [1] * n
        shape[k] = Ms[k]
        G = G * ((1.0 + xs[k] ** 2) ** w[k]).reshape(shape)
    C = G
    for k in range(n):
        ks = np.arange(-lf[k], lf[k] + 1)
        E = np.exp(-2j * np.outer(ks, ts[k])) / Ms[k]
        C = np.moveaxis(np.tensordot(E, C, axes=([1], [k])), 0, k)
        C = np.moveaxis(np.tensordot(_projector(lf[k], d[k]), C, axes=([1], [k])), 0, k)
    Pc = C
    for k in range(n):
        Bk = _basis(lf[k])[:, : d[k] + 1]
        Pc = np.moveaxis(np.tensordot(Bk.T, Pc, axes=([1], [k])), 0, k)
    num = MultiPoly(Pc, n)
    atom = SeparableRational(num, [one_plus_square_power(Lk) for Lk in L])
    # conditioning check: monomial evaluation against the stable Fourier form
    sub = [np.arange(0, M, max(1, M // 64)) for M in Ms]
    Rt = C
    for k in range(n):
        ks = np.arange(-lf[k], lf[k] + 1)
        tk = ts[k][sub[k]]
        Einv = np.exp(2j * np.outer(tk, ks)) * (np.cos(tk) ** (2 * w[k]))[:, None]
        Rt = np.moveaxis(np.tensordot(Einv, Rt, axes=([1], [k])), 0, k)
    mono = atom.values_grid([xs[k][sub[k]].astype(complex) for k in range(n)])
    scale = float(np.abs(Rt).max())
    amp = float(np.abs(mono - Rt).max()) / (scale * np.finfo(float).eps) if scale > 0 else 1.0
    res = fit_residual(f, atom, p, tol) if measure else None
    return FitResult(atom, l, lt, d, res, amp, w)


def _floored_diff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # differences at rounding level carry no information but |.|^p inflates them
    diff = a - b
    floor = ROUNDING_FLOOR * (np.abs(a) + np.abs(b))
    return np.where(np.abs(diff) <= floor, 0.0, diff)


def residual_pp(
    f: SampledFunction,
    approximants: Sequence[SeparableRational],
    p: float,
    tol: float | None = None,
    specs: list[AxisSpec] | None = None,
) -> QuasiNormResult:
    """``||f - sum(approximants)||_p^p`` by quadrature.

    ``specs`` overrides the singular structure; pass it when the poles of
    individual approximants cancel in the sum.
    """
    approximants = [R for R in approximants if not R.is_zero]
    if specs is None:
        specs = merge_specs([f.axis_specs(p)] + [rational_axis_specs(R, p) for R in approximants])

    def values(axes):
        fa = f.grid(axes)
        ax = [np.asarray(a, dtype=complex) for a in axes]
        qa = sum((R.values_grid(ax) for R in approximants), np.zeros(fa.shape, complex))
        return _floored_diff(fa, qa)

    return integrate_abs_pow(values, specs, p, tol)


def fit_residual(f: SampledFunction, Q: SeparableRational, p: float, tol: float | None = None) -> QuasiNormResult:
    return residual_pp(f, [Q], p, tol)


# ---------------------------------------------------------------------------
# telescoping series


@dataclass
class AtomSeries:
    atoms: list[SeparableRational]
    fits: list[SeparableRational]
    budgets: list[float]
    norms: list[QuasiNormResult]
    residuals: list[QuasiNormResult]
    budget_met: list[bool]
    degrees: list[tuple[int, ...]]
    f_norm: QuasiNormResult
    epsilon: float
    p: float
    stop_reason: str = ""
    truncation: Truncation | None = None

    @property
    def norm_sum(self) -> float:
        return math.fsum(r.value for r in self.norms)

    @property
    def norm_error(self) -> float:
        return math.fsum(r.abs_error for r in self.norms)

    def checks(self) -> list[dict]:
        """Each stage inequality with its bound, measured value and verdict."""
        out = []
        for k, (res, eps) in enumerate(zip(self.residuals, self.budgets), start=1):
            out.append(
                {
                    "name": f"stage {k}: ||Q_k - f||_p^p < eps_k",
                    "bound": eps,
                    "measured": res.value,
                    "abs_error": res.abs_error,
                    "passed": bool(res.value < eps),
                }
            )
        for k in range(2, len(self.norms) + 1):
            out.append(
                {
                    "name": f"stage {k}: ||Q_k - Q_(k-1)||_p^p < 2 eps_(k-1)",
                    "bound": 2 * self.budgets[k - 2],
                    "measured": self.norms[k - 1].value,
                    "abs_error": self.norms[k - 1].abs_error,
                    "passed": bool(self.norms[k - 1].value < 2 * self.budgets[k - 2]),
                }
            )
        bound = (1 + self.epsilon) * self.f_norm.value
        err = self.norm_error + (1 + self.epsilon) * self.f_norm.abs_error
        out.append(
            {
                "name": "sum ||R_k||_p^p <= (1 + eps) ||f||_p^p",
                "bound": bound,
                "measured": self.norm_sum,
                "abs_error": err,
                "passed": bool(self.norm_sum <= bound + err),
            }
        )
        return out

    def partial_sum(self, K: int | None = None) -> list[SeparableRational]:
        return self.atoms[: len(self.atoms) if K is None else K]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "epsilon": self.epsilon,
            "f_norm": self.f_norm.to_json(),
            "stop_reason": self.stop_reason,
            "stages": [
                {
                    "max_degree": list(deg),
                    "budget": b,
                    "budget_met": met,
                    "norm": nm.to_json(),
                    "residual": rs.to_json(),
                    "atom": a.to_json(),
                }
                for a, b, met, nm, rs, deg in zip(
                    self.atoms, self.budgets, self.budget_met, self.norms, self.residuals, self.degrees
                )
            ],
            "norm_sum": self.norm_sum,
            "checks": self.checks(),
        }


def stage_budget(f_norm: float, epsilon: float, k: int) -> float:
    """``||f||_p^p * epsilon / 4**(k + 3)``."""
    return f_norm * epsilon / 4.0 ** (k + 3)


def _rational_degrees(R: SeparableRational) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """``(L, deg P)`` when ``R`` has class form ``P / prod (1 + z**2)**L``."""
    from .split import peel

    Ls, ds = [], []
    for k, q in enumerate(R.denominators):
        try:
            pk = peel(q)
        except ValueError:
            return None
        if pk.a != pk.b or pk.rest.degree > 0:
            return None
        Ls.append(pk.a)
        ds.append(R.numerator.degrees[k])
    if any(d >= 2 * L for d, L in zip(ds, Ls)):
        return None
    return tuple(Ls), tuple(ds)


def telescope(
    f: SampledFunction,
    p: float,
    epsilon: float,
    max_atoms: int = 8,
    N: float | None = None,
    initial_degree: int | Sequence[int] | None = None,
    l_tilde: int | None = None,
    tol: float | None = None,
    stall_ratio: float = 0.95,
) -> AtomSeries:
    """Telescoping atom series ``R_1 = Q_1``, ``R_k = Q_k - Q_(k-1)``.

    Stage ``k`` targets the budget ``||f||_p^p epsilon / 4**(k+3)``; when a
    stage misses it the numerator degree grows by 1.5x.  The series stops at
    ``max_atoms``, when a budget-meeting fit is exact to rounding, or when the
    residual stops decreasing (a stage that would increase it is dropped).
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    n = f.n
    lt = l_tilde or default_l_tilde(p)
    trunc = truncate(f, N if N is not None else f.support, p) if f.rational is None else None
    target = trunc.function if trunc is not None else f
    fn = lp_norm_function(target, p, tol)
    series = AtomSeries([], [], [], [], [], [], [], fn, epsilon, p, truncation=trunc)
    if fn.value == 0:
        series.stop_reason = "zero function"
        return series
    exact = _rational_degrees(f.rational) if f.rational is not None else None
    if exact is not None:
        Ls, ds = exact
        l = tuple(max(0, Lk - lt) for Lk in Ls)
        lts = tuple(Lk - lk for Lk, lk in zip(Ls, l))
        if all(p * v > 1 for v in lts):
            deg = ds
        else:
            exact = None
    if exact is None:
        d0 = initial_degree if initial_degree is not None else (31 if n == 1 else 27)
        deg = _as_tuple(d0, n, "initial_degree")
    prev_fit: SeparableRational | None = None
    prev_res = math.inf
    for k in range(1, max_atoms + 1):
        eps_k = stage_budget(fn.value, epsilon, k)
        try:
            if exact is not None and k == 1:
                fit = fit_atom(target, p, l, lts, deg, measure=False)
            else:
                lk = tuple(math.ceil((dk + 1) / 2) for dk in deg)
                fit = fit_atom(target, p, lk, lt, deg, measure=False)
        except IllConditionedFit:
            series.stop_reason = f"ill-conditioned fit at degree {deg}"
            break
        res = fit_residual(target, fit.atom, p, tol)
        if res.value >= prev_res:
            series.stop_reason = f"residual stalled at stage {k}"
            break
        atom = fit.atom if prev_fit is None else fit.atom - prev_fit
        series.atoms.append(atom)
        series.fits.append(fit.atom)
        series.budgets.append(eps_k)
        series.norms.append(lp_quasinorm(atom, p, tol=tol))
        series.residuals.append(res)
        series.budget_met.append(bool(res.value < eps_k))
        series.degrees.append(tuple(fit.max_degree))
        if res.value <= ROUNDING_FLOOR * fn.value:
            series.stop_reason = "exact to rounding"
            break
        if res.value > stall_ratio * prev_res:
            series.stop_reason = f"residual stalled at stage {k}"
            break
        prev_fit, prev_res = fit.atom, res.value
        if not series.budget_met[-1]:
            deg = tuple(math.ceil(1.5 * dk) for dk in deg)
    else:
        series.stop_reason = "max_atoms reached"
    return series
