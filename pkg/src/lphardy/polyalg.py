"""Complex polynomial and separable rational-function algebra on C^n.

Univariate polynomials are stored as ascending coefficient arrays; multivariate
polynomials as dense coefficient tensors (axis ``k`` indexes the power of
``z_k``).  A :class:`SeparableRational` is ``P(z) / prod_k Q_k(z_k)``.

Polynomials optionally carry a *root hint*: the exact roots (with
multiplicity) known from construction, e.g. ``(1 + z**2)**l`` or the split
denominators.  Hints survive multiplication and shifting and let
:func:`roots` skip numerical root finding on structured inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb
from typing import Iterable, Sequence

import numpy as np
from scipy import signal

from .errors import DimensionMismatch, NonConvergence, PoleProximity

TAU_POLE = 1e-12
TAU_ROOT = 1e-10
TAU_CLUSTER = 1e-4
MAX_ROOT_ITER = 200

_EPS = np.finfo(float).eps


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains NaN or infinity")


def _merge_hint(roots: Iterable[tuple[complex, int]]) -> tuple[tuple[complex, int], ...]:
    merged: list[list] = []
    for r, m in roots:
        r = complex(r)
        for item in merged:
            if abs(item[0] - r) <= 1e-12 * max(1.0, abs(r)):
                item[1] += m
                break
        else:
            merged.append([r, m])
    merged.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    return tuple((r, int(m)) for r, m in merged)


# ---------------------------------------------------------------------------
# univariate


class UniPoly:
    """Univariate complex polynomial, ascending coefficients."""

    __slots__ = ("coeffs", "root_hint")

    def __init__(self, coeffs: Sequence[complex] | np.ndarray, root_hint=None):
        c = np.array(coeffs, dtype=complex).ravel()
        _check_finite(c, "polynomial coefficients")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        self.coeffs = _readonly(c)
        if root_hint is not None:
            root_hint = _merge_hint(root_hint)
            if sum(m for _, m in root_hint) != max(self.degree, 0):
                raise ValueError("root hint does not match the polynomial degree")
        self.root_hint = root_hint

    @classmethod
    def constant(cls, c: complex) -> "UniPoly":
        return cls([c], root_hint=() if c != 0 else None)

    @classmethod
    def from_roots(cls, roots: Iterable[tuple[complex, int]], lead: complex = 1.0) -> "UniPoly":
        poly = cls.constant(lead)
        for r, m in roots:
            poly = poly * binomial_power(-r, 1.0, m)
        return poly

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1]) if len(self.coeffs) else 0j

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out

    def scaled_eval(self, z: np.ndarray, s: np.ndarray) -> np.ndarray:
        """``self(z) / s**degree`` without overflow (``s >= |z|`` where large).

        Uses the factored form when exact roots are known, which stays
        accurate next to clustered real roots.
        """
        if self.root_hint is not None and self.degree > 0:
            z = np.asarray(z, dtype=complex)
            s = np.asarray(s, dtype=float)
            out = np.full(np.broadcast(z, s).shape, self.leading, dtype=complex)
            for r, m in self.root_hint:
                out = out * ((z - r) / s) ** m
            return out
        return _scaled_horner(self.coeffs, z, s)

    def __neg__(self) -> "UniPoly":
        return UniPoly(-self.coeffs, self.root_hint)

    def __add__(self, other) -> "UniPoly":
        other = _as_unipoly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, complex)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return UniPoly(a)

    __radd__ = __add__

    def __sub__(self, other) -> "UniPoly":
        return self + (-_as_unipoly(other))

    def __rsub__(self, other) -> "UniPoly":
        return _as_unipoly(other) - self

    def __mul__(self, other) -> "UniPoly":
        if np.isscalar(other):
            return self.scale(other)
        other = _as_unipoly(other)
        if self.is_zero or other.is_zero:
            return UniPoly([])
        hint = None
        if self.root_hint is not None and other.root_hint is not None:
            hint = self.root_hint + other.root_hint
        return UniPoly(np.convolve(self.coeffs, other.coeffs), hint)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "UniPoly":
        out = UniPoly.constant(1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def scale(self, c: complex) -> "UniPoly":
        c = complex(c)
        if c == 0:
            return UniPoly([])
        return UniPoly(self.coeffs * c, self.root_hint)

    def shift(self, c: complex) -> "UniPoly":
        """Return ``q(z) = self(z + c)``."""
        if self.is_zero:
            return self
        hint = None
        if self.root_hint is not None:
            hint = tuple((r - c, m) for r, m in self.root_hint)
        return UniPoly(_taylor_shift_matrix(self.degree, c) @ self.coeffs, hint)

    def derivative(self) -> "UniPoly":
        if self.degree < 1:
            return UniPoly([])
        return UniPoly(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def divide_exact(self, other: "UniPoly", rtol: float = 1e-9) -> "UniPoly | None":
        """Quotient ``self / other`` if the division leaves no remainder, else None."""
        if other.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero:
            return UniPoly([])
        if other.degree > self.degree:
            return None
        if self.root_hint is not None and other.root_hint is not None:
            left = dict(self.root_hint)
            for r, m in other.root_hint:
                match = next((s for s in left if abs(s - r) <= 1e-12 * max(1.0, abs(r))), None)
                if match is None or left[match] < m:
                    return None
                left[match] -= m
            rest = tuple((r, m) for r, m in left.items() if m > 0)
            return UniPoly.from_roots(rest, self.leading / other.leading)
        q, r = np.polynomial.polynomial.polydiv(self.coeffs, other.coeffs)
        scale = np.abs(self.coeffs).sum()
        if np.abs(r).max(initial=0.0) > rtol * scale:
            return None
        return UniPoly(q)

    def allclose(self, other: "UniPoly", rtol: float = 1e-12) -> bool:
        if self.degree != other.degree:
            return False
        scale = max(np.abs(self.coeffs).max(initial=0.0), np.abs(other.coeffs).max(initial=0.0))
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= rtol * max(scale, 1e-300)))

    def __repr__(self) -> str:
        return f"UniPoly({np.array2string(self.coeffs, precision=4)})"


def _as_unipoly(x) -> UniPoly:
    if isinstance(x, UniPoly):
        return x
    return UniPoly.constant(complex(x))


def _scaled_horner(coeffs: np.ndarray, z: np.ndarray, s: np.ndarray) -> np.ndarray:
    # sum_j c_j u^j s^(j-d) with u = z/s, evaluated as a homogeneous Horner scheme
    z = np.asarray(z, dtype=complex)
    if len(coeffs) == 0:
        return np.zeros(z.shape, dtype=complex)
    u = z / s
    inv = 1.0 / np.asarray(s, dtype=float)
    ip = np.ones(z.shape)
    out = np.full(z.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        ip = ip * inv
        out = out * u + c * ip
    return out


def _taylor_shift_matrix(d: int, c: complex) -> np.ndarray:
    # S[j, i] = C(i, j) c^(i-j): coefficients of p(z + c) from those of p(z)
    S = np.zeros((d + 1, d + 1), dtype=complex)
    for i in range(d + 1):
        for j in range(i + 1):
            S[j, i] = comb(i, j) * c ** (i - j)
    return S


def binomial_power(a: complex, b: complex, m: int) -> UniPoly:
    """Coefficients of ``(a + b z)**m`` by the binomial theorem."""
    m = int(m)
    if m < 0:
        raise ValueError("m must be nonnegative")
    a, b = complex(a), complex(b)
    c = np.array([comb(m, k) * a ** (m - k) * b**k for k in range(m + 1)], dtype=complex)
    hint = None
    if b != 0:
        hint = ((-a / b, m),) if m else ()
    elif a != 0:
        hint = ()
    return UniPoly(c, hint)
# ---------------------------------------------------------------------------
# roots


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int


def _backward_error(coeffs: np.ndarray, r: complex) -> float:
    a = abs(r)
    powers = np.abs(coeffs) * a ** np.arange(len(coeffs))
    denom = powers.sum()
    val = abs(np.polynomial.polynomial.polyval(r, coeffs))
    return val / denom if denom > 0 else 0.0


def _aberth(coeffs: np.ndarray, z: np.ndarray, max_iter: int) -> tuple[np.ndarray, int]:
    dcoeffs = np.polynomial.polynomial.polyder(coeffs)
    z = z.astype(complex).copy()
    active = np.ones(len(z), bool)
    it = 0
    for it in range(1, max_iter + 1):
        if not active.any():
            break
        p = np.polynomial.polynomial.polyval(z, coeffs)
        dp = np.polynomial.polynomial.polyval(z, dcoeffs)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s = (1.0 / diff).sum(axis=1)
            ratio = p / dp
            w = ratio / (1.0 - ratio * s)
        ok = np.isfinite(w) & active
        z[ok] -= w[ok]
        small = np.abs(w) <= 4 * _EPS * np.maximum(1.0, np.abs(z))
        active &= ~(small | ~np.isfinite(w))
    return z, it


def _cluster(z: np.ndarray, tau: float) -> list[list[int]]:
    parent = list(range(len(z)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(z)):
        for j in range(i + 1, len(z)):
            if abs(z[i] - z[j]) <= tau * max(1.0, abs(z[i]), abs(z[j])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(z)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def roots(
    poly: UniPoly,
    tau_root: float = TAU_ROOT,
    tau_cluster: float = TAU_CLUSTER,
    max_iter: int = MAX_ROOT_ITER,
) -> list[Root]:
    """All complex roots with multiplicities.

    Companion-matrix eigenvalues seed an Aberth-Ehrlich refinement; roots
    closer than ``tau_cluster`` (relative) are merged into one root whose
    multiplicity is the cluster size.  A root hint short-circuits the
    numerical path.  Raises :class:`NonConvergence` when a cluster centre has
    backward error above ``tau_root``.
    """
    if poly.degree < 1:
        raise ValueError("roots() needs a polynomial of degree >= 1")
    if poly.root_hint is not None:
        return [Root(r, m) for r, m in poly.root_hint]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _roots(poly.coeffs, tau_root, tau_cluster, max_iter)


def _roots(c: np.ndarray, tau_root: float, tau_cluster: float, max_iter: int) -> list[Root]:
    nzero = int(np.flatnonzero(c)[0])
    core = c[nzero:]
    found: list[Root] = [Root(0j, nzero)] if nzero else []
    if len(core) > 1:
        z0 = np.polynomial.polynomial.polyroots(core).astype(complex)
        z1, _ = _aberth(core, z0, max_iter)
        # keep the better of seed and refinement per root
        e0 = np.array([_backward_error(core, r) for r in z0])
        e1 = np.array([_backward_error(core, r) if np.isfinite(r) else np.inf for r in z1])
        z = np.where(e1 <= e0, z1, z0)
        for group in _cluster(z, tau_cluster):
            centre = complex(np.mean(z[group]))
            if len(group) > 1 and _backward_error(core, centre) > tau_root:
                # close but distinct roots: keep them apart
                found.extend(Root(complex(z[i]), 1) for i in group)
            else:
                found.append(Root(centre, len(group)))
        bad = [r for r in found if r.value != 0 and _backward_error(core, r.value) > tau_root]
        if bad:
            raise NonConvergence(
                f"{len(bad)} root(s) above backward-error tolerance {tau_root:g}", partial=found
            )
    found.sort(key=lambda r: (r.value.real, r.value.imag))
    return found


# ---------------------------------------------------------------------------
# multivariate


class MultiPoly:
    """Polynomial in ``n`` complex variables, dense coefficient tensor.

    ``coef[k1, ..., kn]`` multiplies ``z1**k1 * ... * zn**kn``.  The zero
    polynomial has shape ``(0,) * n``.
    """

    __slots__ = ("coef", "n")

    def __init__(self, coef: np.ndarray, n: int | None = None):
        c = np.array(coef, dtype=complex)
        if n is not None and c.ndim != n:
            raise DimensionMismatch(f"coefficient tensor has {c.ndim} axes, expected {n}")
        if c.ndim < 1:
            raise DimensionMismatch("MultiPoly needs at least one variable")
        _check_finite(c, "polynomial coefficients")
        if not np.any(c):
            c = np.zeros((0,) * c.ndim, dtype=complex)
        else:
            for ax in range(c.ndim):
                other = tuple(i for i in range(c.ndim) if i != ax)
                used = np.flatnonzero(np.any(c != 0, axis=other) if other else c != 0)
                c = np.take(c, np.arange(used[-1] + 1), axis=ax)
        self.coef = _readonly(c)
        self.n = c.ndim

    @classmethod
    def from_terms(cls, n: int, terms) -> "MultiPoly":
        items = list(terms.items()) if isinstance(terms, dict) else list(terms)
        if not items:
            return cls(np.zeros((1,) * n), n)
        for idx, _ in items:
            if len(idx) != n:
                raise DimensionMismatch(f"multi-index {idx} does not have length {n}")
            if any(k < 0 for k in idx):
                raise ValueError("negative exponent in multi-index")
        shape = tuple(max(idx[k] for idx, _ in items) + 1 for k in range(n))
        c = np.zeros(shape, dtype=complex)
        for idx, v in items:
            c[tuple(idx)] += v
        return cls(c, n)

    @classmethod
    def constant(cls, n: int, value: complex = 1.0) -> "MultiPoly":
        return cls(np.full((1,) * n, value, dtype=complex), n)

    @classmethod
    def from_univariate(cls, u: UniPoly, axis: int, n: int) -> "MultiPoly":
        shape = [1] * n
        shape[axis] = max(len(u.coeffs), 1)
        c = np.zeros(shape, dtype=complex)
        if len(u.coeffs):
            c.reshape(-1)[: len(u.coeffs)] = u.coeffs
        return cls(c, n)

    @property
    def is_zero(self) -> bool:
        return self.coef.size == 0

    @property
    def degrees(self) -> tuple[int, ...]:
        """Per-variable degree ``deg_j`` (``-1`` for the zero polynomial)."""
        return tuple(s - 1 for s in self.coef.shape)

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        """Nonzero coefficients keyed by multi-index, graded lexicographic order."""
        idx = [tuple(int(k) for k in i) for i in zip(*np.nonzero(self.coef))]
        idx.sort(key=lambda t: (sum(t), t))
        return {i: complex(self.coef[i]) for i in idx}

    def __call__(self, point):
        z = np.asarray(point, dtype=complex)
        single = z.ndim == 1
        z = np.atleast_2d(z)
        if z.shape[-1] != self.n:
            raise DimensionMismatch(f"point has dimension {z.shape[-1]}, polynomial has {self.n}")
        if self.is_zero:
            out = np.zeros(z.shape[0], dtype=complex)
        else:
            c = self.coef
            # Horner along the last axis, then recurse
            out = np.zeros((z.shape[0],) + c.shape[:-1], dtype=complex)
            for k in range(c.shape[-1] - 1, -1, -1):
                out = out * z[:, -1].reshape((-1,) + (1,) * (self.n - 1)) + c[..., k]
            for ax in range(self.n - 2, -1, -1):
                acc = np.zeros((z.shape[0],) + c.shape[:ax], dtype=complex)
                for k in range(c.shape[ax] - 1, -1, -1):
                    acc = acc * z[:, ax].reshape((-1,) + (1,) * ax) + out[..., k]
                out = acc
        return complex(out[0]) if single else out

    def scaled_grid(self, axes: Sequence[np.ndarray], scales: Sequence[np.ndarray]) -> np.ndarray:
        """Values on the tensor grid ``axes`` divided by ``prod_k scales_k**deg_k``."""
        if len(axes) != self.n:
            raise DimensionMismatch("grid dimension mismatch")
        if self.is_zero:
            return np.zeros(tuple(len(a) for a in axes), dtype=complex)
        out = self.coef
        for ax, (x, s) in enumerate(zip(axes, scales)):
            V = _scaled_vandermonde(np.asarray(x, complex), np.asarray(s, float), self.coef.shape[ax] - 1)
            out = np.moveaxis(np.tensordot(V, out, axes=([1], [ax])), 0, ax)
        return out

    def scaled_points(self, Z: np.ndarray, S: np.ndarray) -> np.ndarray:
        """Values at points ``Z`` (M, n) divided by ``prod_k S[:, k]**deg_k``."""
        Z = np.asarray(Z, complex)
        if self.is_zero:
            return np.zeros(Z.shape[0], dtype=complex)
        Vs = [
            _scaled_vandermonde(Z[:, k], S[:, k], self.coef.shape[k] - 1) for k in range(self.n)
        ]
        letters = "abcdefgh"[: self.n]
        spec = letters + "," + ",".join("m" + l for l in letters) + "->m"
        return np.einsum(spec, self.coef, *Vs, optimize=True)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(-self.coef, self.n)

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if other.n != self.n:
            raise DimensionMismatch("cannot add polynomials of different dimension")
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        shape = tuple(max(a, b) for a, b in zip(self.coef.shape, other.coef.shape))
        c = np.zeros(shape, dtype=complex)
        c[tuple(slice(0, s) for s in self.coef.shape)] += self.coef
        c[tuple(slice(0, s) for s in other.coef.shape)] += other.coef
        return MultiPoly(c, self.n)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if np.isscalar(other):
            return self.scale(other)
        if other.n != self.n:
            raise DimensionMismatch("cannot multiply polynomials of different dimension")
        if self.is_zero or other.is_zero:
            return MultiPoly(np.zeros((1,) * self.n), self.n)
        return MultiPoly(signal.convolve(self.coef, other.coef, method="direct"), self.n)

    __rmul__ = __mul__

    def scale(self, c: complex) -> "MultiPoly":
        return MultiPoly(self.coef * complex(c), self.n)

    def mul_univariate(self, u: UniPoly, axis: int) -> "MultiPoly":
        if self.is_zero or u.is_zero:
            return MultiPoly(np.zeros((1,) * self.n), self.n)
        shape = [1] * self.n
        shape[axis] = len(u.coeffs)
        kernel = np.asarray(u.coeffs).reshape(shape)
        return MultiPoly(signal.convolve(self.coef, kernel, method="direct"), self.n)

    def shift(self, c: Sequence[complex]) -> "MultiPoly":
        """Return ``q(z) = self(z + c)``."""
        if len(c) != self.n:
            raise DimensionMismatch("shift vector dimension mismatch")
        if self.is_zero:
            return self
        out = self.coef
        for ax, ck in enumerate(c):
            if ck != 0:
                S = _taylor_shift_matrix(out.shape[ax] - 1, complex(ck))
                out = np.moveaxis(np.tensordot(S, out, axes=([1], [ax])), 0, ax)
        return MultiPoly(out, self.n)

    def restrict(self, axis: int, value: complex) -> "MultiPoly | UniPoly":
        """Substitute ``z_axis = value``; returns a polynomial in the remaining variables."""
        if self.is_zero:
            return MultiPoly(np.zeros((1,) * (self.n - 1)), self.n - 1) if self.n > 1 else UniPoly([])
        powers = complex(value) ** np.arange(self.coef.shape[axis])
        c = np.tensordot(self.coef, powers, axes=([axis], [0]))
        if self.n == 1:
            return UniPoly([complex(c)])
        return MultiPoly(c, self.n - 1)

    def as_univariate(self) -> UniPoly:
        if self.n != 1:
            raise DimensionMismatch("as_univariate needs n == 1")
        return UniPoly(self.coef.reshape(-1))

    def allclose(self, other: "MultiPoly", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        if self.n != other.n:
            return False
        diff = self - other
        scale = max(np.abs(self.coef).max(initial=0.0), np.abs(other.coef).max(initial=0.0))
        return bool(np.abs(diff.coef).max(initial=0.0) <= rtol * scale + atol)

    def __repr__(self) -> str:
        return f"MultiPoly(n={self.n}, degrees={self.degrees}, nterms={len(self.terms)})"


def _scaled_vandermonde(x: np.ndarray, s: np.ndarray, d: int) -> np.ndarray:
    # V[i, j] = x_i^j / s_i^d, bounded when s_i >= |x_i|
    u = x / s
    inv = 1.0 / s
    V = np.empty((len(x), d + 1), dtype=complex)
    if d < 0:
        return V
    # build u^j inv^(d-j) from both ends to stay in range
    up = np.ones(len(x), dtype=complex)
    ups = [up]
    for _ in range(d):
        up = up * u
        ups.append(up)
    ip = np.ones(len(x))
    for j in range(d, -1, -1):
        V[:, j] = ups[j] * ip
        ip = ip * inv
    return V


def _grid_scale(x: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, np.abs(x))


# ---------------------------------------------------------------------------
# separable rationals


class SeparableRational:
    """``P(z) / (Q_1(z_1) ... Q_n(z_n))``, kept in uncancelled normal form."""

    __slots__ = ("numerator", "denominators")

    def __init__(self, numerator: MultiPoly, denominators: Sequence[UniPoly]):
        denominators = tuple(d if isinstance(d, UniPoly) else UniPoly(d) for d in denominators)
        if numerator.n != len(denominators):
            raise DimensionMismatch(
                f"numerator has n={numerator.n} but {len(denominators)} denominators given"
            )
        if any(d.is_zero for d in denominators):
            raise ZeroDivisionError("a denominator is the zero polynomial")
        self.numerator = numerator
        self.denominators = denominators

    @classmethod
    def polynomial(cls, P: MultiPoly) -> "SeparableRational":
        return cls(P, [UniPoly.constant(1.0)] * P.n)

    @classmethod
    def zero(cls, n: int) -> "SeparableRational":
        return cls(MultiPoly(np.zeros((1,) * n), n), [UniPoly.constant(1.0)] * n)

    @property
    def n(self) -> int:
        return self.numerator.n

    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero

    @property
    def gaps(self) -> tuple[int, ...]:
        """Per-variable ``deg Q_k - deg_k P`` from the uncancelled form."""
        if self.is_zero:
            return tuple(10**9 for _ in range(self.n))
        return tuple(q.degree - d for q, d in zip(self.denominators, self.numerator.degrees))

    def __call__(self, z, tau_pole: float = TAU_POLE) -> complex:
        return rational_eval(self, z, tau_pole)

    def _scaled_parts(self, Z: np.ndarray):
        S = _grid_scale(Z)
        num = self.numerator.scaled_points(Z, S)
        den = np.ones(Z.shape[0], dtype=complex)
        logscale = np.zeros(Z.shape[0])
        degs = self.numerator.degrees
        for k, q in enumerate(self.denominators):
            den = den * q.scaled_eval(Z[:, k], S[:, k])
            logscale += (max(degs[k], 0) - q.degree) * np.log(S[:, k])
        return num, den, logscale

    def evaluate_points(self, Z, check_poles: bool = True, tau_pole: float = TAU_POLE) -> np.ndarray:
        """Values at the rows of ``Z`` (shape (M, n))."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if Z.shape[1] != self.n:
            raise DimensionMismatch(f"points have dimension {Z.shape[1]}, rational has {self.n}")
        if check_poles:
            _check_poles(self, Z, tau_pole)
        num, den, logscale = self._scaled_parts(Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return num / den * np.exp(logscale)

    def abs_pow_points(self, Z, p: float) -> np.ndarray:
        """``|R|**p`` at the rows of ``Z`` without intermediate overflow."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        num, den, logscale = self._scaled_parts(Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(num / den) ** p * np.exp(p * logscale)

    def abs_pow_grid(self, axes: Sequence[np.ndarray], p: float) -> np.ndarray:
        """``|R|**p`` on the tensor grid spanned by ``axes`` (complex coordinates)."""
        axes = [np.asarray(a, dtype=complex) for a in axes]
        scales = [_grid_scale(a) for a in axes]
        out = np.abs(self.numerator.scaled_grid(axes, scales)) ** p
        degs = self.numerator.degrees
        for k, (x, s, q) in enumerate(zip(axes, scales, self.denominators)):
            with np.errstate(divide="ignore"):
                fac = np.abs(q.scaled_eval(x, s)) ** (-p) * s ** (p * (max(degs[k], 0) - q.degree))
            shape = [1] * self.n
            shape[k] = len(x)
            out = out * fac.reshape(shape)
        return out

    def values_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        axes = [np.asarray(a, dtype=complex) for a in axes]
        scales = [_grid_scale(a) for a in axes]
        out = self.numerator.scaled_grid(axes, scales)
        degs = self.numerator.degrees
        for k, (x, s, q) in enumerate(zip(axes, scales, self.denominators)):
            with np.errstate(divide="ignore", invalid="ignore"):
                fac = s ** (max(degs[k], 0) - q.degree) / q.scaled_eval(x, s)
            shape = [1] * self.n
            shape[k] = len(x)
            out = out * fac.reshape(shape)
        return out

    def shift(self, c: Sequence[complex]) -> "SeparableRational":
        """``z -> R(z + c)``."""
        return SeparableRational(
            self.numerator.shift(c), [q.shift(ck) for q, ck in zip(self.denominators, c)]
        )

    def __add__(self, other):
        return rational_combine("add", self, other)

    def __sub__(self, other):
        return rational_combine("add", self, rational_combine("scale", other, -1.0))

    def __mul__(self, other):
        if isinstance(other, SeparableRational):
            return rational_combine("multiply", self, other)
        return rational_combine("scale", self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return rational_combine("scale", self, -1.0)

    def __repr__(self) -> str:
        return (
            f"SeparableRational(n={self.n}, num_degrees={self.numerator.degrees}, "
            f"den_degrees={tuple(q.degree for q in self.denominators)})"
        )

    # -- JSON interchange ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "numerator": [
                {"index": list(idx), "re": v.real, "im": v.imag}
                for idx, v in self.numerator.terms.items()
            ],
            "denominators": [
                [{"re": float(c.real), "im": float(c.imag)} for c in q.coeffs]
                for q in self.denominators
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SeparableRational":
        n = int(doc["n"])
        terms = [(tuple(t["index"]), complex(t["re"], t.get("im", 0.0))) for t in doc["numerator"]]
        num = MultiPoly.from_terms(n, terms)
        dens = [UniPoly([complex(c["re"], c.get("im", 0.0)) for c in d]) for d in doc["denominators"]]
        return cls(num, dens)


def _check_poles(R: SeparableRational, Z: np.ndarray, tau_pole: float) -> None:
    for k, q in enumerate(R.denominators):
        S = _grid_scale(Z[:, k])
        vals = np.abs(q.scaled_eval(Z[:, k], S))
        bad = np.flatnonzero(vals < tau_pole)
        if bad.size:
            raise PoleProximity(k, float(vals[bad[0]]))


def poly_eval(poly: UniPoly | MultiPoly, point) -> complex:
    """Evaluate a polynomial at a single point (scalar for univariate)."""
    if isinstance(poly, UniPoly):
        z = np.asarray(point, dtype=complex).ravel()
        if z.size != 1:
            raise DimensionMismatch("univariate polynomial needs a scalar point")
        return complex(poly(z[0]))
    z = np.asarray(point, dtype=complex).ravel()
    if z.size != poly.n:
        raise DimensionMismatch(f"point has dimension {z.size}, polynomial has {poly.n}")
    return poly(z)


def rational_eval(R: SeparableRational, z, tau_pole: float = TAU_POLE) -> complex:
    """``P(z) / prod Q_k(z_k)``; raises :class:`PoleProximity` near a pole."""
    z = np.asarray(z, dtype=complex).ravel()
    if z.size != R.n:
        raise DimensionMismatch(f"point has dimension {z.size}, rational has {R.n}")
    return complex(R.evaluate_points(z[None, :], tau_pole=tau_pole)[0])


def _hint_lcm(a: UniPoly, b: UniPoly) -> tuple[UniPoly, UniPoly, UniPoly]:
    """Least common multiple of two factored polynomials, with its cofactors."""
    ha, hb = dict(a.root_hint), dict(b.root_hint)
    match = {}
    for r in hb:
        hit = next((s for s in ha if abs(s - r) <= 1e-12 * max(1.0, abs(r))), None)
        if hit is not None:
            match[r] = hit
    lcm = dict(ha)
    for r, m in hb.items():
        s = match.get(r)
        if s is None:
            lcm[r] = m
        else:
            lcm[s] = max(lcm[s], m)
    inv = {s: r for r, s in match.items()}
    ma = [(r, lcm[r] - ha.get(r, 0)) for r in lcm if lcm[r] > ha.get(r, 0)]
    mb = [(r, lcm[r] - hb.get(inv.get(r, r), 0)) for r in lcm if lcm[r] > hb.get(inv.get(r, r), 0)]
    lead = a.leading
    common = UniPoly.from_roots(list(lcm.items()), lead)
    # common = a * ma = b * mb, so mb carries the ratio of leading coefficients
    return common, UniPoly.from_roots(ma), UniPoly.from_roots(mb, lead / b.leading)


def _common(a: UniPoly, b: UniPoly) -> tuple[UniPoly, UniPoly, UniPoly]:
    # common denominator and the two multipliers; the larger one is reused when
    # it is an exact multiple of the other
    if a.allclose(b):
        one = UniPoly.constant(1.0)
        return a, one, one
    if a.root_hint is not None and b.root_hint is not None and a.degree > 0 and b.degree > 0:
        return _hint_lcm(a, b)
    q = a.divide_exact(b)
    if q is not None:
        return a, UniPoly.constant(1.0), q
    q = b.divide_exact(a)
    if q is not None:
        return b, q, UniPoly.constant(1.0)
    return a * b, b, a


def rational_combine(op: str, A: SeparableRational, B) -> SeparableRational:
    """``op`` in {"add", "multiply", "scale"}; no common-factor cancellation."""
    if op == "scale":
        c = complex(B)
        return SeparableRational(A.numerator.scale(c), A.denominators)
    if A.n != B.n:
        raise DimensionMismatch(f"cannot combine rationals with n={A.n} and n={B.n}")
    if op == "multiply":
        return SeparableRational(
            A.numerator * B.numerator,
            [qa * qb for qa, qb in zip(A.denominators, B.denominators)],
        )
    if op == "add":
        if B.is_zero:
            return A
        if A.is_zero:
            return B
        dens, na, nb = [], A.numerator, B.numerator
        for k, (qa, qb) in enumerate(zip(A.denominators, B.denominators)):
            common, ma, mb = _common(qa, qb)
            dens.append(common)
            if ma.degree > 0 or ma.leading != 1:
                na = na.mul_univariate(ma, k)
            if mb.degree > 0 or mb.leading != 1:
                nb = nb.mul_univariate(mb, k)
        return SeparableRational(na + nb, dens)
    raise ValueError(f"unknown combine op {op!r}")


def one_plus_square_power(l: int) -> UniPoly:
    """``(1 + z**2)**l`` with its root hint (±i, multiplicity l)."""
    if l == 0:
        return UniPoly.constant(1.0)
    return binomial_power(1j, 1.0, l) * binomial_power(-1j, 1.0, l)


def multi_indices(degrees: Sequence[int]):
    return product(*(range(d + 1) for d in degrees))
