"""Bounded holomorphic mollifiers and the reciprocal-power rational class.

Members of the class are ``prod (z_k + i)**(-N-1) * P(1/(z_1 + i), ...)``.
Fitting pulls a boundary function back to the distinguished boundary of the
polydisc through ``z = i (1 - w) / (1 + w)``; there ``1 + w = 2i / (z + i)``,
so the class becomes polynomials in ``1 + w`` times ``prod (1 + w_k)**(N+1)``.
Other octants are handled by the sign flip ``z_k -> sigma_k z_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma

from .errors import DimensionMismatch, IllConditionedFit
from .polyalg import MultiPoly, SeparableRational, binomial_power

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class MollifierParams:
    alpha: float
    N: int
    n: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if int(self.N) < 1 or int(self.n) < 1:
            raise ValueError("N and n must be positive integers")

    def check_p(self, p: float) -> None:
        if not self.N * p > 1:
            raise ValueError(f"need N * p > 1, got N={self.N}, p={p}")


def mollifier_eval(params: MollifierParams, z) -> complex:
    """``prod_j alpha**(N+1) (2i / ((1 + alpha**2) i + (1 - alpha**2) z_j))**(N+1)``.

    Bounded by 1 in modulus on the closed upper tube.  Accepts one point of
    length ``n`` or an ``(M, n)`` array.
    """
    Z = np.asarray(z, dtype=complex)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    if Z.shape[1] != params.n:
        raise DimensionMismatch(f"point has dimension {Z.shape[1]}, mollifier has n={params.n}")
    a = params.alpha
    fac = 2j * a / ((1 + a * a) * 1j + (1 - a * a) * Z)
    out = np.prod(fac ** (params.N + 1), axis=1)
    return complex(out[0]) if single else out


def mollifier_rational(params: MollifierParams) -> SeparableRational:
    a, N, n = params.alpha, params.N, params.n
    den = binomial_power((1 + a * a) * 1j, 1 - a * a, N + 1)
    const = (2j * a) ** ((N + 1) * n)
    return SeparableRational(MultiPoly.constant(n, const), [den] * n)


def mollify(R: SeparableRational, params: MollifierParams, shift: float) -> SeparableRational:
    """``g(z) R(z + i shift)`` as a single separable rational."""
    if R.n != params.n:
        raise DimensionMismatch("mollifier dimension does not match the rational")
    if not shift > 0:
        raise ValueError("shift must be positive")
    shifted = R.shift([1j * shift] * R.n)
    return shifted * mollifier_rational(params)


# ---------------------------------------------------------------------------
# the rational class


@dataclass(frozen=True)
class RNAtom:
    """``prod (sigma_k z_k + i)**(-N-1) * P(1/(sigma_1 z_1 + i), ...)``.

    ``coef[k]`` multiplies ``prod u_j**k_j`` with ``u_j = 1/(sigma_j z_j + i)``.
    """

    coef: np.ndarray
    N: int
    octant: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.coef.ndim

    @property
    def base(self) -> tuple[complex, ...]:
        """Pole location per variable: ``z_k = -sigma_k i``."""
        return tuple(-s * 1j for s in self.octant)

    @property
    def P(self) -> MultiPoly:
        return MultiPoly(self.coef, self.n)

    def __call__(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        if Z.shape[1] != self.n:
            raise DimensionMismatch("point dimension mismatch")
        U = 1.0 / (Z * np.asarray(self.octant)[None, :] + 1j)
        vals = self.P.scaled_points(U, np.ones(U.shape))
        return vals * np.prod(U ** (self.N + 1), axis=1)

    def to_rational(self) -> SeparableRational:
        """Exact separable form with denominators ``(sigma_k z_k + i)**(N+1+D_k)``."""
        degs = [s - 1 for s in self.coef.shape]
        out = None
        for idx in product(*(range(d + 1) for d in degs)):
            c = self.coef[idx]
            if c == 0:
                continue
            term = MultiPoly.constant(self.n, c)
            for k, (kk, d) in enumerate(zip(idx, degs)):
                if d - kk > 0:
                    term = term.mul_univariate(binomial_power(1j, float(self.octant[k]), d - kk), k)
            out = term if out is None else out + term
        if out is None:
            out = MultiPoly(np.zeros((1,) * self.n), self.n)
        dens = [binomial_power(1j, float(s), self.N + 1 + d) for s, d in zip(self.octant, degs)]
        return SeparableRational(out, dens)


def _flip(f: Callable[[np.ndarray], np.ndarray], octant: Sequence[int]) -> Callable[[np.ndarray], np.ndarray]:
    s = np.asarray(octant, float)
    return lambda X: f(X * s[None, :])


def transport_integral(s: float) -> float:
    """``integral (1 + x**2)**(-s) dx = sqrt(pi) Gamma(s - 1/2) / Gamma(s)``, ``s > 1/2``."""
    if not s > 0.5:
        return math.inf
    return math.sqrt(math.pi) * gamma(s - 0.5) / gamma(s)


@dataclass
class RNFit:
    atom: RNAtom
    degree: int
    sup_residual: float
    lp_bound: float
    lp_bound_as_printed: float
    samples: int

    def to_row(self) -> dict:
        return {
            "degree": self.degree,
            "sup_residual": self.sup_residual,
            "lp_bound": self.lp_bound,
            "lp_bound_as_printed": self.lp_bound_as_printed,
        }


def error_transport(eps: float, p: float, N: int, n: int) -> tuple[float, float]:
    """``(bound, as_printed)`` for ``||f - fit||_p^p`` from a sup error ``eps``.

    Since ``|1 + w| = 2 / sqrt(1 + x**2)`` the sharp transport is
    ``eps**p 2**(n(N+1)p) (integral (1 + x**2)**(-(N+1)p/2))**n``; the
    second value uses the exponent ``-(N+1)p`` and the factor ``2**((N+1)p)``.
    """
    bound = eps**p * 2.0 ** (n * (N + 1) * p) * transport_integral(0.5 * (N + 1) * p) ** n
    printed = eps**p * 2.0 ** ((N + 1) * p) * transport_integral((N + 1) * p) ** n
    return bound, printed


def fit_RN(
    f: Callable[[np.ndarray], np.ndarray],
    p: float,
    N: int,
    degree: int,
    n: int = 1,
    octant: Sequence[int] | None = None,
    samples: int | None = None,
) -> RNFit:
    """Least-squares fit of ``f`` by the reciprocal-power class.

    ``f`` maps real ``(M, n)`` points to boundary values of a function in the
    Hardy space of ``octant`` (default: all ``+``).  Samples sit on
    ``w = exp(i theta)``, ``theta = -pi + 2 pi (j + 1/2) / M``.
    """
    if not (N + 1) * p > 1:
        raise ValueError("need (N + 1) p > 1")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    octant = tuple(1 for _ in range(n)) if octant is None else tuple(int(s) for s in octant)
    if len(octant) != n:
        raise DimensionMismatch("octant length does not match n")
    g = _flip(f, octant)
    if samples is None:
        samples = max(32, 4 * (degree + 1)) if n == 1 else max(16, 3 * (degree + 1))
    M = samples
    theta = -math.pi + 2.0 * math.pi * (np.arange(M) + 0.5) / M
    w = np.exp(1j * theta)
    x = np.tan(0.5 * theta)
    mesh = np.meshgrid(*([x] * n), indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    W = np.stack([m.ravel() for m in np.meshgrid(*([w] * n), indexing="ij")], axis=1)
    vals = np.asarray(g(X), dtype=complex)
    target = vals / np.prod((1.0 + W) ** (N + 1), axis=1)
    idx = list(product(range(degree + 1), repeat=n))
    A = np.stack([np.prod((1.0 + W) ** np.asarray(k)[None, :], axis=1) for k in idx], axis=1)
    sol, _, rank, sv = np.linalg.lstsq(A, target, rcond=None)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else math.inf
    if rank < A.shape[1] or cond > MAX_CONDITION:
        raise IllConditionedFit(f"least-squares condition {cond:.3g} at degree {degree}")
    sup = float(np.abs(A @ sol - target).max()) if len(target) else 0.0
    coef = np.zeros((degree + 1,) * n, dtype=complex)
    for k, c in zip(idx, sol):
        coef[k] = c * (2j) ** (sum(k) + n * (N + 1))
    bound, printed = error_transport(sup, p, N, n)
    return RNFit(RNAtom(coef, N, octant), degree, sup, bound, printed, M)


def ray_decay(atom: RNAtom, radii: Sequence[float] = (1e2, 1e3, 1e4), direction=None) -> np.ndarray:
    """``|z|**N |atom(z)|`` along a ray ``z = r * direction`` with all coordinates growing."""
    d = np.ones(atom.n, dtype=complex) if direction is None else np.asarray(direction, dtype=complex)
    d = d / np.linalg.norm(d)
    Z = np.array([r * d for r in radii])
    return np.asarray(radii) ** atom.N * np.abs(atom(Z))
