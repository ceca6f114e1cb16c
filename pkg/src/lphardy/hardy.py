"""Membership certificates for octant Hardy spaces and the interior sup bound.

A separable rational lies in the Hardy space of the tube over the octant
``sigma`` when no denominator root sits strictly inside the open half-plane
``sigma_k * Im z_k > 0`` and its boundary values are p-integrable.  Roots on
the real axis are allowed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DimensionMismatch, DivergentIntegral, NonConvergence
from .polyalg import SeparableRational, roots
from .quadrature import QuasiNormResult, lp_quasinorm, screen

TAU_MARGIN = 1e-9
SAMPLES_PER_AXIS = 32
SAMPLE_HALF_WIDTH = 10.0


class Status(str, enum.Enum):
    VALID = "VALID"
    INVALID = "INVALID"
    INDETERMINATE = "INDETERMINATE"


def sign_vector(signs) -> tuple[int, ...]:
    """Normalize ``"++-"``, ``[1, -1]`` and similar to a tuple of +-1."""
    if isinstance(signs, str):
        mapping = {"+": 1, "-": -1}
        try:
            out = tuple(mapping[c] for c in signs.strip())
        except KeyError as exc:
            raise ValueError(f"octant string may only contain '+' and '-': {signs!r}") from exc
    else:
        out = tuple(int(s) for s in signs)
    if not out or any(s not in (1, -1) for s in out):
        raise ValueError(f"invalid sign vector {signs!r}")
    return out


def octant_label(sigma: Sequence[int]) -> str:
    return "".join("+" if s > 0 else "-" for s in sigma)


def all_octants(n: int) -> list[tuple[int, ...]]:
    """The 2**n sign vectors, lexicographic with ``+`` first."""
    return list(product((1, -1), repeat=n))


@dataclass(frozen=True)
class VariableRecord:
    roots: tuple[complex, ...]
    multiplicities: tuple[int, ...]
    min_margin: float
    gap: int
    real_pole_orders: tuple[int, ...]


@dataclass(frozen=True)
class HardyCertificate:
    octant: tuple[int, ...]
    p: float
    per_variable: tuple[VariableRecord, ...]
    lp_finite: bool
    quasi_norm: QuasiNormResult | None
    status: Status
    reason: str = ""

    @property
    def valid(self) -> bool:
        return self.status is Status.VALID

    @property
    def min_margin(self) -> float:
        return min((v.min_margin for v in self.per_variable), default=math.inf)

    def to_json(self) -> dict:
        return {
            "octant": octant_label(self.octant),
            "p": self.p,
            "status": self.status.value,
            "reason": self.reason,
            "lp_finite": self.lp_finite,
            "quasi_norm": None if self.quasi_norm is None else self.quasi_norm.to_json(),
            "per_variable": [
                {
                    "roots": [{"re": r.real, "im": r.imag} for r in v.roots],
                    "multiplicities": list(v.multiplicities),
                    "min_margin": v.min_margin if math.isfinite(v.min_margin) else None,
                    "gap": v.gap,
                    "real_pole_orders": list(v.real_pole_orders),
                }
                for v in self.per_variable
            ],
        }


def certify(
    R: SeparableRational,
    octant,
    p: float,
    tau_margin: float = TAU_MARGIN,
    tol: float | None = None,
    compute_norm: bool = True,
) -> HardyCertificate:
    """Certify (or refute) membership of ``R`` in the octant Hardy space.

    ``min_margin`` per variable is ``min(-sigma_k * Im r)`` over denominator
    roots: positive means every root is clear of the open half-plane, zero
    means a root on the real axis.
    """
    sigma = sign_vector(octant)
    if len(sigma) != R.n:
        raise DimensionMismatch(f"octant has length {len(sigma)}, rational has n={R.n}")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    records, inside, indeterminate = [], False, ""
    for k, (q, s) in enumerate(zip(R.denominators, sigma)):
        try:
            rs = roots(q) if q.degree >= 1 else []
        except NonConvergence as exc:
            rs = list(exc.partial or [])
            indeterminate = f"root finding did not converge in variable {k}"
        margins = [-s * r.value.imag for r in rs]
        real_orders = tuple(
            r.multiplicity for r in rs if abs(r.value.imag) <= tau_margin * max(1.0, abs(r.value))
        )
        if any(m < -tau_margin for m in margins):
            inside = True
        records.append(
            VariableRecord(
                roots=tuple(r.value for r in rs),
                multiplicities=tuple(r.multiplicity for r in rs),
                min_margin=min(margins, default=math.inf),
                gap=R.gaps[k] if not R.is_zero else 0,
                real_pole_orders=real_orders,
            )
        )
    lp_finite, reason, qn = True, "", None
    if R.is_zero:
        qn = QuasiNormResult(0.0, 0.0, p, tuple(0.0 for _ in range(R.n)))
    else:
        try:
            screen(R, p)
        except DivergentIntegral as exc:
            lp_finite, reason = False, str(exc)
        if lp_finite and compute_norm and not inside:
            qn = lp_quasinorm(R, p, tol=tol)
    if indeterminate:
        status, reason = Status.INDETERMINATE, indeterminate
    elif inside:
        status = Status.INVALID
        reason = reason or "denominator root inside the open octant half-plane"
    elif not lp_finite:
        status = Status.INVALID
    else:
        status = Status.VALID
    return HardyCertificate(sigma, p, tuple(records), lp_finite, qn, status, reason)


@dataclass
class InteriorSupReport:
    octant: tuple[int, ...]
    p: float
    delta: tuple[float, ...]
    constant: float
    bound: float
    max_ratio: float
    n_points: int
    violations: int
    ratios: np.ndarray = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "octant": octant_label(self.octant),
            "p": self.p,
            "delta": list(self.delta),
            "constant": self.constant,
            "bound": self.bound,
            "max_ratio": self.max_ratio,
            "n_points": self.n_points,
            "violations": self.violations,
        }


def interior_constant(n: int, p: float) -> float:
    """``(2/pi)**(n/p)``."""
    return (2.0 / math.pi) ** (n / p)


def default_sample_points(n: int, per_axis: int = SAMPLES_PER_AXIS, half_width: float = SAMPLE_HALF_WIDTH):
    axis = np.linspace(-half_width, half_width, per_axis)
    return np.array(list(product(axis, repeat=n)), dtype=float)


def interior_sup_check(
    R: SeparableRational,
    octant,
    p: float,
    delta: Sequence[float],
    sample_points=None,
    certificate: HardyCertificate | None = None,
    slack: float = 1e-6,
) -> InteriorSupReport:
    """Compare ``|R(x + i delta)|`` with ``(2/pi)**(n/p) ||R||_p (prod delta)**(-1/p)``.

    ``delta`` may be given with positive entries; they are oriented into the
    octant.  ``sample_points`` are real base points (default: 32 per axis on
    ``[-10, 10]``).  Failures are counted, not raised.
    """
    sigma = sign_vector(octant)
    n = R.n
    d = np.abs(np.asarray(delta, dtype=float)) * np.asarray(sigma)
    if d.shape != (n,) or np.any(d == 0):
        raise ValueError("delta must have n nonzero entries")
    cert = certificate or certify(R, sigma, p)
    if not cert.valid:
        raise ValueError(f"certificate is {cert.status.value}; interior bound needs VALID")
    X = default_sample_points(n) if sample_points is None else np.atleast_2d(np.asarray(sample_points, float))
    const = interior_constant(n, p)
    norm_pp = cert.quasi_norm.value if cert.quasi_norm is not None else 0.0
    bound = const * norm_pp ** (1.0 / p) * float(np.prod(np.abs(d))) ** (-1.0 / p)
    if R.is_zero:
        ratios = np.zeros(len(X))
    else:
        Z = X.astype(complex) + 1j * d[None, :]
        vals = np.abs(R.evaluate_points(Z, check_poles=False))
        ratios = vals / bound if bound > 0 else np.where(vals > 0, np.inf, 0.0)
    return InteriorSupReport(
        octant=sigma,
        p=p,
        delta=tuple(float(v) for v in d),
        constant=const,
        bound=bound,
        max_ratio=float(ratios.max(initial=0.0)),
        n_points=len(X),
        violations=int(np.sum(ratios > 1.0 + slack)),
        ratios=ratios,
    )


def certify_all(R: SeparableRational, p: float, **kwargs) -> dict[tuple[int, ...], HardyCertificate]:
    octs = all_octants(R.n)
    return dict(zip(octs, ordered_map(lambda s: certify(R, s, p, **kwargs), octs)))
