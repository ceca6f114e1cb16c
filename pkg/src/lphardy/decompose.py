"""End-to-end octant decomposition of an L^p function, 0 < p < 1.

The function is approximated by a telescoping rational series and every
atom is split into ``2**n`` octant components.  Summing the components of
each octant over the series gives the octant pieces ``f_sigma`` whose sum
reconstructs ``f``.  The report evaluates the norm budget, reconstruction
residual, certificates, interior Cauchy behaviour and quasi-subadditivity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .approx import (
    AtomSeries,
    SampledFunction,
    residual_pp,
    telescope,
)
from .errors import PhaseSearchFailed
from .hardy import HardyCertificate, all_octants, certify, interior_constant, octant_label
from .polyalg import SeparableRational
from .quadrature import QuasiNormResult, bound_constant, lp_quasinorm, lp_quasinorm_sum, merge_specs, rational_axis_specs
from .split import OctantSplit, SplitParams, default_m, peel, select_phase, split_atom

TAU_TRACE_POLE = 1e-8


@dataclass
class DecomposeConfig:
    epsilon: float = 0.5
    max_atoms: int = 8
    grid_per_dim: int | None = None
    seed: int = 42
    share_phase: bool = False
    N: float | None = None
    tol: float | None = None
    norm_rtol: float = 0.05
    identity_tol: float = 1e-9
    residual_target: float = 0.05
    initial_degree: int | None = None
    partial_norms: bool = True
    interior_delta: float = 0.5

    def grid(self, n: int) -> int:
        if self.grid_per_dim is not None:
            return self.grid_per_dim
        return 16 if n == 1 else 8

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class OctantSeries:
    atoms: list[SeparableRational] = field(default_factory=list)
    atom_norms: list[QuasiNormResult] = field(default_factory=list)
    partial_norms: list[QuasiNormResult] = field(default_factory=list)
    certificates: list[HardyCertificate] = field(default_factory=list)
    norm: QuasiNormResult | None = None

    def to_json(self) -> dict:
        return {
            "atoms": [a.to_json() for a in self.atoms],
            "atom_norms": [r.to_json() for r in self.atom_norms],
            "partial_norms": [r.to_json() for r in self.partial_norms],
            "certificates": [c.status.value for c in self.certificates],
            "norm": None if self.norm is None else self.norm.to_json(),
        }


@dataclass
class OctantDecomposition:
    per_octant: dict[tuple[int, ...], OctantSeries]
    total_norm_sum: float
    total_norm_error: float
    reconstruction_residual: QuasiNormResult
    a_constant_used: float
    bound_constant: float
    p: float
    f_norm: QuasiNormResult
    mode: str
    checks: list[dict] = field(default_factory=list)
    series: AtomSeries | None = None
    splits: list[OctantSplit] = field(default_factory=list)
    stage_residuals: list[float] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(next(iter(self.per_octant)))

    @property
    def all_valid(self) -> bool:
        return all(c.valid for s in self.per_octant.values() for c in s.certificates)

    def evaluate(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        out = np.zeros(len(Z), dtype=complex)
        for s in self.per_octant.values():
            for a in s.atoms:
                out += a.evaluate_points(Z, check_poles=False)
        return out

    def to_json(self) -> dict:
        ratio = self.total_norm_sum / self.f_norm.value if self.f_norm.value > 0 else None
        return {
            "p": self.p,
            "mode": self.mode,
            "f_norm": self.f_norm.to_json(),
            "total_norm_sum": self.total_norm_sum,
            "total_norm_error": self.total_norm_error,
            "reconstruction_residual": self.reconstruction_residual.to_json(),
            "constants": {
                "C_np": self.bound_constant,
                "A_np": self.a_constant_used,
                "measured_ratio": ratio,
                "slack_vs_C_np": None if ratio is None else self.bound_constant - ratio,
            },
            "stage_residuals": self.stage_residuals,
            "per_octant": {octant_label(s): v.to_json() for s, v in self.per_octant.items()},
            "phases": [sp.params.to_json() for sp in self.splits],
            "inequality_checks": self.checks,
        }


def _check(name: str, bound: float, measured: float, err: float, passed: bool) -> dict:
    return {"name": name, "bound": bound, "measured": measured, "abs_error": err, "passed": bool(passed)}


def _class_like(R: SeparableRational) -> bool:
    try:
        for q in R.denominators:
            peel(q)
    except ValueError:
        return False
    return True


def decompose(f: SampledFunction, p: float, epsilon: float = 0.5, config: DecomposeConfig | None = None) -> OctantDecomposition:
    """Octant decomposition of ``f``; see :class:`DecomposeConfig` for knobs."""
    if not 0 < p < 1:
        raise ValueError("p must lie strictly inside (0, 1)")
    cfg = config or DecomposeConfig(epsilon=epsilon)
    cfg.epsilon = epsilon if config is None else cfg.epsilon
    n = f.n
    octs = all_octants(n)
    cnp = bound_constant(n, p)
    a_np = (1 + cfg.epsilon) * cnp
    per = {s: OctantSeries() for s in octs}
    splits: list[OctantSplit] = []
    series = None
    mode = "series"

    R = f.rational
    passthrough = None
    if R is not None:
        for s in octs:
            c = certify(R, s, p, tol=cfg.tol)
            if c.valid:
                passthrough = (s, c)
                break
    if passthrough is not None:
        mode = "passthrough"
        s, c = passthrough
        per[s].atoms.append(R)
        per[s].atom_norms.append(c.quasi_norm)
        per[s].certificates.append(c)
        atoms = [R]
        f_norm = c.quasi_norm
        stage_res = []
    else:
        if R is not None and _class_like(R):
            mode = "single-atom"
            f_norm = lp_quasinorm(R, p, tol=cfg.tol)
            atoms = [R]
            stage_res = []
        else:
            series = telescope(
                f, p, cfg.epsilon, cfg.max_atoms, N=cfg.N, initial_degree=cfg.initial_degree, tol=cfg.tol
            )
            f_norm = series.f_norm
            atoms = series.atoms
            stage_res = [r.value for r in series.residuals]
        shared = None
        for k, atom in enumerate(atoms):
            m = default_m(atom)
            if shared is not None:
                sp = split_atom(atom, p, SplitParams(m, shared), tol=cfg.tol, with_certificates=True)
                sp.input_norm = lp_quasinorm(atom, p, tol=cfg.tol)
            else:
                inorm = series.norms[k] if series is not None else f_norm
                try:
                    _, sp = select_phase(atom, p, m, cfg.grid(n), cfg.seed + k, tol=cfg.tol, input_norm=inorm)
                except PhaseSearchFailed as exc:
                    _, sp = exc.best
                if cfg.share_phase:
                    shared = sp.params.phis
            splits.append(sp)
            for s in octs:
                per[s].atoms.append(sp.components[s])
                per[s].atom_norms.append(sp.norms[s])
                per[s].certificates.append(sp.certificates[s])

    # octant sums
    for s in octs:
        ser = per[s]
        if not ser.atoms:
            ser.norm = QuasiNormResult(0.0, 0.0, p, tuple(0.0 for _ in range(n)))
            continue
        if len(ser.atoms) == 1:
            ser.norm = ser.atom_norms[0]
            ser.partial_norms = [ser.norm]
            continue
        if cfg.partial_norms:
            ser.partial_norms = [lp_quasinorm_sum(ser.atoms[: k + 1], p, tol=cfg.tol) for k in range(len(ser.atoms))]
            ser.norm = ser.partial_norms[-1]
        else:
            ser.norm = lp_quasinorm_sum(ser.atoms, p, tol=cfg.tol)

    total = math.fsum(r.value for s in per.values() for r in s.atom_norms)
    total_err = math.fsum(r.abs_error for s in per.values() for r in s.atom_norms)

    # literal reconstruction residual against the function actually fitted
    target = series.truncation.function if series is not None and series.truncation is not None else f
    comps = [a for s in per.values() for a in s.atoms]
    specs = merge_specs([target.axis_specs(p)] + [rational_axis_specs(a, p) for a in atoms]) if atoms else None
    recon = residual_pp(target, comps, p, cfg.tol, specs=specs)

    dec = OctantDecomposition(
        per, total, total_err, recon, a_np, cnp, p, f_norm, mode, series=series, splits=splits, stage_residuals=stage_res
    )
    dec.checks = _checks(dec, cfg)
    return dec


def _checks(dec: OctantDecomposition, cfg: DecomposeConfig) -> list[dict]:
    fn = dec.f_norm
    out = []
    err = dec.total_norm_error + dec.a_constant_used * fn.abs_error
    out.append(
        _check(
            "sum_k sum_j ||R_k,sigma_j||_p^p <= A_np ||f||_p^p, A_np = (1 + eps) C_np",
            dec.a_constant_used * fn.value,
            dec.total_norm_sum,
            err,
            dec.total_norm_sum <= dec.a_constant_used * fn.value * (1 + cfg.norm_rtol) + err,
        )
    )
    rr = dec.reconstruction_residual
    out.append(
        _check(
            "||f - sum_k sum_j R_k,sigma_j||_p^p <= target * ||f||_p^p",
            cfg.residual_target * fn.value,
            rr.value,
            rr.abs_error,
            rr.value <= cfg.residual_target * fn.value + rr.abs_error,
        )
    )
    res = dec.stage_residuals
    out.append(
        _check(
            "stage residuals non-increasing",
            0.0,
            max((b - a for a, b in zip(res, res[1:])), default=0.0),
            0.0,
            all(b <= a for a, b in zip(res, res[1:])),
        )
    )
    n_bad = sum(1 for s in dec.per_octant.values() for c in s.certificates if not c.valid)
    out.append(_check("every component certificate VALID", 0, n_bad, 0, n_bad == 0))
    parts = [s.norm for s in dec.per_octant.values()]
    psum = math.fsum(r.value for r in parts)
    perr = math.fsum(r.abs_error for r in parts) + fn.abs_error
    out.append(
        _check(
            "||f||_p^p <= sum_j ||f_sigma_j||_p^p",
            psum,
            fn.value,
            perr + rr.value,
            fn.value <= psum * (1 + cfg.norm_rtol) + perr + rr.value,
        )
    )
    out.extend(_interior_checks(dec, cfg))
    return out


def _interior_checks(dec: OctantDecomposition, cfg: DecomposeConfig) -> list[dict]:
    """Tails of the octant series at fixed depth against the interior bound."""
    n = dec.n
    out = []
    axis = np.linspace(-5.0, 5.0, 9 if n > 1 else 33)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    for sigma, ser in dec.per_octant.items():
        K = len(ser.atoms)
        if K < 2:
            continue
        delta = cfg.interior_delta * np.asarray(sigma, float)
        Z = X.astype(complex) + 1j * delta[None, :]
        vals = np.array([a.evaluate_points(Z, check_poles=False) for a in ser.atoms])
        scale = interior_constant(n, dec.p) ** dec.p / float(np.prod(np.abs(delta)))
        worst, ok = 0.0, True
        for j in range(1, K):
            tail = np.abs(vals[j:].sum(axis=0)).max() ** dec.p
            budget = scale * math.fsum(r.value + r.abs_error for r in ser.atom_norms[j:])
            worst = max(worst, tail / budget if budget > 0 else (0.0 if tail == 0 else math.inf))
            ok &= tail <= budget * (1 + 1e-6)
        out.append(
            _check(
                f"octant {octant_label(sigma)}: sup |sum_(k>K) R_k(z + i delta)|^p <= M_delta sum_(k>K) ||R_k||_p^p",
                1.0,
                worst,
                0.0,
                ok,
            )
        )
    return out


# ---------------------------------------------------------------------------
# boundary traces


def default_deltas(octant: Sequence[int], count: int = 12) -> list[np.ndarray]:
    sigma = np.asarray(octant, float)
    return [2.0 ** (-m) * sigma for m in range(1, count + 1)]


@dataclass
class BoundaryTrace:
    octant: tuple[int, ...]
    x_grid: np.ndarray
    deltas: list[np.ndarray]
    values: np.ndarray  # (len(x_grid), len(deltas))
    flagged: np.ndarray  # bool per x point

    @property
    def successive_differences(self) -> np.ndarray:
        return np.abs(np.diff(self.values, axis=1))

    def rows(self):
        for i, x in enumerate(self.x_grid):
            if self.flagged[i]:
                continue
            for j, d in enumerate(self.deltas):
                v = self.values[i, j]
                yield [*map(float, x), float(np.max(np.abs(d))), float(v.real), float(v.imag)]

    def write_csv(self, path: str) -> None:
        n = self.x_grid.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{k + 1}" for k in range(n)] + ["delta", "value_re", "value_im"])
            for row in self.rows():
                w.writerow([format(v, ".17g") for v in row])


def _real_roots(q) -> list[float]:
    if q.degree < 1:
        return []
    from .polyalg import roots

    try:
        rs = roots(q)
    except Exception as exc:  # partial roots are still useful for flagging
        rs = getattr(exc, "partial", None) or []
    return [r.value.real for r in rs if abs(r.value.imag) <= 1e-8 * max(1.0, abs(r.value))]


def boundary_trace(
    atoms: Sequence[SeparableRational],
    octant: Sequence[int],
    x_grid,
    delta_sequence: Sequence[Sequence[float]] | None = None,
) -> BoundaryTrace:
    """Partial sums at ``x + i delta`` along a shrinking delta sequence.

    Grid points within ``1e-8`` of a real pole of any atom are flagged and
    left as NaN.
    """
    sigma = tuple(int(s) for s in octant)
    X = np.atleast_2d(np.asarray(x_grid, dtype=float))
    if X.shape[0] == 1 and len(sigma) == 1 and X.shape[1] != 1:
        X = X.T
    deltas = [np.asarray(d, float) * 1.0 for d in (delta_sequence or default_deltas(sigma))]
    flagged = np.zeros(len(X), dtype=bool)
    for a in atoms:
        for k, q in enumerate(a.denominators):
            for r in _real_roots(q):
                flagged |= np.abs(X[:, k] - r) <= TAU_TRACE_POLE * max(1.0, abs(r))
    vals = np.full((len(X), len(deltas)), np.nan + 0j)
    ok = ~flagged
    for j, d in enumerate(deltas):
        Z = X[ok].astype(complex) + 1j * d[None, :]
        vals[ok, j] = sum((a.evaluate_points(Z, check_poles=False) for a in atoms), np.zeros(int(ok.sum()), complex))
    return BoundaryTrace(sigma, X, deltas, vals, flagged)
