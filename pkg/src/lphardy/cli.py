"""Command-line front end.

Every command writes one deterministic JSON report (or CSV for
``density-demo``).  Exit status is 0 on success, 2 when the input fails
validation and 3 when a numerical routine fails; in the last case a
partial report is still written.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import set_max_workers
from .approx import SampledFunction, builtin, from_rational, telescope
from .decompose import DecomposeConfig, boundary_trace, decompose
from .density import fit_RN
from .errors import (
    DegeneratePhase,
    DimensionMismatch,
    DistinctnessViolation,
    DivergentIntegral,
    IntegrabilityViolation,
    LpHardyError,
    SchemaError,
)
from .hardy import all_octants, certify, interior_constant, octant_label, sign_vector
from .intersect import alternative_decomposition, decomposition_diff, make_xp_atom
from .io import dumps, polynomial_from_doc, read_json, read_rational, write_csv, write_json
from .polyalg import MultiPoly, SeparableRational, UniPoly, binomial_power, one_plus_square_power
from .quadrature import DEFAULT_TOL, bound_constant, lp_quasinorm
from .split import SplitParams, default_m, select_phase, split_atom

SEED = 42
TOL_PROFILES = {"fast": 10.0, "default": 1.0, "strict": 0.1}
TOL_PROFILE_ENV = "LPHARDY_TOL_PROFILE"
VALIDATION_ERRORS = (
    SchemaError,
    DimensionMismatch,
    DistinctnessViolation,
    IntegrabilityViolation,
    DegeneratePhase,
    DivergentIntegral,
    ValueError,
)


def fixture(name: str) -> SeparableRational:
    """Small named rationals for quick runs."""
    one = MultiPoly.constant(1, 1.0)
    table = {
        "inverse-cube-lorentzian": lambda: SeparableRational(one, [one_plus_square_power(3)]),
        "real-pole": lambda: SeparableRational(
            one, [binomial_power(0.0, 1.0, 1) * one_plus_square_power(1)]
        ),
        "real-pair": lambda: SeparableRational(one, [UniPoly.from_roots([(1.0, 1), (-1.0, 1)])]),
        "upper-atom": lambda: SeparableRational(one, [binomial_power(1j, 1.0, 3)]),
    }
    if name not in table:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(table)}")
    return table[name]()


def tol_profile() -> tuple[str, float]:
    name = os.environ.get(TOL_PROFILE_ENV, "default").strip() or "default"
    if name not in TOL_PROFILES:
        raise ValueError(f"{TOL_PROFILE_ENV} must be one of {sorted(TOL_PROFILES)}, got {name!r}")
    return name, TOL_PROFILES[name]


def resolve_tol(args, n: int) -> float:
    if args.tol is not None:
        return args.tol
    _, factor = tol_profile()
    return DEFAULT_TOL.get(n, DEFAULT_TOL[max(DEFAULT_TOL)]) * factor


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _per_axis(values, n: int, what: str):
    if len(values) == 1:
        return tuple(values) * n
    if len(values) != n:
        raise ValueError(f"--{what} needs 1 or {n} values, got {len(values)}")
    return tuple(values)


def load_rational(args) -> SeparableRational:
    if args.fixture:
        return fixture(args.fixture)
    if not args.input:
        raise ValueError("give a rational JSON path or --fixture")
    return read_rational(args.input)


def load_function(spec: str, n: int) -> SampledFunction:
    if spec.startswith("rational:"):
        R = read_rational(spec[len("rational:"):])
        return from_rational(R, name=spec)
    return builtin(spec, n)


def envelope(args, n: int, tol: float, result) -> dict:
    profile, _ = tol_profile()
    p = getattr(args, "p", None)
    consts = {}
    if p is not None and 0 < p < 1:
        consts = {"C_np": bound_constant(n, p), "interior_constant": interior_constant(n, p)}
    return {
        "command": args.command,
        "version": __version__,
        "config": {
            "p": p,
            "n": n,
            "tol": tol,
            "tol_profile": profile,
            "seed": args.seed,
        },
        "constants": consts,
        "result": result,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_norm(args):
    R = load_rational(args)
    tol = resolve_tol(args, R.n)
    y = _per_axis(_floats(args.y), R.n, "y") if args.y else None
    res = lp_quasinorm(R, args.p, y=y, tol=tol, strict=args.strict)
    return envelope(args, R.n, tol, res.to_json())


def cmd_certify(args):
    R = load_rational(args)
    tol = resolve_tol(args, R.n)
    octs = [sign_vector(args.octant)] if args.octant else all_octants(R.n)
    certs = [certify(R, s, args.p, tol=tol).to_json() for s in octs]
    return envelope(args, R.n, tol, {"certificates": certs})


def cmd_split(args):
    R = load_rational(args)
    tol = resolve_tol(args, R.n)
    m = _per_axis(_ints(args.m), R.n, "m") if args.m else default_m(R)
    if args.auto_phi:
        _, sp = select_phase(R, args.p, m, args.grid, args.seed, tol=tol)
    else:
        if not args.phi:
            raise ValueError("give --phi or --auto-phi")
        phis = _per_axis(_floats(args.phi), R.n, "phi")
        sp = split_atom(R, args.p, SplitParams(m, phis), tol=tol, with_certificates=True)
    return envelope(args, R.n, tol, sp.to_json())


def cmd_approx(args):
    f = load_function(args.f, args.n)
    tol = resolve_tol(args, f.n)
    series = telescope(f, args.p, args.epsilon, args.max_atoms, tol=tol)
    return envelope(args, f.n, tol, series.to_json())


def cmd_decompose(args):
    f = load_function(args.f, args.n)
    tol = resolve_tol(args, f.n)
    cfg = DecomposeConfig(epsilon=args.epsilon, max_atoms=args.max_atoms, seed=args.seed, tol=tol)
    dec = decompose(f, args.p, config=cfg)
    report = envelope(args, f.n, tol, dec.to_json())
    if args.emit_trace:
        out = Path(args.emit_trace)
        out.mkdir(parents=True, exist_ok=True)
        axis = np.linspace(-3.0, 3.0, 13 if f.n > 1 else 61)
        mesh = np.meshgrid(*([axis] * f.n), indexing="ij")
        X = np.stack([g.ravel() for g in mesh], axis=1)
        files = {}
        for sigma, ser in dec.per_octant.items():
            if not ser.atoms:
                continue
            path = out / f"trace_{octant_label(sigma).replace('+', 'p').replace('-', 'm')}.csv"
            boundary_trace(ser.atoms, sigma, X).write_csv(str(path))
            files[octant_label(sigma)] = path.name
        report["result"]["traces"] = files
    return report


def parse_poles(text: str) -> list[list[float]]:
    rows = [r for r in text.split(";") if r.strip()]
    A = [_floats(r) for r in rows]
    if not A or len({len(r) for r in A}) != 1:
        raise ValueError("--poles rows must have equal length, e.g. '1,-1;2,-2'")
    return A


def cmd_xp_demo(args):
    A = parse_poles(args.poles)
    n = len(A)
    P = polynomial_from_doc(read_json(args.numerator)) if args.numerator else None
    tol = resolve_tol(args, n)
    g = make_xp_atom(A, P, args.p, tol=tol)
    if not g.all_valid:
        raise ValueError("atom is not VALID in every octant")
    cfg = DecomposeConfig(seed=args.seed, tol=tol)
    dec = decompose(from_rational(g.rational, name="xp-atom"), args.p, config=cfg)
    alt = alternative_decomposition(dec, g, tol=tol)
    rng = np.random.default_rng(args.seed)
    span = 2.0 * max(1.0, float(np.abs(A).max()))
    pts = rng.uniform(-span, span, (args.points, n))
    result = {
        "atom": g.to_json(),
        "original": dec.to_json(),
        "alternative": alt.to_json(),
        "diff": decomposition_diff(dec, alt, pts),
    }
    return envelope(args, n, tol, result)


DENSITY_TARGETS = {
    "shifted-pole": lambda N: (lambda X: np.prod((X + 1j) ** (-N - 2), axis=1)),
    "member": lambda N: (lambda X: np.prod((X + 1j) ** (-N - 1), axis=1)),
    "offset-pole": lambda N: (lambda X: np.prod((X + 2j) ** (-N - 1), axis=1)),
}


def cmd_density_demo(args):
    f = DENSITY_TARGETS[args.target](args.N)
    rows = [fit_RN(f, args.p, args.N, d, n=args.n).to_row() for d in _ints(args.degrees)]
    write_csv(rows, args.out, ["degree", "sup_residual", "lp_bound", "lp_bound_as_printed"])
    return None


# ---------------------------------------------------------------------------
# parser


def _add_common(sp, needs_p: bool = True):
    if needs_p:
        sp.add_argument("--p", type=float, required=True, help="exponent in (0, 1)")
    sp.add_argument("--tol", type=float, default=None, help="quadrature tolerance (default from profile)")
    sp.add_argument("--seed", type=int, default=SEED)
    sp.add_argument("--out", default="-", help="output path, '-' for stdout")


def _add_rational_input(sp):
    sp.add_argument("input", nargs="?", help="rational JSON")
    sp.add_argument("--fixture", help="named built-in rational instead of a file")


def _add_function_input(sp):
    sp.add_argument("--f", default="builtin:gaussian", help="builtin:<name>, csv:<path> or rational:<path>")
    sp.add_argument("--n", type=int, default=1, help="dimension for builtin functions")
    sp.add_argument("--epsilon", type=float, default=0.5)
    sp.add_argument("--max-atoms", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lphardy", description="L^p Hardy space decompositions for 0 < p < 1")
    parser.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("norm", help="L^p quasi-norm of a rational on a horizontal slice")
    _add_rational_input(sp)
    _add_common(sp)
    sp.add_argument("--y", help="comma-separated imaginary offsets")
    sp.add_argument("--strict", action="store_true", help="fail when the tolerance is not met")
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("certify", help="octant Hardy space certificates")
    _add_rational_input(sp)
    _add_common(sp)
    sp.add_argument("--octant", help="sign string such as ++- (default: all)")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("split", help="split an atom into octant components")
    _add_rational_input(sp)
    _add_common(sp)
    sp.add_argument("--m", help="comma-separated split orders (default l + n + 1)")
    sp.add_argument("--phi", help="comma-separated phases")
    sp.add_argument("--auto-phi", action="store_true", help="choose phases on a seeded grid")
    sp.add_argument("--grid", type=int, default=16, help="grid points per dimension for --auto-phi")
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("approx", help="telescoping rational approximation")
    _add_function_input(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_approx)

    sp = sub.add_parser("decompose", help="octant decomposition of a function")
    _add_function_input(sp)
    _add_common(sp)
    sp.add_argument("--emit-trace", metavar="DIR", help="write per-octant boundary trace CSVs here")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("xp-demo", help="atom in every octant space and two decompositions")
    _add_common(sp)
    sp.add_argument("--poles", default="1,-1", help="rows of real poles, e.g. '1,-1;2,-2'")
    sp.add_argument("--numerator", help="polynomial JSON (default 1)")
    sp.add_argument("--points", type=int, default=1000, help="random points for the diff report")
    sp.set_defaults(func=cmd_xp_demo)

    sp = sub.add_parser("density-demo", help="reciprocal-power class fits at increasing degree")
    _add_common(sp)
    sp.add_argument("--N", type=int, default=3)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--degrees", default="2,4,8")
    sp.add_argument("--target", choices=sorted(DENSITY_TARGETS), default="shifted-pole")
    sp.set_defaults(func=cmd_density_demo)
    return parser


def _partial(exc) -> object:
    for attr in ("best", "partial"):
        val = getattr(exc, attr, None)
        if val is None:
            continue
        if isinstance(val, tuple):
            val = [v for v in val]
        return val
    return None


def _jsonable(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (int, float, complex, str, dict)) or obj is None:
        return obj
    return repr(obj)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads must be positive")
        set_max_workers(args.threads)
    p = getattr(args, "p", None)
    try:
        if p is not None and not 0 < p < 1:
            raise ValueError(f"--p must lie in (0, 1), got {p}")
        tol_profile()
        report = args.func(args)
    except VALIDATION_ERRORS as exc:
        err = {"status": "invalid_input", "error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SchemaError):
            err["pointer"] = exc.pointer
        sys.stderr.write(dumps(err))
        return 2
    except (LpHardyError, FloatingPointError, np.linalg.LinAlgError) as exc:
        report = {
            "command": args.command,
            "status": "numerical_failure",
            "error": type(exc).__name__,
            "message": str(exc),
            "partial": _jsonable(_partial(exc)),
        }
        write_json(report, args.out)
        return 3
    if report is not None:
        write_json(report, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
