"""Fixtures and report builders shared by the test modules."""

from __future__ import annotations

import math
import time

import numpy as np

from lphardy.approx import gaussian
from lphardy.decompose import DecomposeConfig, decompose
from lphardy.density import fit_RN
from lphardy.hardy import certify, interior_sup_check
from lphardy.intersect import alternative_decomposition, decomposition_diff, make_xp_atom
from lphardy.io import dumps
from lphardy.polyalg import MultiPoly, SeparableRational, UniPoly, binomial_power, one_plus_square_power
from lphardy.quadrature import bound_constant, lp_quasinorm, mean_over_phase, norm_slice_profile
from lphardy.split import SplitParams, check_phase, default_m, phase_factors, select_phase, split_components

SEED = 42


def uni(n: int, k: int, poly: UniPoly) -> MultiPoly:
    return MultiPoly.from_univariate(poly, k, n)


def class_a_atom(num_terms: dict, ls) -> SeparableRational:
    """``P(x) / prod (1 + x_k**2)**l_k`` from a sparse numerator."""
    n = len(ls)
    return SeparableRational(MultiPoly.from_terms(n, list(num_terms.items())), [one_plus_square_power(l) for l in ls])


def random_class_a_atom(rng: np.random.Generator, n: int, max_l: int = 3) -> SeparableRational:
    ls = [int(rng.integers(1, max_l + 1)) for _ in range(n)]
    shape = tuple(2 * l for l in ls)
    coef = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return SeparableRational(MultiPoly(coef, n), [one_plus_square_power(l) for l in ls])


def rational(num, dens) -> SeparableRational:
    return SeparableRational(num, dens)


def one(n: int) -> MultiPoly:
    return MultiPoly.constant(n, 1.0)


def averaging_fixtures() -> list[tuple[str, SeparableRational]]:
    """Five n = 1 class-A atoms with gap at least 4 (integrable down to p = 0.3)."""
    x = lambda *c: MultiPoly(np.asarray(c, dtype=complex), 1)
    return [
        ("inv-square-lorentzian", SeparableRational(x(1.0), [one_plus_square_power(2)])),
        ("inv-cube-lorentzian", SeparableRational(x(1.0), [one_plus_square_power(3)])),
        ("odd-cubic", SeparableRational(x(0.0, 1.0), [one_plus_square_power(3)])),
        ("quadratic-numerator", SeparableRational(x(1.0, -1.0, 0.5), [one_plus_square_power(3)])),
        ("complex-numerator", SeparableRational(x(2.0, 1j, 0.0, -0.25), [one_plus_square_power(4)])),
    ]


def valid_fixtures() -> list[tuple[str, SeparableRational, tuple[int, ...]]]:
    """Rationals with a VALID certificate in the listed octant."""
    out = [
        ("upper-cube", SeparableRational(one(1), [binomial_power(1j, 1.0, 3)]), (1,)),
        ("lower-pair", SeparableRational(MultiPoly(np.array([1.0, 0.5]), 1), [binomial_power(-2j, 1.0, 4)]), (-1,)),
        ("real-pair", make_xp_atom([[1.0, -1.0]], p=0.6, certify_octants=False).rational, (1,)),
        (
            "upper-tensor",
            SeparableRational(one(2), [binomial_power(1j, 1.0, 3), binomial_power(2j, 1.0, 4)]),
            (1, 1),
        ),
        (
            "mixed-tensor",
            SeparableRational(one(2), [binomial_power(1j, 1.0, 3), binomial_power(-1j, 1.0, 3)]),
            (1, -1),
        ),
    ]
    return out


def fixture_p(name: str) -> float:
    return 0.6 if name == "real-pair" else 0.5


# ---------------------------------------------------------------------------
# criterion reports; each returns (passed, report) where report is JSON-able


def criterion_1(cases: int = 100, seed: int = SEED):
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < cases:
        m = int(rng.integers(2, 9))
        phi = float(rng.uniform(-math.pi, math.pi))
        try:
            check_phase(m, phi)
        except Exception:
            continue
        z = complex(rng.normal() * 5.0, rng.uniform(-5.0, 5.0))
        fp, fm = phase_factors(m, phi)
        Z = np.array([[z]])
        err = abs(fp.evaluate_points(Z, check_poles=False)[0] + fm.evaluate_points(Z, check_poles=False)[0] - 1.0)
        worst = max(worst, err)
        done += 1
    return worst <= 1e-12, {"cases": cases, "max_error": worst}


def criterion_2(atoms: int = 20, points: int = 1000, seed: int = SEED):
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(atoms):
        n = 1 + k % 2
        R = random_class_a_atom(rng, n)
        m = default_m(R)
        while True:
            phis = tuple(float(v) for v in rng.uniform(-math.pi, math.pi, n))
            try:
                for mk, ph in zip(m, phis):
                    check_phase(mk, ph)
                break
            except Exception:
                continue
        comps = split_components(R, SplitParams(m, phis))
        X = rng.normal(scale=3.0, size=(points, n)).astype(complex)
        ref = R.evaluate_points(X, check_poles=False)
        tot = sum(c.evaluate_points(X, check_poles=False) for c in comps.values())
        rel = float(np.abs(tot - ref).max() / np.abs(ref).max())
        rows.append({"n": n, "m": list(m), "phis": list(phis), "relative_error": rel})
    worst = max(r["relative_error"] for r in rows)
    return worst <= 1e-9, {"atoms": rows, "max_relative_error": worst}


def criterion_3():
    R1 = SeparableRational(one(1), [one_plus_square_power(3)])
    v1 = lp_quasinorm(R1, 0.5, y=(0.0,))
    R2 = SeparableRational(one(1), [binomial_power(0.0, 1.0, 1) * one_plus_square_power(1)])
    v2 = lp_quasinorm(R2, 0.5)
    ref2 = math.gamma(0.25) ** 2 / math.gamma(0.5)
    e1 = abs(v1.value - 2.0)
    e2 = abs(v2.value - ref2) / ref2
    return e1 <= 1e-6 and e2 <= 1e-5, {"lorentzian_error": e1, "real_pole_relative_error": e2}


def criterion_4(ps=(0.3, 0.5, 0.7), grid: int = 64, seed: int = SEED):
    rows = []
    ok = True
    for name, R in averaging_fixtures():
        m = default_m(R)
        for p in ps:
            norm = lp_quasinorm(R, p)
            cnp = bound_constant(1, p)
            mean, mean_err = mean_over_phase(R, p, m, grid_per_dim=grid, seed=seed)
            err = mean_err + cnp * norm.abs_error
            mean_ok = mean <= cnp * norm.value + 3.0 * err
            phis, sp = select_phase(R, p, m, seed=seed, input_norm=norm)
            sel_ok = sp.norm_sum <= cnp * norm.value + 3.0 * (sp.norm_error + cnp * norm.abs_error)
            ok &= bool(mean_ok and sel_ok)
            rows.append(
                {
                    "atom": name,
                    "p": p,
                    "norm": norm.value,
                    "bound": cnp * norm.value,
                    "grid_mean": mean,
                    "grid_mean_error": mean_err,
                    "mean_ok": bool(mean_ok),
                    "selected_phi": list(phis),
                    "selected_norm_sum": sp.norm_sum,
                    "selected_ok": bool(sel_ok),
                }
            )
    return ok, {"rows": rows}


def criterion_5(ys=(0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.5, 3.0)):
    rows = []
    ok = True
    for name, R, sigma in valid_fixtures():
        p = fixture_p(name)
        cert = certify(R, sigma, p, compute_norm=False)
        assert cert.valid, name
        grid = [np.zeros(R.n)] + [np.full(R.n, y) * np.asarray(sigma) for y in ys]
        prof = norm_slice_profile(R, p, sigma, grid)
        base = prof[0]
        for y, r in zip(ys, prof[1:]):
            good = r.value <= base.value * (1 + 1e-6) + base.abs_error + r.abs_error
            ok &= bool(good)
            rows.append({"fixture": name, "y": y, "slice": r.value, "slice0": base.value, "passed": bool(good)})
    return ok, {"rows": rows}


def criterion_6(delta: float = 0.5, per_axis_1d: int = 1000, per_axis_2d: int = 32):
    rows = []
    ok = True
    for name, R, sigma in valid_fixtures():
        p = fixture_p(name)
        if R.n == 1:
            pts = np.linspace(-10.0, 10.0, per_axis_1d)[:, None]
        else:
            ax = np.linspace(-10.0, 10.0, per_axis_2d)
            g = np.meshgrid(ax, ax, indexing="ij")
            pts = np.stack([g[0].ravel(), g[1].ravel()], axis=1)[:1000]
        rep = interior_sup_check(R, sigma, p, [delta] * R.n, sample_points=pts)
        ok &= rep.max_ratio <= 1 + 1e-6 and rep.n_points >= 1000
        rows.append({"fixture": name, "n_points": rep.n_points, "max_ratio": rep.max_ratio})
    return bool(ok), {"rows": rows}


def criterion_7(seed: int = SEED):
    f = gaussian(2)
    p = 0.5
    dec = decompose(f, p, config=DecomposeConfig(epsilon=0.5, seed=seed))
    cnp = bound_constant(2, p)
    fn = dec.f_norm
    stages = len(dec.series.atoms) if dec.series is not None else 1
    res_ok = dec.reconstruction_residual.value <= 0.05 * fn.value + dec.reconstruction_residual.abs_error
    err = dec.total_norm_error + 1.5 * cnp * fn.abs_error
    norm_ok = dec.total_norm_sum <= 1.5 * cnp * fn.value + err
    ok = stages <= 8 and res_ok and norm_ok and dec.all_valid
    return bool(ok), {
        "stages": stages,
        "f_norm": fn.value,
        "residual": dec.reconstruction_residual.value,
        "residual_bound": 0.05 * fn.value,
        "total_norm_sum": dec.total_norm_sum,
        "norm_bound": 1.5 * cnp * fn.value,
        "all_valid": dec.all_valid,
        "decomposition": dec.to_json(),
    }


def criterion_8(points: int = 1000, seed: int = SEED):
    p = 0.6
    g0 = make_xp_atom([[1.0, -1.0], [1.0, -1.0]], p=p)
    c = g0.norm.value ** (-1.0 / p)
    g = make_xp_atom([[1.0, -1.0], [1.0, -1.0]], MultiPoly.constant(2, c), p=p)
    f = make_xp_atom([[1.0, -1.0], [1.0, -1.0]], p=p)
    from lphardy.approx import from_rational

    dec = decompose(from_rational(f.rational), p, config=DecomposeConfig(seed=seed))
    alt = alternative_decomposition(dec, g)
    rng = np.random.default_rng(seed)
    X = rng.uniform(-4.0, 4.0, (points, 2))
    diff = decomposition_diff(dec, alt, X)
    ok = f.all_valid and diff["max_norm_change"] >= 1e-3 and diff["max_reconstruction_gap"] <= 1e-10 and alt.all_valid
    return bool(ok), {"g_norm": lp_quasinorm(g.rational, p).value, "certificates": len(f.certificates), **diff}


def criterion_9(N: int = 3, p: float = 0.5, degrees=(2, 4, 8)):
    target = lambda X: (X[:, 0] + 1j) ** (-N - 2)
    sweep = [fit_RN(target, p, N, d).sup_residual for d in degrees]
    decreasing = all(b < a for a, b in zip(sweep, sweep[1:]))
    member = lambda X: (X[:, 0] + 1j) ** (-N - 1)
    fit = fit_RN(member, p, N, degrees[0])
    x = np.linspace(-20.0, 20.0, 401)[:, None]
    rec = float(np.abs(fit.atom(x) - member(x)).max())
    ok = decreasing and rec <= 1e-10 and fit.sup_residual <= 1e-10
    return bool(ok), {
        "degrees": list(degrees),
        "sup_residuals": sweep,
        "decreasing": decreasing,
        "member_error": rec,
        "member_sup_residual": fit.sup_residual,
    }


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    ok, rep = fn(*args, **kwargs)
    return ok, rep, time.perf_counter() - t0


def report_bytes(rep) -> bytes:
    return dumps(rep).encode()
