"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py``.
"""

import contextlib
import io
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import toeplitz_pade_denominator
from padefaber.analysis import run_row_sequence
from padefaber.cli import builtin_config_text, builtin_ensembles, execute
from padefaber.config import parse_config
from padefaber.faber import estimate_rho0, faber_basis, faber_coefficients, faber_values, level_curve_nodes_dd
from padefaber.functions import VectorFunctionSpec, simple_poles
from padefaber.geometry import disk, ellipse, segment
from padefaber.simpade import CoefficientTable, MultiIndex, Quadrature, pole_profile, simultaneous_pade_faber

ACCEPT_GEOMETRIES = {
    "disk": disk(0.5 + 0.2j, 1.5),
    "segment": segment(),
    "ellipse": ellipse(0.1, 0.4, 1.0, 2.0),
}


def _ensemble_report(name, jobs=1):
    cfg = parse_config(builtin_config_text(name))
    d = cfg.data
    return run_row_sequence(cfg.function(), cfg.multi_index(), cfg.n_range(), cfg.grids(), cfg.quadrature(),
                            cfg.tolerances(), fit_floor=d["fit"]["floor"], fit_cap=d["fit"]["cap"], jobs=jobs)


def criterion_1():
    """Biorthogonality of the Faber basis under the quadrature, j, n <= 32."""
    t0 = time.perf_counter()
    worst = {}
    for name, g in ACCEPT_GEOMETRIES.items():
        c = faber_coefficients(lambda t: faber_values(g, t, 32), g, 32, 2.0, 4096, dps=30)
        vals = np.vectorize(complex)(c.values)
        worst[name] = float(np.max(np.abs(vals - np.eye(33))))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) < 1e-9 and elapsed < 10
    return ok, f"max err {max(worst.values()):.2e} ({', '.join(f'{k} {v:.1e}' for k, v in worst.items())}), {elapsed:.1f} s"


def _cauchy_power_coefficients_dd(g, n_max, rho=2.0, N=4096):
    """Monomial coefficients of every Phi_n, n <= n_max, from the Cauchy integral in double-double.

    Expanding 1/(t - z) about z = 0 gives
    [z^j] Phi_n = (1/2 pi i) int_{Gamma_rho} Phi(t)^n t^{-(j+1)} dt.
    """
    a, _, b = (complex(x) for x in g.laurent)
    t, w = level_curve_nodes_dd(g, rho, N)
    dt = w * a - (1 / w) * b if b != 0 else w * a  # psi'(w) w
    tinv = 1 / t
    out, wn = [], w**0
    for n in range(n_max + 1):
        row, tp = [], tinv * dt
        for _ in range(n + 1):
            row.append((wn * tp).sum().to_complex() / N)
            tp = tp * tinv
        out.append(np.array(row))
        wn = wn * w
    return out


def criterion_2():
    """Recurrence coefficients against the contour-integral definition, n <= 20."""
    worst = worst_rel = 0.0
    for g in ACCEPT_GEOMETRIES.values():
        B = faber_basis(g, 20)
        for n, ref in enumerate(_cauchy_power_coefficients_dd(g, 20)):
            got = np.pad(B[n].coeffs, (0, n + 1 - len(B[n].coeffs)))
            err = float(np.max(np.abs(got - ref)))
            worst = max(worst, err)
            worst_rel = max(worst_rel, err / float(np.max(np.abs(ref))))
    return worst < 1e-9, f"max coefficient err {worst:.2e} (relative {worst_rel:.1e})"


def criterion_3():
    """Exact recovery on the disk for n = 2..20."""
    F = VectorFunctionSpec((simple_poles(2), simple_poles(3)), disk())
    m = MultiIndex((1, 1))
    prof = pole_profile(F, m)
    target = np.convolve([1, -1 / 2], [1, -1 / 3])
    q_err = res_err = 0.0
    unique = True
    for n in range(2, 21):
        res = simultaneous_pade_faber(F, m, n, Quadrature(), profile=prof)
        q_err = max(q_err, float(np.max(np.abs(res.Q.coeffs - target))))
        res_err = max(res_err, max(float(np.max(np.abs(res.window_residuals(a)))) for a in range(2)))
        unique &= bool(res.unique)
    return q_err < 1e-10 and res_err < 1e-10 and unique, f"Q err {q_err:.1e}, window residual {res_err:.1e}, unique {unique}"


def _decades(errs):
    vals = [e for e in errs if np.isfinite(e)]
    return np.log10(vals[0] / max(min(vals), 1e-300))


def criterion_4():
    """Rate conformance for ensemble D1 (disk)."""
    t0 = time.perf_counter()
    rep = _ensemble_report("D1")
    elapsed = time.perf_counter() - t0
    r_q = rep.r_Q.rate
    r_sup = [f.rate for f in rep.r_sup["E"]]
    b = rep.bounds["E"]
    drops = [_decades(list(rep.q_errors().values()))] + [_decades(list(rep.sup_errors("E", a).values())) for a in range(2)]
    ok = r_q <= 0.55 and max(r_sup) <= 0.20 and min(drops) >= 6 and elapsed < 60
    return ok, (f"r_Q {r_q:.4f} (bound {b.bound_25:.4f}), r_sup {', '.join(f'{r:.4f}' for r in r_sup)} "
                f"(bound {b.bound_24:.4f}), min drop {min(drops):.1f} decades, {elapsed:.1f} s")


def criterion_5():
    """Rate conformance for ensemble S1 (segment)."""
    rep = _ensemble_report("S1")
    r_q = rep.r_Q.rate
    fits = rep.r_sup["E"]
    present = [f.rate for f in fits if f is not None]
    b = rep.bounds["E"]
    ok = r_q <= 0.55 and bool(present) and max(present) <= 0.30
    shown = ", ".join("exact" if f is None else f"{f.rate:.4f}" for f in fits)
    return ok, f"r_Q {r_q:.4f} (bound {b.bound_25:.4f}), r_sup {shown} (bound {b.bound_24:.4f})"


def criterion_6():
    """Scalar reduction against a Toeplitz Pade oracle, n = 4..24."""
    F = VectorFunctionSpec((simple_poles(2, 6),), disk())
    m = MultiIndex((2,))
    quad = Quadrature(dps=30).resolve(F)
    table = CoefficientTable(F, quad, 2, 24 + 8)
    prof = pole_profile(F, m)
    worst = 0.0
    for n in range(4, 25):
        oracle = np.array([float(v) for v in toeplitz_pade_denominator([2, 6], n, 2)])
        res = simultaneous_pade_faber(F, m, n, quad, profile=prof, table=table)
        got = res.Q.coeffs / res.Q.coeffs[0]
        worst = max(worst, float(np.max(np.abs(got - oracle))))
    return worst < 1e-8, f"max denominator err {worst:.2e} (engine {quad.kind})"


def criterion_7():
    """Degeneracy detection and the polewise independence determinant."""
    deg = _ensemble_report("degenerate")
    d1 = _ensemble_report("D1")
    any_unique = any(r.unique for r in deg.records)
    ok = not any_unique and deg.delta_rel < 1e-8 and d1.delta_rel > 1e-3
    return ok, f"degenerate unique {any_unique}, |Delta| rel {deg.delta_rel:.1e}; D1 |Delta| rel {d1.delta_rel:.3f}"


def criterion_8():
    """Root-test estimate of rho_0 for 1/(z - 1.25) over [-1, 1]."""
    c = faber_coefficients(lambda t: 1 / (t - 1.25), segment(), 30, 1.4, 4096)
    est = estimate_rho0(c, (5, 25))
    return abs(est - 2.0) <= 0.1, f"estimate {est:.6f}"


def criterion_9(tmp_root: Path):
    """Re-running every ensemble yields byte-identical CSV output."""
    mismatched = []
    for name in builtin_ensembles():
        cfg = parse_config(builtin_config_text(name))
        outs = [tmp_root / f"{name}_{k}" for k in range(2)]
        for out in outs:
            with contextlib.redirect_stdout(io.StringIO()):
                execute(cfg, out)
        for csv in sorted(outs[0].glob("*.csv")):
            if csv.read_bytes() != (outs[1] / csv.name).read_bytes():
                mismatched.append(f"{name}/{csv.name}")
    n = len(builtin_ensembles())
    return not mismatched, f"{n} ensembles, mismatches: {mismatched or 'none'}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def _record(k, ok, detail, log):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    log.append(line)
    return line


@pytest.mark.parametrize("k", range(1, 10))
def test_criterion(k, acceptance_log, tmp_path, capsys):
    fn = CRITERIA[k - 1]
    ok, detail = fn(tmp_path) if k == 9 else fn()
    with capsys.disabled():
        line = _record(k, ok, detail, acceptance_log)
    assert ok, line


if __name__ == "__main__":
    import sys
    import tempfile

    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for k, fn in enumerate(CRITERIA, start=1):
            ok, detail = fn(Path(tmp)) if k == 9 else fn()
            _record(k, ok, detail, [])
            failures += not ok
    sys.exit(1 if failures else 0)
