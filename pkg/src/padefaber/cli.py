"""Command-line experiment runner.

    padefaber validate --config exp.json
    padefaber run --config exp.json --out results/ [--jobs 4] [--dry-run]
    padefaber report --out results/

``run`` writes one ``rows_<grid>.csv`` per sample grid, ``summary.json``,
``effective_config.json`` and, when requested, ``coefficients.csv``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from importlib import resources
from pathlib import Path


from padefaber.analysis import RowSequenceReport, fit_rate, run_row_sequence
from padefaber.config import ExperimentConfig, load_config, parse_config
from padefaber.errors import ConfigError, InsufficientDataError, PadeFaberError

LOGGER = logging.getLogger("padefaber")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_CONFORMANCE = 4

OUT_ENV = "PADEFABER_OUT"
DEFAULT_OUT = "padefaber_out"


def fmt(x) -> str:
    """17 significant digits; non-finite values as ``inf``/``nan``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _jnum(x):
    x = float(x)
    return x if math.isfinite(x) else None


def builtin_ensembles() -> list:
    root = resources.files("padefaber") / "ensembles"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def builtin_config_text(name: str) -> str:
    path = resources.files("padefaber") / "ensembles" / f"{name}.json"
    if not path.is_file():
        raise ConfigError("--ensemble", f"unknown ensemble {name!r}; available: {builtin_ensembles()}")
    return path.read_text(encoding="utf-8")


def rows_csv(report: RowSequenceReport, grid: str) -> str:
    """Per-(n, alpha) table for one grid; ``alpha`` is 1-based."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n_poles = len(report.profile.poles)
    w.writerow(["n", "alpha", "sup_err", "q_coeff_err"] + [f"pole_err_{j + 1}" for j in range(n_poles)]
               + ["sigma_min", "sigma_second", "unique"])
    for rec in report.records:
        for alpha, err in enumerate(rec.sup_err[grid]):
            w.writerow([rec.n, alpha + 1, fmt(err), fmt(rec.q_coeff_err)]
                       + [fmt(d) for d in rec.pole_dist]
                       + [fmt(rec.sigma_min), fmt(rec.sigma_second), "true" if rec.unique else "false"])
    return buf.getvalue()


def coefficients_csv(report: RowSequenceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "kind", "alpha", "index", "re", "im"])
    for rec in report.records:
        res = rec.approximant
        for j, c in enumerate(res.Q.coeffs):
            c = complex(c)
            w.writerow([rec.n, "Q", 0, j, fmt(c.real), fmt(c.imag)])
        for alpha, coef in enumerate(res.P_faber):
            for k, c in enumerate(coef):
                w.writerow([rec.n, "P_faber", alpha + 1, k, fmt(c.real), fmt(c.imag)])
    return buf.getvalue()


def _fit_json(f):
    if f is None:
        return None
    return {"rate": f.rate, "nth_root_max": f.nth_root_max, "window": list(f.window)}


def check_invariants(report: RowSequenceReport) -> list:
    """Violations that make a run fail regardless of rates."""
    out = []
    for rec in report.records:
        if not rec.defect_ok:
            out.append(f"n={rec.n}: defect window ratio {rec.defect_ratio:.3e} above tolerance")
        vals = [rec.q_coeff_err, rec.sigma_min, rec.sigma_second] + [e for v in rec.sup_err.values() for e in v]
        if not all(math.isfinite(v) for v in vals):
            out.append(f"n={rec.n}: non-finite diagnostics")
    return out


def summary_dict(cfg: ExperimentConfig, report: RowSequenceReport, violations: list) -> dict:
    prof = report.profile
    conf = report.conformance()
    return {
        "name": cfg.name,
        "m": list(report.m.m),
        "n": [report.records[0].n, report.records[-1].n],
        "quadrature": {"rho": report.quad.rho, "N": report.quad.N, "dps": report.quad.dps,
                       "engine": report.quad.kind},
        "profile": {
            "poles": [[lam.real, lam.imag, tau] for lam, tau in prof.poles],
            "levels": list(prof.levels),
            "rho_m": _jnum(prof.rho_m),
            "L": prof.L,
            "Q_true": [[complex(c).real, complex(c).imag] for c in prof.Q_true.coeffs],
        },
        "bounds": {k: {"bound_24": b.bound_24, "bound_25": b.bound_25, "superlinear": b.superlinear}
                   for k, b in report.bounds.items()},
        "fit": {"floor": report.fit_floor, "cap": report.fit_cap},
        "rates": {
            "r_Q": _fit_json(report.r_Q),
            "r_sup": {k: [_fit_json(f) for f in v] for k, v in report.r_sup.items()},
            "r_pole": [_fit_json(f) for f in report.r_pole],
        },
        "delta": {"re": report.delta.real, "im": report.delta.imag, "relative": report.delta_rel},
        "n1": report.n1,
        "unique": [r.unique for r in report.records],
        "pole_trend_ok": report.pole_trend_ok(),
        "conformance": conf,
        "violations": violations,
        "notes": report.fit_notes,
        "complete": True,
    }


def _conformance_failed(conf: dict) -> bool:
    if not conf.get("applicable"):
        return False
    for key, val in conf.items():
        if key == "applicable":
            continue
        vals = val if isinstance(val, list) else [val]
        if any(v is False for v in vals):
            return True
    return False


def resolve_out(cli_out, cfg: ExperimentConfig) -> Path:
    return Path(cli_out or cfg.data["output"]["dir"] or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def plan_text(cfg: ExperimentConfig, out: Path) -> str:
    F = cfg.function()
    q = cfg.quadrature().resolve(F)
    lines = [
        f"experiment {cfg.name}",
        f"  geometry   {cfg.data['geometry']}",
        f"  components {F.d}, poles {[(complex(l), t) for l, t in F.vector_poles()]}",
        f"  m          {cfg.data['m']}",
        f"  n          {cfg.data['n_start']}..{cfg.data['n_end'] if cfg.data['n_end'] is not None else 'auto (cap %d)' % cfg.data['n_cap']}",
        f"  quadrature rho={q.rho:.6g} N={q.N} dps={q.dps} engine={q.kind}",
        f"  grids      {[g['name'] + ':' + g['kind'] for g in cfg.data['grids']]}",
        f"  output     {out}",
    ]
    return "\n".join(lines)


def execute(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> int:
    """Run the experiment and write all outputs under ``out``; returns an exit code."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "effective_config.json").write_text(cfg.to_json(), encoding="utf-8")
    F = cfg.function()
    want_coeffs = cfg.data["output"]["coefficients"]
    try:
        report = run_row_sequence(
            F, cfg.multi_index(), cfg.n_range(), cfg.grids(), cfg.quadrature(), cfg.tolerances(),
            fit_floor=cfg.data["fit"]["floor"], fit_cap=cfg.data["fit"]["cap"], jobs=jobs,
            keep_approximants=want_coeffs, n_cap=cfg.data["n_cap"],
        )
    except PadeFaberError as exc:
        LOGGER.error("run aborted: %s", exc)
        partial = {"name": cfg.name, "complete": False, "error": f"{type(exc).__name__}: {exc}"}
        (out / "summary.json").write_text(json.dumps(partial, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return EXIT_INVARIANT
    for K in report.grids:
        (out / f"rows_{K.name}.csv").write_text(rows_csv(report, K.name), encoding="utf-8")
    if want_coeffs:
        (out / "coefficients.csv").write_text(coefficients_csv(report), encoding="utf-8")
    violations = check_invariants(report)
    summary = summary_dict(cfg, report, violations)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(format_summary(summary))
    if violations:
        for v in violations:
            LOGGER.error("invariant violated: %s", v)
        return EXIT_INVARIANT
    if _conformance_failed(summary["conformance"]):
        LOGGER.error("fitted rates exceed theoretical bounds: %s", summary["conformance"])
        return EXIT_CONFORMANCE
    return EXIT_OK


def _rate_str(f) -> str:
    return "n/a" if f is None else f"{f['rate']:.4f}"


def format_summary(s: dict) -> str:
    lines = [f"{s['name']}: m={s['m']} n={s['n'][0]}..{s['n'][1]} rho_m={s['profile']['rho_m']}"]
    for k, b in s["bounds"].items():
        fits = ", ".join(_rate_str(f) for f in s["rates"]["r_sup"].get(k, []))
        lines.append(f"  K={k}: r_sup=[{fits}] bound_24={b['bound_24']:.4f}")
    b25 = next(iter(s["bounds"].values()))["bound_25"] if s["bounds"] else float("nan")
    lines.append(f"  r_Q={_rate_str(s['rates']['r_Q'])} bound_25={b25:.4f}")
    lines.append(f"  |delta|/scale={s['delta']['relative']:.3e} n1={s['n1']}")
    return "\n".join(lines)


def read_rows(path: Path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def refit(out: Path, floor=None, cap=None) -> dict:
    """Re-fit rates from the CSV tables in ``out`` without recomputing."""
    floor_cap = {"floor": 1e-12, "cap": 1e-1}
    eff = out / "effective_config.json"
    if eff.exists():
        floor_cap.update(json.loads(eff.read_text(encoding="utf-8")).get("fit", {}))
    floor = floor_cap["floor"] if floor is None else floor
    cap = floor_cap["cap"] if cap is None else cap
    tables = sorted(out.glob("rows_*.csv"))
    if not tables:
        raise FileNotFoundError(f"no rows_*.csv in {out}")

    def _fit(d):
        try:
            return _fit_json(fit_rate(d, floor, cap))
        except InsufficientDataError:
            return None

    result: dict = {"r_sup": {}, "floor": floor, "cap": cap}
    for path in tables:
        rows = read_rows(path)
        grid = path.stem[len("rows_"):]
        alphas = sorted({int(r["alpha"]) for r in rows})
        result["r_sup"][grid] = [_fit({int(r["n"]): float(r["sup_err"]) for r in rows if int(r["alpha"]) == a})
                                 for a in alphas]
        if "r_Q" not in result:
            result["r_Q"] = _fit({int(r["n"]): float(r["q_coeff_err"]) for r in rows})
            pole_cols = [c for c in rows[0] if c.startswith("pole_err_")]
            result["r_pole"] = [_fit({int(r["n"]): float(r[c]) for r in rows}) for c in pole_cols]
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padefaber", description="Simultaneous Padé-Faber row-sequence experiments")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, needs_config=True):
        if needs_config:
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--config", type=Path, help="experiment config (JSON)")
            src.add_argument("--ensemble", help="built-in ensemble name")
        p.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        p.add_argument("--verbose", "-v", action="count", default=0)

    p_val = sub.add_parser("validate", help="check a config and print the effective version")
    common(p_val)
    p_run = sub.add_parser("run", help="run a row sequence")
    common(p_run)
    p_run.add_argument("--dry-run", action="store_true", help="validate and print the plan only")
    p_run.add_argument("--jobs", type=int, default=1, help="worker processes for the n sweep")
    p_rep = sub.add_parser("report", help="re-fit rates from an existing output directory")
    common(p_rep, needs_config=False)
    p_rep.add_argument("--floor", type=float, default=None)
    p_rep.add_argument("--cap", type=float, default=None)
    sub.add_parser("list", help="list built-in ensembles")
    return parser


def _load(args) -> ExperimentConfig:
    if args.ensemble:
        return parse_config(builtin_config_text(args.ensemble))
    return load_config(args.config)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * getattr(args, "verbose", 0)
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(name)s: %(message)s")

    if args.verb == "list":
        print("\n".join(builtin_ensembles()))
        return EXIT_OK
    if args.verb == "report":
        out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
        try:
            result = refit(out, args.floor, args.cap)
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(json.dumps(result, indent=2, sort_keys=True))
        return EXIT_OK
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.verb == "validate":
        sys.stdout.write(cfg.to_json())
        return EXIT_OK
    out = resolve_out(args.out, cfg)
    if args.dry_run:
        print(plan_text(cfg, out))
        return EXIT_OK
    if args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    return execute(cfg, out, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
