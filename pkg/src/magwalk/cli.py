"""Command-line front end.

Exit codes: 0 success, 1 argument or I/O error, 2 numerical failure,
3 invariant failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .analysis import band_symmetry_report, bandwidth_scan, compare_1d_2d
from .bloch import band_spectrum, butterfly, write_butterfly_csv
from .lattice import (
    ConvergentSequence, GaugeField, continued_fraction_convergents, golden_convergents,
    parse_flux,
)
from .measures import dos_measure, moment_compare, sdf_moments
from .restriction import DecouplingError, build_decoupled, restrict

log = logging.getLogger("magwalk")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_INVARIANT = 0, 1, 2, 3

DEFAULTS = {
    "flux": "3/5",
    "L": 8,
    "qmax": 12,
    "kgrid": 64,
    "theta_grid": 32,
    "tmax": 6,
    "gauge": "symmetric",
    "format": None,
    "out": None,
    "jobs": 1,
    "bins": 64,
    "convergents": 6,
    "target": None,
    "fault": None,
}
POSITIVE = ("L", "qmax", "kgrid", "theta_grid", "jobs", "bins", "convergents")


class UsageError(Exception):
    pass


def _g(x: float) -> float:
    """Round to 12 significant digits for serialisation."""
    return float(f"{x:.12g}")


def read_config(path) -> dict:
    """Parse a ``key=value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    cfg = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        cfg[key] = val
    return cfg


def _coerce(key, val):
    if val is None or key not in DEFAULTS or DEFAULTS[key] is None:
        return val
    kind = type(DEFAULTS[key])
    try:
        return kind(val)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {val!r} as {kind.__name__}") from None


def resolve(args) -> dict:
    """Merge defaults, config file and flags (flags win)."""
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    for key in POSITIVE:
        if cfg[key] <= 0:
            raise UsageError(f"{key} must be positive, got {cfg[key]}")
    if cfg["tmax"] < 0:
        raise UsageError("tmax must be >= 0")
    if cfg["format"] not in (None, "csv", "json"):
        raise UsageError(f"format must be csv or json, got {cfg['format']!r}")
    if cfg["gauge"] not in ("symmetric", "landau"):
        raise UsageError(f"gauge must be symmetric or landau, got {cfg['gauge']!r}")
    try:
        cfg["flux"] = parse_flux(str(cfg["flux"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg["subcommand"] = args.command
    return cfg


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in r))
    return "\n".join(lines) + "\n"


def _flux_dict(f):
    return {"p": f.p, "q": f.q}


# -- subcommands --------------------------------------------------------------


def cmd_butterfly(cfg) -> int:
    rows = butterfly(cfg["qmax"], cfg["kgrid"], cfg["jobs"])
    if cfg["format"] == "json":
        text = _json([{"p": p, "q": q, "phi": _g(phi), "arc_start": _g(s), "arc_end": _g(e)}
                      for p, q, phi, s, e in rows])
    else:
        text = write_butterfly_csv(rows)
    _emit(text, cfg["out"])
    return EXIT_OK


def cmd_bands(cfg) -> int:
    f = cfg["flux"]
    b = band_spectrum(f, cfg["kgrid"])
    arcs = b.arcs.arcs()
    if cfg["format"] == "csv":
        text = _csv(["p", "q", "phi", "arc_start", "arc_end"],
                    [(f.p, f.q, f.value, float(s), float(e)) for s, e in arcs])
    else:
        sym = band_symmetry_report(f, cfg["kgrid"])
        text = _json({
            "flux": _flux_dict(f), "n_k": cfg["kgrid"], "n_branches": b.n_branches,
            "measure": _g(b.measure()), "gap_count": b.arcs.gap_count(),
            "arcs": [[_g(s), _g(e)] for s, e in arcs],
            "symmetry": {"conjugation": _g(sym.conjugation), "reflection": _g(sym.reflection)},
        })
    _emit(text, cfg["out"])
    return EXIT_OK


def cmd_dos(cfg) -> int:
    f, L = cfg["flux"], cfg["L"]
    if L < 2:
        raise UsageError("dos needs L >= 2")
    w_l = restrict(build_decoupled(GaugeField(f, cfg["gauge"]), L), L)
    dos = dos_measure(w_l, L)
    h, edges = dos.histogram(cfg["bins"])
    if cfg["format"] == "csv":
        text = _csv(["eigenphase", "weight"],
                    [(float(a), float(b)) for a, b in zip(dos.eigenphases, dos.weights)])
    else:
        text = _json({
            "flux": _flux_dict(f), "L": L, "gauge": cfg["gauge"],
            "eigenphases": [_g(x) for x in dos.eigenphases],
            "moments": [{k: (_g(v) if isinstance(v, float) else v) for k, v in r.items()}
                        for r in dos.moments(cfg["tmax"]).to_records()],
            "histogram": {"edges": [_g(x) for x in edges], "mass": [_g(x) for x in h]},
            "max_multiplicity": dos.meta["max_multiplicity"],
        })
    _emit(text, cfg["out"])
    return EXIT_OK


def cmd_moments(cfg) -> int:
    f, T = cfg["flux"], cfg["tmax"]
    m = sdf_moments(f, T, cfg["gauge"])
    records = [{k: (_g(v) if isinstance(v, float) else v) for k, v in r.items()}
               for r in m.to_records()]
    if cfg["format"] == "csv":
        text = _csv(["t", "re", "im"], [(r["t"], r["re"], r["im"]) for r in records])
    else:
        text = _json({"flux": _flux_dict(f), "T": T, "moments": records})
    _emit(text, cfg["out"])
    return EXIT_OK


def cmd_compare(cfg) -> int:
    f = cfg["flux"]
    c = compare_1d_2d(f, cfg["theta_grid"], cfg["kgrid"])
    payload = {"flux": _flux_dict(f), "theta_grid": cfg["theta_grid"], "n_k": cfg["kgrid"],
               "distance": _g(c.distance), "grid_tolerance": _g(c.grid_tolerance),
               "measure_2d": _g(c.two_d.measure()), "measure_1d": _g(c.one_d.measure())}
    dos_L = cfg["L"]
    if dos_L >= 2:
        w_l = restrict(build_decoupled(GaugeField(f, cfg["gauge"]), dos_L), dos_L)
        mc = moment_compare(dos_measure(w_l, dos_L), sdf_moments(f, cfg["tmax"], cfg["gauge"]),
                           cfg["tmax"])
        payload["moment_deviation"] = [_g(x) for x in mc.deviations]
    if cfg["format"] == "csv":
        keys = ["theta_grid", "n_k", "distance", "grid_tolerance", "measure_2d", "measure_1d"]
        text = _csv(["p", "q"] + keys, [[f.p, f.q] + [payload[k] for k in keys]])
    else:
        text = _json(payload)
    _emit(text, cfg["out"])
    return EXIT_OK


def _scan_sequence(cfg) -> ConvergentSequence:
    if cfg["target"] is None:
        return golden_convergents(cfg["convergents"])
    try:
        x = float(cfg["target"])
    except ValueError:
        raise UsageError(f"target must be a number in (0, 1), got {cfg['target']!r}") from None
    return continued_fraction_convergents(x, cfg["convergents"])


def cmd_scan(cfg) -> int:
    seq = _scan_sequence(cfg)
    rows = []
    for f, meas in bandwidth_scan(seq, cfg["kgrid"]):
        rows.append((f.p, f.q, f.value, meas, band_spectrum(f, cfg["kgrid"]).arcs.gap_count()))
    if cfg["format"] == "json":
        text = _json([{"p": p, "q": q, "phi": _g(phi), "measure": _g(m), "gap_count": g}
                      for p, q, phi, m, g in rows])
    else:
        text = _csv(["p", "q", "phi", "measure", "gap_count"], rows)
    _emit(text, cfg["out"])
    return EXIT_OK


def cmd_check(cfg) -> int:
    from .checks import run_checks

    results = run_checks(fault=cfg["fault"])
    report = {"passed": all(r.passed for r in results),
              "checks": [{"name": r.name, "value": _g(r.value), "bound": r.bound,
                          "passed": r.passed} for r in results]}
    if cfg["format"] == "csv":
        text = _csv(["name", "value", "bound", "passed"],
                    [(r.name, r.value, r.bound, r.passed) for r in results])
    else:
        text = _json(report)
    _emit(text, cfg["out"])
    return EXIT_OK if report["passed"] else EXIT_INVARIANT


COMMANDS = {
    "butterfly": cmd_butterfly, "bands": cmd_bands, "dos": cmd_dos, "moments": cmd_moments,
    "compare": cmd_compare, "scan": cmd_scan, "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--flux", help="rational flux P/Q (Phi = 2 pi P/Q)")
    common.add_argument("--L", type=int, help="box half-width")
    common.add_argument("--qmax", type=int)
    common.add_argument("--kgrid", type=int, help="quasi-momentum grid size")
    common.add_argument("--theta-grid", dest="theta_grid", type=int)
    common.add_argument("--tmax", type=int, help="largest moment index")
    common.add_argument("--gauge", choices=("symmetric", "landau"))
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("--bins", type=int, help="histogram bins for dos")
    common.add_argument("--convergents", type=int, help="number of convergents for scan")
    common.add_argument("--target", help="scan convergents of this number (default golden)")
    common.add_argument("--fault", help="check: inject a fault (skip-decoupling-coin)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="magwalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "butterfly": "band arcs for all p/q with q <= qmax",
        "bands": "band arcs at one flux",
        "dos": "eigenphases, moments and histogram of the decoupled restriction",
        "moments": "exact trace moments",
        "compare": "1D versus 2D spectra and DOS versus trace moments",
        "scan": "band measure and gap count along convergents",
        "check": "run the invariant suite",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; remap to the I/O-argument code
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        log.info("%s with %s", cfg["subcommand"], {k: v for k, v in cfg.items() if v is not None})
        if cfg["subcommand"] == "butterfly" and cfg["format"] is None:
            cfg["format"] = "csv"
        return COMMANDS[cfg["subcommand"]](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DecouplingError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
