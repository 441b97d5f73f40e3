"""Command-line front end.

Subcommands dispatch to the computation modules and emit CSV data files
plus one-line JSON summaries on stdout.  Output files are written via a
temporary file and atomic rename, so a failed run never leaves partial
data behind.  Exit codes: 0 success, 2 configuration error, 3 numeric or
domain error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import analysis, geometry, interference, materials
from .config import RunConfig, load_config
from .errors import ConfigError, DegenerateParametersError
from .interference import AnalyzerDelayConfig, optimal_delays

CONFIG_ENV_VAR = "SPDC_CASCADE_CONFIG"


def _write_atomic(path: str, text: str):
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _summary(record: dict) -> str:
    return json.dumps(record, sort_keys=True)


def _auto_delays(cfg: RunConfig):
    params = cfg.interference_params()
    return optimal_delays(params.times), params


def cmd_indices(cfg: RunConfig, args) -> int:
    lines = ["lambda_nm,n_o,n_e,n_g_o,n_g_e"]
    for lam in args.wavelengths:
        n_o = materials.index_ordinary(cfg.model, lam)
        n_e = materials.index_principal_e(cfg.model, lam)
        ng_o = materials.group_index(cfg.model, lam)
        ng_e = materials.group_index(cfg.model, lam, math.pi / 2.0)
        lines.append(f"{lam:.6g},{n_o:.6f},{n_e:.6f},{ng_o:.6f},{ng_e:.6f}")
    table = "\n".join(lines) + "\n"
    sys.stdout.write(table)
    if args.out:
        _write_atomic(args.out, table)
    return 0


def cmd_emission_map(cfg: RunConfig, args) -> int:
    if not cfg.cascade:
        raise ConfigError("emission map requires cascade: set [crystal] cascade = true")
    opts = cfg.emission_map
    if opts["phi_points"] < 64:
        raise ConfigError("[emission_map] phi_points must be at least 64")
    phi_grid = geometry.default_phi_grid(opts["phi_points"])
    base = geometry.emission_time_map(cfg.crystal1, cfg.crystal2, cfg.pump, {}, phi_grid)
    delays = {
        "1e": opts["delay_1e_fs"],
        "2e": opts["delay_2e_fs"],
        "1o": opts["delay_1o_fs"],
        "2o": opts["delay_2o_fs"],
    }
    if delays["1e"] is None or delays["2e"] is None:
        auto = geometry.map_flattening_delays(base)
        if delays["1e"] is None:
            delays["1e"] = auto["1e"]
        if delays["2e"] is None:
            delays["2e"] = auto["2e"]
    emission_map = base.with_delays(delays)
    _write_atomic(args.out, emission_map.to_csv())
    mismatch = geometry.pairing_mismatch(emission_map)
    beams = geometry.BeamSelection(cfg.beam_phi_a, cfg.beam_phi_b)
    at_a = geometry.mismatch_at_azimuth(emission_map, beams.phi_a)
    at_b = geometry.mismatch_at_azimuth(emission_map, beams.phi_b)
    print(_summary({
        "pairing_mismatch_fs": mismatch,
        "beam_a_mismatch_fs": max(at_a["1e_2o"], at_a["1o_2e"]),
        "beam_b_mismatch_fs": max(at_b["1e_2o"], at_b["1o_2e"]),
        "delay_1e_fs": delays["1e"],
        "delay_2e_fs": delays["2e"],
        "phi_points": opts["phi_points"],
    }))
    return 0


def cmd_scan(cfg: RunConfig, args) -> int:
    opts = cfg.scan
    params = cfg.interference_params()
    tau_a_opt, tau_b_opt = optimal_delays(params.times)
    tau_a = opts["tau_a_fs"] if opts["tau_a_fs"] is not None else tau_a_opt
    center = opts["center_fs"] if opts["center_fs"] is not None else tau_b_opt
    series = analysis.delay_scan(
        params,
        AnalyzerDelayConfig(
            theta_a=math.radians(opts["theta_a_deg"]),
            theta_b=math.radians(opts["theta_b_deg"]),
            tau_a=tau_a,
            tau_b=0.0,
        ),
        center - opts["halfwidth_fs"],
        center + opts["halfwidth_fs"],
        opts["step_fs"],
    )
    _write_atomic(args.out, series.to_csv())
    try:
        spacing = analysis.measure_fringe_spacing(series)
    except ValueError:
        spacing = None
    print(_summary({
        "visibility": analysis.extract_visibility(series),
        "fringe_spacing_fs": spacing,
        "fringe_period_fs": interference.fringe_period(params),
        "tau_a_fs": tau_a,
        "tau_b_fs": center,
    }))
    return 0


def cmd_visibility_curve(cfg: RunConfig, args) -> int:
    opts = cfg.visibility_curve
    params = cfg.interference_params()
    tau_a_opt, tau_b_opt = optimal_delays(params.times)
    tau_a = opts["tau_a_fs"] if opts["tau_a_fs"] is not None else tau_a_opt
    lo = opts["tau_b_min_fs"] if opts["tau_b_min_fs"] is not None else tau_b_opt - 300.0
    hi = opts["tau_b_max_fs"] if opts["tau_b_max_fs"] is not None else tau_b_opt + 300.0
    if hi <= lo:
        raise ConfigError("[visibility_curve] needs tau_b_max_fs > tau_b_min_fs")
    grid = np.arange(lo, hi + 0.5 * opts["step_fs"], opts["step_fs"])
    series = analysis.visibility_curve(params, tau_a, grid, method=opts["method"])
    _write_atomic(args.out, series.to_csv())
    peak = int(np.argmax(series.rates))
    print(_summary({
        "peak_tau_b_fs": float(series.xs[peak]),
        "peak_visibility": float(series.rates[peak]),
        "tau_a_fs": tau_a,
    }))
    return 0


def cmd_polarization(cfg: RunConfig, args) -> int:
    opts = cfg.polarization
    params = cfg.interference_params()
    if opts["tau_a_fs"] is None or opts["tau_b_fs"] is None:
        locked_a, locked_b = interference.fringe_locked_delays(params)
        tau_a = opts["tau_a_fs"] if opts["tau_a_fs"] is not None else locked_a
        tau_b = opts["tau_b_fs"] if opts["tau_b_fs"] is not None else locked_b
    else:
        tau_a, tau_b = opts["tau_a_fs"], opts["tau_b_fs"]
    series = analysis.polarization_scan(
        params,
        tau_a,
        tau_b,
        math.radians(opts["theta_a_deg"]),
        math.radians(opts["theta_b_start_deg"]),
        math.radians(opts["theta_b_stop_deg"]),
        math.radians(opts["step_deg"]),
    )
    _write_atomic(args.out, series.to_csv())
    print(_summary({
        "visibility": analysis.extract_visibility(series),
        "fringe_period_fs": interference.fringe_period(params),
        "theta_a_rad": math.radians(opts["theta_a_deg"]),
        "tau_a_fs": tau_a,
        "tau_b_fs": tau_b,
    }))
    return 0


def cmd_optimize(cfg: RunConfig, args) -> int:
    params = cfg.interference_params()
    tau_a, tau_b = optimal_delays(params.times)
    try:
        numeric = analysis.optimize_delays_numeric(
            params, ((tau_a - 50.0, tau_a + 50.0), (tau_b - 50.0, tau_b + 50.0))
        )
        numeric_record = {
            "numeric_tau_a_fs": numeric.tau_a,
            "numeric_tau_b_fs": numeric.tau_b,
            "numeric_agrees_closed_form": bool(
                abs(numeric.tau_a - tau_a) <= 0.5 and abs(numeric.tau_b - tau_b) <= 0.5
            ),
            "envelope_value": numeric.envelope_value,
        }
    except DegenerateParametersError:
        # closed form is still defined (no compensation needed when all
        # propagation times coincide) but the envelope model is singular
        numeric_record = {
            "numeric_tau_a_fs": None,
            "numeric_tau_b_fs": None,
            "numeric_agrees_closed_form": None,
            "envelope_value": None,
        }
    lam_dc = cfg.pump.degenerate_nm
    record = {
        "tau_a_fs": tau_a,
        "tau_b_fs": tau_b,
        "quartz_a_mm": analysis.delay_to_quartz_thickness(materials.QUARTZ, lam_dc, tau_a),
        "quartz_b_mm": analysis.delay_to_quartz_thickness(materials.QUARTZ, lam_dc, tau_b),
        **numeric_record,
    }
    text = _summary(record)
    print(text)
    if args.out:
        _write_atomic(args.out, text + "\n")
    return 0


_COMMANDS = {
    "indices": cmd_indices,
    "emission-map": cmd_emission_map,
    "scan": cmd_scan,
    "visibility-curve": cmd_visibility_curve,
    "polarization": cmd_polarization,
    "optimize": cmd_optimize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdc-cascade",
        description="Simulation toolkit for cascaded type-II down-conversion sources",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out):
        p.add_argument("--config", help=f"configuration file (default: ${CONFIG_ENV_VAR})")
        p.add_argument("--out", required=needs_out, help="output data file")
        p.add_argument("--format", choices=["csv"], default="csv", help="output format")

    p = sub.add_parser("indices", help="tabulate refractive and group indices")
    add_common(p, needs_out=False)
    p.add_argument("wavelengths", nargs="+", type=float, metavar="NM")

    for name, help_text in [
        ("emission-map", "angle-resolved average emission times of the four photon classes"),
        ("scan", "coincidence rate versus the delay in path B"),
        ("visibility-curve", "space-time visibility versus the delay in path B"),
        ("polarization", "coincidence rate versus the angle of analyzer B"),
    ]:
        p = sub.add_parser(name, help=help_text)
        add_common(p, needs_out=True)

    p = sub.add_parser("optimize", help="compensating delays and quartz equivalents")
    add_common(p, needs_out=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if not config_path:
        print(f"error: no configuration (use --config or ${CONFIG_ENV_VAR})", file=sys.stderr)
        return 2
    try:
        cfg = load_config(config_path)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
