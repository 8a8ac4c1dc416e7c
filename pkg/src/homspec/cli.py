"""Command-line front end.

    homspec simulate CONFIG [-o TRACE] [--plot-data FILE]
    homspec synth CONFIG [-o COUNTS] [--seed N]
    homspec fit CONFIG DATA [-o REPORT] [--trace FILE]
    homspec analyze-spectrum CONFIG SPECTRUM [-o REPORT] [--filter FILE]

Exit codes: 0 success, 2 config error, 3 data error, 4 fit did not converge.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .config import ConfigError, load_config
from .errors import CalibrationError, DomainError, InvalidArgument, UndefinedStatistic
from .io import (DataError, line_report, read_columns, read_count_trace, read_dip_trace, read_spectrum,
                 write_columns, write_count_trace, write_dip_trace, write_json)
from .medium import intensity_transmission
from .units import angular_detuning_to_nm

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NOCONV = 0, 2, 3, 4

log = logging.getLogger("homspec")


def _out(cfg, cli_value, cfg_value, default):
    if cli_value is not None:
        return Path(cli_value)
    if cfg_value is not None:
        return cfg.resolve(cfg_value)
    return Path(default)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    F = pipeline.build_field(cfg)
    trace = pipeline.simulate(cfg, F)
    out = _out(cfg, args.output, cfg.io.output, "trace.txt")
    write_dip_trace(out, trace, {"visibility": cfg.engine.visibility, "medium": cfg.medium.kind,
                                 "config": args.config})
    if args.plot_data or cfg.io.plot_data:
        grid = F.grid
        lam = grid.center_wavelength + angular_detuning_to_nm(grid.detunings, grid.center_wavelength,
                                                             cfg.medium.sign_convention)
        t = intensity_transmission(cfg.medium_object(), grid)
        order = np.argsort(lam)
        write_columns(_out(cfg, args.plot_data, cfg.io.plot_data, "plot.txt"),
                      ["wavelength_nm", "biphoton_intensity", "transmission"],
                      [lam[order], F.intensity[order], t[order]])
    log.info("wrote %s (%d delays, min rate %.4f)", out, trace.delays.size, trace.rates.min())
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    counts, meta = pipeline.synthesize(cfg, args.seed)
    out = _out(cfg, args.output, cfg.io.data, "counts.txt")
    write_count_trace(out, counts, meta)
    log.info("wrote %s (seed %s, counts %s)", out, meta["seed"], meta["observed_counts_range"])
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = load_config(args.config)
    data_path = Path(args.data) if args.data else cfg.resolve(cfg.io.data)
    if data_path is None:
        raise ConfigError("no data file given")
    names, _, _ = read_columns(data_path)
    if len(names) > 1 and names[1].lower() == "rate":
        data = read_dip_trace(data_path)
    else:
        data = read_count_trace(data_path, args.delay_unit or cfg.io.delay_unit,
                                cfg.io.stage_to_delay_fs_per_um, cfg.synth.acquisition_s)
    result = pipeline.fit(cfg, data)
    report = pipeline.fit_report(result, cfg)
    report["data"] = str(data_path)
    out = _out(cfg, args.output, None, "fit_report.json")
    write_json(out, report)
    trace_out = args.trace or (str(out.with_suffix("")) + "_bestfit.txt")
    write_dip_trace(trace_out, result.best_fit, {"r_squared": f"{result.r_squared:.6f}"})
    t2 = ", ".join(f"{v:.1f}" for v in result.t2_fs())
    log.info("R^2 = %.4f, T2 = [%s] fs, converged=%s", result.r_squared, t2, result.converged)
    return EXIT_OK if result.converged else EXIT_NOCONV


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    spectrum = read_spectrum(args.spectrum)
    filt_path = args.filter or cfg.resolve(cfg.io.filter_spectrum)
    filt = read_spectrum(filt_path) if filt_path else None
    lines = pipeline.analyze_spectrum(cfg, spectrum, filt)
    out = _out(cfg, args.output, None, "lines.json")
    write_json(out, {"center_wavelength_nm": cfg.source.center_wavelength_nm,
                     "lines": line_report(lines, cfg.source.center_wavelength_nm),
                     "config": cfg.to_dict()})
    log.info("found %d line(s)", len(lines))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homspec", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write the model coincidence trace")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.add_argument("--plot-data", help="also write the medium transmission on the spectral grid")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("synth", help="write Poisson-sampled coincidence counts")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("fit", help="fit a count trace and report T2 with uncertainties")
    s.add_argument("config")
    s.add_argument("data", nargs="?")
    s.add_argument("-o", "--output")
    s.add_argument("--trace", help="best-fit trace output")
    s.add_argument("--delay-unit", choices=["fs", "stage_um"])
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("analyze-spectrum", help="extract line parameters from a transmission spectrum")
    s.add_argument("config")
    s.add_argument("spectrum")
    s.add_argument("-o", "--output")
    s.add_argument("--filter", help="filter transmission to normalize by")
    s.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DomainError, UndefinedStatistic) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidArgument, CalibrationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
