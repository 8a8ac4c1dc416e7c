"""Simulate the reference and sample coincidence traces and write them with plot data.

Usage: python scripts/reproduce_traces.py [OUTDIR]
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from homspec.fixtures import fixture_config
from homspec.io import write_columns, write_dip_trace
from homspec.medium import intensity_transmission
from homspec.pipeline import build_field, simulate
from homspec.units import FS, angular_detuning_to_nm

log = logging.getLogger("reproduce_traces")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("outdir", nargs="?", default="traces")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("empty", "nd_yag", "nanodisc"):
        cfg = fixture_config(name)
        F = build_field(cfg)
        trace = simulate(cfg, F)
        write_dip_trace(out / f"{name}_trace.txt", trace, {"fixture": name})
        grid = F.grid
        lam = grid.center_wavelength + angular_detuning_to_nm(grid.detunings, grid.center_wavelength,
                                                             cfg.medium.sign_convention)
        order = np.argsort(lam)
        t = intensity_transmission(cfg.medium_object(), grid)
        write_columns(out / f"{name}_spectrum.txt", ["wavelength_nm", "biphoton_intensity", "transmission"],
                      [lam[order], F.intensity[order], t[order]])
        i = int(np.argmin(trace.rates))
        log.info("%-9s dip minimum %.4f at %.1f fs", name, trace.rates[i], trace.delays[i] / FS)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    main()
