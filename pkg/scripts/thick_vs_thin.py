"""Compare the thin-sample coherence time read off a transmission dip with the true T2 as the line thickens.

Usage: python scripts/thick_vs_thin.py [--t2 FS] [--detuning NM]
"""

import argparse
import logging

import numpy as np

from homspec.analysis import TransmissionSpectrum, transmission_dip_fwhm
from homspec.medium import LorentzLine, Lorentzian, intensity_transmission, thin_sample_t2_from_nm
from homspec.spectral import SpectralGrid
from homspec.units import FS, nm_to_angular_detuning

log = logging.getLogger("thick_vs_thin")
LAM0 = 815.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--t2", type=float, default=130.0, help="true coherence time in fs")
    ap.add_argument("--detuning", type=float, default=4.4, help="line detuning in nm")
    args = ap.parse_args()
    lam = np.linspace(LAM0 - 60, LAM0 + 60, 120001)
    grid = SpectralGrid(LAM0, nm_to_angular_detuning(lam - LAM0, LAM0))
    log.info("alpha_L  dip FWHM (nm)  thin T2 (fs)  true/thin")
    for alpha_l in (0.1, 0.5, 1.0, 2.0, 4.0, 7.2):
        med = Lorentzian([LorentzLine.from_fs(args.detuning, alpha_l, args.t2)])
        fwhm = transmission_dip_fwhm(TransmissionSpectrum(lam, intensity_transmission(med, grid)))
        thin = thin_sample_t2_from_nm(fwhm, LAM0) / FS
        log.info("%7.1f  %13.3f  %12.1f  %9.2f", alpha_l, fwhm, thin, args.t2 / thin)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    main()
