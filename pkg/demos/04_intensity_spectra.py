#!/usr/bin/env python3
"""Spectrum of squeezing from weak to strong driving, one and two atoms.

Three master-equation spectra:

* N=2 at X = 1.36 (intermediate): squeezing survives near the vacuum-Rabi
  sidebands, no zero-frequency peak yet.
* N=1 at X = 104: the atom saturates, most photons never see it, and a
  broad positive peak of roughly the empty-cavity width grows at zero
  frequency.
* N=2 at X = 18.1: the peak appears at ~100x less intensity than for one
  atom, fed by spontaneous-emission bursts; the negative minima sit below
  the collective coupling g sqrt(2)/2pi = 38 MHz.

Writes CSVs and an optional png into demos/output/.
"""

from pathlib import Path

import numpy as np

from cqed import SystemParams, fwhm_zero_peak
from cqed.errors import NoZeroFrequencyPeakError
from cqed.scenarios import PRESETS, _qrt_pipeline

OUT = Path(__file__).parent / "output"

CASES = ["fig7", "fig8", "fig9"]


def main() -> None:
    OUT.mkdir(exist_ok=True)
    curves = {}
    for name in CASES:
        scen = PRESETS[name]
        mom, h, S = _qrt_pipeline(scen)
        try:
            width = fwhm_zero_peak(S)
            note = f"zero-peak FWHM = {width:.2f} MHz (/kappa = {width / scen.params.kappa:.2f})"
        except NoZeroFrequencyPeakError:
            note = "no zero-frequency peak"
        print(f"{name}: N={scen.params.N} X={mom.X:.3g}  S(0)={S.S[0]:+.4f}  "
              f"min S={S.S.min():+.4f} at {S.nu[np.argmin(S.S)]:.1f} MHz  [{note}]")
        np.savetxt(OUT / f"{name}_S.csv", np.column_stack([S.nu, S.S]),
                   delimiter=",", header="nu_MHz,S", comments="")
        curves[name] = (S, mom, scen)

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.4), sharex=True)
    for ax, name in zip(axes, CASES):
        S, mom, scen = curves[name]
        ax.plot(S.nu, S.S, "k-")
        ax.axhline(0, color="gray", lw=0.5)
        ax.set_title(f"{name}: N={scen.params.N}, X={mom.X:.3g}")
        ax.set_xlabel(r"$\nu$ (MHz)")
    axes[0].set_ylabel(r"$S(0^\circ,\nu)$")
    fig.tight_layout()
    fig.savefig(OUT / "intensity_spectra.png", dpi=140)
    print(f"outputs in {OUT}/")


if __name__ == "__main__":
    main()
