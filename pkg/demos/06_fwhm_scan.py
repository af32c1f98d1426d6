#!/usr/bin/env python3
"""Width of the zero-frequency peak against drive strength.

For one atom the peak width tracks the cavity decay rate; for two atoms it
tracks the spontaneous emission rate instead — the curves for three
different gamma collapse onto each other once the width is normalized by
gamma, the signature that spontaneous emission feeds the incoherent peak.

Runs the fig12/fig13 scan presets through the scenario runner (a few
minutes of master-equation spectra) and plots normalized widths.
"""

import json
from pathlib import Path

from cqed.scenarios import PRESETS, run

OUT = Path(__file__).parent / "output"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for name in ("fig12", "fig13"):
        print(f"running {name} scan ...")
        man = run(PRESETS[name], OUT, force=True)
        print(json.dumps(man["fwhm_MHz"], indent=2))

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        import numpy as np
    except ImportError:
        return
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.8, 3.6))
    d12 = np.loadtxt(OUT / "fig12_gamma3.csv", delimiter=",", skiprows=1)
    ax1.plot(d12[:, 0], d12[:, 2], "ko-")
    ax1.set_xlabel(r"$\epsilon/\kappa$")
    ax1.set_ylabel(r"FWHM$/\kappa$")
    ax1.set_title("one atom")
    for gam, marker in ((0.5, "o"), (1.0, "^"), (3.0, "x")):
        d = np.loadtxt(OUT / f"fig13_gamma{gam:g}.csv", delimiter=",", skiprows=1)
        ax2.plot(d[:, 0], d[:, 2], marker + "-", label=rf"$\gamma/2\pi$ = {gam} MHz")
    ax2.set_xlabel(r"$\epsilon/\kappa$")
    ax2.set_ylabel(r"FWHM$/\gamma$")
    ax2.set_title("two atoms, gamma-normalized")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(OUT / "fwhm_scans.png", dpi=140)
    print(f"outputs in {OUT}/")


if __name__ == "__main__":
    main()
