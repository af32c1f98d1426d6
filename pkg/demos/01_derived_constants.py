#!/usr/bin/env python3
"""Dimensionless characterization of the strongly coupled operating point.

The standard rate set (g, kappa, gamma)/2pi = (38.0, 8.7, 3.0) MHz puts the
system deep in the strong-coupling regime: the saturation photon number n0
is ~8e-4 (a single photon is a large perturbation) and the single-atom
cooperativity C1 is ~55 (a single atom dominates the cavity response).  The
script prints the full derived set for one and two atoms, including the
weak-field collapse constants: a photon detection multiplies the conditioned
field by alpha*beta (large and negative), a spontaneous emission by beta
(order one and positive), and both relax back at the vacuum-Rabi frequency
Omega under the envelope (kappa + gamma/2)/2.
"""

import math

from cqed import SystemParams, constants, derived_params, emission_ratio, solve


def report(params: SystemParams) -> None:
    rho, mom = solve(params, method="direct")
    dp = derived_params(params, lam=mom.lam_real, n_bar=mom.n_bar)
    wf = constants(params)
    print(f"--- N = {params.N}, g = {params.g:.4f} MHz ---")
    print(f"C1 = {dp.C1:.4f}   C = N C1 = {dp.C:.4f}   n0 = {dp.n0:.3e}")
    print(f"drive eps = {params.epsilon:.5f} MHz -> X = {mom.X:.3e} (lam = {mom.lam_real:.3e})")
    print(f"alpha = {wf.alpha:.3f}  beta = {wf.beta:.4f}  alpha*beta = {wf.alpha * wf.beta:.2f}")
    print(f"Omega/2pi = {wf.Omega_mhz:.4f} MHz   envelope rate = {wf.envelope_rate:.3f} /us")
    print(f"spontaneous/cavity emission ratio 2 N C1 = {emission_ratio(params):.3f}")
    print()


if __name__ == "__main__":
    report(SystemParams(g=38.0, kappa=8.7, gamma=3.0, epsilon=0.435184, N=1, n_max=3))
    # same collective coupling g sqrt N and the same Omega
    report(SystemParams(g=38.0 / math.sqrt(2), kappa=8.7, gamma=3.0,
                        epsilon=0.435184, N=2, n_max=3))
