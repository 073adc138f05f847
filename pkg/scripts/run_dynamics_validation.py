#!/usr/bin/env python3
"""Measure how well the diagonal dispersive model tracks the oscillating
two-photon collective model across coupling ratios, for both the leading
dispersive generator and the full second-order commutator variant."""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from wva_lab.boson import FockSpace, coherent_state
from wva_lab.dynamics import TwoPhotonTCParams, charge_drift, effective_model_fidelity
from wva_lab.linalg import StateVector
from wva_lab.spin import SpinSpace, dicke_state

RATIOS = (0.01, 0.02, 0.05)
PERIOD_FRACTION = 0.25  # fraction of one effective period to integrate


def main():
    print("coupling ratio | min fidelity (leading) | (commutator) | infid/(g0/d)^2")
    for ratio in RATIOS:
        g_disp = 4 * ratio**2
        params = TwoPhotonTCParams(two_j=2, g0=ratio, delta_minus=1.0,
                                   fock_cutoff=6,
                                   t_final=PERIOD_FRACTION * 2 * np.pi / g_disp,
                                   dt=0.05)
        meter = coherent_state(FockSpace(6, tail_tolerance=1e-6), 0.25)
        sys0 = dicke_state(SpinSpace(2), 0.0)
        psi0 = StateVector(21, np.kron(sys0.amplitudes, meter.amplitudes))
        min_lead, trace = effective_model_fidelity(params, psi0, store_every=500)
        min_comm, _ = effective_model_fidelity(params, psi0, store_every=500,
                                               include_commutator_terms=True)
        print(f"  {ratio:12.3f} | {min_lead:20.8f} | {min_comm:12.8f} "
              f"| {(1 - min_lead) / ratio**2:8.2f}"
              f"   (charge drift {charge_drift(params, trace):.1e})")


if __name__ == "__main__":
    main()
