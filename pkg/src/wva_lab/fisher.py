"""Quantum Fisher information accounting: total information carried by the
joint pre-measurement state and the share retained by the postselected meter.

The postselected information I'(g) is defined here as the postselection
probability times the pure-state QFI of the kicked-meter family in g,
computed by central finite differences on the exact postselected state. Only
this probability-weighted reading reproduces the one-half information ratio
of the collective nonlinear strategy in the small-kappa, large-j regime
(P_s * 4 A_w^2 |eta|^2 over 2 j^4 |eta|^2 -> 1/2 with A_w -> j/(2 sqrt(kappa))
and P_s -> kappa j^2). The unweighted meter QFI is emitted alongside so the
other reading can be inspected.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import Operator, StateVector, expectation
from .spin import variance
from .wva import WeakValueStrategy, postselect, with_coupling


@dataclass(frozen=True)
class FisherReport:
    qfi_total: float
    qfi_postselected: float
    qfi_meter_unweighted: float
    success_prob: float
    ratio: float
    ratio_prediction: float
    small_eta_prediction: float


def qfi_pure_generator(H: Operator, psi: StateVector) -> float:
    """QFI of the family exp(-i g H)|psi>: 4 Var(H)."""
    if not H.hermitian:
        raise ValueError("generator must be Hermitian")
    return 4.0 * variance(H, psi)


def qfi_product(A: Operator, psi: StateVector, B: Operator, phi: StateVector) -> float:
    """QFI of exp(-i g A (x) B) on a product state, without assembling the
    joint operator: 4 [<A^2><B^2> - (<A><B>)^2]."""
    a1 = expectation(A, psi).real
    b1 = expectation(B, phi).real
    a2 = float(np.real(np.vdot(A.entries @ psi.amplitudes, A.entries @ psi.amplitudes)))
    b2 = float(np.real(np.vdot(B.entries @ phi.amplitudes, B.entries @ phi.amplitudes)))
    return 4.0 * (a2 * b2 - (a1 * b1) ** 2)


def qfi_nonlinear_coherent(two_j: int, eta: complex) -> tuple[float, float]:
    """Closed-form QFI for the nonlinear strategy's initial product state
    (equal |j,0>/|j,-j> superposition, coherent meter).

    Returns (exact, small-eta approximation 2 j^4 |eta|^2).
    """
    if two_j % 2 != 0:
        raise ValueError("nonlinear strategy requires integer j (even two_j)")
    j = two_j / 2.0
    ae = abs(eta) ** 2
    exact = 4.0 * (0.5 * (j**4 + 2 * j**3 + 2 * j**2) * (ae**2 + ae)
                   - 0.25 * (j**4 + 4 * j**3 + 4 * j**2) * ae**2)
    approx = 2.0 * j**4 * ae
    return exact, approx


def qfi_from_family(family: Callable[[float], StateVector], g: float, step: float,
                    richardson: bool = True) -> float:
    """Pure-state QFI of a normalized state family by central differences,
    optionally Richardson-extrapolated once (step and step/2)."""

    def estimate(h: float) -> float:
        fp = family(g + h).amplitudes
        fm = family(g - h).amplitudes
        f0 = family(g).amplitudes
        d = (fp - fm) / (2.0 * h)
        return 4.0 * (float(np.real(np.vdot(d, d))) - abs(np.vdot(d, f0)) ** 2)

    if not richardson:
        return estimate(step)
    coarse = estimate(step)
    fine = estimate(step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def postselected_fisher_ratio(strategy: WeakValueStrategy, g: float) -> FisherReport:
    """Fisher accounting for one strategy at impulse area g.

    qfi_total is the joint-state QFI (product form, exact); qfi_postselected
    is P_s(g) times the kicked-meter family QFI at g (finite differences,
    step 1e-6 * max(1, 1/|A_w|), Richardson once). The reported prediction is
    the first-order expectation (1 - |eta g A_w|^2) / 2.
    """
    a_w = strategy.weak_value()
    eta_abs = float(np.sqrt(max(expectation(strategy.B, strategy.phi_i).real, 0.0)))
    kick_scale = eta_abs * g * abs(a_w)
    if kick_scale > 0.1:
        warnings.warn(f"|eta g A_w| ~ {kick_scale:.3g} above 0.1; "
                      "outside the weak-kick regime", stacklevel=2)

    total = qfi_product(strategy.A, strategy.psi_i, strategy.B, strategy.phi_i)

    def kicked(gv: float) -> StateVector:
        return postselect(with_coupling(strategy, gv)).kicked_meter_exact

    step = 1e-6 * max(1.0, 1.0 / abs(a_w))
    meter_qfi = qfi_from_family(kicked, g, step)
    ps = postselect(with_coupling(strategy, g)).success_prob_exact
    weighted = ps * meter_qfi
    ratio = weighted / total if total > 0 else float("inf")

    prediction = 0.5 * (1.0 - kick_scale**2)
    j = strategy.system_space.j
    small_eta = 2.0 * j**4 * eta_abs**2
    return FisherReport(
        qfi_total=total,
        qfi_postselected=weighted,
        qfi_meter_unweighted=meter_qfi,
        success_prob=ps,
        ratio=ratio,
        ratio_prediction=prediction,
        small_eta_prediction=small_eta,
    )
