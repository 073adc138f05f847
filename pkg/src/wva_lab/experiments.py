"""Scaling sweeps over register size and log-log exponent fits, plus the
CSV/JSON record emission used by the CLI.

Sigma baselines, per family (recorded in every JSON header):

* linear_fixed_aw compares against an uncorrelated single probe tuned to the
  *same* weak value (the fixed-weak-value baseline), which is the comparison
  under which the collective linear strategy shows sigma ~ j.
* all other families compare against an uncorrelated probe whose per-probe
  success probability is held fixed across j (postselection angle
  BASELINE_THETA), the at-least-one-click comparison.

Everything is closed-form or deterministic dense arithmetic; two runs with
the same configuration produce byte-identical output.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sin

import numpy as np

from . import circuits, fisher
from .wva import (
    BASELINE_THETA,
    DEFAULT_ETA,
    DEFAULT_G,
    WeakValueStrategy,
    collective_success,
    sigma_advantage,
    strategy_linear_fixed_sigma,
    strategy_linear_optimal,
    strategy_near_deterministic,
    strategy_nonlinear_joint,
    strategy_uncorrelated,
    success_probability,
    weak_value,
)

FAMILIES = (
    "linear_fixed_aw",
    "linear_fixed_sigma",
    "nonlinear_joint",
    "near_deterministic",
    "uncorrelated_baseline",
)

CSV_HEADER = ("two_j,parameter,abs_weak_value,success_prob,sigma,"
              "qfi_total,fisher_ratio,prep_prob,measure_prob")

SCHEMA_VERSION = "wva-lab/scaling-records/v1"


@dataclass(frozen=True)
class ScalingRecord:
    two_j: int
    kappa_or_epsilon: float
    abs_weak_value: float
    success_prob: float
    sigma: float
    qfi_total: float
    fisher_ratio: float
    circuit_prep_prob: float | None
    circuit_measure_prob: float | None


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    points_used: int


def fmt_float(x: float) -> str:
    """12 significant digits; %g switches to scientific below 1e-4."""
    return f"{x:.12g}"


def _build_strategy(family: str, two_j: int, parameter: float, g: float,
                    eta: complex) -> WeakValueStrategy:
    if family == "linear_fixed_aw":
        return strategy_linear_optimal(two_j, parameter, g=g, eta=eta)
    if family == "linear_fixed_sigma":
        return strategy_linear_fixed_sigma(two_j, parameter, g=g, eta=eta)
    if family == "nonlinear_joint":
        return strategy_nonlinear_joint(two_j, parameter, g=g, eta=eta)
    if family == "near_deterministic":
        return strategy_near_deterministic(two_j, parameter, g=g, eta=eta)
    if family == "uncorrelated_baseline":
        return strategy_uncorrelated(parameter, g=g, eta=eta)
    raise ValueError(f"unknown strategy family {family!r}; valid: {FAMILIES}")


def _sigma_for(family: str, two_j: int, parameter: float, ps: float, a_w: float,
               baseline_theta: float) -> float:
    if family == "uncorrelated_baseline":
        coll = collective_success(ps, two_j)
        return sigma_advantage(coll.exact, two_j, ps)
    if family == "linear_fixed_aw":
        probe = strategy_linear_optimal(1, parameter)
        baseline = success_probability(probe.psi_i, probe.psi_f)
    else:
        baseline = sin(baseline_theta) ** 2
    return sigma_advantage(ps, two_j, baseline)


def _circuit_probs(family: str, strat: WeakValueStrategy, two_j: int):
    """Preparation weight and measurement probability for the strategy's
    two-component states; brute force within the register cap, closed form
    beyond it."""
    if family == "uncorrelated_baseline":
        return None, None
    j = strat.system_space.j
    if family in ("nonlinear_joint", "near_deterministic"):
        m1, m2 = 0.0, -j
    else:
        m1, m2 = j, -j
    space = strat.system_space
    alpha = strat.psi_f.amplitudes[space.index_of(m1)]
    beta = strat.psi_f.amplitudes[space.index_of(m2)]
    meter_dim = strat.meter_space.dim
    joint = _evolved_joint(strat)
    if two_j <= circuits.MAX_REGISTER_TWO_J:
        zeta_prep = circuits.reference_state(two_j, "plus_all")
        prep = circuits.prep_circuit(two_j, m1, m2, 1 / np.sqrt(2), 1 / np.sqrt(2),
                                     zeta_prep).success_prob
    else:
        prep = circuits.prep_probability_analytic(two_j, m1, m2, "plus_all")
    # the measurement register drags the meter along: keep the brute-force
    # path within the amplitude budget, fall back to the closed form beyond
    if 2 ** (2 * two_j + 1) * meter_dim <= 2**22:
        zeta_meas = circuits.reference_state(two_j, "dicke_superposition", m1, m2)
        meas = circuits.measure_circuit(two_j, joint, m1, m2, alpha, beta,
                                        zeta_meas, meter_dim).p_tilde
    else:
        meas, _ = circuits.measure_probability_analytic(
            two_j, joint, m1, m2, alpha, beta, "dicke_superposition", meter_dim)
    return prep, meas


def _evolved_joint(strat: WeakValueStrategy):
    """Exact evolved system (x) meter state of a diagonal-diagonal strategy."""
    from .linalg import StateVector

    a_diag = np.diag(strat.A.entries).real
    b_diag = np.diag(strat.B.entries).real
    block = np.outer(strat.psi_i.amplitudes, strat.phi_i.amplitudes)
    block = block * np.exp(-1j * strat.g * np.outer(a_diag, b_diag))
    return StateVector(strat.system_space.dim * strat.meter_space.dim, block.ravel())


def _one_record(family: str, two_j: int, parameter: float, g: float, eta: complex,
                baseline_theta: float, with_circuits: bool) -> ScalingRecord:
    strat = _build_strategy(family, two_j, parameter, g, eta)
    a_w = weak_value(strat.psi_i, strat.psi_f, strat.A)
    ps = success_probability(strat.psi_i, strat.psi_f)
    sigma = _sigma_for(family, two_j, parameter, ps, abs(a_w), baseline_theta)
    qfi_total = fisher.qfi_product(strat.A, strat.psi_i, strat.B, strat.phi_i)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ratio = fisher.postselected_fisher_ratio(strat, g).ratio
    prep = meas = None
    if with_circuits:
        prep, meas = _circuit_probs(family, strat, strat.system_space.two_j)
    # For the uncorrelated family two_j counts independent probes, each a
    # fresh single-qubit strategy; for collective families it is the register.
    return ScalingRecord(
        two_j=two_j,
        kappa_or_epsilon=parameter,
        abs_weak_value=abs(a_w),
        success_prob=ps,
        sigma=sigma,
        qfi_total=qfi_total,
        fisher_ratio=ratio,
        circuit_prep_prob=prep,
        circuit_measure_prob=meas,
    )


def sweep(family: str, two_j_values, parameter: float, *, g: float = DEFAULT_G,
          eta: complex = DEFAULT_ETA, baseline_theta: float = BASELINE_THETA,
          with_circuits: bool = True, max_workers: int = 1) -> list[ScalingRecord]:
    """One ScalingRecord per register size, sorted by two_j.

    Records for distinct sizes are independent; `max_workers` > 1 computes
    them on a thread pool. Output order and values are identical either way.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown strategy family {family!r}; valid: {FAMILIES}")
    sizes = sorted(set(int(v) for v in two_j_values))
    if not sizes:
        raise ValueError("need at least one two_j value")

    def make(tj):
        return _one_record(family, tj, parameter, g, eta, baseline_theta, with_circuits)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            records = list(pool.map(make, sizes))
    else:
        records = [make(tj) for tj in sizes]
    return sorted(records, key=lambda r: r.two_j)


def fit_loglog(records, x: str, y: str) -> FitResult:
    """Least squares on (log x, log y) over record fields; the slope is the
    scaling exponent."""
    xs = np.array([getattr(r, x) for r in records], dtype=float)
    ys = np.array([getattr(r, y) for r in records], dtype=float)
    if len(xs) < 4:
        raise ValueError("need at least 4 records for an exponent fit")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs strictly positive values")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - float(np.sum(resid**2)) / ss_tot))
    return FitResult(slope=float(slope), intercept=float(intercept),
                     r_squared=r2, points_used=len(xs))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    return fmt_float(float(value))


def records_to_csv(records, fits: dict | None = None) -> str:
    """CSV per the published schema; fit summaries go into trailing comment
    lines so the record table stays machine-clean."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            str(r.two_j),
            fmt_float(r.kappa_or_epsilon),
            fmt_float(r.abs_weak_value),
            fmt_float(r.success_prob),
            fmt_float(r.sigma),
            fmt_float(r.qfi_total),
            fmt_float(r.fisher_ratio),
            _cell(r.circuit_prep_prob),
            _cell(r.circuit_measure_prob),
        ]))
    if fits:
        for name, fit in fits.items():
            lines.append(f"# fit {name}: slope={fmt_float(fit.slope)} "
                         f"intercept={fmt_float(fit.intercept)} "
                         f"r_squared={fmt_float(fit.r_squared)} "
                         f"points={fit.points_used}")
    return "\n".join(lines) + "\n"


def _round12(value):
    if value is None:
        return None
    return float(fmt_float(float(value)))


def record_to_dict(r: ScalingRecord) -> dict:
    return {
        "two_j": r.two_j,
        "parameter": _round12(r.kappa_or_epsilon),
        "abs_weak_value": _round12(r.abs_weak_value),
        "success_prob": _round12(r.success_prob),
        "sigma": _round12(r.sigma),
        "qfi_total": _round12(r.qfi_total),
        "fisher_ratio": _round12(r.fisher_ratio),
        "prep_prob": _round12(r.circuit_prep_prob),
        "measure_prob": _round12(r.circuit_measure_prob),
    }


def records_to_json(family: str, parameter: float, records,
                    fits: dict | None = None) -> str:
    doc = {
        "schema": SCHEMA_VERSION,
        "family": family,
        "parameter": _round12(parameter),
        "sigma_baseline": ("fixed_weak_value" if family == "linear_fixed_aw"
                           else "fixed_per_probe_success"),
        "records": [record_to_dict(r) for r in records],
    }
    if fits:
        doc["fits"] = {
            name: {
                "slope": _round12(fit.slope),
                "intercept": _round12(fit.intercept),
                "r_squared": _round12(fit.r_squared),
                "points_used": fit.points_used,
            }
            for name, fit in fits.items()
        }
    return json.dumps(doc, indent=2) + "\n"
