import numpy as np
import pytest

from wva_lab.boson import FockSpace, coherent_state
from wva_lab.dynamics import (
    EvolutionTrace,
    TwoPhotonTCParams,
    charge_drift,
    conservation_residual,
    conserved_charge,
    effective_model_fidelity,
    effective_phases,
    evolve_effective,
    evolve_full,
    hamiltonian_full,
)
from wva_lab.linalg import StateVector, expm_i, fidelity, tensor
from wva_lab.spin import SpinSpace, collective_op, dicke_state, nonlinear_observable
from wva_lab.boson import op_number


def make_params(**kw):
    base = dict(two_j=2, g0=0.02, delta_minus=1.0, fock_cutoff=4,
                t_final=10.0, dt=0.02)
    base.update(kw)
    return TwoPhotonTCParams(**base)


def joint_state(params, m, meter_amps):
    space = SpinSpace(params.two_j)
    sys0 = dicke_state(space, m)
    meter = np.asarray(meter_amps, dtype=complex)
    meter = meter / np.linalg.norm(meter)
    return StateVector(space.dim * (params.fock_cutoff + 1),
                       np.kron(sys0.amplitudes, meter))


def basis_meter(params, n):
    amps = np.zeros(params.fock_cutoff + 1)
    amps[n] = 1.0
    return amps


# ---------------------------------------------------------------- validation


def test_params_validation():
    with pytest.raises(ValueError, match="g0/delta"):
        make_params(g0=0.6)
    with pytest.raises(ValueError, match="dt too coarse"):
        make_params(dt=0.2)
    with pytest.raises(ValueError, match="nonzero"):
        make_params(delta_minus=0.0)
    assert make_params().g_dispersive == pytest.approx(4 * 0.02**2)


# --------------------------------------------------------------- hamiltonian


def test_hamiltonian_phase_one_slice():
    p = make_params()
    t = 2 * np.pi / p.delta_minus
    h = hamiltonian_full(p, t)
    sp = SpinSpace(p.two_j)
    meter = FockSpace(p.fock_cutoff)
    jp = collective_op(sp, "jplus").matrix.entries
    from wva_lab.boson import op_annihilate

    a2 = op_annihilate(meter).entries @ op_annihilate(meter).entries
    direct = p.g0 * (np.kron(jp, a2) + np.kron(jp, a2).conj().T)
    assert np.max(np.abs(h.entries - direct)) < 1e-10


def test_hamiltonian_hermitian_at_random_times(rng):
    p = make_params()
    for t in rng.uniform(0, 50, size=5):
        h = hamiltonian_full(p, float(t)).entries
        assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_hamiltonian_matrix_element_ladder():
    # oracle: <j,m+1; n-2|H|j,m; n> = g0 sqrt(j(j+1)-m(m+1)) sqrt(n(n-1)) e^{i d t}
    p = make_params(two_j=4)
    sp = SpinSpace(4)
    nm = p.fock_cutoff + 1
    t = 0.37
    h = hamiltonian_full(p, t).entries.reshape(sp.dim, nm, sp.dim, nm)
    j = 2.0
    for m in (-2, -1, 0, 1):
        for n in (2, 3, 4):
            el = h[sp.index_of(m + 1), n - 2, sp.index_of(m), n]
            expect = (p.g0 * np.sqrt(j * (j + 1) - m * (m + 1))
                      * np.sqrt(n * (n - 1)) * np.exp(1j * p.delta_minus * t))
            assert el == pytest.approx(expect, abs=1e-12)


def test_conserved_charge_commutes():
    p = make_params(two_j=4, fock_cutoff=6)
    assert conservation_residual(p) < 1e-10


# ----------------------------------------------------------------- evolve


def test_zero_coupling_is_stationary():
    p = make_params(g0=0.0, t_final=5.0)
    psi0 = joint_state(p, 0, basis_meter(p, 2))
    trace = evolve_full(p, psi0)
    assert fidelity(StateVector.of(trace.full_states[-1].amplitudes), psi0) \
        == pytest.approx(1.0, abs=1e-12)


def test_rk4_self_convergence_fourth_order():
    p1 = make_params(g0=0.05, t_final=10.0, dt=0.02)
    p2 = make_params(g0=0.05, t_final=10.0, dt=0.01)
    p3 = make_params(g0=0.05, t_final=10.0, dt=0.005)
    psi0 = joint_state(p1, 0, basis_meter(p1, 2))
    f1 = evolve_full(p1, psi0, store_every=10**9).full_states[-1].amplitudes
    f2 = evolve_full(p2, psi0, store_every=10**9).full_states[-1].amplitudes
    f3 = evolve_full(p3, psi0, store_every=10**9).full_states[-1].amplitudes
    d12 = np.linalg.norm(f1 - f2)
    d23 = np.linalg.norm(f2 - f3)
    assert d12 < 1e-8
    order = np.log2(d12 / d23)
    assert order == pytest.approx(4.0, abs=0.5)


def test_lowest_state_vacuum_exactly_stationary():
    # both ladder terms annihilate |j,-j> (x) |0>: no dynamics at all
    p = make_params(two_j=2, t_final=6.0)
    psi0 = joint_state(p, -1, basis_meter(p, 0))
    trace = evolve_full(p, psi0)
    final = trace.full_states[-1].amplitudes
    assert np.max(np.abs(final - psi0.amplitudes)) < 1e-12


def test_highest_state_vacuum_leakage_matches_perturbation():
    # |j,j> (x) |0> couples only down; first-order amplitude (V/delta)(1-e^{idt})
    # caps the population at 4 V^2/delta^2 with V = g0 sqrt(2j) sqrt(2)
    p = make_params(two_j=2, g0=0.02, t_final=40.0, fock_cutoff=4)
    psi0 = joint_state(p, 1, basis_meter(p, 0))
    trace = evolve_full(p, psi0)
    pops = [1.0 - abs(np.vdot(psi0.amplitudes, s.amplitudes)) ** 2
            for s in trace.full_states]
    max_leak = max(pops)
    v = p.g0 * np.sqrt(2.0) * np.sqrt(2.0)
    estimate = 4 * v**2 / p.delta_minus**2
    assert estimate / 2 < max_leak < estimate * 2


def test_full_evolution_matches_two_level_closed_form():
    # oracle: at j = 1/2 the pair {|up,0>, |down,2>} is an exactly closed
    # two-level system; in the frame c_up = u e^{i d t/2}, c_down = w e^{-i d t/2}
    # the pair evolves under (d/2) sz + V sx with V = g0 sqrt(2), giving
    #   u(t) = cos(Wt/2) - i (d/W) sin(Wt/2),  w(t) = -i (2V/W) sin(Wt/2),
    # W = sqrt(d^2 + 4V^2). Checks populations AND phase conventions.
    p = TwoPhotonTCParams(two_j=1, g0=0.3, delta_minus=1.0, fock_cutoff=2,
                          t_final=9.0, dt=0.005)
    sp = SpinSpace(1)
    nm = 3
    up0 = np.kron(dicke_state(sp, 0.5).amplitudes, np.eye(nm)[0])
    dn2 = np.kron(dicke_state(sp, -0.5).amplitudes, np.eye(nm)[2])
    psi0 = StateVector(2 * nm, up0)
    trace = evolve_full(p, psi0, store_every=100)
    v = p.g0 * np.sqrt(2.0)
    omega = np.sqrt(p.delta_minus**2 + 4 * v**2)
    for t, s in zip(trace.times, trace.full_states):
        c_up = np.vdot(up0, s.amplitudes)
        c_dn = np.vdot(dn2, s.amplitudes)
        u = np.cos(omega * t / 2) - 1j * (p.delta_minus / omega) * np.sin(omega * t / 2)
        w = -1j * (2 * v / omega) * np.sin(omega * t / 2)
        assert c_up == pytest.approx(u * np.exp(1j * p.delta_minus * t / 2), abs=2e-7)
        assert c_dn == pytest.approx(w * np.exp(-1j * p.delta_minus * t / 2), abs=2e-7)


def test_rk4_derivative_consistent_with_hamiltonian(rng):
    # the stacked fast path inside the integrator must equal -i H(t) v
    p = make_params(two_j=3, fock_cutoff=3)
    from wva_lab.dynamics import _ladder_parts

    h_plus, h_minus, _ = _ladder_parts(p)
    for t in (0.0, 0.41, 2.93):
        v = rng.normal(size=p.joint_dim) + 1j * rng.normal(size=p.joint_dim)
        phase = np.exp(1j * p.delta_minus * t)
        fast = -1j * (phase * (h_plus @ v) + np.conj(phase) * (h_minus @ v))
        direct = -1j * hamiltonian_full(p, t).entries @ v
        np.testing.assert_allclose(fast, direct, atol=1e-12)


def test_norm_drift_tracked():
    p = make_params(t_final=5.0)
    psi0 = joint_state(p, 0, basis_meter(p, 1))
    trace = evolve_full(p, psi0)
    assert trace.max_norm_drift < 1e-8


# ------------------------------------------------------------ effective model


def test_effective_identity_at_zero_time():
    p = make_params()
    np.testing.assert_allclose(effective_phases(p, 0.0), 1.0)


def test_effective_single_level_phase():
    p = make_params(two_j=2, t_final=3.0)
    psi0 = joint_state(p, 0, basis_meter(p, 1))
    trace = evolve_effective(p, psi0)
    j = 1.0
    phase = np.exp(-1j * p.g_dispersive * j * (j + 1) * 1 * trace.times[-1])
    np.testing.assert_allclose(trace.effective_states[-1].amplitudes,
                               phase * psi0.amplitudes, atol=1e-12)


def test_effective_phases_match_eig_expm():
    # oracle: dense matrix exponential of the assembled diagonal generator
    p = make_params(two_j=4, fock_cutoff=3)
    sp = SpinSpace(4)
    meter = FockSpace(3)
    h = tensor(nonlinear_observable(sp), op_number(meter))
    h = type(h)(h.dim, p.g_dispersive * h.entries, hermitian=True, diagonal=True)
    t = 1.73
    u = expm_i(h, t)
    np.testing.assert_allclose(np.diag(u.entries), effective_phases(p, t), atol=1e-12)


def test_effective_populations_conserved():
    p = make_params(t_final=7.0)
    psi0 = joint_state(p, 0, [0.5, 0.5, 0.5, 0.5, 0.0])
    trace = evolve_effective(p, psi0)
    for s in trace.effective_states:
        np.testing.assert_allclose(np.abs(s.amplitudes), np.abs(psi0.amplitudes),
                                   atol=1e-12)


# ------------------------------------------------------- fidelity validation


def test_charge_conserved_along_trajectory():
    p = make_params(two_j=2, g0=0.05, t_final=50.0)
    psi0 = joint_state(p, 0, basis_meter(p, 2))
    trace = evolve_full(p, psi0, store_every=25)
    assert charge_drift(p, trace) < 1e-8


def test_fidelity_trace_structure():
    p = make_params(t_final=2.0)
    psi0 = joint_state(p, 0, basis_meter(p, 1))
    minf, trace = effective_model_fidelity(p, psi0, store_every=10)
    assert trace.fidelities[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(trace.fidelities <= 1.0 + 1e-12)
    assert np.all(trace.fidelities >= minf - 1e-12)
    assert len(trace.times) == len(trace.fidelities)
    assert len(trace.full_states) == len(trace.effective_states) == len(trace.times)


def test_fidelity_improves_as_coupling_shrinks():
    mins = []
    for ratio in (0.05, 0.02, 0.01):
        p = make_params(g0=ratio, t_final=300.0, fock_cutoff=4)
        psi0 = joint_state(p, 0, basis_meter(p, 1))
        minf, _ = effective_model_fidelity(p, psi0, store_every=10**9)
        mins.append(minf)
    assert mins[0] < mins[1] < mins[2]


def test_infidelity_quadratic_in_coupling_ratio():
    ratios = (0.01, 0.02, 0.05)
    infids = []
    for r in ratios:
        p = make_params(g0=r, t_final=400.0, fock_cutoff=4)
        psi0 = joint_state(p, 0, basis_meter(p, 1))
        minf, _ = effective_model_fidelity(p, psi0, store_every=10**9)
        infids.append(1.0 - minf)
    slope = np.polyfit(np.log(ratios), np.log(infids), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.5)


def test_zero_coupling_fidelity_is_one():
    p = make_params(g0=0.0, t_final=5.0)
    psi0 = joint_state(p, 0, basis_meter(p, 1))
    minf, _ = effective_model_fidelity(p, psi0)
    assert minf == pytest.approx(1.0, abs=1e-12)


def test_min_fidelity_exceeds_099_at_ratio_002():
    # weak coherent meter, coupling ratio 0.02: the micromotion dips stay
    # below 1e-2 even over many fast periods
    p = make_params(two_j=2, g0=0.02, fock_cutoff=4, t_final=500.0)
    meter = coherent_state(FockSpace(4, tail_tolerance=1e-6), 0.25)
    psi0 = joint_state(p, 0, meter.amplitudes)
    minf, _ = effective_model_fidelity(p, psi0, store_every=10**9)
    assert minf >= 0.99


def test_commutator_variant_differs_from_leading():
    p = make_params(two_j=2, fock_cutoff=3)
    lead = effective_phases(p, 1.0, include_commutator_terms=False)
    full = effective_phases(p, 1.0, include_commutator_terms=True)
    assert np.max(np.abs(lead - full)) > 1e-6
