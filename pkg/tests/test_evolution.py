"""Schedules, Schrodinger propagation, branch phases, and purities."""

import numpy as np
import pytest

from agtsim.evolution import (
    StepConvergenceError,
    branch_phase,
    evolve,
    evolve_multiterm,
    gap_adapted_schedule,
    lagged_schedule,
    linear_schedule,
    reduced_purity,
    tabulated_schedule,
)
from agtsim.gates import X, random_state
from agtsim.paulis import controlled_term, gate_hamiltonian
from agtsim.spectral import closed_form_gap, gap_profile
from agtsim.states import (
    assemble_state,
    ket,
    matrix_state,
    mes_state,
    qubit_fragment,
    state_vector,
)


def at_pair(omega=0.5):
    """Single-gate teleportation pair on three qubits."""
    return (
        gate_hamiltonian(np.eye(2), 2, 3, omega, 3),
        gate_hamiltonian(np.eye(2), 1, 2, omega, 3),
    )


def at_states(phi):
    psi0 = assemble_state([qubit_fragment(1, phi), mes_state(2, 3)], 3)
    target = assemble_state([mes_state(1, 2), qubit_fragment(3, phi)], 3)
    return psi0, target


# -------------------------------------------------------------- schedules


def test_linear_schedule_endpoints():
    sch = linear_schedule(8.0)
    assert sch(0.0) == 0.0 and sch(8.0) == 1.0 and sch(2.0) == 0.25


def test_gap_adapted_schedule_follows_gap_square():
    profile = gap_profile(1, 0.5)
    sch = gap_adapted_schedule(profile, 10.0)
    assert abs(sch(0.0)) < 1e-12 and abs(sch(10.0) - 1.0) < 1e-9
    ts = np.array([2.0, 5.0, 8.0])
    eps = 1e-5
    rates = np.array([(sch(t + eps) - sch(t - eps)) / (2 * eps) for t in ts])
    gaps = closed_form_gap(np.array([sch(t) for t in ts]), 0.5)
    ratios = rates / gaps**2
    # the schedule is tabulated on the 0.01 grid, so the local rate is
    # piecewise constant; a few percent of slack covers that discretization
    assert np.max(np.abs(ratios / ratios[0] - 1.0)) < 5e-2


def test_gap_adapted_schedule_rejects_zero_gap():
    profile = gap_profile(1, 0.5)
    broken = type(profile)(
        profile.L, profile.omega, profile.s_grid, 0.0 * profile.gaps,
        profile.ground_energies, profile.sector_k,
    )
    with pytest.raises(ValueError):
        gap_adapted_schedule(broken, 5.0)


def test_tabulated_schedule_interpolates():
    sch = tabulated_schedule([0.0, 1.0, 4.0], [0.0, 0.9, 1.0])
    assert abs(sch(0.5) - 0.45) < 1e-12
    with pytest.raises(ValueError):
        tabulated_schedule([0.0, 1.0], [0.2, 1.0])  # s(0) != 0


def test_lagged_schedule_delays_then_catches_up():
    base = linear_schedule(10.0)
    lagged = lagged_schedule(base, 0.2)
    assert lagged(1.9) == 0.0
    assert abs(lagged(6.0) - 0.5) < 1e-12
    assert abs(lagged(10.0) - 1.0) < 1e-12
    assert lagged_schedule(base, 0.0) is base
    with pytest.raises(ValueError):
        lagged_schedule(base, 1.0)


# ------------------------------------------------------------- propagation


def test_stationary_state_is_preserved():
    _, h_fin = at_pair()
    psi0, _ = at_states(ket("0"))
    ground = assemble_state([mes_state(1, 2), qubit_fragment(3, ket("0"))], 3)
    report = evolve(h_fin, h_fin, linear_schedule(3.7), ground, target=ground)
    assert report.fidelity > 1 - 1e-9
    assert report.norm_drift < 1e-9


def test_quench_zero_time():
    h_ini, h_fin = at_pair()
    psi0, _ = at_states(ket("+"))
    report = evolve(h_ini, h_fin, linear_schedule(0.0), psi0, target=psi0)
    assert report.fidelity > 1 - 1e-12
    assert report.steps == 0


def test_short_time_limit_stays_near_start():
    h_ini, h_fin = at_pair()
    psi0, _ = at_states(ket("+"))
    report = evolve(h_ini, h_fin, linear_schedule(1e-4), psi0, target=psi0)
    assert report.fidelity > 1 - 1e-6


def test_teleportation_long_horizon(rng):
    """Slow linear sweep teleports a random qubit across the register."""
    h_ini, h_fin = at_pair()
    phi = random_state(rng)
    psi0, target = at_states(phi)
    report = evolve(h_ini, h_fin, linear_schedule(50.0), psi0, target=target)
    assert report.fidelity >= 0.99
    assert report.leakage < 0.01
    assert report.norm_drift < 1e-9


def test_convergence_order_of_stepper():
    """Halving the step cuts the deviation from a fine reference by > 3x."""
    h_ini, h_fin = at_pair()
    psi0, _ = at_states(ket("0"))
    sch = linear_schedule(20.0)
    ref = evolve(h_ini, h_fin, sch, psi0, n_steps=1 << 14).final_state.amplitudes
    errs = []
    for n_steps in (400, 800, 1600):
        fin = evolve(h_ini, h_fin, sch, psi0, n_steps=n_steps).final_state.amplitudes
        errs.append(np.linalg.norm(fin - ref))
    assert errs[0] / errs[1] >= 3.0
    assert errs[1] / errs[2] >= 3.0


def test_adiabatic_limit_monotone():
    h_ini, h_fin = at_pair()
    psi0, target = at_states(ket("0"))
    fids = [
        evolve(h_ini, h_fin, linear_schedule(T), psi0, target=target).fidelity
        for T in (5.0, 10.0, 20.0, 50.0, 100.0)
    ]
    assert all(a <= b + 1e-12 for a, b in zip(fids, fids[1:]))
    assert fids[-1] > 0.999


def test_gap_adapted_beats_linear_at_equal_time():
    h_ini, h_fin = (
        gate_hamiltonian(np.eye(2), 2, 3, 0.5, 5) + gate_hamiltonian(np.eye(2), 4, 5, 0.5, 5),
        gate_hamiltonian(np.eye(2), 1, 2, 0.5, 5) + gate_hamiltonian(np.eye(2), 3, 4, 0.5, 5),
    )
    psi0 = assemble_state([qubit_fragment(1, ket("0")), mes_state(2, 3), mes_state(4, 5)], 5)
    target = assemble_state([mes_state(1, 2), mes_state(3, 4), qubit_fragment(5, ket("0"))], 5)
    T = 15.0
    linear = evolve(h_ini, h_fin, linear_schedule(T), psi0, target=target).fidelity
    adapted = evolve(
        h_ini, h_fin, gap_adapted_schedule(gap_profile(2, 0.5), T), psi0, target=target
    ).fidelity
    assert linear < 0.99
    assert adapted > linear


def test_step_halving_unreachable_tolerance():
    h_ini, h_fin = at_pair()
    psi0, _ = at_states(ket("0"))
    with pytest.raises(StepConvergenceError):
        evolve(h_ini, h_fin, linear_schedule(10.0), psi0, tol=1e-16, max_halvings=1)


def test_multiterm_reduces_to_single_schedule():
    h_ini, h_fin = at_pair()
    psi0, target = at_states(ket("+"))
    sch = linear_schedule(12.0)
    single = evolve(h_ini, h_fin, sch, psi0, target=target)
    multi = evolve_multiterm(
        [(h_ini, lambda t: 1.0 - sch(t)), (h_fin, lambda t: sch(t))],
        psi0,
        12.0,
        target=target,
    )
    overlap = abs(np.vdot(single.final_state.amplitudes, multi.final_state.amplitudes)) ** 2
    assert overlap > 1 - 1e-9
    assert abs(single.fidelity - multi.fidelity) < 1e-6


def test_block_decomposition_of_controlled_evolution(rng):
    """Control-diagonal Hamiltonians evolve each branch independently."""
    omega = 0.5
    a0 = gate_hamiltonian(np.eye(2), 2, 3, omega, 4)
    a1 = gate_hamiltonian(X, 3, 4, omega, 4)
    b0 = gate_hamiltonian(np.eye(2), 3, 4, omega, 4)
    b1 = gate_hamiltonian(X, 2, 3, omega, 4)
    h_ini = controlled_term(a0, 1, 0) + controlled_term(a1, 1, 1)
    h_fin = controlled_term(b0, 1, 0) + controlled_term(b1, 1, 1)

    u = random_state(rng, 8)
    v = random_state(rng, 8)
    alpha, beta = 0.6, 0.8
    full0 = state_vector(np.concatenate([alpha * u, beta * v]), 4)
    sch = linear_schedule(4.0)
    full = evolve(h_ini, h_fin, sch, full0, n_steps=2000).final_state.amplitudes

    # the same bonds with the control stripped, shifted down one label
    def branch(ini3, fin3, start):
        rep = evolve(ini3, fin3, sch, state_vector(start, 3), n_steps=2000)
        return rep.final_state.amplitudes

    out0 = branch(
        gate_hamiltonian(np.eye(2), 1, 2, omega, 3),
        gate_hamiltonian(np.eye(2), 2, 3, omega, 3),
        u,
    )
    out1 = branch(
        gate_hamiltonian(X, 2, 3, omega, 3),
        gate_hamiltonian(X, 1, 2, omega, 3),
        v,
    )
    rebuilt = np.concatenate([alpha * out0, beta * out1])
    assert np.linalg.norm(full - rebuilt) < 1e-9


# ----------------------------------------------------- phases and purities


def _two_qubit_branches():
    t0 = assemble_state([qubit_fragment(1, ket("0"))], 1)
    t1 = assemble_state([qubit_fragment(1, ket("1"))], 1)
    return t0, t1


def test_branch_phase_zero():
    t0, t1 = _two_qubit_branches()
    psi = state_vector(np.array([1, 0, 0, 1]) / np.sqrt(2), 2)
    dec = branch_phase(psi, 1, t0, t1)
    assert dec.defined
    assert abs(dec.theta) < 1e-12
    assert abs(dec.p0 - 0.5) < 1e-12 and abs(dec.p1 - 0.5) < 1e-12
    assert dec.residual < 1e-12


def test_branch_phase_constructed_angle():
    t0, t1 = _two_qubit_branches()
    amps = np.array([1, 0, 0, np.exp(1j * np.pi / 3)]) / np.sqrt(2)
    dec = branch_phase(state_vector(amps, 2), 1, t0, t1)
    assert abs(dec.theta - np.pi / 3) < 1e-12


def test_branch_phase_undefined_when_branch_empty():
    t0, t1 = _two_qubit_branches()
    psi = state_vector(np.array([1, 0, 0, 0], dtype=complex), 2)
    dec = branch_phase(psi, 1, t0, t1)
    assert not dec.defined
    assert np.isnan(dec.theta)


def test_branch_phase_residual_counts_leakage():
    t0, t1 = _two_qubit_branches()
    amps = np.array([np.sqrt(0.48), np.sqrt(0.04), 0, np.sqrt(0.48)])
    dec = branch_phase(state_vector(amps, 2), 1, t0, t1)
    assert abs(dec.residual - 0.04) < 1e-12


def test_reduced_purity_cases():
    product = assemble_state([qubit_fragment(1, ket("+")), qubit_fragment(2, ket("0"))], 2)
    assert abs(reduced_purity(product, (1,)) - 1.0) < 1e-12
    bell = assemble_state([mes_state(1, 2)], 2)
    assert abs(reduced_purity(bell, (2,)) - 0.5) < 1e-12


def test_reduced_purity_of_decohered_controlled_output():
    """Equal-weight branches whose environments are orthogonal mix the
    kept pair down to trace(rho^2) = 1/2."""
    branch0 = assemble_state(
        [mes_state(1, 2), qubit_fragment(3, ket("0")), matrix_state(X, 4, 5)], 5
    )
    branch1 = assemble_state(
        [mes_state(1, 2), qubit_fragment(3, ket("1")), mes_state(4, 5)], 5
    )
    amps = np.concatenate([branch0.amplitudes, branch1.amplitudes]) / np.sqrt(2)
    psi = state_vector(amps, 6)  # qubit 1 is the control
    purity = reduced_purity(psi, (1, 4))
    assert purity < 1.0
    assert abs(purity - 0.5) < 1e-9
