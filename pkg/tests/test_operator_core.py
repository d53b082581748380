"""Pauli-sum operators, gate parsing, state assembly, and J_z sectors."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from agtsim.gates import (
    H,
    S,
    X,
    Z,
    is_orthogonal,
    is_unitary,
    parse_unitary,
    principal_sqrt,
    random_state,
    random_unitary,
    rotation2,
    rz,
    unitary_to_json,
)
from agtsim.paulis import (
    OperatorSum,
    PauliString,
    conjugate_operator,
    controlled_term,
    gate_hamiltonian,
    identity_sum,
    operator_from_dense,
)
from agtsim.sectors import (
    offsector_block_norm,
    sector_decompose,
    sector_index_map,
    sector_matrix,
    sector_with_k,
)
from agtsim.spectral import chain_pair
from agtsim.states import (
    StateVector,
    apply_cswap,
    apply_local_unitary,
    assemble_state,
    fidelity,
    gate_fragment,
    inner,
    ket,
    matrix_state,
    mes_state,
    qubit_fragment,
    reduced_density,
    state_vector,
)

from math import comb


factor_lists = st.lists(
    st.tuples(st.integers(1, 5), st.sampled_from("IXYZ")),
    max_size=5,
    unique_by=lambda f: f[0],
)


# ---------------------------------------------------------------- Pauli sums


def test_pauli_string_canonical_form():
    ps = PauliString(2.0, ((3, "X"), (1, "I"), (2, "Z")), 3)
    assert ps.factors == ((2, "Z"), (3, "X"))
    with pytest.raises(ValueError):
        PauliString(1.0, ((1, "X"), (1, "Y")), 2)
    with pytest.raises(ValueError):
        PauliString(1.0, ((1, "Q"),), 2)
    with pytest.raises(ValueError):
        PauliString(1.0, ((3, "X"),), 2)
    with pytest.raises(ValueError):
        PauliString(1.0 + 0.5j, ((1, "X"),), 2)


@settings(deadline=None)
@given(factor_lists, st.floats(-3, 3, allow_nan=False))
def test_pauli_string_masks_match_dense(factors, coeff):
    ps = PauliString(coeff, tuple(factors), 5)
    dense = ps.to_dense()
    flip, sign, _ = ps.masks()
    weight = ps.weight()
    for state in (0, 7, 19, 31):
        col = np.zeros(32, dtype=complex)
        col[state] = 1.0
        image = dense @ col
        expect = np.zeros(32, dtype=complex)
        parity = 1.0 - 2.0 * (bin(state & sign).count("1") & 1)
        expect[state ^ flip] = weight * parity
        assert np.allclose(image, expect, atol=1e-12)


@settings(deadline=None, max_examples=40)
@given(st.lists(st.tuples(factor_lists, st.floats(-2, 2, allow_nan=False)), min_size=1, max_size=6))
def test_operator_sum_matvec_matches_dense(strings):
    terms = [PauliString(c, tuple(f), 5) for f, c in strings]
    op = OperatorSum(tuple(terms), 5)
    rng = np.random.default_rng(7)
    vec = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    assert np.allclose(op.matvec(vec), op.to_dense() @ vec, atol=1e-10)


def test_operator_sum_algebra():
    a = gate_hamiltonian(np.eye(2), 1, 2, 0.5, 3)
    b = gate_hamiltonian(X, 2, 3, 0.5, 3)
    assert np.allclose((a + b).to_dense(), a.to_dense() + b.to_dense())
    assert np.allclose((2.5 * a).to_dense(), 2.5 * a.to_dense())
    assert np.allclose((a - b).to_dense(), a.to_dense() - b.to_dense())
    # duplicate factor sets merge; cancelling terms vanish
    merged = a + (-1.0) * a
    assert len(merged.terms) == 0


def test_identity_sum():
    op = identity_sum(3, -1.5)
    assert np.allclose(op.to_dense(), -1.5 * np.eye(8))


def test_operator_from_dense_round_trip(rng):
    u = random_unitary(rng)
    op = gate_hamiltonian(u, 1, 2, 0.7, 2)
    back = operator_from_dense(op.to_dense(), 2)
    assert back.equals(op, tol=1e-9)


# ------------------------------------------------------- gate Hamiltonians


def test_gate_hamiltonian_spectrum(rng):
    """Eigenvalues are {-4w, 0, 0, 0} regardless of the gate."""
    for _ in range(20):
        u = random_unitary(rng)
        vals = np.linalg.eigvalsh(gate_hamiltonian(u, 1, 2, 0.5, 2).to_dense())
        assert np.allclose(np.sort(vals), [-2.0, 0.0, 0.0, 0.0], atol=1e-9)


def test_gate_hamiltonian_ground_state(rng):
    for _ in range(10):
        u = random_unitary(rng)
        h = gate_hamiltonian(u, 1, 2, 0.5, 2)
        ground = assemble_state([matrix_state(u.T, 1, 2)], 2)
        assert np.allclose(
            h.to_dense() @ ground.amplitudes, -2.0 * ground.amplitudes, atol=1e-9
        )


def test_gate_hamiltonian_conjugation_covariance(rng):
    """Conjugating the second-site factor by V maps H_U to H_{VU}."""
    for _ in range(10):
        u, v = random_unitary(rng), random_unitary(rng)
        left = conjugate_operator(gate_hamiltonian(u, 1, 2, 0.5, 2), v, 2)
        right = gate_hamiltonian(v @ u, 1, 2, 0.5, 2)
        assert np.allclose(left.to_dense(), right.to_dense(), atol=1e-9)


def test_gate_hamiltonian_acts_on_named_pair():
    h = gate_hamiltonian(X, 2, 3, 0.5, 4)
    dense = h.to_dense()
    two_body = gate_hamiltonian(X, 1, 2, 0.5, 2).to_dense()
    expect = np.kron(np.kron(np.eye(2), two_body), np.eye(2))
    assert np.allclose(dense, expect, atol=1e-12)


def test_controlled_term_dense():
    h = gate_hamiltonian(X, 2, 3, 0.5, 3)
    p1 = controlled_term(h, 1, 1)
    proj = np.diag([0.0, 1.0])
    sub = gate_hamiltonian(X, 1, 2, 0.5, 2).to_dense()
    assert np.allclose(p1.to_dense(), np.kron(proj, sub), atol=1e-12)
    p0 = controlled_term(h, 1, 0)
    assert np.allclose((p0 + p1).to_dense(), h.to_dense(), atol=1e-12)


# ------------------------------------------------------------ gate parsing


def test_parse_unitary_names_and_rotations():
    assert np.allclose(parse_unitary("H"), H)
    assert np.allclose(parse_unitary("Rz(0.3)"), rz(0.3))
    got = parse_unitary("Ry(-1.2)")
    assert np.allclose(got @ got.conj().T, np.eye(2), atol=1e-12)


def test_parse_unitary_matrix_forms():
    assert np.allclose(parse_unitary([[0, -1], [1, 0]]), rotation2(np.pi / 2))
    sj = unitary_to_json(S)
    assert np.allclose(parse_unitary(sj), S)


def test_parse_unitary_rejects_garbage():
    with pytest.raises(ValueError):
        parse_unitary("Q")
    with pytest.raises(ValueError):
        parse_unitary([[1, 0], [0, 2]])
    with pytest.raises(ValueError):
        parse_unitary([1, 2, 3])


def test_principal_sqrt_rotation():
    o = rotation2(1.1)
    r = principal_sqrt(o)
    assert np.allclose(r @ r, o, atol=1e-12)
    assert np.allclose(r, rotation2(0.55), atol=1e-12)


def test_principal_sqrt_reflection():
    """det = -1 forces a genuinely complex square root."""
    o = np.array([[1.0, 0.0], [0.0, -1.0]])
    r = principal_sqrt(o)
    assert np.allclose(r @ r, o, atol=1e-12)
    assert is_unitary(r)
    assert np.max(np.abs(r.imag)) > 0.1


def test_orthogonality_predicate():
    assert is_orthogonal(rotation2(0.4))
    assert not is_orthogonal(S)


def test_random_samplers(rng):
    u = random_unitary(rng)
    assert is_unitary(u)
    phi = random_state(rng)
    assert abs(np.linalg.norm(phi) - 1.0) < 1e-12


# ------------------------------------------------------------------ states


def test_mes_fragment():
    sv = assemble_state([mes_state(1, 2)], 2)
    assert np.allclose(sv.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_matrix_state_normalization():
    with pytest.raises(ValueError):
        matrix_state(np.eye(2) * 2.0, 1, 2)
    sv = assemble_state([matrix_state(H, 1, 2)], 2)
    assert abs(sv.norm - 1.0) < 1e-12


def test_matrix_representation_identity(rng):
    """Acting with A on the row qubit and B^T on the column qubit maps
    the matrix-encoded state |C>> to |ACB>>."""
    for _ in range(20):
        a, b = random_unitary(rng), random_unitary(rng)
        c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        c *= np.sqrt(2) / np.linalg.norm(c)
        lhs = assemble_state([matrix_state(c, 1, 2)], 2)
        lhs = apply_local_unitary(apply_local_unitary(lhs, a, 1), b.T, 2)
        rhs = assemble_state([matrix_state(a @ c @ b, 1, 2)], 2)
        assert abs(inner(lhs, rhs)) > 1 - 1e-12


def test_assemble_state_vs_kron():
    frag = [qubit_fragment(2, ket("+")), mes_state(1, 3)]
    sv = assemble_state(frag, 3)
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    expect = np.einsum("ik,j->ijk", bell.reshape(2, 2), ket("+")).reshape(-1)
    assert np.allclose(sv.amplitudes, expect, atol=1e-12)


def test_gate_fragment_equals_matrix_state():
    sv1 = assemble_state([gate_fragment(1, 2, H)], 2)
    sv2 = assemble_state([matrix_state(H, 1, 2)], 2)
    assert abs(inner(sv1, sv2)) > 1 - 1e-12


def test_assemble_rejects_overlap_and_gaps():
    with pytest.raises(ValueError):
        assemble_state([mes_state(1, 2), qubit_fragment(2, ket("0"))], 3)
    with pytest.raises(ValueError):
        assemble_state([mes_state(1, 2)], 3)


def test_apply_local_unitary_vs_kron(rng):
    u = random_unitary(rng)
    psi = state_vector(random_state(rng, 8), 3)
    got = apply_local_unitary(psi, u, 2)
    expect = np.kron(np.kron(np.eye(2), u), np.eye(2)) @ psi.amplitudes
    assert np.allclose(got.amplitudes, expect, atol=1e-12)


def test_apply_cswap_on_basis_states():
    # control set: qubits 2 and 3 swap; control clear: nothing happens
    psi = assemble_state(
        [qubit_fragment(1, ket("1")), qubit_fragment(2, ket("1")), qubit_fragment(3, ket("0"))],
        3,
    )
    swapped = apply_cswap(psi, 1, 2, 3)
    expect = assemble_state(
        [qubit_fragment(1, ket("1")), qubit_fragment(2, ket("0")), qubit_fragment(3, ket("1"))],
        3,
    )
    assert abs(inner(swapped, expect)) > 1 - 1e-12

    psi0 = assemble_state(
        [qubit_fragment(1, ket("0")), qubit_fragment(2, ket("1")), qubit_fragment(3, ket("0"))],
        3,
    )
    assert abs(inner(apply_cswap(psi0, 1, 2, 3), psi0)) > 1 - 1e-12


def test_reduced_density_partial_trace():
    sv = assemble_state([mes_state(1, 2), qubit_fragment(3, ket("1"))], 3)
    rho = reduced_density(sv, (1,))
    assert np.allclose(rho, np.eye(2) / 2, atol=1e-12)
    rho3 = reduced_density(sv, (3,))
    assert np.allclose(rho3, np.diag([0.0, 1.0]), atol=1e-12)


def test_inner_and_fidelity():
    a = assemble_state([qubit_fragment(1, ket("0"))], 1)
    b = assemble_state([qubit_fragment(1, ket("+"))], 1)
    assert abs(inner(a, b) - 1 / np.sqrt(2)) < 1e-12
    assert abs(fidelity(a, b) - 0.5) < 1e-12


# ----------------------------------------------------------------- sectors


def test_sector_decomposition_partitions():
    for n in (2, 3, 5):
        sectors = sector_decompose(n)
        dims = sorted(sec.dimension for sec in sectors)
        assert dims == sorted(comb(n, k) for k in range(n + 1))
        states = np.concatenate([sec.states for sec in sectors])
        assert sorted(states) == list(range(1 << n))


def test_sector_k_values_symmetric():
    sectors = sector_decompose(5)
    ks = sorted(sec.k for sec in sectors)
    assert np.allclose(ks, [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5])
    up = sector_with_k(sectors, 0.5)
    dn = sector_with_k(sectors, -0.5)
    assert up.dimension == dn.dimension == comb(5, 2)


def test_sector_matrix_matches_projected_dense():
    pair = chain_pair(2, 0.5)
    hs = 0.35 * pair.ini + 0.65 * pair.fin
    dense = hs.to_dense()
    for k in (-0.5, 0.5, 1.5):
        sector = sector_with_k(sector_decompose(5), k)
        block = sector_matrix(hs, sector, sector_index_map(sector)).toarray()
        expect = dense[np.ix_(sector.states, sector.states)]
        assert np.allclose(block, expect, atol=1e-12)


def test_offsector_blocks_vanish():
    pair = chain_pair(3, 0.5)
    hs = 0.5 * pair.ini + 0.5 * pair.fin
    sectors = sector_decompose(7)
    for a in sectors:
        for b in sectors:
            if a.k < b.k:
                assert offsector_block_norm(hs, a, b) < 1e-12
