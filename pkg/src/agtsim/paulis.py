"""Pauli-sum operators and the two-body gate Hamiltonians built from them.

Conventions used throughout the package:

* Qubits are labelled 1..n and qubit 1 is the most significant bit of the
  computational basis index.  When a control qubit is present it sits in
  front of the data register (see :mod:`agtsim.schemes`).
* All Pauli coefficients are real; every operator here is Hermitian by
  construction.
"""

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sparse

from . import _kernels

PAULI_LABELS = ("I", "X", "Y", "Z")
PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Largest Hilbert-space dimension for which a dense matrix is materialized.
DENSE_MATRIX_CAP = 1 << 13
# Largest dimension for dense statevectors / operator actions.
DENSE_VECTOR_CAP = 1 << 20

COEFF_TOL = 1e-12


def _validate_qubit(q: int, n_qubits: int) -> None:
    if not (1 <= q <= n_qubits):
        raise ValueError(f"qubit index {q} outside 1..{n_qubits}")


@dataclass(frozen=True)
class PauliString:
    """A real multiple of a tensor product of single-qubit Paulis.

    `factors` stores only non-identity factors, sorted by qubit label; the
    canonical form is enforced at construction.
    """

    coefficient: float
    factors: tuple
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        coeff = self.coefficient
        if isinstance(coeff, complex):
            if abs(coeff.imag) > COEFF_TOL:
                raise ValueError("Pauli coefficients must be real")
            coeff = coeff.real
        coeff = float(coeff)
        cleaned = []
        seen = set()
        for q, p in self.factors:
            _validate_qubit(q, self.n_qubits)
            if p not in PAULI_LABELS:
                raise ValueError(f"unknown Pauli label {p!r}")
            if q in seen:
                raise ValueError(f"duplicate qubit index {q} in Pauli string")
            seen.add(q)
            if p != "I":
                cleaned.append((int(q), p))
        cleaned.sort()
        object.__setattr__(self, "factors", tuple(cleaned))
        object.__setattr__(self, "coefficient", coeff)

    def bit(self, q: int) -> int:
        """Bit weight position of qubit q (qubit 1 = most significant)."""
        return 1 << (self.n_qubits - q)

    def masks(self):
        """(flip_mask, sign_mask, n_y) encoding of this string's action."""
        flip = 0
        sign = 0
        n_y = 0
        for q, p in self.factors:
            b = self.bit(q)
            if p in ("X", "Y"):
                flip |= b
            if p in ("Y", "Z"):
                sign |= b
            if p == "Y":
                n_y += 1
        return flip, sign, n_y

    def weight(self) -> complex:
        """Scalar multiplying the sign action: coefficient * i**n_y."""
        _, _, n_y = self.masks()
        return self.coefficient * (1j) ** n_y

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        if dim > DENSE_MATRIX_CAP:
            raise ValueError(f"dense matrix of dimension {dim} exceeds cap {DENSE_MATRIX_CAP}")
        labels = dict(self.factors)
        mat = np.array([[self.coefficient]], dtype=complex)
        for q in range(1, self.n_qubits + 1):
            mat = np.kron(mat, PAULI_MATS[labels.get(q, "I")])
        return mat


def _merge_terms(strings: Iterable[PauliString], n_qubits: int):
    acc = {}
    for ps in strings:
        if ps.n_qubits != n_qubits:
            raise ValueError("mixed qubit counts in one operator")
        acc[ps.factors] = acc.get(ps.factors, 0.0) + ps.coefficient
    return tuple(
        PauliString(c, f, n_qubits)
        for f, c in sorted(acc.items())
        if abs(c) > COEFF_TOL
    )


@dataclass(frozen=True)
class OperatorSum:
    """Hermitian sum of Pauli strings on a fixed register.

    Canonicalization merges duplicate strings and drops zero coefficients;
    instances are immutable and safe to share across workers.
    """

    terms: tuple
    n_qubits: int

    def __post_init__(self):
        object.__setattr__(self, "terms", _merge_terms(self.terms, self.n_qubits))

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("operator qubit counts differ")
        return OperatorSum(self.terms + other.terms, self.n_qubits)

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> "OperatorSum":
        scalar = float(scalar)
        return OperatorSum(
            tuple(PauliString(scalar * t.coefficient, t.factors, self.n_qubits) for t in self.terms),
            self.n_qubits,
        )

    def coefficient_of(self, factors) -> float:
        want = PauliString(1.0, tuple(factors), self.n_qubits).factors
        for t in self.terms:
            if t.factors == want:
                return t.coefficient
        return 0.0

    def equals(self, other: "OperatorSum", tol: float = COEFF_TOL) -> bool:
        if self.n_qubits != other.n_qubits:
            return False
        keys = {t.factors for t in self.terms} | {t.factors for t in other.terms}
        return all(
            abs(self.coefficient_of(k) - other.coefficient_of(k)) <= tol for k in keys
        )

    def to_dense(self) -> np.ndarray:
        if self.dim > DENSE_MATRIX_CAP:
            raise ValueError(f"dense matrix of dimension {self.dim} exceeds cap {DENSE_MATRIX_CAP}")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        states = np.arange(self.dim, dtype=np.int64)
        for t in self.terms:
            flip, sign, _ = t.masks()
            images, signs = _kernels.term_action(states, flip, sign)
            out[images, states] += t.weight() * signs
        return out

    def to_sparse(self) -> sparse.csr_matrix:
        if self.dim > DENSE_VECTOR_CAP:
            raise ValueError(f"sparse matrix of dimension {self.dim} exceeds cap {DENSE_VECTOR_CAP}")
        states = np.arange(self.dim, dtype=np.int64)
        rows, cols, vals = [], [], []
        for t in self.terms:
            flip, sign, _ = t.masks()
            images, signs = _kernels.term_action(states, flip, sign)
            rows.append(images)
            cols.append(states)
            vals.append(t.weight() * signs)
        if not rows:
            return sparse.csr_matrix((self.dim, self.dim), dtype=complex)
        mat = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
        )
        return mat.tocsr()

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.dim,):
            raise ValueError("vector length does not match operator dimension")
        out = np.zeros_like(vec)
        for t in self.terms:
            flip, sign, _ = t.masks()
            out += _kernels.apply_term(vec, flip, sign, t.weight())
        return out

    def expectation(self, vec: np.ndarray) -> float:
        return float(np.real(np.vdot(vec, self.matvec(vec))))


def operator_from_dense(mat: np.ndarray, n_qubits: int, tol: float = 1e-9) -> OperatorSum:
    """Expand a Hermitian matrix back into canonical Pauli strings.

    Inverse of ``to_dense`` for real-coefficient Pauli sums; used by the
    round-trip checks.  Cost 4**n, intended for small registers.
    """
    dim = 1 << n_qubits
    if mat.shape != (dim, dim):
        raise ValueError("matrix shape does not match qubit count")
    terms = []
    for combo in np.ndindex(*(4,) * n_qubits):
        labels = [PAULI_LABELS[c] for c in combo]
        basis = np.array([[1.0]], dtype=complex)
        for lab in labels:
            basis = np.kron(basis, PAULI_MATS[lab])
        coeff = np.trace(basis.conj().T @ mat) / dim
        if abs(coeff.imag) > tol:
            raise ValueError("matrix is not a real-coefficient Pauli sum")
        if abs(coeff.real) > tol:
            factors = tuple(
                (q + 1, lab) for q, lab in enumerate(labels) if lab != "I"
            )
            terms.append(PauliString(coeff.real, factors, n_qubits))
    return OperatorSum(tuple(terms), n_qubits)


def _pauli_decompose_2x2(mat: np.ndarray, tol: float = 1e-12):
    """Real coefficients of a traceless Hermitian 2x2 matrix over X, Y, Z."""
    out = []
    for lab in ("X", "Y", "Z"):
        c = np.trace(PAULI_MATS[lab] @ mat) / 2.0
        if abs(c.imag) > 1e-10:
            raise ValueError("conjugated Pauli has non-real expansion")
        if abs(c.real) > tol:
            out.append((lab, float(c.real)))
    return out


def check_unitary(U: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if np.max(np.abs(U.conj().T @ U - np.eye(2))) > tol:
        raise ValueError("matrix is not unitary")
    return U


def gate_hamiltonian(U, i: int, j: int, omega: float, n_qubits: int) -> OperatorSum:
    """Two-body Hamiltonian whose ground state teleports the gate U.

    Returns -omega * U_j (I_i I_j + X_i X_j - Y_i Y_j + Z_i Z_j) U_j^dag
    expanded into canonical Pauli strings.  As a matrix this equals
    -4*omega * U_j |I>><<I|_{ij} U_j^dag: a rank-one projector scaled by
    -4*omega, with the conjugation acting on qubit j only.
    """
    U = check_unitary(U)
    if i == j:
        raise ValueError("gate Hamiltonian needs two distinct qubits")
    _validate_qubit(i, n_qubits)
    _validate_qubit(j, n_qubits)
    omega = float(omega)
    if omega <= 0:
        raise ValueError("omega must be positive")
    signs = {"X": 1.0, "Y": -1.0, "Z": 1.0}
    terms = [PauliString(-omega, (), n_qubits)]
    for p in ("X", "Y", "Z"):
        conj = U @ PAULI_MATS[p] @ U.conj().T
        for q_lab, c in _pauli_decompose_2x2(conj):
            terms.append(
                PauliString(-omega * signs[p] * c, ((i, p), (j, q_lab)), n_qubits)
            )
    return OperatorSum(tuple(terms), n_qubits)


def conjugate_operator(H: OperatorSum, U, q: int) -> OperatorSum:
    """U_q H U_q^dag re-expanded into Pauli strings; spectrum is unchanged."""
    U = check_unitary(U)
    _validate_qubit(q, H.n_qubits)
    new_terms = []
    for t in H.terms:
        labels = dict(t.factors)
        p = labels.pop(q, "I")
        if p == "I":
            new_terms.append(t)
            continue
        rest = tuple(sorted(labels.items()))
        conj = U @ PAULI_MATS[p] @ U.conj().T
        for q_lab, c in _pauli_decompose_2x2(conj):
            new_terms.append(
                PauliString(t.coefficient * c, rest + ((q, q_lab),), H.n_qubits)
            )
    return OperatorSum(tuple(new_terms), H.n_qubits)


def identity_sum(n_qubits: int, coefficient: float = 1.0) -> OperatorSum:
    return OperatorSum((PauliString(coefficient, (), n_qubits),), n_qubits)


def controlled_term(H: OperatorSum, control: int, branch: int) -> OperatorSum:
    """|branch><branch| on the control qubit tensored with H.

    The projector (I + (-1)^branch Z)/2 keeps all coefficients real.  The
    control qubit must not appear in H.
    """
    if branch not in (0, 1):
        raise ValueError("branch must be 0 or 1")
    _validate_qubit(control, H.n_qubits)
    z_sign = 0.5 if branch == 0 else -0.5
    terms = []
    for t in H.terms:
        if any(q == control for q, _ in t.factors):
            raise ValueError("control qubit already used by the operator")
        terms.append(PauliString(0.5 * t.coefficient, t.factors, H.n_qubits))
        terms.append(
            PauliString(z_sign * t.coefficient, t.factors + ((control, "Z"),), H.n_qubits)
        )
    return OperatorSum(tuple(terms), H.n_qubits)
