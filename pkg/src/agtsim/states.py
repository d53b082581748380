"""State vectors, labelled fragments, and local operations on them.

Qubit 1 is the most significant bit of the basis index, so the axis order of
``amplitudes.reshape([2] * n)`` matches the qubit labels directly.
"""

import math
from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-9


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude count does not match qubit count")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape([2] * self.n_qubits)


def state_vector(amplitudes, n_qubits: int, *, tol: float = NORM_TOL) -> StateVector:
    """Validated constructor: rejects vectors that are not normalized."""
    sv = StateVector(np.asarray(amplitudes, dtype=complex), n_qubits)
    if abs(sv.norm - 1.0) > tol:
        raise ValueError(f"state norm {sv.norm} differs from 1 beyond {tol}")
    return sv


@dataclass(frozen=True)
class Fragment:
    """Amplitudes on a labelled subset of qubits, to be assembled later."""

    qubits: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << len(self.qubits),):
            raise ValueError("fragment amplitude count does not match its qubits")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("fragment qubits must be distinct")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))


def mes_state(i: int, j: int) -> Fragment:
    """Maximally entangled pair (|00> + |11>)/sqrt(2) on qubits (i, j)."""
    if i == j:
        raise ValueError("entangled pair needs two distinct qubits")
    return Fragment((i, j), np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2))


def matrix_state(C, i: int, j: int, *, tol: float = NORM_TOL) -> Fragment:
    """Bipartite state (1/sqrt(d)) sum_ab C_ab |a>_i |b>_j for a 2x2 matrix C.

    Requires sum |C_ab|^2 = d so the induced state has unit norm.
    """
    if i == j:
        raise ValueError("matrix state needs two distinct qubits")
    C = np.asarray(C, dtype=complex)
    if C.shape != (2, 2):
        raise ValueError("C must be a 2x2 matrix")
    d = 2.0
    total = float(np.sum(np.abs(C) ** 2))
    if abs(total - d) > d * tol:
        raise ValueError(f"sum |C|^2 = {total}, expected {d}")
    return Fragment((i, j), C.reshape(-1) / math.sqrt(d))


def gate_fragment(i: int, j: int, M) -> Fragment:
    """Matrix state |M>> for a unitary M (automatically carries sum |M|^2 = 2)."""
    return matrix_state(np.asarray(M, dtype=complex), i, j)


def qubit_fragment(q: int, amplitudes) -> Fragment:
    return Fragment((q,), np.asarray(amplitudes, dtype=complex))


_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
}


def ket(label: str) -> np.ndarray:
    if label not in _KETS:
        raise ValueError(f"unknown ket label {label!r}; use one of {sorted(_KETS)}")
    return _KETS[label].copy()


def assemble_state(fragments, n_qubits: int) -> StateVector:
    """Tensor disjoint fragments into a full register state.

    The fragments' qubit sets must partition 1..n; interleaved labels are
    handled by a final axis permutation.
    """
    qubits = []
    tensor = np.array(1.0, dtype=complex)
    for frag in fragments:
        qubits.extend(frag.qubits)
        tensor = np.multiply.outer(tensor, frag.amplitudes.reshape([2] * len(frag.qubits)))
    if sorted(qubits) != list(range(1, n_qubits + 1)):
        raise ValueError(f"fragments cover {sorted(qubits)}, expected 1..{n_qubits}")
    order = np.argsort(np.array(qubits))
    return StateVector(tensor.transpose(order).reshape(-1), n_qubits)


def apply_local_unitary(psi: StateVector, U, q: int) -> StateVector:
    """Apply a single-qubit unitary on qubit q; the norm is preserved."""
    if not (1 <= q <= psi.n_qubits):
        raise ValueError(f"qubit index {q} outside 1..{psi.n_qubits}")
    U = np.asarray(U, dtype=complex)
    arr = np.tensordot(U, psi.tensor(), axes=([1], [q - 1]))
    arr = np.moveaxis(arr, 0, q - 1)
    return StateVector(arr.reshape(-1), psi.n_qubits)


def apply_cswap(psi: StateVector, control: int, a: int, b: int) -> StateVector:
    """Swap qubits a and b on the control = |1> subspace."""
    if len({control, a, b}) != 3:
        raise ValueError("control and swapped qubits must be pairwise distinct")
    for q in (control, a, b):
        if not (1 <= q <= psi.n_qubits):
            raise ValueError(f"qubit index {q} outside 1..{psi.n_qubits}")
    arr = psi.tensor()
    c_ax = control - 1
    block0 = arr.take(0, axis=c_ax)
    block1 = arr.take(1, axis=c_ax)
    # axis labels shift down by one past the removed control axis
    a_ax = (a - 1) - (a > control)
    b_ax = (b - 1) - (b > control)
    block1 = np.swapaxes(block1, a_ax, b_ax)
    out = np.stack([block0, block1], axis=c_ax)
    return StateVector(out.reshape(-1), psi.n_qubits)


def inner(a: StateVector, b: StateVector) -> complex:
    if a.n_qubits != b.n_qubits:
        raise ValueError("state sizes differ")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Phase-insensitive overlap |<a|b>|^2."""
    return float(abs(inner(a, b)) ** 2)


def reduced_density(psi: StateVector, keep) -> np.ndarray:
    keep = sorted(set(int(q) for q in keep))
    if not keep or len(keep) >= psi.n_qubits:
        raise ValueError("keep must be a non-empty proper subset of the qubits")
    for q in keep:
        if not (1 <= q <= psi.n_qubits):
            raise ValueError(f"qubit index {q} outside 1..{psi.n_qubits}")
    traced = [q - 1 for q in range(1, psi.n_qubits + 1) if q not in keep]
    arr = psi.tensor()
    rho = np.tensordot(arr, arr.conj(), axes=(traced, traced))
    k = len(keep)
    return rho.reshape(1 << k, 1 << k)
