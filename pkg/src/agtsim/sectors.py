"""Total-spin-z sector decomposition and sector-restricted sparse matrices."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from . import _kernels
from .paulis import OperatorSum


@dataclass(frozen=True)
class SectorBasis:
    """Computational basis states with a fixed J_z = (1/2) sum_i Z_i eigenvalue.

    A state with m set bits has k = (n - 2m)/2; states are stored sorted.
    """

    k: float
    states: np.ndarray
    n_qubits: int

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.int64)
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def dimension(self) -> int:
        return int(self.states.shape[0])

    @property
    def ones(self) -> int:
        return int(round((self.n_qubits - 2 * self.k) / 2))


def sector_decompose(n_qubits: int):
    """All J_z sectors of an n-qubit register, ordered by decreasing k.

    Sector dimensions are binomial coefficients and sum to 2**n; every basis
    state appears in exactly one sector.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    all_states = np.arange(1 << n_qubits, dtype=np.int64)
    ones = _kernels.popcount(all_states)
    sectors = []
    for m in range(n_qubits + 1):
        k = (n_qubits - 2 * m) / 2.0
        sectors.append(SectorBasis(k, all_states[ones == m], n_qubits))
    return sectors


def sector_with_k(sectors, k: float) -> SectorBasis:
    for s in sectors:
        if abs(s.k - k) < 1e-9:
            return s
    raise ValueError(f"no sector with k={k}")


def sector_index_map(sector: SectorBasis) -> np.ndarray:
    """Lookup table basis-state -> sector position (-1 outside the sector)."""
    index_of = np.full(1 << sector.n_qubits, -1, dtype=np.int64)
    index_of[sector.states] = np.arange(sector.dimension, dtype=np.int64)
    return index_of


def sector_matrix(H: OperatorSum, sector: SectorBasis, index_of=None) -> sparse.csr_matrix:
    """P_k H P_k as a sparse matrix over the sector basis.

    Entries whose image leaves the sector are dropped, which is exactly the
    projected operator; no assumption that H commutes with J_z is needed.
    """
    if H.n_qubits != sector.n_qubits:
        raise ValueError("operator and sector qubit counts differ")
    if index_of is None:
        index_of = sector_index_map(sector)
    dim = sector.dimension
    rows_all, cols_all, vals_all = [], [], []
    for t in H.terms:
        flip, sign, _ = t.masks()
        rows, cols, signs = _kernels.sector_term_coo(sector.states, index_of, flip, sign)
        rows_all.append(rows)
        cols_all.append(cols)
        vals_all.append(t.weight() * signs)
    if not rows_all:
        return sparse.csr_matrix((dim, dim), dtype=complex)
    vals = np.concatenate(vals_all)
    if np.max(np.abs(vals.imag), initial=0.0) < 1e-14:
        vals = vals.real  # real symmetric sectors get the cheaper solvers
    mat = sparse.coo_matrix(
        (vals, (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim),
    )
    return mat.tocsr()


def offsector_block_norm(H: OperatorSum, sector_a: SectorBasis, sector_b: SectorBasis) -> float:
    """Max-magnitude entry of P_a H P_b; zero when H preserves the sectors."""
    dense = H.to_dense()
    block = dense[np.ix_(sector_a.states, sector_b.states)]
    return float(np.max(np.abs(block))) if block.size else 0.0
