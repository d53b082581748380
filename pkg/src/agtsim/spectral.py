"""Spectra of the interpolating Hamiltonians: gap profiles, norms, run times.

The parallel-teleportation Hamiltonian pair on 2L+1 qubits is mapped to an
alternating-bond antiferromagnetic Heisenberg chain by conjugating every even
site with Y.  The chain commutes with J_z, so eigenvalues are computed per
sector; the physically relevant gap lives in the k = 1/2 sector.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .paulis import OperatorSum, PauliString, gate_hamiltonian
from .sectors import sector_decompose, sector_index_map, sector_matrix, sector_with_k

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

DENSE_SECTOR_CUTOFF = 4096
DEFAULT_S_STEP = 0.01


class EigensolverError(RuntimeError):
    """Iterative eigensolver failed to converge at one grid point."""

    def __init__(self, message, L=None, s=None, residual=None):
        super().__init__(message)
        self.L = L
        self.s = s
        self.residual = residual


def default_s_grid(step: float = DEFAULT_S_STEP) -> np.ndarray:
    """Uniform grid over [0, 1] including both endpoints."""
    if not (0 < step <= 1):
        raise ValueError("s step must lie in (0, 1]")
    count = int(round(1.0 / step))
    if abs(count * step - 1.0) > 1e-12:
        raise ValueError("s step must divide 1 exactly")
    return np.linspace(0.0, 1.0, count + 1)


def pagt_pair(L: int, omega: float, unitaries=None) -> tuple:
    """Initial and final Hamiltonians of the L-gate parallel teleportation.

    H_ini couples (2j, 2j+1) through the j-th gate Hamiltonian, H_fin couples
    (2j-1, 2j) through identity-gate Hamiltonians; 2L+1 qubits in total.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    n = 2 * L + 1
    eye = np.eye(2)
    if unitaries is None:
        unitaries = [eye] * L
    if len(unitaries) != L:
        raise ValueError(f"expected {L} unitaries, got {len(unitaries)}")
    h_ini = OperatorSum((), n)
    h_fin = OperatorSum((), n)
    for j in range(1, L + 1):
        h_ini = h_ini + gate_hamiltonian(unitaries[j - 1], 2 * j, 2 * j + 1, omega, n)
        h_fin = h_fin + gate_hamiltonian(eye, 2 * j - 1, 2 * j, omega, n)
    return h_ini, h_fin


def _heisenberg_bond(i: int, j: int, coupling: float, n: int) -> OperatorSum:
    terms = tuple(
        PauliString(coupling, ((i, p), (j, p)), n) for p in ("X", "Y", "Z")
    )
    return OperatorSum(terms, n)


@dataclass(frozen=True)
class SpinChainPair:
    """Chain-frame operator pair: H_chain(s) = (1-s)*ini + s*fin.

    `dropped_shift` is the identity coefficient removed from both endpoints;
    eigenvalues of the original pair are chain eigenvalues plus this shift.
    """

    ini: OperatorSum
    fin: OperatorSum
    dropped_shift: float


def to_spin_chain(h_ini: OperatorSum, h_fin: OperatorSum) -> SpinChainPair:
    """Map the identity-gate teleportation pair to the alternating chain.

    Conjugating every even site with Y turns each identity-gate bond into
    -omega + omega * S_i . S_j, so the interpolation becomes an alternating
    bond antiferromagnetic Heisenberg chain up to a constant shift of
    -omega*L.  Raises if the input is not the identity-gate pair.
    """
    n = h_ini.n_qubits
    if h_fin.n_qubits != n or n % 2 == 0 or n < 3:
        raise ValueError("expected the teleportation pair on an odd register")
    L = (n - 1) // 2
    omega = -h_ini.coefficient_of(()) / L
    if omega <= 0:
        raise ValueError("operator pair lacks the expected identity offset")
    want_ini, want_fin = pagt_pair(L, omega)
    if not (h_ini.equals(want_ini, tol=1e-9) and h_fin.equals(want_fin, tol=1e-9)):
        raise ValueError("input is not the identity-gate teleportation pair")
    chain_ini = OperatorSum((), n)
    chain_fin = OperatorSum((), n)
    for j in range(1, L + 1):
        chain_ini = chain_ini + _heisenberg_bond(2 * j, 2 * j + 1, omega, n)
        chain_fin = chain_fin + _heisenberg_bond(2 * j - 1, 2 * j, omega, n)
    return SpinChainPair(chain_ini, chain_fin, -omega * L)


def chain_pair(L: int, omega: float) -> SpinChainPair:
    """Chain-frame pair built via the verified mapping of the raw pair."""
    h_ini, h_fin = pagt_pair(L, omega)
    return to_spin_chain(h_ini, h_fin)


@dataclass(frozen=True)
class SpectralProfile:
    """Per-s gap and ground-energy data of one interpolation."""

    L: int
    omega: float
    s_grid: np.ndarray
    gaps: np.ndarray
    ground_energies: np.ndarray
    sector_k: float
    failures: tuple = ()

    def __post_init__(self):
        for name in ("s_grid", "gaps", "ground_energies"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        ok = np.isfinite(self.gaps)
        if np.any(self.gaps[ok] < -1e-10):
            raise ValueError("negative gap in spectral profile")


def _lowest_eigs_dense(mat: sparse.csr_matrix, count: int) -> np.ndarray:
    vals = la.eigvalsh(mat.toarray())
    return vals[:count]


def _lowest_eigs_sparse(mat, count, v0, tol):
    vals, vecs = spla.eigsh(mat, k=count, which="SA", v0=v0, tol=tol)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def gap_profile(
    L: int,
    omega: float,
    s_grid=None,
    *,
    sector_k: float = 0.5,
    dense_cutoff: int = DENSE_SECTOR_CUTOFF,
    n_lowest: int = 4,
    solver_tol: float = 1e-10,
    on_failure: str = "raise",
) -> SpectralProfile:
    """Gap between the two lowest chain eigenvalues in one J_z sector.

    Dense diagonalization below `dense_cutoff`, shift-free Lanczos above with
    the previous grid point's ground vector as the starting guess.  Reported
    ground energies include the identity shift dropped by the chain mapping,
    i.e. they are ground energies of the original interpolating Hamiltonian.
    `on_failure` is "raise" or "collect"; collected failures leave NaN rows.
    """
    if s_grid is None:
        s_grid = default_s_grid()
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid < 0) or np.any(s_grid > 1):
        raise ValueError("s grid must lie inside [0, 1]")
    pair = chain_pair(L, omega)
    sector = sector_with_k(sector_decompose(2 * L + 1), sector_k)
    index_of = sector_index_map(sector)
    a_mat = sector_matrix(pair.ini, sector, index_of)
    b_mat = sector_matrix(pair.fin, sector, index_of)
    dim = sector.dimension
    gaps = np.full(s_grid.shape, np.nan)
    grounds = np.full(s_grid.shape, np.nan)
    failures = []
    v0 = None
    for idx, s in enumerate(s_grid):
        h_s = (1.0 - s) * a_mat + s * b_mat
        if dim <= dense_cutoff:
            vals = _lowest_eigs_dense(h_s, 2)
        else:
            try:
                vals, vecs = _lowest_eigs_sparse(h_s, min(n_lowest, dim - 1), v0, solver_tol)
                v0 = np.real_if_close(vecs[:, 0]).astype(float, copy=False)
            except spla.ArpackNoConvergence as exc:
                residual = float(np.max(np.abs(exc.eigenvalues))) if len(exc.eigenvalues) else math.nan
                err = EigensolverError(
                    f"eigensolver did not converge at L={L}, s={s:.4f}", L=L, s=float(s), residual=residual
                )
                if on_failure == "raise":
                    raise err from exc
                failures.append(err)
                continue
        gaps[idx] = vals[1] - vals[0]
        grounds[idx] = vals[0] + pair.dropped_shift
    return SpectralProfile(L, omega, s_grid, gaps, grounds, sector_k, tuple(failures))


def min_gap(profile: SpectralProfile):
    """Grid point of smallest gap and its value; ties resolve to smaller s."""
    gaps = profile.gaps
    ok = np.isfinite(gaps)
    if not np.any(ok):
        raise ValueError("profile has no valid grid points")
    masked = np.where(ok, gaps, np.inf)
    idx = int(np.argmin(masked))
    return float(profile.s_grid[idx]), float(gaps[idx])


def cross_sector_audit(L: int, omega: float, s_samples=None, degeneracy_tol: float = 1e-8):
    """Dense full-space check that the sector gap matches the global gap.

    The sector scan in :func:`gap_profile` only sees levels inside one J_z
    block; this audit diagonalizes the whole chain (n = 2L+1 <= 11) and
    measures the gap from the degenerate ground manifold to the first level
    above it.  Returns a list of (s, sector_gap, global_gap) rows; callers
    decide whether a mismatch matters.
    """
    n = 2 * L + 1
    if n > 11:
        raise ValueError("full-space audit is dense only; need 2L+1 <= 11")
    if s_samples is None:
        s_samples = (0.0, 0.25, 0.5, 0.75, 1.0)
    s_samples = np.asarray(s_samples, dtype=float)
    profile = gap_profile(L, omega, s_samples)
    pair = chain_pair(L, omega)
    a_mat = pair.ini.to_dense()
    b_mat = pair.fin.to_dense()
    rows = []
    for s, sector_gap in zip(s_samples, profile.gaps):
        vals = la.eigvalsh((1.0 - s) * a_mat + s * b_mat)
        scale = max(1.0, float(np.max(np.abs(vals))))
        above = vals[vals > vals[0] + degeneracy_tol * scale]
        global_gap = float(above[0] - vals[0]) if len(above) else math.inf
        rows.append((float(s), float(sector_gap), global_gap))
    return rows


def spectral_norm(H: OperatorSum, tol: float = 1e-9) -> float:
    """Largest eigenvalue magnitude of a Hermitian operator."""
    if H.dim <= DENSE_SECTOR_CUTOFF:
        vals = la.eigvalsh(H.to_dense())
        return float(np.max(np.abs(vals)))
    op = spla.LinearOperator((H.dim, H.dim), matvec=H.matvec, dtype=complex)
    vals = spla.eigsh(op, k=1, which="LM", tol=tol, return_eigenvectors=False)
    return float(np.abs(vals[0]))


def pagt_norm_diff(L: int, omega: float, tol: float = 1e-9) -> float:
    """||H_fin - H_ini|| for the L-gate teleportation pair.

    Computed in the chain frame (same norm, the frames are unitarily
    related), where the difference commutes with J_z and can be handled
    sector by sector; the k <-> -k symmetry halves the work.
    """
    pair = chain_pair(L, omega)
    diff = pair.fin - pair.ini
    best = 0.0
    for sector in sector_decompose(2 * L + 1):
        if sector.k < -1e-9:
            continue
        mat = sector_matrix(diff, sector, sector_index_map(sector))
        if sector.dimension <= DENSE_SECTOR_CUTOFF:
            vals = la.eigvalsh(mat.toarray())
            best = max(best, float(np.max(np.abs(vals))))
        else:
            vals = spla.eigsh(mat, k=1, which="LM", tol=tol, return_eigenvectors=False)
            best = max(best, float(np.abs(vals[0])))
    return best


def witness_expectation(L: int, omega: float) -> float:
    """<phi0|(H_fin - H_ini)|phi0> for the pattern state |00110011...00110>.

    phi0 assigns qubit q the q-th character of the repeating pattern 0011
    truncated to 2L+1 qubits (qubit 1 = most significant bit).
    """
    n = 2 * L + 1
    bits = [("0011"[(q - 1) % 4]) for q in range(1, n + 1)]
    state = int("".join(bits), 2)
    h_ini, h_fin = pagt_pair(L, omega)
    vec = np.zeros(1 << n, dtype=complex)
    vec[state] = 1.0
    return (h_fin - h_ini).expectation(vec)


@dataclass(frozen=True)
class TimingReport:
    """Run-time functionals derived from one spectral profile."""

    L: int
    omega: float
    min_gap: float
    s_star: float
    norm_diff: float
    T_e: float
    T_L: float
    linear_bound: float
    quadrature_error: float
    eps: float
    delta: float
    c: float
    mode: str


def sufficient_time(
    profile: SpectralProfile,
    mode: str = "adapted",
    *,
    eps: float = 0.01,
    delta: float = 1.0,
    c: float = 1.0,
    norm_diff: float = None,
) -> TimingReport:
    """Adiabatic run-time estimates from a gap profile.

    adapted: T_e = integral ds / gap(s)^2 (trapezoidal; a Richardson check
    against the half-resolution grid is reported) and T_L = norm * T_e.
    linear-bound: c * norm^(1+delta) / (eps^delta * G^(2+delta)).
    """
    if mode not in ("adapted", "linear-bound"):
        raise ValueError("mode must be 'adapted' or 'linear-bound'")
    s = profile.s_grid
    if s[0] > 1e-12 or s[-1] < 1 - 1e-12 or np.max(np.diff(s)) > 0.01 + 1e-12:
        raise ValueError("profile must cover [0, 1] with spacing <= 0.01")
    gaps = profile.gaps
    if np.any(~np.isfinite(gaps)):
        raise ValueError("profile contains failed grid points")
    if np.any(gaps <= 0):
        raise ValueError("zero gap on the grid: adapted integral undefined")
    if norm_diff is None:
        norm_diff = pagt_norm_diff(profile.L, profile.omega)
    integrand = 1.0 / gaps**2
    T_e = float(_trapezoid(integrand, s))
    T_e_half = float(_trapezoid(integrand[::2], s[::2])) if len(s) % 2 == 1 else math.nan
    quad_err = abs(T_e - T_e_half) / 3.0 if math.isfinite(T_e_half) else math.nan
    s_star, G = min_gap(profile)
    linear = c * norm_diff ** (1.0 + delta) / (eps**delta * G ** (2.0 + delta))
    return TimingReport(
        L=profile.L,
        omega=profile.omega,
        min_gap=G,
        s_star=s_star,
        norm_diff=float(norm_diff),
        T_e=T_e,
        T_L=float(norm_diff * T_e),
        linear_bound=float(linear),
        quadrature_error=float(quad_err),
        eps=eps,
        delta=delta,
        c=c,
        mode=mode,
    )


def closed_form_gap(s, omega: float):
    """Single-gate gap 4*omega*sqrt(1 - 3s + 3s^2); minimum 2*omega at s=1/2."""
    s = np.asarray(s, dtype=float)
    return 4.0 * omega * np.sqrt(1.0 - 3.0 * s + 3.0 * s**2)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.log(np.asarray(xs, dtype=float))
    ys = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])
