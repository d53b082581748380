"""Single-qubit unitaries: named constants, parsing, roots, random sampling."""

import math
import re

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
T = np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex)

_NAMED = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "S": S, "T": T}

_ROT_RE = re.compile(r"^R([zy])\(\s*([^)]+)\s*\)$")


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation2(theta: float) -> np.ndarray:
    """Real rotation of the plane by theta (orthogonal, det +1)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def is_unitary(U: np.ndarray, tol: float = 1e-12) -> bool:
    U = np.asarray(U, dtype=complex)
    return U.shape == (2, 2) and np.max(np.abs(U.conj().T @ U - np.eye(2))) <= tol


def is_orthogonal(O: np.ndarray, tol: float = 1e-9) -> bool:
    O = np.asarray(O, dtype=complex)
    if O.shape != (2, 2) or np.max(np.abs(O.imag)) > tol:
        return False
    R = O.real
    return bool(np.max(np.abs(R.T @ R - np.eye(2))) <= tol)


def parse_unitary(spec) -> np.ndarray:
    """Accepts a named gate, "Rz(theta)" / "Ry(theta)", or an explicit matrix.

    Explicit matrices are either a real 2x2 array or a row-major 2x2 array of
    [re, im] pairs: [[[re, im], [re, im]], [[re, im], [re, im]]].
    """
    if isinstance(spec, str):
        name = spec.strip()
        if name in _NAMED:
            return _NAMED[name].copy()
        m = _ROT_RE.match(name)
        if m:
            theta = float(m.group(2))
            return rz(theta) if m.group(1) == "z" else ry(theta)
        raise ValueError(f"unknown unitary name {spec!r}")
    arr = np.asarray(spec, dtype=float)
    if arr.shape == (2, 2):
        U = arr.astype(complex)
    elif arr.shape == (2, 2, 2):
        U = arr[..., 0] + 1j * arr[..., 1]
    else:
        raise ValueError("explicit unitary must be a real 2x2 array or a 2x2 array of [re, im] pairs")
    if not is_unitary(U, tol=1e-9):
        raise ValueError("matrix is not unitary within 1e-9")
    return U


def unitary_to_json(U: np.ndarray):
    return [[[float(U[r, c].real), float(U[r, c].imag)] for c in range(2)] for r in range(2)]


def principal_sqrt(U: np.ndarray) -> np.ndarray:
    """Principal square root of a normal 2x2 matrix.

    Eigenvalues are rooted on the branch with cut along the negative real
    axis, so the root of a rotation by theta is the rotation by theta/2 and
    sqrt(-1) = +i.
    """
    U = np.asarray(U, dtype=complex)
    vals, vecs = np.linalg.eig(U)
    # eig of a normal matrix can return non-orthogonal vectors only through
    # rounding; re-orthogonalize to be safe.
    q, _ = np.linalg.qr(vecs)
    vals = np.diag(q.conj().T @ U @ q)
    return q @ np.diag(np.sqrt(vals.astype(complex))) @ q.conj().T


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary via QR of a complex Gaussian matrix."""
    zmat = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(zmat)
    return q @ np.diag(np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
