"""Bit-level kernels shared by the operator and sector machinery.

Every Pauli product maps one computational basis state to exactly one other:
X and Y factors flip bits, Y and Z factors contribute a sign that depends on
the input bits.  The kernels below exploit that structure; they come in a
numba-compiled flavour and a vectorized numpy flavour.

Selection is controlled by the environment variable ``AGTSIM_KERNELS``:
``"numba"`` forces the compiled path (raises if numba is missing),
``"numpy"`` forces the fallback, unset picks numba when importable.
"""

import os

import numpy as np

try:
    import numba
except ImportError:
    numba = None


def _select_backend() -> str:
    choice = os.environ.get("AGTSIM_KERNELS", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(
            f"AGTSIM_KERNELS must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and numba is None:
        raise ImportError("AGTSIM_KERNELS=numba but numba is not installed")
    if choice == "":
        return "numba" if numba is not None else "numpy"
    return choice


BACKEND = _select_backend()

_HAS_BITCOUNT = hasattr(np, "bitwise_count")
# 16-bit popcount table; used when numpy lacks bitwise_count.
_POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.uint8)


def _popcount_numpy(x):
    x = np.asarray(x, dtype=np.uint64)
    if _HAS_BITCOUNT:
        return np.bitwise_count(x).astype(np.int64)
    r = _POP16[x & np.uint64(0xFFFF)].astype(np.int64)
    r += _POP16[(x >> np.uint64(16)) & np.uint64(0xFFFF)]
    r += _POP16[(x >> np.uint64(32)) & np.uint64(0xFFFF)]
    r += _POP16[(x >> np.uint64(48)) & np.uint64(0xFFFF)]
    return r


def _parity_numpy(states, mask):
    """(-1)**popcount(states & mask) as float64."""
    odd = _popcount_numpy(np.asarray(states, dtype=np.int64) & np.int64(mask)) & 1
    return 1.0 - 2.0 * odd.astype(np.float64)


def _term_action_numpy(states, flip_mask, sign_mask):
    """Image states and sign factors of one Pauli product.

    For each basis state r in `states` the product maps |r> to
    sign(r) * (i**n_y) * |r ^ flip_mask>; the constant i**n_y is left to the
    caller.  Returns (images, signs).
    """
    states = np.asarray(states, dtype=np.int64)
    return states ^ np.int64(flip_mask), _parity_numpy(states, sign_mask)


def _sector_term_coo_numpy(states, index_of, flip_mask, sign_mask):
    """COO triplets of one Pauli product restricted to a sector.

    `states` is the sorted sector basis, `index_of` maps a basis state to its
    sector position (or -1 outside the sector).  Entries whose image leaves
    the sector are dropped: this implements P H P exactly.
    Returns (rows, cols, signs).
    """
    states = np.asarray(states, dtype=np.int64)
    images = states ^ np.int64(flip_mask)
    rows = index_of[images]
    keep = rows >= 0
    cols = np.nonzero(keep)[0].astype(np.int64)
    return rows[keep], cols, _parity_numpy(states[keep], sign_mask)


def _apply_term_numpy(vec, flip_mask, sign_mask, weight):
    """weight * (sign action) applied to a full statevector.

    The map r -> r ^ flip_mask is a permutation, so the scatter below has no
    duplicate targets.  Returns a new array.
    """
    n = vec.shape[0]
    states = np.arange(n, dtype=np.int64)
    out = np.empty_like(vec)
    out[states ^ np.int64(flip_mask)] = weight * _parity_numpy(states, sign_mask) * vec
    return out


if numba is not None:

    @numba.njit(cache=True)
    def _popcount64(x):
        x = x - ((x >> 1) & 0x5555555555555555)
        x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
        x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
        return (x * 0x0101010101010101) >> 56

    @numba.njit(cache=True)
    def _parity_numba(states, mask):
        out = np.empty(states.shape[0], dtype=np.float64)
        for i in range(states.shape[0]):
            out[i] = 1.0 - 2.0 * (_popcount64(states[i] & mask) & 1)
        return out

    @numba.njit(cache=True)
    def _term_action_numba(states, flip_mask, sign_mask):
        m = states.shape[0]
        images = np.empty(m, dtype=np.int64)
        signs = np.empty(m, dtype=np.float64)
        for i in range(m):
            images[i] = states[i] ^ flip_mask
            signs[i] = 1.0 - 2.0 * (_popcount64(states[i] & sign_mask) & 1)
        return images, signs

    @numba.njit(cache=True)
    def _sector_term_coo_numba(states, index_of, flip_mask, sign_mask):
        m = states.shape[0]
        rows = np.empty(m, dtype=np.int64)
        cols = np.empty(m, dtype=np.int64)
        signs = np.empty(m, dtype=np.float64)
        k = 0
        for i in range(m):
            image = states[i] ^ flip_mask
            row = index_of[image]
            if row >= 0:
                rows[k] = row
                cols[k] = i
                signs[k] = 1.0 - 2.0 * (_popcount64(states[i] & sign_mask) & 1)
                k += 1
        return rows[:k], cols[:k], signs[:k]

    @numba.njit(cache=True)
    def _apply_term_numba(vec, flip_mask, sign_mask, weight):
        n = vec.shape[0]
        out = np.empty_like(vec)
        for r in range(n):
            sign = 1.0 - 2.0 * (_popcount64(r & sign_mask) & 1)
            out[r ^ flip_mask] = weight * sign * vec[r]
        return out


if BACKEND == "numba":
    parity = _parity_numba
    term_action = _term_action_numba
    sector_term_coo = _sector_term_coo_numba
    apply_term = _apply_term_numba
else:
    parity = _parity_numpy
    term_action = _term_action_numpy
    sector_term_coo = _sector_term_coo_numpy
    apply_term = _apply_term_numpy

# Setup-time helper, not performance-critical; one flavour suffices.
popcount = _popcount_numpy
