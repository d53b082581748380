import numpy as np
import pytest

from agtsim.spectral import chain_pair, pagt_pair


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def chain_spectrum(L: int, omega: float, s: float) -> np.ndarray:
    """Sorted eigenvalues of the chain-frame interpolation, shift restored."""
    pair = chain_pair(L, omega)
    mat = (1.0 - s) * pair.ini.to_dense() + s * pair.fin.to_dense()
    return np.linalg.eigvalsh(mat) + pair.dropped_shift


def raw_spectrum(L: int, omega: float, s: float) -> np.ndarray:
    """Sorted eigenvalues of the original teleportation-pair interpolation."""
    h_ini, h_fin = pagt_pair(L, omega)
    return np.linalg.eigvalsh((1.0 - s) * h_ini.to_dense() + s * h_fin.to_dense())
