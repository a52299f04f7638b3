"""Seeded samplers for random pure states, unitaries and mixed states.

All randomness flows through :class:`RngStream`, a Philox4x64-10 counter
generator keyed by ``(master_seed, stream_index)``. Uniforms take the top
53 bits of each 64-bit word; complex Gaussians use Box-Muller on those
uniforms. Nothing here touches numpy's default distributions, so a stream
reproduces bit-for-bit wherever Philox does.
"""

from __future__ import annotations

import numpy as np

from .linalg import BipartiteDims, kron
from .states import DensityOperator, PureState

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0**-53


def parse_seed(text: str | int) -> int:
    """Accept a decimal or ``0x``-prefixed hexadecimal seed."""
    if isinstance(text, int):
        value = text
    else:
        value = int(text.strip(), 0)
    if value < 0 or value > _MASK64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {text!r}")
    return value


class RngStream:
    """Independent random stream ``(master_seed, stream_index)``.

    Two streams with equal keys yield identical draws; streams with
    different indices are statistically independent (distinct Philox keys).
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        self.master_seed = int(master_seed) & _MASK64
        self.stream_index = int(stream_index) & _MASK64
        key = np.array([self.master_seed, self.stream_index], dtype=np.uint64)
        self._bits = np.random.Philox(key=key)

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed:#x}, stream_index={self.stream_index})"

    def raw(self, n: int) -> np.ndarray:
        return self._bits.random_raw(n)

    def uniform(self, shape=()) -> np.ndarray:
        """Uniform doubles on [0, 1)."""
        n = int(np.prod(shape, dtype=np.int64))
        u = (self.raw(n) >> np.uint64(11)).astype(np.float64) * _TWO_M53
        return u.reshape(shape)

    def _uniform_open(self, n: int) -> np.ndarray:
        # (0, 1]: safe under log
        return ((self.raw(n) >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_M53

    def complex_normal(self, shape=()) -> np.ndarray:
        """Standard complex Gaussians, ``E|z|^2 = 1``."""
        n = int(np.prod(shape, dtype=np.int64))
        u1 = self._uniform_open(n)
        u2 = self.uniform((n,))
        z = np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)
        return z.reshape(shape)

    def normal(self, shape=()) -> np.ndarray:
        """Real standard normals (real parts of Box-Muller pairs, scaled)."""
        return (np.sqrt(2.0) * self.complex_normal(shape).real).reshape(shape)


def ginibre(d: int, rng: RngStream, size: int | None = None) -> np.ndarray:
    shape = (d, d) if size is None else (size, d, d)
    return rng.complex_normal(shape)


def haar_pure_vectors(d: int, rng: RngStream, size: int) -> np.ndarray:
    """``size`` Haar-random unit vectors in C^d, shape (size, d)."""
    z = rng.complex_normal((size, d))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def haar_pure(dims: BipartiteDims, rng: RngStream) -> PureState:
    return PureState(dims, haar_pure_vectors(dims.d, rng, 1)[0])


def haar_unitaries(d: int, rng: RngStream, size: int) -> np.ndarray:
    """Haar unitaries by QR of Ginibre matrices with the diagonal phases of R removed."""
    q, r = np.linalg.qr(ginibre(d, rng, size))
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[..., None, :]


def haar_unitary(d: int, rng: RngStream) -> np.ndarray:
    return haar_unitaries(d, rng, 1)[0]


def _normalize_trace(m: np.ndarray) -> np.ndarray:
    m = 0.5 * (m + np.swapaxes(m, -1, -2).conj())
    tr = np.trace(m, axis1=-2, axis2=-1).real
    return m / tr[..., None, None]


def hs_mixed_matrices(d: int, rng: RngStream, size: int) -> np.ndarray:
    """Hilbert-Schmidt measure: ``G G^dagger / Tr(G G^dagger)``."""
    g = ginibre(d, rng, size)
    return _normalize_trace(g @ np.swapaxes(g, -1, -2).conj())


def bures_mixed_matrices(d: int, rng: RngStream, size: int) -> np.ndarray:
    """Bures measure: ``(1 + U) G G^dagger (1 + U^dagger)``, trace-normalized."""
    g = ginibre(d, rng, size)
    u = haar_unitaries(d, rng, size)
    a = (np.eye(d) + u) @ g
    return _normalize_trace(a @ np.swapaxes(a, -1, -2).conj())


def hs_mixed(dims: BipartiteDims, rng: RngStream) -> DensityOperator:
    return DensityOperator(dims, hs_mixed_matrices(dims.d, rng, 1)[0])


def bures_mixed(dims: BipartiteDims, rng: RngStream) -> DensityOperator:
    return DensityOperator(dims, bures_mixed_matrices(dims.d, rng, 1)[0])


def random_product_vectors(dims: BipartiteDims, rng: RngStream, size: int) -> np.ndarray:
    a = haar_pure_vectors(dims.d1, rng, size)
    b = haar_pure_vectors(dims.d2, rng, size)
    return np.einsum("ni,nj->nij", a, b).reshape(size, dims.d)


def random_product_pure(dims: BipartiteDims, rng: RngStream) -> PureState:
    return PureState(dims, random_product_vectors(dims, rng, 1)[0])


def random_local_unitaries(rng: RngStream, size: int, d1: int = 2, d2: int = 2) -> np.ndarray:
    """Stack of ``U1 x U2`` with independent Haar factors."""
    return kron(haar_unitaries(d1, rng, size), haar_unitaries(d2, rng, size))
