"""Dense complex linear algebra for small bipartite systems.

Matrices are plain ``numpy`` arrays. Every function accepts leading batch
dimensions, so a stack of shape ``(..., n, n)`` is processed in one call.
The basis convention is fixed: ``|i, j> -> i * d2 + j`` (subsystem 1 is the
slow index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10

__all__ = [
    "BipartiteDims",
    "DimensionError",
    "HermitianEig",
    "NotHermitianError",
    "eigvalsh",
    "hermitian_eig",
    "hs_inner",
    "is_hermitian",
    "kron",
    "partial_trace",
    "partial_transpose",
    "psd_sqrt",
    "singular_values",
]


class DimensionError(ValueError):
    """Operand shapes do not match the declared dimensions."""


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class BipartiteDims:
    """Subsystem dimensions ``d1 <= d2`` of a bipartite Hilbert space."""

    d1: int
    d2: int

    def __post_init__(self):
        if self.d1 < 2 or self.d2 < self.d1:
            raise DimensionError(f"need 2 <= d1 <= d2, got d1={self.d1}, d2={self.d2}")

    @property
    def d(self) -> int:
        return self.d1 * self.d2

    def check_square(self, m: np.ndarray) -> None:
        if m.shape[-2:] != (self.d, self.d):
            raise DimensionError(f"expected trailing shape ({self.d}, {self.d}), got {m.shape}")


QUBITS = BipartiteDims(2, 2)


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray  # ascending, shape (..., n)
    eigenvectors: np.ndarray  # columns, shape (..., n, n)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return np.einsum("...ij,...j,...kj->...ik", v, self.eigenvalues, v.conj())


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a`` on the slow index; broadcasts over batches."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 1 and b.ndim == 1:
        return np.einsum("i,j->ij", a, b).reshape(-1)
    out = np.einsum("...ij,...kl->...ikjl", a, b)
    s = out.shape
    return out.reshape(s[:-4] + (s[-4] * s[-3], s[-2] * s[-1]))


def partial_transpose(m: np.ndarray, dims: BipartiteDims) -> np.ndarray:
    """Transpose on subsystem 2: ``out[(i,j),(k,l)] = m[(i,l),(k,j)]``."""
    m = np.asarray(m)
    dims.check_square(m)
    d1, d2 = dims.d1, dims.d2
    t = m.reshape(m.shape[:-2] + (d1, d2, d1, d2))
    return np.swapaxes(t, -1, -3).reshape(m.shape)


def partial_trace(m: np.ndarray, dims: BipartiteDims, keep: int = 1) -> np.ndarray:
    """Reduced operator on subsystem ``keep`` (1 or 2)."""
    m = np.asarray(m)
    dims.check_square(m)
    t = m.reshape(m.shape[:-2] + (dims.d1, dims.d2, dims.d1, dims.d2))
    if keep == 1:
        return np.einsum("...ijkj->...ik", t)
    if keep == 2:
        return np.einsum("...ijil->...jl", t)
    raise ValueError(f"keep must be 1 or 2, got {keep}")


def hs_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hilbert-Schmidt inner product ``Tr(a^dagger b)``."""
    return np.einsum("...ij,...ij->...", np.conj(a), b)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.shape[-1] != m.shape[-2]:
        return False
    return bool(np.all(np.abs(m - np.swapaxes(m, -1, -2).conj()) <= tol))


def _jacobi(h: np.ndarray, vectors: bool, tol: float = 1e-15, max_sweeps: int = 30):
    # Cyclic complex Jacobi on a (n, n, N) stack; the batch axis is last so
    # row/column updates touch contiguous memory.
    n = h.shape[-1]
    a = np.ascontiguousarray(np.moveaxis(h.reshape(-1, n, n), 0, -1)).astype(complex)
    nb = a.shape[-1]
    v = None
    if vectors:
        v = np.zeros((n, n, nb), dtype=complex)
        for i in range(n):
            v[i, i] = 1.0
    scale2 = np.sum(np.abs(a) ** 2, axis=(0, 1))
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off2 = np.sum(np.abs(a[off_mask]) ** 2, axis=0)
        if np.all(off2 <= tol * tol * scale2):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = np.abs(apq)
                active = r > 1e-300
                rs = np.where(active, r, 1.0)
                phc = np.where(active, apq.conj() / rs, 1.0)
                theta = (a[q, q].real - a[p, p].real) / (2.0 * rs)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
                t[~active] = 0.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotation G on (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                gqp = -s * phc
                gqq = c * phc
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = ap * c + aq * gqp
                a[:, q] = ap * s + aq * gqq
                ap = a[p].copy()
                aq = a[q].copy()
                a[p] = ap * c + aq * gqp.conj()
                a[q] = ap * s + aq * gqq.conj()
                if vectors:
                    vp = v[:, p].copy()
                    vq = v[:, q].copy()
                    v[:, p] = vp * c + vq * gqp
                    v[:, q] = vp * s + vq * gqq
    w = np.einsum("iik->ki", a).real
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    if vectors:
        v = np.moveaxis(v, -1, 0)
        v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


_CHUNK = 1 << 12


def _eig_batched(m: np.ndarray, vectors: bool, check: bool):
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if check and not is_hermitian(m):
        err = np.max(np.abs(m - np.swapaxes(m, -1, -2).conj()))
        raise NotHermitianError(f"max off-Hermitian element {err:.3g} exceeds {HERMITIAN_TOL}")
    n = m.shape[-1]
    batch = m.shape[:-2]
    flat = m.reshape(-1, n, n)
    # symmetrize so rounding noise does not leak into the rotations
    flat = 0.5 * (flat + np.swapaxes(flat, -1, -2).conj())
    ws, vs = [], []
    for start in range(0, flat.shape[0], _CHUNK):
        w, v = _jacobi(flat[start:start + _CHUNK], vectors)
        ws.append(w)
        vs.append(v)
    w = np.concatenate(ws).reshape(batch + (n,)) if ws else np.zeros(batch + (n,))
    if not vectors:
        return w, None
    v = np.concatenate(vs).reshape(batch + (n, n)) if vs else np.zeros(batch + (n, n), complex)
    return w, v


def hermitian_eig(m: np.ndarray, check: bool = True) -> HermitianEig:
    """Eigendecomposition of Hermitian matrices by cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like, shape (..., n, n)
        Hermitian within ``HERMITIAN_TOL`` (absolute, elementwise).
    check : bool
        Skip the Hermiticity test when the caller constructed ``m`` Hermitian.

    Returns
    -------
    HermitianEig
        Ascending eigenvalues and orthonormal eigenvector columns.
    """
    w, v = _eig_batched(m, vectors=True, check=check)
    return HermitianEig(w, v)


def eigvalsh(m: np.ndarray, check: bool = True) -> np.ndarray:
    """Ascending eigenvalues only (skips eigenvector accumulation)."""
    return _eig_batched(m, vectors=False, check=check)[0]


def psd_sqrt(m: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Principal square root of positive semidefinite matrices.

    Eigenvalues at or below ``floor`` (negative rounding included) are set to zero.
    """
    e = hermitian_eig(m, check=False)
    ev = e.eigenvalues
    root = np.sqrt(np.where(ev > floor, ev, 0.0))
    v = e.eigenvectors
    return np.einsum("...ij,...j,...kj->...ik", v, root, v.conj())


def _one_sided_jacobi(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 30) -> np.ndarray:
    # Hestenes: orthogonalize columns pairwise; column norms converge to the
    # singular values with absolute error ~ eps * ||a||.
    m, n = a.shape[-2:]
    x = np.ascontiguousarray(np.moveaxis(a.reshape(-1, m, n), 0, -1)).astype(complex)
    for _ in range(max_sweeps):
        converged = True
        for p in range(n - 1):
            for q in range(p + 1, n):
                xp, xq = x[:, p], x[:, q]
                alpha = np.sum(np.abs(xp) ** 2, axis=0)
                beta = np.sum(np.abs(xq) ** 2, axis=0)
                gamma = np.sum(xp.conj() * xq, axis=0)
                r = np.abs(gamma)
                active = r > tol * np.sqrt(alpha * beta)
                if not np.any(active):
                    continue
                converged = False
                rs = np.where(active, r, 1.0)
                phc = np.where(active, gamma.conj() / rs, 1.0)
                theta = (beta - alpha) / (2.0 * rs)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
                t[~active] = 0.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                xp0 = xp.copy()
                x[:, p] = xp0 * c - xq * (s * phc)
                x[:, q] = xp0 * s + xq * (c * phc)
        if converged:
            break
    sv = np.sqrt(np.sum(np.abs(x) ** 2, axis=0)).T
    return np.sort(sv, axis=-1)[..., ::-1]


def singular_values(a: np.ndarray) -> np.ndarray:
    """Descending singular values of a stack of square or tall matrices."""
    a = np.asarray(a)
    batch = a.shape[:-2]
    n = a.shape[-1]
    flat = a.reshape((-1,) + a.shape[-2:])
    parts = [_one_sided_jacobi(flat[i:i + _CHUNK]) for i in range(0, flat.shape[0], _CHUNK)]
    return np.concatenate(parts).reshape(batch + (n,)) if parts else np.zeros(batch + (n,))
