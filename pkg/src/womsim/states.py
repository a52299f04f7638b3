"""Bipartite pure and mixed states and the entanglement quantities built on them.

Negativity convention: ``N(rho) = ||rho^T2||_1 - 1``, so a Bell state has
negativity 1 (twice the sum-of-negative-eigenvalues convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .linalg import (
    QUBITS,
    BipartiteDims,
    DimensionError,
    eigvalsh,
    hermitian_eig,
    is_hermitian,
    partial_trace,
    partial_transpose,
    psd_sqrt,
    singular_values,
)

ENTANGLED_TOL = 1e-9
PPT_TOL = 1e-9
# eigenvalues of a unit-trace rho below this are rounding; dropping them moves rho by < 4e-14 in trace norm
_RANK_FLOOR = 1e-14

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_YY = np.kron(SIGMA_Y, SIGMA_Y)


class SeparableStateError(ValueError):
    """Raised where an entangled input is required but a product state was given."""


@dataclass(frozen=True, eq=False)
class PureState:
    dims: BipartiteDims
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.shape != (self.dims.d,):
            raise DimensionError(f"expected {self.dims.d} amplitudes, got {a.shape[0]}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized (norm {norm!r})")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, dims: BipartiteDims, amplitudes) -> PureState:
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(dims, a / np.linalg.norm(a))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityOperator:
        return DensityOperator(self.dims, self.projector())

    def amplitude_matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims.d1, self.dims.d2)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    dims: BipartiteDims
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        self.dims.check_square(m)
        if not is_hermitian(m):
            raise ValueError("density operator must be Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density operator must have unit trace (got {tr!r})")
        m = 0.5 * (m + m.conj().T)
        if eigvalsh(m, check=False)[0] < -1e-9:
            raise ValueError("density operator must be positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def maximally_mixed(cls, dims: BipartiteDims) -> DensityOperator:
        return cls(dims, np.eye(dims.d, dtype=complex) / dims.d)


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    coefficients: np.ndarray  # sqrt(lambda_i), nonincreasing, length d1
    left_basis: np.ndarray  # columns u_i, shape (d1, d1)
    right_basis: np.ndarray  # columns v_i, shape (d2, d1)

    @property
    def lambdas(self) -> np.ndarray:
        return self.coefficients**2

    def reconstruct(self) -> np.ndarray:
        return np.einsum("i,ai,bi->ab", self.coefficients, self.left_basis, self.right_basis).reshape(-1)


@dataclass(frozen=True)
class StandardFormParams:
    alpha: float
    q: float
    p: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p", float(np.sqrt(max(0.0, 1.0 - self.q * self.q))))

    @classmethod
    def from_alpha(cls, alpha: float) -> StandardFormParams:
        if not 0.0 < alpha <= np.pi / 4 + 1e-12:
            raise ValueError(f"alpha must lie in (0, pi/4], got {alpha}")
        return cls(float(alpha), float(np.sin(2 * alpha)))

    @classmethod
    def from_concurrence(cls, q: float) -> StandardFormParams:
        if not 0.0 < q <= 1.0 + 1e-12:
            raise ValueError(f"concurrence must lie in (0, 1], got {q}")
        q = min(float(q), 1.0)
        return cls(0.5 * float(np.arcsin(q)), q)


def schmidt(psi: PureState) -> SchmidtForm:
    """Schmidt decomposition from the eigenvectors of the subsystem-1 reduced operator."""
    a = psi.amplitude_matrix()
    rho1 = a @ a.conj().T
    e = hermitian_eig(rho1, check=False)
    lam = np.clip(e.eigenvalues[::-1], 0.0, None)
    u = e.eigenvectors[:, ::-1]
    coeffs = np.sqrt(lam)
    # v_i = (u_i^dagger A)^T / sqrt(lambda_i), completed to an orthonormal set
    raw = (u.conj().T @ a).T
    v = np.zeros((psi.dims.d2, psi.dims.d1), dtype=complex)
    for i, c in enumerate(coeffs):
        if c > 1e-7:
            v[:, i] = raw[:, i] / c
        else:
            cand = raw[:, i].copy()
            for j in range(i):
                cand -= v[:, j] * np.vdot(v[:, j], cand)
            if np.linalg.norm(cand) < 1e-12:
                basis = np.eye(psi.dims.d2, dtype=complex)
                for col in basis.T:
                    cand = col.copy()
                    for j in range(i):
                        cand -= v[:, j] * np.vdot(v[:, j], cand)
                    if np.linalg.norm(cand) > 1e-6:
                        break
            v[:, i] = cand / np.linalg.norm(cand)
    return SchmidtForm(coeffs, u, v)


def _minor_sum(a: np.ndarray) -> float:
    # sum of squared 2x2 minors = e2(lambda), exact to rounding even for product states
    d1, d2 = a.shape
    total = 0.0
    for i, k in combinations(range(d1), 2):
        for j, l in combinations(range(d2), 2):
            total += abs(a[i, j] * a[k, l] - a[i, l] * a[k, j]) ** 2
    return total


def generalized_concurrence(psi: PureState) -> float:
    """``2 sqrt(sum_{i<j} lambda_i lambda_j)``; equals the concurrence for two qubits."""
    return 2.0 * float(np.sqrt(_minor_sum(psi.amplitude_matrix())))


def is_entangled_pure(psi: PureState) -> bool:
    return generalized_concurrence(psi) > ENTANGLED_TOL


def _require_qubits(dims: BipartiteDims) -> None:
    if dims != QUBITS:
        raise DimensionError(f"two-qubit input required, got {dims.d1}x{dims.d2}")


def pure_concurrence(psi: PureState) -> float:
    _require_qubits(psi.dims)
    a = psi.amplitudes
    return float(min(1.0, 2.0 * abs(a[0] * a[3] - a[1] * a[2])))


def pure_concurrences(amplitudes: np.ndarray) -> np.ndarray:
    """Vectorized two-qubit concurrence for amplitude rows of shape (..., 4)."""
    a = np.asarray(amplitudes)
    return np.minimum(1.0, 2.0 * np.abs(a[..., 0] * a[..., 3] - a[..., 1] * a[..., 2]))


def standard_state(alpha: float) -> PureState:
    """``cos(alpha)|00> + sin(alpha)|11>``."""
    return PureState(QUBITS, np.array([np.cos(alpha), 0, 0, np.sin(alpha)], dtype=complex))


def standard_form(psi: PureState) -> StandardFormParams:
    _require_qubits(psi.dims)
    q = pure_concurrence(psi)
    if q <= ENTANGLED_TOL:
        raise SeparableStateError("separable state has no standard form")
    return StandardFormParams.from_concurrence(q)


def flip(rho: np.ndarray) -> np.ndarray:
    """Spin flip ``(sy x sy) rho^* (sy x sy)``."""
    return _YY @ np.conj(rho) @ _YY


def wootters_concurrences(rhos: np.ndarray) -> np.ndarray:
    """Vectorized Wootters concurrence for a stack of two-qubit density matrices."""
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.shape[-2:] != (4, 4):
        raise DimensionError(f"two-qubit density matrices required, got shape {rhos.shape}")
    # the decreasing mu_i are the singular values of sqrt(rho) sqrt(rho~), and
    # sqrt(rho~) is the spin flip of sqrt(rho)
    root = psd_sqrt(rhos, floor=_RANK_FLOOR)
    mu = singular_values(root @ flip(root))
    c = mu[..., 0] - mu[..., 1] - mu[..., 2] - mu[..., 3]
    return np.clip(c, 0.0, 1.0)


def wootters_concurrence(rho: DensityOperator) -> float:
    _require_qubits(rho.dims)
    return float(wootters_concurrences(rho.matrix))


def pt_eigenvalues(rho: DensityOperator) -> np.ndarray:
    return eigvalsh(partial_transpose(rho.matrix, rho.dims), check=False)


def negativity(rho: DensityOperator) -> float:
    """``||rho^T2||_1 - 1``."""
    ev = pt_eigenvalues(rho)
    return float(max(0.0, np.sum(np.abs(ev)) - 1.0))


def purity(rho: DensityOperator) -> float:
    m = rho.matrix
    return float(np.einsum("ij,ji->", m, m).real)


def fidelity(psi: PureState, phi: PureState) -> float:
    if psi.dims != phi.dims:
        raise DimensionError("states live on different spaces")
    return float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)


def mixed_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    r = psd_sqrt(rho)
    inner = r @ sigma @ r
    return float(np.sum(np.sqrt(np.clip(eigvalsh(0.5 * (inner + inner.conj().T), check=False), 0, None))) ** 2)


def bloch_vector(rho2: np.ndarray) -> np.ndarray:
    """Bloch vector of a single-qubit operator."""
    return np.array([2 * rho2[0, 1].real, -2 * rho2[0, 1].imag, (rho2[0, 0] - rho2[1, 1]).real])


def _parallel(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    return np.dot(a, b) > 0 and np.linalg.norm(np.cross(a, b)) <= tol * na * nb


def is_aligned(psi: PureState, phi: PureState, tol: float = 1e-8) -> bool:
    """Whether one local unitary brings both two-qubit states to standard form.

    Maximally entangled states (zero Bloch vectors) count as aligned with
    every state. Otherwise both reduced Bloch vectors must point the same
    way and the state fidelity must equal the reduced-state fidelity.
    """
    _require_qubits(psi.dims)
    _require_qubits(phi.dims)
    rp, rf = psi.projector(), phi.projector()
    pa = [bloch_vector(partial_trace(rp, QUBITS, k)) for k in (1, 2)]
    fa = [bloch_vector(partial_trace(rf, QUBITS, k)) for k in (1, 2)]
    if np.linalg.norm(pa[0]) < tol or np.linalg.norm(fa[0]) < tol:
        return True
    if not (_parallel(pa[0], fa[0], tol) and _parallel(pa[1], fa[1], tol)):
        return False
    reduced = mixed_fidelity(partial_trace(rp, QUBITS, 1), partial_trace(rf, QUBITS, 1))
    return abs(fidelity(psi, phi) - reduced) <= tol


def is_separable_2x2(rho: DensityOperator) -> bool:
    """PPT test, exact for two qubits."""
    _require_qubits(rho.dims)
    return bool(pt_eigenvalues(rho)[0] >= -PPT_TOL)


def pt_min_eigenvalues(rhos: np.ndarray, dims: BipartiteDims = QUBITS) -> np.ndarray:
    return eigvalsh(partial_transpose(rhos, dims), check=False)[..., 0]


def bell_state(which: str = "phi+") -> PureState:
    s = 1 / np.sqrt(2)
    amps = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }[which]
    return PureState(QUBITS, np.array(amps, dtype=complex))


def maximally_entangled(d1: int) -> PureState:
    dims = BipartiteDims(d1, d1)
    a = np.zeros(dims.d, dtype=complex)
    a[[i * d1 + i for i in range(d1)]] = 1 / np.sqrt(d1)
    return PureState(dims, a)


def schmidt_state(lambdas, dims: BipartiteDims) -> PureState:
    """``sum_i sqrt(lambda_i) |ii>`` for nonincreasing ``lambdas`` of length <= d1."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.size > dims.d1:
        raise DimensionError("more Schmidt coefficients than d1")
    a = np.zeros(dims.d, dtype=complex)
    for i, v in enumerate(lam):
        a[i * dims.d2 + i] = np.sqrt(v)
    return PureState.normalized(dims, a)


__all__ = [
    "DensityOperator",
    "PureState",
    "SchmidtForm",
    "SeparableStateError",
    "StandardFormParams",
    "bell_state",
    "fidelity",
    "is_aligned",
    "is_separable_2x2",
    "maximally_entangled",
    "negativity",
    "pure_concurrence",
    "pure_concurrences",
    "purity",
    "schmidt",
    "schmidt_state",
    "standard_form",
    "standard_state",
    "wootters_concurrence",
    "wootters_concurrences",
]
