"""Entanglement witnesses with explicit separability thresholds.

A witness here is a positive unit-trace operator ``op`` with threshold
``mu``: every separable state has ``Tr(rho op) <= mu`` and the witness
detects ``rho`` when the mean value exceeds ``mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linalg import QUBITS, BipartiteDims, DimensionError, eigvalsh, partial_transpose
from .states import (
    DensityOperator,
    PureState,
    SeparableStateError,
    StandardFormParams,
    is_entangled_pure,
    schmidt,
    standard_state,
)

DETECTION_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class Witness:
    op: DensityOperator
    threshold: float

    @property
    def dims(self) -> BipartiteDims:
        return self.op.dims

    def mean_value(self, rho: DensityOperator) -> float:
        if rho.dims != self.dims:
            raise DimensionError("witness and state live on different spaces")
        return float(np.einsum("ij,ji->", rho.matrix, self.op.matrix).real)


def detects(w: Witness, rho: DensityOperator) -> bool:
    return w.mean_value(rho) > w.threshold + DETECTION_SLACK


def _require_entangled(psi: PureState) -> None:
    if not is_entangled_pure(psi):
        raise SeparableStateError("a product state cannot serve as a witness")


def pure_state_witness(psi: PureState) -> Witness:
    """``|psi><psi|`` with threshold at the largest squared Schmidt coefficient."""
    _require_entangled(psi)
    lam1 = float(schmidt(psi).lambdas[0])
    return Witness(psi.density(), lam1)


def pt_witness(psi: PureState) -> Witness:
    """Optimal decomposable witness built from the partial transpose of ``psi``.

    The operator is ``(l 1 - psi^T2) / (d l - 1)`` with ``l`` the largest
    eigenvalue of ``psi^T2``; its threshold ``l / (d l - 1)`` is crossed
    exactly when ``Tr(rho psi^T2) < 0``.
    """
    _require_entangled(psi)
    d = psi.dims.d
    pt = partial_transpose(psi.projector(), psi.dims)
    lam_max = float(eigvalsh(pt, check=False)[-1])
    norm = d * lam_max - 1.0
    op = (lam_max * np.eye(d) - pt) / norm
    return Witness(DensityOperator(psi.dims, op), lam_max / norm)


def witness_state(alpha: float) -> DensityOperator:
    """Two-qubit witness state ``((1+p)/2 1 - rho(alpha)^T2) / (1 + 2p)``."""
    params = StandardFormParams.from_alpha(alpha)
    pt = partial_transpose(standard_state(alpha).projector(), QUBITS)
    op = (0.5 * (1 + params.p) * np.eye(4) - pt) / (1 + 2 * params.p)
    return DensityOperator(QUBITS, op)


@dataclass(frozen=True, eq=False)
class WitnessSet:
    """Witnesses in zero-threshold form for vectorized detection.

    Outcome ``i`` fires on ``rho`` when ``Tr(rho A_i) > DETECTION_SLACK``;
    for a thresholded witness ``A_i = op_i - mu_i 1`` (or any positive
    multiple of it).
    """

    observables: np.ndarray  # (n, d, d), Hermitian
    label: str = "witnesses"

    @classmethod
    def from_witnesses(cls, witnesses, label: str = "witnesses") -> WitnessSet:
        obs = [w.op.matrix - w.threshold * np.eye(w.dims.d) for w in witnesses]
        return cls(np.array(obs), label)

    def __len__(self):
        return self.observables.shape[0]

    def values_density(self, rhos: np.ndarray) -> np.ndarray:
        """``Tr(rho A_i)`` for a stack of density matrices, shape (N, n)."""
        return np.einsum("nij,kji->nk", rhos, self.observables).real

    def values_pure(self, vectors: np.ndarray) -> np.ndarray:
        """``<phi|A_i|phi>`` for unit vectors of shape (N, d)."""
        return np.einsum("ni,kij,nj->nk", vectors.conj(), self.observables, vectors).real

    def flags_density(self, rhos: np.ndarray) -> np.ndarray:
        return self.values_density(rhos) > DETECTION_SLACK

    def flags_pure(self, vectors: np.ndarray) -> np.ndarray:
        return self.values_pure(vectors) > DETECTION_SLACK


@dataclass(frozen=True, eq=False)
class QSpectrum:
    """Eigenvalue groups of ``(lambda_1 1 - |psi><psi|)^T2`` by Schmidt data."""

    diagonal: np.ndarray  # lambda_1 - lambda_i, i = 1..d1
    symmetric: np.ndarray  # lambda_1 - sqrt(lambda_i lambda_j), i < j
    antisymmetric: np.ndarray  # lambda_1 + sqrt(lambda_i lambda_j), i < j
    remainder: np.ndarray  # lambda_1, multiplicity d1 (d2 - d1)

    @classmethod
    def from_schmidt(cls, lambdas, dims: BipartiteDims) -> QSpectrum:
        lam = np.zeros(dims.d1)
        lam[: len(lambdas)] = lambdas
        l1 = lam[0]
        iu = np.triu_indices(dims.d1, k=1)
        cross = np.sqrt(np.outer(lam, lam)[iu])
        return cls(
            diagonal=l1 - lam,
            symmetric=l1 - cross,
            antisymmetric=l1 + cross,
            remainder=np.full(dims.d1 * (dims.d2 - dims.d1), l1),
        )

    def values(self) -> np.ndarray:
        return np.sort(np.concatenate([self.diagonal, self.symmetric, self.antisymmetric, self.remainder]))


def q_operator(psi: PureState) -> tuple[np.ndarray, QSpectrum]:
    lam = schmidt(psi).lambdas
    w = lam[0] * np.eye(psi.dims.d) - psi.projector()
    return partial_transpose(w, psi.dims), QSpectrum.from_schmidt(lam, psi.dims)


def pure_witness_detection_ratio(lambda1: float, dims: BipartiteDims) -> float:
    """Haar fraction of pure states detected by a pure-state witness: ``(1 - lambda1)^(d - 1)``."""
    if not 1.0 / dims.d1 - 1e-12 <= lambda1 <= 1.0 + 1e-12:
        raise ValueError(f"lambda1 must lie in [1/d1, 1], got {lambda1}")
    return float(max(0.0, 1.0 - lambda1) ** (dims.d - 1))


def q_mean_var(q: DensityOperator | np.ndarray) -> tuple[float, float]:
    """Haar mean and variance of ``<Phi|Q^T2|Phi>`` for a unit-trace positive ``Q``."""
    m = q.matrix if isinstance(q, DensityOperator) else np.asarray(q)
    d = m.shape[-1]
    dev = m - np.eye(d) / d
    var = float(np.einsum("ij,ji->", dev, dev).real) / (d * (d + 1))
    return 1.0 / d, var


def _gamma_ratio(a: Fraction, m: int) -> Fraction:
    # Gamma(a) / Gamma(a + m) for integer m >= 0
    out = Fraction(1)
    for i in range(m):
        out /= a + i
    return out


def me_pt_witness_detection_ratio_exact(d1: int) -> Fraction:
    """Exact rational value of the Haar detection fraction for ``W = psi_me^T2``.

    Both Gamma ratios in the closed-form sum have arguments differing by an
    integer, so every term, and the total, is rational.
    """
    if d1 < 2:
        raise ValueError("d1 must be at least 2")
    n2 = d1 * d1
    sym = d1 * (d1 + 1) // 2
    anti = d1 * (d1 - 1) // 2
    # Gamma(d1^2) / Gamma(d1(d1+1)/2) = product of the integers sym .. n2 - 1
    prefactor = Fraction(math.prod(range(sym, n2)), 2**n2)
    total = Fraction(0)
    for k in range(d1 + 1):
        term = math.comb(d1, k) * _gamma_ratio(Fraction(k + 1, 2), anti)
        total += -term if k % 2 else term
    return prefactor * total


def me_pt_witness_detection_ratio(d1: int) -> float:
    return float(me_pt_witness_detection_ratio_exact(d1))


def me_pt_witness_detection_limit() -> float:
    """Large-``d1`` limit: the standard normal tail beyond one, ``0.5 erfc(1/sqrt 2)``."""
    return 0.5 * math.erfc(1.0 / math.sqrt(2.0))


def _check_angle(alpha: float) -> None:
    if not 0.0 < alpha <= math.pi / 4 + 1e-12:
        raise ValueError(f"angle must lie in (0, pi/4], got {alpha}")


def aligned_pure_margin(alpha1: float, alpha2: float) -> float:
    """``Tr(rho(a1) rho(a2)) - cos(a2)^2 = sin(a1) sin(2 a2 - a1)``."""
    return math.sin(alpha1) * math.sin(2 * alpha2 - alpha1)


def aligned_witness_value(alpha1: float, alpha2: float) -> float:
    """``Tr(rho_w(a1) rho(a2)^T2) = sin(a2) sin(a2 - 2 a1) / (1 + 2 p1)``."""
    p1 = math.cos(2 * alpha1)
    return math.sin(alpha2) * math.sin(alpha2 - 2 * alpha1) / (1 + 2 * p1)


def detects_aligned_pure(alpha1: float, alpha2: float) -> bool:
    """Pure witness ``rho(alpha2)`` detects aligned ``rho(alpha1)``, i.e. ``2 alpha2 > alpha1``."""
    _check_angle(alpha1)
    _check_angle(alpha2)
    return aligned_pure_margin(alpha1, alpha2) > DETECTION_SLACK


def detects_aligned_witness(alpha1: float, alpha2: float) -> bool:
    """Witness state ``rho_w(alpha2)`` detects aligned ``rho_w(alpha1)``, i.e. ``2 alpha1 > alpha2``."""
    _check_angle(alpha1)
    _check_angle(alpha2)
    return aligned_witness_value(alpha1, alpha2) < -DETECTION_SLACK


__all__ = [
    "QSpectrum",
    "Witness",
    "WitnessSet",
    "detects",
    "detects_aligned_pure",
    "detects_aligned_witness",
    "me_pt_witness_detection_limit",
    "me_pt_witness_detection_ratio",
    "me_pt_witness_detection_ratio_exact",
    "pt_witness",
    "pure_state_witness",
    "pure_witness_detection_ratio",
    "q_mean_var",
    "q_operator",
    "witness_state",
]
