"""Linear-inversion tomography with the dual frame of a minimal IC-POM."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .ensembles import RngStream, hs_mixed_matrices
from .linalg import hermitian_eig
from .measurements import POM

MAX_CONDITION = 1e10


class RankDeficientError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DualFrame:
    duals: np.ndarray  # (d^2, d, d), Hermitian, Tr(O_i R_j) = delta_ij
    condition: float

    def reconstruct_from_frequencies(self, freqs: np.ndarray) -> np.ndarray:
        return np.tensordot(freqs, self.duals, axes=([-1], [0]))


def dual_frame(pom: POM) -> DualFrame:
    """Unique dual basis of a minimal IC-POM via the inverse Gram matrix."""
    n, d = len(pom), pom.d
    if n != d * d:
        raise RankDeficientError(f"a minimal IC-POM has {d * d} outcomes, got {n}")
    e = hermitian_eig(pom.gram())
    ev = e.eigenvalues
    if ev[0] <= 0 or ev[-1] / ev[0] > MAX_CONDITION:
        cond = np.inf if ev[0] <= 0 else ev[-1] / ev[0]
        raise RankDeficientError(f"outcomes are not linearly independent (Gram condition {cond:.3g})")
    v = e.eigenvectors.real
    inv = (v / ev) @ v.T
    duals = np.tensordot(inv, pom.outcomes, axes=([1], [0]))
    duals = 0.5 * (duals + np.swapaxes(duals, -1, -2).conj())
    return DualFrame(duals, float(ev[-1] / ev[0]))


def born_probabilities(pom: POM, rho: np.ndarray) -> np.ndarray:
    p = pom.probabilities(rho)
    if p.min() < -1e-10:
        raise ValueError(f"negative outcome probability {p.min():.3g}")
    if abs(p.sum() - 1.0) > 1e-8:
        raise ValueError("outcome probabilities do not sum to one")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def simulate_counts(pom: POM, rho: np.ndarray, n: int, rng: RngStream, trials: int | None = None) -> np.ndarray:
    """Multinomial counts by inverse-CDF sampling; shape (k,) or (trials, k)."""
    p = born_probabilities(pom, np.asarray(rho))
    cdf = np.cumsum(p)
    k = len(p)
    t = 1 if trials is None else trials
    u = rng.uniform((t, n))
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), k - 1)
    counts = np.zeros((t, k), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(t), n), idx.reshape(-1)), 1)
    return counts[0] if trials is None else counts


def reconstruct(counts: np.ndarray, dual: DualFrame) -> np.ndarray:
    """``sum_i (n_i / N) R_i``; Hermitian with unit trace, not projected onto states."""
    counts = np.asarray(counts)
    total = counts.sum(axis=-1, keepdims=True)
    if np.any(total == 0):
        raise ValueError("cannot reconstruct from zero counts")
    return dual.reconstruct_from_frequencies(counts / total)


def linear_inversion_mse(pom: POM, dual: DualFrame, rho: np.ndarray, n: int) -> float:
    """Exact ``E||rho_hat - rho||^2_HS`` for multinomial data: ``(sum_i p_i Tr R_i^2 - Tr rho^2) / N``."""
    p = born_probabilities(pom, rho)
    tr_r2 = np.einsum("kij,kji->k", dual.duals, dual.duals).real
    pur = np.einsum("ij,ji->", rho, rho).real
    return float((p @ tr_r2 - pur) / n)


def mse_formula(pom_kind: str, d: int, lambda_max: float | None, purity: float, n: int) -> float:
    """Closed-form mean square error for the SIC-POM (``"sic"``) or its WOM (``"wom"``)."""
    if pom_kind == "sic":
        return (d * d + d - 1 - purity) / n
    if pom_kind == "wom":
        if lambda_max is None:
            raise ValueError("the WOM formula needs lambda_max")
        core = ((d + 1) ** 2 * (d - 1) * (d * lambda_max - 1) ** 2 + 1) / d
        return (core - purity) / n
    raise ValueError(f"unknown POM kind {pom_kind!r}")


@dataclass(frozen=True)
class TomographyRun:
    pom_kind: str
    d: int
    N: int
    trials: int
    state_label: str
    empirical_mse: float
    formula_mse: float
    stderr: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")

    def as_record(self) -> dict:
        return asdict(self)

    @property
    def z_score(self) -> float:
        return (self.empirical_mse - self.formula_mse) / self.stderr if self.stderr > 0 else 0.0


def squared_errors(pom: POM, dual: DualFrame, rho: np.ndarray, n: int, trials: int, rng: RngStream) -> np.ndarray:
    counts = simulate_counts(pom, rho, n, rng, trials=trials)
    est = reconstruct(counts, dual)
    diff = est - rho
    return np.einsum("tij,tij->t", diff.conj(), diff).real


def run_mse(
    pom: POM,
    rho: np.ndarray,
    n: int,
    trials: int,
    rng: RngStream,
    pom_kind: str = "custom",
    state_label: str = "custom",
    formula: float | None = None,
) -> TomographyRun:
    """Monte Carlo mean square error of linear inversion over ``trials`` runs of ``n`` copies."""
    dual = dual_frame(pom)
    errs = squared_errors(pom, dual, rho, n, trials, rng)
    if formula is None:
        formula = linear_inversion_mse(pom, dual, rho, n)
    stderr = float(errs.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("nan")
    return TomographyRun(pom_kind, pom.d, n, trials, state_label, float(errs.mean()), float(formula), stderr)


REFERENCE_STATES = ("mixed", "bell", "random")


def reference_state(kind: str, seed: int = 0) -> np.ndarray:
    """Two-qubit test states: maximally mixed, Bell ``phi+``, or HS-random from ``RngStream(seed, 1)``."""
    if kind == "mixed":
        return np.eye(4, dtype=complex) / 4
    if kind == "bell":
        v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        return np.outer(v, v.conj())
    if kind == "random":
        return hs_mixed_matrices(4, RngStream(seed, 1), 1)[0]
    raise ValueError(f"unknown state {kind!r}; expected one of {REFERENCE_STATES}")


def separable_ball_radius(d: int) -> float:
    """Radius ``sqrt(1 / ((d - 1) d))`` of the largest separable ball around ``1/d``."""
    if d < 4:
        raise ValueError("bipartite dimension d = d1 d2 must be at least 4")
    return float(np.sqrt(1.0 / ((d - 1) * d)))


def required_copies_estimate(d: int) -> float:
    """Order-of-magnitude copy count ``d^8`` for SIC tomography to resolve the separable ball.

    Heuristic chain: ball radius ~ 1/d, about d^2 state-space directions,
    so a target HS error ~ 1/d^3 and MSE ~ 1/d^6 against the ~d^2/N SIC error.
    """
    if d < 4:
        raise ValueError("bipartite dimension d = d1 d2 must be at least 4")
    return float(d) ** 8
