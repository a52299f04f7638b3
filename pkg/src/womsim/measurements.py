"""Measurements: POMs, Heisenberg-Weyl SICs and witness operator measurements (WOMs)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares, minimize

from .ensembles import RngStream
from .linalg import QUBITS, BipartiteDims, DimensionError, eigvalsh, hs_inner, partial_transpose
from .states import DensityOperator, PureState, generalized_concurrence, pure_concurrences
from .witnesses import DETECTION_SLACK, Witness, WitnessSet

log = logging.getLogger(__name__)

DEFAULT_SEARCH_SEED = 0xC0FFEE
UNIFORM_CONCURRENCE_D4 = np.sqrt(2 / 5)


class SeparableOutcomeError(ValueError):
    """A POM outcome projects onto a product state, so it cannot become a witness."""


class FiducialSearchError(RuntimeError):
    def __init__(self, message: str, best_potential: float):
        super().__init__(f"{message} (best frame potential excess {best_potential:.3e})")
        self.best_potential = best_potential


def _proj(vectors: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nj->nij", vectors, vectors.conj())


@dataclass(frozen=True, eq=False)
class POM:
    """Positive operators summing to the identity.

    Rank-one POMs also carry ``weights`` and unit ``vectors`` with
    ``outcomes[i] = weights[i] |v_i><v_i|``.
    """

    outcomes: np.ndarray  # (n, d, d)
    dims: BipartiteDims | None = None
    weights: np.ndarray | None = None
    vectors: np.ndarray | None = None

    def __post_init__(self):
        o = np.asarray(self.outcomes, dtype=complex)
        if o.ndim != 3 or o.shape[1] != o.shape[2]:
            raise DimensionError(f"outcomes must have shape (n, d, d), got {o.shape}")
        if self.dims is not None and self.dims.d != o.shape[1]:
            raise DimensionError("outcome size does not match dims")
        if eigvalsh(o).min() < -1e-9:
            raise ValueError("POM outcomes must be positive semidefinite")
        completeness = np.abs(o.sum(axis=0) - np.eye(o.shape[1])).max()
        if completeness > 1e-8:
            raise ValueError(f"POM outcomes do not sum to the identity (error {completeness:.3g})")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if abs(w.sum() - o.shape[1]) > 1e-8:
                raise ValueError("rank-one weights must sum to d")
            object.__setattr__(self, "weights", w)
        object.__setattr__(self, "outcomes", o)

    @classmethod
    def rank_one(cls, weights, vectors, dims: BipartiteDims | None = None) -> POM:
        v = np.asarray(vectors, dtype=complex)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
        w = np.asarray(weights, dtype=float)
        return cls(w[:, None, None] * _proj(v), dims=dims, weights=w, vectors=v)

    @property
    def d(self) -> int:
        return self.outcomes.shape[1]

    @property
    def is_rank_one(self) -> bool:
        return self.vectors is not None

    def __len__(self):
        return self.outcomes.shape[0]

    def projectors(self) -> np.ndarray:
        if self.vectors is None:
            raise ValueError("not a rank-one POM")
        return _proj(self.vectors)

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        return np.einsum("kij,ji->k", self.outcomes, rho).real

    def gram(self) -> np.ndarray:
        """Real symmetric Gram matrix ``Tr(O_i O_j)``."""
        return hs_inner(self.outcomes[:, None], self.outcomes[None, :]).real

    def as_witnesses(self) -> WitnessSet:
        """Rank-one outcomes used directly as pure-state witnesses."""
        if self.dims is None:
            raise ValueError("witness use needs a bipartite POM")
        lam1 = np.array([_largest_schmidt_weight(v, self.dims) for v in self.vectors])
        obs = self.projectors() - lam1[:, None, None] * np.eye(self.d)
        return WitnessSet(obs, "pom")


def _largest_schmidt_weight(v: np.ndarray, dims: BipartiteDims) -> float:
    a = v.reshape(dims.d1, dims.d2)
    return float(eigvalsh(a @ a.conj().T, check=False)[-1])


def is_ic(pom: POM, rtol: float = 1e-8) -> bool:
    """Informational completeness: outcomes span all d^2 operator dimensions."""
    flat = pom.outcomes.reshape(len(pom), -1)
    sv = np.linalg.svd(flat, compute_uv=False)
    rank = int(np.sum(sv > rtol * sv[0]))
    return rank == pom.d**2


def heisenberg_weyl(d: int) -> np.ndarray:
    """Displacements ``D_jk = X^j Z^k`` stacked at index ``j * d + k``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    ops = np.empty((d * d, d, d), dtype=complex)
    xj = np.eye(d, dtype=complex)
    for j in range(d):
        zk = np.eye(d, dtype=complex)
        for k in range(d):
            ops[j * d + k] = xj @ zk
            zk = zk @ z
        xj = xj @ x
    return ops


@lru_cache(maxsize=None)
def _hw(d: int) -> np.ndarray:
    ops = heisenberg_weyl(d)
    ops.setflags(write=False)
    return ops


def frame_potential(v: np.ndarray) -> float:
    """``sum over nontrivial displacements of |<v|D|v>|^4`` for a unit vector ``v``."""
    e = np.einsum("i,kij,j->k", v.conj(), _hw(len(v)), v)
    return float(np.sum(np.abs(e[1:]) ** 4))


def sic_potential_floor(d: int) -> float:
    return (d - 1) / (d + 1)


@dataclass(frozen=True, eq=False)
class Fiducial:
    amplitudes: np.ndarray
    d: int = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", a / np.linalg.norm(a))
        object.__setattr__(self, "d", a.shape[0])

    def orbit(self) -> np.ndarray:
        return _hw(self.d) @ self.amplitudes

    @property
    def overlaps(self) -> np.ndarray:
        orb = self.orbit()
        return np.abs(orb.conj() @ orb.T) ** 2

    def overlap_error(self) -> float:
        ov = self.overlaps
        off = ov[~np.eye(len(ov), dtype=bool)]
        return float(np.abs(off - 1 / (self.d + 1)).max())

    def orbit_concurrences(self) -> np.ndarray:
        """Concurrence of every orbit state under ``|e_0..e_3> = |00>,|01>,|10>,|11>``."""
        if self.d != 4:
            raise DimensionError("orbit concurrences need d = 4")
        return pure_concurrences(self.orbit())

    def pure_state(self) -> PureState:
        if self.d != 4:
            raise DimensionError("only the d = 4 fiducial is a two-qubit state")
        return PureState(QUBITS, self.amplitudes)

    def frame_potential(self) -> float:
        return frame_potential(self.amplitudes)


def _unpack(x: np.ndarray) -> np.ndarray:
    n = x.size // 2
    v = x[:n] + 1j * x[n:]
    return v / np.linalg.norm(v)


def _residuals(x: np.ndarray, d: int, target_conc: float | None) -> np.ndarray:
    v = _unpack(x)
    hw = _hw(d)
    e = np.einsum("i,kij,j->k", v.conj(), hw, v)
    r = np.abs(e[1:]) ** 2 - 1.0 / (d + 1)
    if target_conc is None:
        return r
    # X is not a local unitary, so the orbit splits into the classes of v and X v
    sq = pure_concurrences(np.stack([v, hw[d] @ v])) ** 2
    return np.concatenate([r, sq - target_conc**2])


def sic_fiducial_search(
    d: int,
    rng: RngStream,
    restarts: int = 200,
    uniform_concurrence: bool | None = None,
    tol: float = 1e-10,
) -> Fiducial:
    """Find a Heisenberg-Weyl SIC fiducial by frame-potential minimization.

    Each restart runs BFGS on the frame potential (plus, when
    ``uniform_concurrence`` is set, a penalty pulling both orbit classes to
    concurrence sqrt(2/5)) and then polishes the overlap residuals with
    Levenberg-Marquardt. The candidate is accepted only if every orbit
    overlap is within ``tol`` of ``1/(d+1)``.

    ``uniform_concurrence`` defaults to True for d = 4 and is only allowed
    there. Raises :class:`FiducialSearchError` after ``restarts`` failures.
    """
    if not 2 <= d <= 6:
        raise ValueError("the search supports 2 <= d <= 6")
    if uniform_concurrence is None:
        uniform_concurrence = d == 4
    if uniform_concurrence and d != 4:
        raise ValueError("the uniform-concurrence filter applies to d = 4 only")
    target = float(UNIFORM_CONCURRENCE_D4) if uniform_concurrence else None
    floor = sic_potential_floor(d)
    best = np.inf

    def objective(x):
        r = _residuals(x, d, target)
        v = _unpack(x)
        pen = 0.0 if target is None else float(np.sum(r[d * d - 1:] ** 2))
        return frame_potential(v) + pen

    for attempt in range(restarts):
        start = RngStream(rng.master_seed, (rng.stream_index << 16) + attempt).complex_normal(d)
        x0 = np.concatenate([start.real, start.imag])
        coarse = minimize(objective, x0, method="BFGS")
        fine = least_squares(_residuals, coarse.x, args=(d, target), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        fid = Fiducial(_unpack(fine.x))
        excess = fid.frame_potential() - floor
        best = min(best, abs(excess))
        if fid.overlap_error() > tol or abs(excess) > 1e-12:
            continue
        if target is not None and np.abs(fid.orbit_concurrences() - target).max() > tol:
            continue
        log.info("SIC fiducial (d=%d) found on restart %d", d, attempt)
        return fid
    raise FiducialSearchError(f"no SIC fiducial found in {restarts} restarts", best)


def save_fiducial(fid: Fiducial, path: str | Path) -> None:
    lines = [f"d={fid.d}"] + [f"{a.real:.17g} {a.imag:.17g}" for a in fid.amplitudes]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_fiducial(text: str) -> Fiducial:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("d="):
        raise ValueError("fiducial file must start with a 'd=<dim>' line")
    d = int(lines[0][2:])
    if len(lines) != d + 1:
        raise ValueError(f"expected {d} amplitude lines, got {len(lines) - 1}")
    amps = []
    for ln in lines[1:]:
        re, im = ln.split()
        amps.append(complex(float(re), float(im)))
    return Fiducial(np.array(amps))


def load_fiducial(path: str | Path | None = None, tol: float = 1e-8) -> Fiducial:
    """Read a cached fiducial (the shipped d = 4 one by default) and verify it."""
    if path is None:
        text = resources.files("womsim.data").joinpath("fiducial_d4.txt").read_text()
    else:
        text = Path(path).read_text()
    fid = parse_fiducial(text)
    err = fid.overlap_error()
    if err > tol:
        raise ValueError(f"cached fiducial is not a SIC fiducial (overlap error {err:.3g})")
    return fid


def sic_pom_from_fiducial(fid: Fiducial) -> POM:
    d = fid.d
    dims = QUBITS if d == 4 else None
    return POM.rank_one(np.full(d * d, 1.0 / d), fid.orbit(), dims=dims)


@dataclass(frozen=True, eq=False)
class WOM:
    """Witness operator measurement derived from a rank-one POM.

    ``outcomes[i] = w_i (lambda_max 1 - rho_i^T2) / (d lambda_max - 1)``; the
    normalized outcomes are witnesses sharing threshold ``mu``.
    """

    source: POM
    lambda_max: float
    outcomes: np.ndarray
    witnesses: tuple[Witness, ...]
    partial_transposes: np.ndarray  # rho_i^T2

    @property
    def normalization(self) -> float:
        return self.source.d * self.lambda_max - 1.0

    @property
    def threshold(self) -> float:
        return self.lambda_max / self.normalization

    def as_pom(self) -> POM:
        return POM(self.outcomes, dims=self.source.dims)

    def as_witnesses(self) -> WitnessSet:
        # Tr(rho rho_iw) > mu  <=>  Tr(rho rho_i^T2) < 0
        return WitnessSet(-self.partial_transposes, "wom")


def wom_from_rank_one(pom: POM) -> WOM:
    if not pom.is_rank_one or pom.dims is None:
        raise ValueError("a bipartite rank-one POM is required")
    dims = pom.dims
    for i, v in enumerate(pom.vectors):
        if generalized_concurrence(PureState(dims, v)) <= 1e-9:
            raise SeparableOutcomeError(f"outcome {i} projects onto a product state")
    pts = partial_transpose(pom.projectors(), dims)
    lam_max = float(eigvalsh(pts, check=False)[:, -1].max())
    d = pom.d
    norm = d * lam_max - 1.0
    shifted = lam_max * np.eye(d) - pts
    outcomes = pom.weights[:, None, None] * shifted / norm
    witnesses = tuple(Witness(DensityOperator(dims, s / norm), lam_max / norm) for s in shifted)
    return WOM(pom, lam_max, outcomes, witnesses, pts)


def wom_detects(wom: WOM, rho: DensityOperator) -> tuple[bool, list[bool]]:
    if rho.dims != wom.source.dims:
        raise DimensionError("state and WOM live on different spaces")
    vals = np.einsum("ij,kji->k", rho.matrix, wom.partial_transposes).real
    flags = [bool(v < -DETECTION_SLACK) for v in vals]
    return any(flags), flags


@lru_cache(maxsize=1)
def default_sic_pom() -> POM:
    return sic_pom_from_fiducial(load_fiducial())


@lru_cache(maxsize=1)
def default_sic_wom() -> WOM:
    return wom_from_rank_one(default_sic_pom())


def sic_max_detectable_concurrence(q_fiducial: float) -> float:
    """Largest pure-state concurrence an aligned witness of concurrence ``q_fiducial`` can detect.

    Detection needs ``alpha < 2 alpha_w``, so the bound is ``sin(4 alpha_w)``.
    """
    alpha_w = 0.5 * np.arcsin(q_fiducial)
    return float(np.sin(min(4 * alpha_w, np.pi / 2)))


__all__ = [
    "POM",
    "WOM",
    "Fiducial",
    "FiducialSearchError",
    "SeparableOutcomeError",
    "default_sic_pom",
    "default_sic_wom",
    "frame_potential",
    "heisenberg_weyl",
    "is_ic",
    "load_fiducial",
    "save_fiducial",
    "sic_fiducial_search",
    "sic_pom_from_fiducial",
    "wom_detects",
    "wom_from_rank_one",
]
