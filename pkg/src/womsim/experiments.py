"""Monte Carlo drivers: detection-ratio histograms and statistical formula checks.

Sampling is split into fixed-size blocks; block ``b`` draws from
``RngStream(seed, b)``. Results are merged in block order, so output is
identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .ensembles import (
    RngStream,
    bures_mixed_matrices,
    haar_pure_vectors,
    haar_unitaries,
    hs_mixed_matrices,
    random_local_unitaries,
)
from .linalg import QUBITS, BipartiteDims, partial_transpose
from .measurements import default_sic_pom, default_sic_wom
from .states import (
    ENTANGLED_TOL,
    PPT_TOL,
    bell_state,
    maximally_entangled,
    pt_min_eigenvalues,
    pure_concurrences,
    schmidt_state,
    wootters_concurrences,
)
from .witnesses import DETECTION_SLACK, WitnessSet, me_pt_witness_detection_ratio, q_mean_var

BLOCK_SIZE = 1 << 15
STATE_CLASSES = ("pure-haar", "mixed-hs")
DETECTORS = ("sic-pom", "sic-wom")


def default_workers() -> int:
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    seed: int = 0xC0FFEE
    samples: int = 1_000_000
    bins: int = 20
    state_class: str = "mixed-hs"
    detector: str = "sic-wom"
    workers: int = field(default_factory=default_workers)
    min_bin_count: int = 100

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.bins < 2:
            raise ValueError("bins must be at least 2")
        if self.state_class not in STATE_CLASSES:
            raise ValueError(f"state_class must be one of {STATE_CLASSES}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def detector_witnesses(name: str) -> WitnessSet:
    if name == "sic-pom":
        return default_sic_pom().as_witnesses()
    if name == "sic-wom":
        return default_sic_wom().as_witnesses()
    raise ValueError(f"unknown detector {name!r}; expected one of {DETECTORS}")


@dataclass
class DetectionHistogram:
    bin_edges: np.ndarray
    total: np.ndarray
    detected: np.ndarray
    min_count: int = 100

    def __post_init__(self):
        if np.any(self.detected > self.total):
            raise ValueError("detected exceeds total in some bin")

    @property
    def ratio(self) -> list[float | None]:
        return [
            float(k / n) if n >= max(1, self.min_count) else None
            for k, n in zip(self.detected, self.total)
        ]

    def rows(self) -> list[dict]:
        return [
            {"bin_lo": float(lo), "bin_hi": float(hi), "total": int(n), "detected": int(k), "ratio": r}
            for lo, hi, n, k, r in zip(self.bin_edges[:-1], self.bin_edges[1:], self.total, self.detected, self.ratio)
        ]

    def to_csv(self) -> str:
        out = ["bin_lo,bin_hi,total,detected,ratio"]
        for row in self.rows():
            r = "null" if row["ratio"] is None else f"{row['ratio']:.9g}"
            out.append(f"{row['bin_lo']:.9g},{row['bin_hi']:.9g},{row['total']},{row['detected']},{r}")
        return "\n".join(out) + "\n"

    def ratio_stderr(self) -> np.ndarray:
        n = np.maximum(self.total, 1)
        p = self.detected / n
        return np.sqrt(p * (1 - p) / n)


@dataclass
class DetectionSummary:
    overall_ratio: float | None
    ratio_conc_gt_half: float | None
    samples: int
    seed: int
    detector: str
    state_class: str
    entangled: int
    detected: int
    entangled_conc_gt_half: int
    detected_conc_gt_half: int
    separable: int
    false_positives: int

    def as_dict(self) -> dict:
        return asdict(self)


def _bin_index(conc: np.ndarray, bins: int) -> np.ndarray:
    return np.minimum((conc * bins).astype(np.int64), bins - 1)


def _sample_block(state_class: str, rng: RngStream, n: int):
    """States, concurrences and separability flags for one block."""
    if state_class == "pure-haar":
        vecs = haar_pure_vectors(4, rng, n)
        conc = pure_concurrences(vecs)
        return vecs, conc, conc <= ENTANGLED_TOL
    rhos = hs_mixed_matrices(4, rng, n)
    conc = wootters_concurrences(rhos)
    ppt = pt_min_eigenvalues(rhos) >= -PPT_TOL
    return rhos, conc, ppt


def _run_block(args):
    state_class, observables, seed, block, n, bins = args
    ws = WitnessSet(observables)
    states, conc, separable = _sample_block(state_class, RngStream(seed, block), n)
    if state_class == "pure-haar":
        fired = ws.flags_pure(states).any(axis=1)
    else:
        fired = ws.flags_density(states).any(axis=1)
    entangled = conc > ENTANGLED_TOL
    idx = _bin_index(conc[entangled], bins)
    total = np.bincount(idx, minlength=bins)
    detected = np.bincount(idx[fired[entangled]], minlength=bins)
    half = entangled & (conc > 0.5)
    return (
        total,
        detected,
        int(half.sum()),
        int((half & fired).sum()),
        int(separable.sum()),
        int((fired & separable).sum()),
    )


def _blocks(samples: int, block_size: int = BLOCK_SIZE):
    for b, start in enumerate(range(0, samples, block_size)):
        yield b, min(block_size, samples - start)


def map_blocks(fn, tasks, workers: int):
    """Ordered map, in-process for one worker, otherwise over a process pool."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def detection_ratio_experiment(
    cfg: ExperimentConfig, witnesses: WitnessSet | None = None
) -> tuple[DetectionHistogram, DetectionSummary]:
    """Detection ratio of a witness set against random two-qubit states, binned by concurrence.

    A state counts as detected if any single witness fires. Separable
    samples (zero concurrence) are excluded from the histogram but checked
    for false positives against the PPT oracle.
    """
    ws = witnesses if witnesses is not None else detector_witnesses(cfg.detector)
    label = ws.label if witnesses is not None else cfg.detector
    tasks = [(cfg.state_class, ws.observables, cfg.seed, b, n, cfg.bins) for b, n in _blocks(cfg.samples)]
    parts = map_blocks(_run_block, tasks, cfg.workers)
    total = sum(p[0] for p in parts)
    detected = sum(p[1] for p in parts)
    half_n = sum(p[2] for p in parts)
    half_k = sum(p[3] for p in parts)
    hist = DetectionHistogram(np.linspace(0.0, 1.0, cfg.bins + 1), total, detected, cfg.min_bin_count)
    ent, det = int(total.sum()), int(detected.sum())
    summary = DetectionSummary(
        overall_ratio=det / ent if ent else None,
        ratio_conc_gt_half=half_k / half_n if half_n else None,
        samples=cfg.samples,
        seed=cfg.seed,
        detector=label,
        state_class=cfg.state_class,
        entangled=ent,
        detected=det,
        entangled_conc_gt_half=half_n,
        detected_conc_gt_half=half_k,
        separable=sum(p[4] for p in parts),
        false_positives=sum(p[5] for p in parts),
    )
    return hist, summary


def bell_equivalent_vectors(rng: RngStream, n: int) -> np.ndarray:
    """``(U1 x U2)|phi+>`` with independent Haar local unitaries."""
    return random_local_unitaries(rng, n) @ bell_state().amplitudes


def statistically_nondecreasing(hist: DetectionHistogram, sigmas: float = 3.0) -> bool:
    """No bin ratio drops below its predecessor by more than ``sigmas`` pooled standard errors."""
    r = np.array([np.nan if x is None else x for x in hist.ratio])
    se = hist.ratio_stderr()
    for i in range(1, len(r)):
        if np.isnan(r[i]) or np.isnan(r[i - 1]):
            continue
        if r[i] < r[i - 1] - sigmas * math.hypot(se[i], se[i - 1]):
            return False
    return True


@dataclass
class CheckLine:
    name: str
    value: float
    reference: float
    stderr: float
    sigmas: float = 3.0

    @property
    def z(self) -> float:
        return (self.value - self.reference) / self.stderr if self.stderr > 0 else 0.0

    @property
    def passed(self) -> bool:
        return abs(self.value - self.reference) <= self.sigmas * self.stderr

    def as_dict(self) -> dict:
        return {**asdict(self), "z": self.z, "passed": self.passed}

    def format(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name:<40s} value={self.value:.6g} ref={self.reference:.6g} "
            f"stderr={self.stderr:.3g} z={self.z:+.2f}"
        )


def _chunked(samples: int, fn, chunk: int = 1 << 16) -> np.ndarray:
    return np.concatenate([fn(min(chunk, samples - s)) for s in range(0, samples, chunk)])


def _fraction_line(name, hits: np.ndarray, reference: float) -> CheckLine:
    n = hits.size
    return CheckLine(name, float(hits.mean()), reference, math.sqrt(reference * (1 - reference) / n))


def _moment_lines(name: str, x: np.ndarray, mean_ref: float, var_ref: float) -> list[CheckLine]:
    n = x.size
    mean = x.mean()
    var = x.var(ddof=1)
    m4 = np.mean((x - mean) ** 4)
    return [
        CheckLine(f"{name} mean", float(mean), mean_ref, float(x.std(ddof=1) / math.sqrt(n))),
        CheckLine(f"{name} variance", float(var), var_ref, float(math.sqrt(max(m4 - var * var, 0.0) / n))),
    ]


def _haar_cap_hits(psi_amps: np.ndarray, lam1: float, rng: RngStream, samples: int) -> np.ndarray:
    d = psi_amps.size

    def draw(n):
        phi = haar_pure_vectors(d, rng, n)
        return np.abs(phi @ psi_amps.conj()) ** 2 > lam1 + DETECTION_SLACK

    return _chunked(samples, draw)


def _haar_expectations(op: np.ndarray, rng: RngStream, samples: int) -> np.ndarray:
    d = op.shape[0]

    def draw(n):
        phi = haar_pure_vectors(d, rng, n)
        return np.einsum("ni,ij,nj->n", phi.conj(), op, phi).real

    return _chunked(samples, draw)


def _purities(sampler, d: int, rng: RngStream, samples: int) -> np.ndarray:
    def draw(n):
        r = sampler(d, rng, n)
        return np.einsum("nij,nji->n", r, r).real

    return _chunked(samples, draw)


PURE_WITNESS_CASES = (
    ("Bell 2x2", BipartiteDims(2, 2), (0.5, 0.5)),
    ("2x2 lambda1=0.75", BipartiteDims(2, 2), (0.75, 0.25)),
    ("2x3 lambda1=0.6", BipartiteDims(2, 3), (0.6, 0.4)),
    ("3x3 maximally entangled", BipartiteDims(3, 3), (1 / 3, 1 / 3, 1 / 3)),
    ("3x3 lambda1=0.5", BipartiteDims(3, 3), (0.5, 0.3, 0.2)),
)
Q_DIMS = (BipartiteDims(2, 2), BipartiteDims(2, 3), BipartiteDims(3, 3))


def formula_check_suite(seed: int, samples: int) -> list[CheckLine]:
    """Empirical vs analytic values for the Haar and random-state statistics.

    Covers pure-state witness detection fractions, mean and variance of
    ``<Phi|Q^T2|Phi>`` (also with a Haar-rotated mixed state in place of
    ``Q``), HS and Bures purity means, and the detection fraction of the
    partial-transposed maximally entangled witness. Each line draws from
    its own stream ``RngStream(seed, line)``.
    """
    lines: list[CheckLine] = []
    stream = iter(range(1 << 20))

    def rng():
        return RngStream(seed, next(stream))

    for name, dims, lams in PURE_WITNESS_CASES:
        psi = schmidt_state(lams, dims)
        ref = (1 - lams[0]) ** (dims.d - 1)
        hits = _haar_cap_hits(psi.amplitudes, lams[0], rng(), samples)
        lines.append(_fraction_line(f"pure witness ratio {name}", hits, ref))

    for dims in Q_DIMS:
        r = rng()
        q = hs_mixed_matrices(dims.d, r, 1)[0]
        x = _haar_expectations(partial_transpose(q, dims), r, samples)
        mean_ref, var_ref = q_mean_var(q)
        lines += _moment_lines(f"<Phi|Q^T2|Phi> {dims.d1}x{dims.d2}", x, mean_ref, var_ref)

    # the same statistics with a Haar-rotated mixed state against W = psi^T2
    r = rng()
    rho = hs_mixed_matrices(4, r, 1)[0]
    w = partial_transpose(bell_state().projector(), QUBITS)

    def rotated(n):
        u = haar_unitaries(4, r, n)
        return np.einsum("nij,jk,nlk,li->n", u, rho, u.conj(), w).real

    mean_ref, var_ref = q_mean_var(rho)
    lines += _moment_lines("Tr(U rho U^+ W) 2x2", _chunked(samples, rotated), mean_ref, var_ref)

    for label, sampler, formula in (
        ("HS", hs_mixed_matrices, lambda d: 2 * d / (d * d + 1)),
        ("Bures", bures_mixed_matrices, lambda d: (5 * d * d + 1) / (2 * d * (d * d + 2))),
    ):
        for d in (2, 4):
            x = _purities(sampler, d, rng(), samples)
            lines.append(CheckLine(f"{label} purity mean d={d}", float(x.mean()), formula(d),
                                   float(x.std(ddof=1) / math.sqrt(x.size))))

    for d1 in (2, 3):
        me = maximally_entangled(d1)
        w = partial_transpose(me.projector(), me.dims)
        x = _haar_expectations(w, rng(), samples)
        lines.append(_fraction_line(f"PT max-entangled witness d1={d1}", x < -DETECTION_SLACK,
                                    me_pt_witness_detection_ratio(d1)))
    return lines


@dataclass
class PurityRow:
    purity_lo: float
    purity_hi: float
    entangled: int
    detected: int
    fraction: float | None


def _purity_block(args):
    seed, block, n, edges = args
    rng = RngStream(seed, block)
    rhos = hs_mixed_matrices(4, rng, n)
    conc = wootters_concurrences(rhos)
    pur = np.einsum("nij,nji->n", rhos, rhos).real
    w = partial_transpose(bell_state().projector(), QUBITS)
    fired = np.einsum("nij,ji->n", rhos, w).real < -DETECTION_SLACK
    ent = conc > ENTANGLED_TOL
    idx = np.clip(np.searchsorted(edges, pur, side="right") - 1, 0, len(edges) - 2)
    nb = len(edges) - 1
    return np.bincount(idx[ent], minlength=nb), np.bincount(idx[ent & fired], minlength=nb)


def mixed_detection_vs_purity(
    seed: int, samples: int, bins: int = 15, workers: int = 1, min_count: int = 100
) -> tuple[list[PurityRow], bool]:
    """Fraction of entangled HS states detected by the Bell witness ``W = psi_me^T2``, by purity.

    Returns the table and whether the fractions are nondecreasing in purity
    (reported, not enforced).
    """
    edges = np.linspace(0.25, 1.0, bins + 1)
    tasks = [(seed, b, n, edges) for b, n in _blocks(samples)]
    parts = map_blocks(_purity_block, tasks, workers)
    ent = sum(p[0] for p in parts)
    det = sum(p[1] for p in parts)
    rows = [
        PurityRow(float(lo), float(hi), int(n), int(k), float(k / n) if n >= min_count else None)
        for lo, hi, n, k in zip(edges[:-1], edges[1:], ent, det)
    ]
    fr = [r.fraction for r in rows if r.fraction is not None]
    return rows, all(b >= a for a, b in zip(fr, fr[1:]))
