import math

import numpy as np
import pytest

from womsim.ensembles import RngStream, haar_pure_vectors, hs_mixed_matrices, random_local_unitaries
from womsim.linalg import QUBITS, eigvalsh, partial_transpose
from womsim.measurements import (
    POM,
    UNIFORM_CONCURRENCE_D4,
    WOM,
    Fiducial,
    FiducialSearchError,
    SeparableOutcomeError,
    default_sic_pom,
    default_sic_wom,
    frame_potential,
    heisenberg_weyl,
    is_ic,
    load_fiducial,
    parse_fiducial,
    save_fiducial,
    sic_fiducial_search,
    sic_max_detectable_concurrence,
    sic_pom_from_fiducial,
    sic_potential_floor,
    wom_detects,
    wom_from_rank_one,
)
from womsim.states import DensityOperator, bell_state, pure_concurrences


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_heisenberg_weyl_basis(d):
    hw = heisenberg_weyl(d)
    assert hw.shape == (d * d, d, d)
    assert np.allclose(hw[0], np.eye(d))
    gram = np.einsum("aji,bji->ab", hw.conj(), hw)
    assert np.allclose(gram, d * np.eye(d * d))
    for u in hw:
        assert np.allclose(u.conj().T @ u, np.eye(d))


def test_frame_potential_floor(rng):
    v = haar_pure_vectors(4, rng, 1)[0]
    assert frame_potential(v) >= sic_potential_floor(4) - 1e-12
    assert sic_potential_floor(4) == pytest.approx(0.6)


def test_shipped_fiducial():
    fid = load_fiducial()
    assert fid.d == 4
    assert fid.overlap_error() < 1e-14
    assert np.abs(fid.orbit_concurrences() - math.sqrt(0.4)).max() < 1e-12
    assert fid.frame_potential() == pytest.approx(sic_potential_floor(4), abs=1e-13)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_search_small_dimensions(d):
    fid = sic_fiducial_search(d, RngStream(7, d), restarts=20)
    assert fid.overlap_error() < 1e-10
    pom = sic_pom_from_fiducial(fid)
    assert is_ic(pom)


def test_search_d4_uniform_concurrence_and_determinism():
    a = sic_fiducial_search(4, RngStream(11, 0), restarts=50)
    b = sic_fiducial_search(4, RngStream(11, 0), restarts=50)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert np.abs(a.orbit_concurrences() - UNIFORM_CONCURRENCE_D4).max() < 1e-10


def test_search_failure_is_reported():
    with pytest.raises(FiducialSearchError) as info:
        sic_fiducial_search(4, RngStream(1, 0), restarts=2, tol=0.0)
    assert np.isfinite(info.value.best_potential)
    with pytest.raises(ValueError):
        sic_fiducial_search(7, RngStream(1, 0))
    with pytest.raises(ValueError):
        sic_fiducial_search(3, RngStream(1, 0), uniform_concurrence=True)


def test_fiducial_cache_round_trip(tmp_path):
    fid = load_fiducial()
    path = tmp_path / "fid.txt"
    save_fiducial(fid, path)
    again = load_fiducial(path)
    assert np.abs(again.amplitudes - fid.amplitudes).max() < 1e-16
    with pytest.raises(ValueError):
        parse_fiducial("4\n1 0\n")
    with pytest.raises(ValueError):
        parse_fiducial("d=2\n1 0\n")
    path.write_text("d=2\n1 0\n0 0\n")
    with pytest.raises(ValueError):
        load_fiducial(path)


def test_pom_validation():
    with pytest.raises(ValueError):
        POM(np.array([np.eye(2) / 2]))
    with pytest.raises(ValueError):
        POM(np.array([np.diag([1.5, 0]), np.diag([-0.5, 1])]))
    basis = POM.rank_one(np.ones(4), np.eye(4), dims=QUBITS)
    assert basis.is_rank_one
    assert not is_ic(basis)


def test_sic_pom():
    pom = default_sic_pom()
    assert len(pom) == 16
    assert np.allclose(pom.outcomes.sum(axis=0), np.eye(4))
    assert is_ic(pom)
    rho = hs_mixed_matrices(4, RngStream(3), 1)[0]
    p = pom.probabilities(rho)
    assert p.sum() == pytest.approx(1)
    assert p.min() >= 0


def test_wom_structure():
    wom = default_sic_wom()
    assert isinstance(wom, WOM)
    assert wom.lambda_max == pytest.approx((1 + math.sqrt(0.6)) / 2, abs=1e-14)
    assert wom.normalization == pytest.approx(1 + 2 * math.sqrt(0.6))
    out = wom.outcomes
    assert np.abs(out.sum(axis=0) - np.eye(4)).max() < 1e-12
    assert eigvalsh(out, check=False).min() > -1e-12
    assert is_ic(wom.as_pom())
    gram = np.einsum("aij,bji->ab", out, out).real
    off = gram[~np.eye(16, dtype=bool)]
    assert off.max() - off.min() < 1e-12
    for w in wom.witnesses:
        assert w.threshold == pytest.approx(wom.threshold)
        assert np.trace(w.op.matrix).real == pytest.approx(1)


def test_wom_from_separable_pom_fails():
    basis = POM.rank_one(np.ones(4), np.eye(4), dims=QUBITS)
    with pytest.raises(SeparableOutcomeError):
        wom_from_rank_one(basis)


def test_wom_detects_bell_but_not_mixed():
    wom = default_sic_wom()
    hit, flags = wom_detects(wom, bell_state().density())
    assert hit and len(flags) == 16
    assert not wom_detects(wom, DensityOperator.maximally_mixed(QUBITS))[0]


def test_wom_witness_form_matches_threshold_form(rng):
    wom = default_sic_wom()
    ws = wom.as_witnesses()
    rhos = hs_mixed_matrices(4, rng, 500)
    fast = ws.values_density(rhos) > 1e-12
    means = np.einsum("nij,kji->nk", rhos, np.array([w.op.matrix for w in wom.witnesses])).real
    slow = means > wom.threshold + 1e-12
    assert np.array_equal(fast, slow)


def test_sic_pom_cannot_detect_bell_states(rng):
    ws = default_sic_pom().as_witnesses()
    vecs = random_local_unitaries(rng, 20_000) @ bell_state().amplitudes
    assert not ws.flags_pure(vecs).any()
    bound = sic_max_detectable_concurrence(UNIFORM_CONCURRENCE_D4)
    assert bound == pytest.approx(math.sqrt(24) / 5)
    assert bound < 1


def test_sic_pom_detects_near_its_own_outcomes():
    pom = default_sic_pom()
    ws = pom.as_witnesses()
    assert ws.flags_pure(pom.vectors[:1]).any()


def test_fiducial_orbit_concurrence_classes():
    fid = load_fiducial()
    conc = pure_concurrences(fid.orbit())
    assert np.allclose(conc, conc[0])
    pt = partial_transpose(fid.pure_state().projector(), QUBITS)
    assert eigvalsh(pt)[-1] == pytest.approx(default_sic_wom().lambda_max)


def test_fiducial_normalizes_input():
    fid = Fiducial(np.array([2.0, 0.0]))
    assert fid.d == 2
    assert np.linalg.norm(fid.amplitudes) == pytest.approx(1)
