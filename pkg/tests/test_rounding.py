import numpy as np
import pytest

from airbeam.sdp import SdpError, draw_candidates, gaussian_randomization, hermitian_eig

from helpers import random_hermitian


def test_hermitian_eig_descending(rng):
    z = random_hermitian(5, rng, psd=True)
    u, lam = hermitian_eig(z)
    assert np.all(np.diff(lam) <= 0)
    np.testing.assert_allclose(u @ np.diag(lam) @ u.conj().T, z, atol=1e-10)
    with pytest.raises(SdpError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_candidates_sit_on_budget(rng):
    z = random_hermitian(6, rng, psd=True)
    cand = draw_candidates(z, 3.5, 50, rng)
    assert cand.shape == (50, 6)
    np.testing.assert_allclose(np.sum(np.abs(cand) ** 2, axis=1), 3.5, rtol=1e-12)


def test_rank_one_input_returns_its_direction(rng):
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    cand = draw_candidates(np.outer(v, v.conj()), 2.0, 10, rng)
    for c in cand:
        # same direction up to a common phase
        assert abs(np.vdot(v, c)) == pytest.approx(np.linalg.norm(v) * np.sqrt(2.0), rel=1e-10)


def test_candidate_covariance_matches_z(rng):
    # eigenvalue 3 vs 1 puts more of the rescaled power on the first coordinate
    z = np.diag([3.0, 1.0, 0.0])
    cand = draw_candidates(z, 1.0, 20000, rng)
    assert np.allclose(np.abs(cand[:, 2]), 0.0)
    ratio = np.mean(np.abs(cand[:, 0]) ** 2) / np.mean(np.abs(cand[:, 1]) ** 2)
    assert 1.5 < ratio < 6.0


def test_selection_rules(rng):
    z = np.eye(3)
    score = lambda c: np.arange(c.shape[0], dtype=float) % 5  # noqa: E731
    none = lambda c: np.zeros(c.shape[0])  # noqa: E731
    rr = gaussian_randomization(z, 1.0, score, none, 12, rng)
    # max score 4 first reached at index 4
    assert rr.feasible and rr.index == 4 and rr.score == 4.0
    np.testing.assert_array_equal(rr.z, rr.candidates[4])

    viol = lambda c: 1.0 + (np.arange(c.shape[0]) - 7.0) ** 2  # noqa: E731
    rr = gaussian_randomization(z, 1.0, score, viol, 12, rng)
    assert not rr.feasible and rr.index == 7

    only_last = lambda c: np.where(np.arange(c.shape[0]) == 11, 0.0, 1.0)  # noqa: E731
    rr = gaussian_randomization(z, 1.0, score, only_last, 12, rng)
    assert rr.feasible and rr.index == 11


def test_rounding_errors(rng):
    with pytest.raises(SdpError):
        draw_candidates(np.eye(2), 1.0, 0, rng)
    with pytest.raises(SdpError):
        draw_candidates(np.eye(2), 0.0, 3, rng)
    with pytest.raises(SdpError):
        draw_candidates(np.zeros((2, 2)), 1.0, 3, rng)


def test_fixed_seed_is_reproducible():
    z = np.diag([2.0, 1.0])
    a = draw_candidates(z, 1.0, 5, np.random.default_rng(3))
    b = draw_candidates(z, 1.0, 5, np.random.default_rng(3))
    np.testing.assert_array_equal(a, b)
