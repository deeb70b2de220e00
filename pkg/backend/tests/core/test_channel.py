import numpy as np
import pytest
from scipy import stats

from app.core.channel import (
    canonicalize_measurement,
    check_measurement,
    gaussian_differential_entropy,
    minimal_output_entropy,
    normal_stream,
    outcome_distribution,
    outcome_log_density,
    output_entropy,
    sample_outcomes,
)
from app.core.errors import InvalidInputError
from app.core.symplectic import build_symplectic_form
from app.models import GaussianMeasurement, GaussianState, SymplecticSpace
from tests.utils.utils import random_invertible, random_valid_covariance

LOG_2PI_E = np.log(2 * np.pi * np.e)


def test_check_measurement_accepts_heterodyne(heterodyne: GaussianMeasurement) -> None:
    assert check_measurement(heterodyne).s == 1


def test_check_measurement_rejects_sub_uncertainty_noise() -> None:
    m = GaussianMeasurement(k_matrix=np.eye(2), beta=0.25 * np.eye(2))
    with pytest.raises(InvalidInputError, match="uncertainty relation"):
        check_measurement(m)


def test_check_measurement_rejects_singular_k() -> None:
    m = GaussianMeasurement(k_matrix=[[1.0, 2.0], [2.0, 4.0]], beta=0.5 * np.eye(2))
    with pytest.raises(InvalidInputError, match="singular"):
        check_measurement(m)


def test_check_measurement_rejects_shape_mismatch() -> None:
    m = GaussianMeasurement(k_matrix=np.eye(4), beta=0.5 * np.eye(2))
    with pytest.raises(InvalidInputError, match="k_matrix must be 2x2"):
        check_measurement(m)


def test_canonicalize_measurement(rng: np.random.Generator) -> None:
    k = random_invertible(2, rng)
    m = GaussianMeasurement(k_matrix=k, beta=np.diag([1.0, 0.25]))
    canonical = canonicalize_measurement(m)
    np.testing.assert_array_equal(canonical.canonical.k_matrix, np.eye(2))
    np.testing.assert_array_equal(np.asarray(canonical.canonical.beta), np.diag([1.0, 0.25]))
    np.testing.assert_array_equal(canonical.outcome_map, k)


def test_outcome_distribution_maps_through_k(rng: np.random.Generator) -> None:
    space = build_symplectic_form(2)
    k = random_invertible(4, rng)
    alpha = random_valid_covariance(space, rng)
    beta = random_valid_covariance(space, rng)
    mean = rng.normal(size=4)
    dist = outcome_distribution(
        GaussianState(mean=mean, covariance=alpha), GaussianMeasurement(k_matrix=k, beta=beta)
    )
    k_inv = np.linalg.inv(k)
    np.testing.assert_allclose(dist.mean, k_inv @ mean, rtol=1e-12)
    np.testing.assert_allclose(dist.covariance, k_inv @ (alpha + beta) @ k_inv.T, rtol=1e-10)


def test_outcome_log_density(heterodyne: GaussianMeasurement) -> None:
    state = GaussianState(mean=[1.0, -1.0], covariance=np.diag([2.0, 0.5]))
    dist = outcome_distribution(state, heterodyne)
    z = np.array([[0.0, 0.0], [1.0, 2.0]])
    expected = stats.multivariate_normal(mean=[1.0, -1.0], cov=np.diag([2.5, 1.0])).logpdf(z)
    np.testing.assert_allclose(outcome_log_density(dist, z), expected, rtol=1e-12)


def test_differential_entropy_of_identity() -> None:
    assert gaussian_differential_entropy(np.eye(2)) == pytest.approx(LOG_2PI_E, rel=1e-14)
    assert gaussian_differential_entropy(np.eye(3)) == pytest.approx(1.5 * LOG_2PI_E, rel=1e-14)


def test_differential_entropy_scaling(rng: np.random.Generator) -> None:
    a = rng.normal(size=(4, 4))
    sigma = a @ a.T + np.eye(4)
    shift = gaussian_differential_entropy(9.0 * sigma) - gaussian_differential_entropy(sigma)
    assert shift == pytest.approx(4 * np.log(3.0), rel=1e-12)


def test_differential_entropy_rejects_bad_input() -> None:
    with pytest.raises(InvalidInputError, match="positive definite"):
        gaussian_differential_entropy(np.diag([1.0, 0.0]))
    with pytest.raises(InvalidInputError, match="symmetric"):
        gaussian_differential_entropy([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(InvalidInputError, match="square"):
        gaussian_differential_entropy(np.ones((2, 3)))


def test_minimal_output_entropy_of_squeezed_heterodyne(single_mode: SymplecticSpace) -> None:
    # beta + vacuum = diag(2, 1/2)
    h = minimal_output_entropy(np.diag([1.0, 0.25]), single_mode)
    assert h == pytest.approx(LOG_2PI_E, rel=1e-12)


@pytest.mark.parametrize("s", [1, 2])
def test_vacuum_minimizes_output_entropy(s: int, rng: np.random.Generator) -> None:
    space = build_symplectic_form(s)
    beta = random_valid_covariance(space, rng)
    floor = minimal_output_entropy(beta, space)
    for _ in range(50):
        alpha = random_valid_covariance(space, rng)
        assert output_entropy(alpha, beta) >= floor - 1e-10


def test_normal_stream_is_reproducible() -> None:
    first = normal_stream(7).standard_normal(5)
    np.testing.assert_array_equal(first, normal_stream(7).standard_normal(5))
    assert not np.array_equal(first, normal_stream(7, stream=1).standard_normal(5))
    assert not np.array_equal(first, normal_stream(8).standard_normal(5))


def test_normal_stream_accepts_full_seed_range() -> None:
    normal_stream(2**64 - 1)
    with pytest.raises(InvalidInputError):
        normal_stream(-1)
    with pytest.raises(InvalidInputError):
        normal_stream(2**64)


def test_sample_outcomes_is_bit_identical(heterodyne: GaussianMeasurement) -> None:
    state = GaussianState(mean=[0.0, 0.0], covariance=0.5 * np.eye(2))
    first = sample_outcomes(state, heterodyne, 1000, seed=3)
    np.testing.assert_array_equal(first, sample_outcomes(state, heterodyne, 1000, seed=3))
    assert not np.array_equal(first, sample_outcomes(state, heterodyne, 1000, seed=3, stream=1))


def test_sample_outcomes_moments(squeezed_heterodyne: GaussianMeasurement) -> None:
    state = GaussianState(mean=[1.0, -2.0], covariance=np.diag([1.625, 2.375]))
    z = sample_outcomes(state, squeezed_heterodyne, 100_000, seed=11)
    np.testing.assert_allclose(z.mean(axis=0), [1.0, -2.0], atol=0.03)
    np.testing.assert_allclose(np.cov(z, rowvar=False), np.diag([2.625, 2.625]), rtol=0.03, atol=0.03)


def test_sample_outcomes_rejects_empty_request(heterodyne: GaussianMeasurement) -> None:
    state = GaussianState(mean=[0.0, 0.0], covariance=0.5 * np.eye(2))
    with pytest.raises(InvalidInputError):
        sample_outcomes(state, heterodyne, 0, seed=0)
