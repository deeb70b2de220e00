"""Gaussian measurement channel at the level of phase-space moments.

Outcome densities use plain Lebesgue measure on R^2s; every information
quantity is a difference of entropies, so the normalization constant cancels.
"""

import numpy as np
import numpy.typing as npt
from scipy import linalg, stats

from app.core.errors import InvalidInputError
from app.core.symplectic import (
    build_symplectic_form,
    check_covariance,
    complex_structure,
    pure_covariance,
    symplectic_spectrum,
)
from app.models import (
    CanonicalMeasurement,
    GaussianMeasurement,
    GaussianState,
    Matrix,
    OutcomeDistribution,
    SymplecticSpace,
    Vector,
)

_LOG_2PI_E = float(np.log(2.0 * np.pi * np.e))


def space_for(dim: int) -> SymplecticSpace:
    if dim < 2 or dim % 2:
        raise InvalidInputError(f"phase space dimension must be even and positive, got {dim}")
    return build_symplectic_form(dim // 2)


def check_measurement(m: GaussianMeasurement) -> SymplecticSpace:
    """Validate (K, beta) and return the symplectic space they live on."""
    space = space_for(m.beta.shape[0])
    if m.k_matrix.shape != (space.dim, space.dim):
        raise InvalidInputError(
            f"k_matrix must be {space.dim}x{space.dim}, got shape {m.k_matrix.shape}"
        )
    if not np.all(np.isfinite(m.k_matrix)) or np.linalg.cond(m.k_matrix) > 1e12:
        raise InvalidInputError("k_matrix is singular")
    if not symplectic_spectrum(m.beta, space).valid:
        raise InvalidInputError(
            "beta is not a quantum covariance: it violates the uncertainty relation beta + (i/2) Delta >= 0"
        )
    return space


def check_state(state: GaussianState, space: SymplecticSpace) -> None:
    if state.mean.shape != (space.dim,):
        raise InvalidInputError(f"state mean must have {space.dim} entries")
    if not symplectic_spectrum(state.covariance, space).valid:
        raise InvalidInputError("state covariance violates the uncertainty relation")


def canonicalize_measurement(m: GaussianMeasurement) -> CanonicalMeasurement:
    """Reduce (K, beta) to (I, beta); a raw outcome z maps to u = K z."""
    space = check_measurement(m)
    canonical = GaussianMeasurement(k_matrix=np.eye(space.dim), beta=m.beta)
    return CanonicalMeasurement(canonical=canonical, outcome_map=m.k_matrix)


def outcome_distribution(state: GaussianState, m: GaussianMeasurement) -> OutcomeDistribution:
    """Outcome law N(K^-1 m, K^-1 (alpha + beta) K^-T) of a Gaussian input."""
    space = check_measurement(m)
    check_state(state, space)
    total = np.asarray(state.covariance) + np.asarray(m.beta)
    k_inv = np.linalg.inv(m.k_matrix)
    covariance = k_inv @ total @ k_inv.T
    return OutcomeDistribution(
        mean=k_inv @ state.mean, covariance=(covariance + covariance.T) / 2
    )


def outcome_log_density(dist: OutcomeDistribution, z: npt.ArrayLike) -> npt.NDArray[np.float64]:
    return np.asarray(
        stats.multivariate_normal(mean=dist.mean, cov=dist.covariance).logpdf(z),
        dtype=np.float64,
    )


def logdet_pd(sigma: npt.ArrayLike, *, name: str = "sigma") -> float:
    """log det of a symmetric positive definite matrix, via Cholesky."""
    try:
        chol = np.linalg.cholesky(np.asarray(sigma, dtype=np.float64))
    except np.linalg.LinAlgError:
        raise InvalidInputError(f"{name} is not positive definite")
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def gaussian_differential_entropy(sigma: npt.ArrayLike) -> float:
    """Differential entropy (nats) of N(0, sigma) on R^n: (1/2) log det sigma + (n/2) log(2 pi e)."""
    sig = np.array(sigma, dtype=np.float64)
    if sig.ndim != 2 or sig.shape[0] != sig.shape[1]:
        raise InvalidInputError(f"sigma must be square, got shape {sig.shape}")
    if not np.allclose(sig, sig.T, rtol=0.0, atol=1e-10 * max(float(np.abs(sig).max()), 1.0)):
        raise InvalidInputError("sigma is not symmetric")
    return 0.5 * logdet_pd((sig + sig.T) / 2) + 0.5 * sig.shape[0] * _LOG_2PI_E


def output_entropy(alpha: npt.ArrayLike, beta: npt.ArrayLike) -> float:
    """Entropy of the outcomes of a centered Gaussian input with covariance alpha."""
    return gaussian_differential_entropy(np.asarray(alpha) + np.asarray(beta))


def minimal_output_entropy(beta: npt.ArrayLike, space: SymplecticSpace) -> float:
    """Output entropy of the J_beta-vacuum, the minimizer over all inputs."""
    b = check_covariance(beta, space, name="beta")
    vacuum = pure_covariance(complex_structure(b, space), space)
    return output_entropy(vacuum, b)


def normal_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based standard normal source; streams are disjoint per (seed, stream)."""
    if not 0 <= seed < 2**64:
        raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if not 0 <= stream < 2**64:
        raise InvalidInputError(f"stream must be an unsigned 64-bit integer, got {stream}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, stream]))


def gaussian_factor(covariance: npt.ArrayLike) -> Matrix:
    """Lower-triangular L with L L^T = covariance."""
    try:
        return np.asarray(linalg.cholesky(covariance, lower=True), dtype=np.float64)
    except linalg.LinAlgError:
        raise InvalidInputError("outcome covariance is not positive definite")


def sample_outcomes(
    state: GaussianState, m: GaussianMeasurement, n: int, seed: int, *, stream: int = 0
) -> Matrix:
    """n i.i.d. outcomes of measuring `state`; bit-identical for equal (inputs, seed, stream)."""
    if n < 1:
        raise InvalidInputError(f"sample count must be positive, got {n}")
    dist = outcome_distribution(state, m)
    rng = normal_stream(seed, stream)
    z = rng.standard_normal((n, dist.mean.shape[0]))
    result: Vector = dist.mean + z @ gaussian_factor(dist.covariance).T
    return result
