"""Monte Carlo simulation of the measurement channel and information estimators."""

import logging
from collections.abc import Callable, Sequence

import numpy as np
import numpy.typing as npt
from scipy import linalg

from app.core.channel import (
    check_measurement,
    check_state,
    gaussian_differential_entropy,
    gaussian_factor,
    logdet_pd,
    normal_stream,
)
from app.core.config import settings
from app.core.errors import InvalidInputError, SingularCovarianceError
from app.core.symplectic import check_covariance, symplectic_spectrum
from app.models import (
    ChannelSamples,
    DiscreteEnsemble,
    EntropyDecomposition,
    GaussianCoherentEnsemble,
    GaussianMeasurement,
    Matrix,
    MIEstimate,
    SymplecticSpace,
    Vector,
)

logger = logging.getLogger(__name__)

_WEIGHT_TOL = 1e-12

Estimator = Callable[[ChannelSamples], float]


def _psd_factor(covariance: Matrix, *, name: str) -> Matrix:
    """F with F F^T = covariance; accepts singular covariances."""
    w, v = linalg.eigh(covariance)
    if w[0] < -settings.VALIDITY_TOL * max(abs(w[-1]), 1.0):
        raise InvalidInputError(f"{name} is not positive semidefinite")
    return np.asarray(v * np.sqrt(np.clip(w, 0.0, None)), dtype=np.float64)


def _simulate_gaussian(
    e: GaussianCoherentEnsemble,
    beta: Matrix,
    space: SymplecticSpace,
    n: int,
    rng: np.random.Generator,
) -> tuple[Matrix, Matrix]:
    coherent = check_covariance(e.coherent_covariance, space, name="coherent_covariance")
    if not symplectic_spectrum(coherent, space).pure:
        raise InvalidInputError("coherent_covariance is not a pure covariance")
    mean_factor = _psd_factor(
        check_covariance(e.mean_covariance, space, name="mean_covariance"),
        name="mean_covariance",
    )
    noise_factor = gaussian_factor(coherent + beta)
    z = rng.standard_normal((n, space.dim)) @ mean_factor.T
    noise = rng.standard_normal((n, space.dim)) @ noise_factor.T
    return z, z + noise


def _simulate_discrete(
    e: DiscreteEnsemble,
    beta: Matrix,
    space: SymplecticSpace,
    n: int,
    rng: np.random.Generator,
) -> tuple[Matrix, Matrix, npt.NDArray[np.int64]]:
    if not e.entries:
        raise InvalidInputError("ensemble has no states")
    weights = e.weights
    if np.any(weights <= 0) or abs(float(weights.sum()) - 1.0) > _WEIGHT_TOL:
        raise InvalidInputError("ensemble weights must be positive and sum to 1")
    for state in e.states:
        check_state(state, space)

    labels = rng.choice(len(weights), size=n, p=weights / weights.sum())
    z = rng.standard_normal((n, space.dim))
    means = np.array([state.mean for state in e.states])
    noise = np.empty_like(z)
    for index, state in enumerate(e.states):
        mask = labels == index
        factor = gaussian_factor(np.asarray(state.covariance) + beta)
        noise[mask] = z[mask] @ factor.T
    inputs = means[labels]
    return inputs, inputs + noise, labels.astype(np.int64)


def simulate_ensemble(
    e: GaussianCoherentEnsemble | DiscreteEnsemble,
    m: GaussianMeasurement,
    n: int,
    seed: int,
) -> ChannelSamples:
    """Draw n (input, outcome) pairs; bit-identical for equal arguments.

    Inputs are the displacements of the prepared states and outputs the raw
    outcomes z, both expressed in outcome coordinates (mapped by K^-1).
    """
    if n < 1:
        raise InvalidInputError(f"sample count must be positive, got {n}")
    space = check_measurement(m)
    beta = np.asarray(m.beta)
    rng = normal_stream(seed)
    labels: npt.NDArray[np.int64] | None = None
    if isinstance(e, GaussianCoherentEnsemble):
        inputs, outputs = _simulate_gaussian(e, beta, space, n, rng)
    elif isinstance(e, DiscreteEnsemble):
        inputs, outputs, labels = _simulate_discrete(e, beta, space, n, rng)
    else:
        raise InvalidInputError(f"unsupported ensemble type {type(e).__name__}")
    k_inv = np.linalg.inv(m.k_matrix)
    logger.debug(f"simulated {n} channel uses (seed={seed})")
    return ChannelSamples(
        inputs=inputs @ k_inv.T, outputs=outputs @ k_inv.T, seed=seed, labels=labels
    )


def _sample_logdet(x: Matrix, *, name: str) -> float:
    cov = np.atleast_2d(np.cov(x, rowvar=False))
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularCovarianceError(f"sample covariance of {name} is singular")
    return float(logdet)


def mi_plugin(samples: ChannelSamples) -> float:
    """Gaussian plug-in estimate (nats): (1/2) log(det cov(outputs) / det cov(outputs - inputs))."""
    n, dim = samples.outputs.shape
    if samples.inputs.shape != samples.outputs.shape:
        raise InvalidInputError("inputs and outputs must have the same shape")
    if n < dim + 2:
        raise SingularCovarianceError(f"need at least {dim + 2} samples, got {n}")
    residuals = samples.outputs - samples.inputs
    return 0.5 * (
        _sample_logdet(samples.outputs, name="outputs")
        - _sample_logdet(residuals, name="residuals")
    )


def _subset(samples: ChannelSamples, index: npt.NDArray[np.intp]) -> ChannelSamples:
    return ChannelSamples(
        inputs=samples.inputs[index],
        outputs=samples.outputs[index],
        seed=samples.seed,
        labels=None if samples.labels is None else samples.labels[index],
    )


def split_standard_error(
    samples: ChannelSamples, estimator: Estimator, splits: int | None = None
) -> float:
    """Standard error of `estimator` from contiguous k-way sample splitting."""
    k = settings.MI_SPLITS if splits is None else splits
    if k < 2:
        raise InvalidInputError(f"need at least 2 splits, got {k}")
    if samples.n < k:
        raise InvalidInputError(f"cannot split {samples.n} samples {k} ways")
    values = [estimator(_subset(samples, idx)) for idx in np.array_split(np.arange(samples.n), k)]
    return float(np.std(values, ddof=1) / np.sqrt(k))


def estimate_information(samples: ChannelSamples) -> MIEstimate:
    return MIEstimate(
        value=mi_plugin(samples), stderr=split_standard_error(samples, mi_plugin)
    )


def binning_box(samples: ChannelSamples, sigmas: float | None = None) -> tuple[Vector, Vector]:
    """Per-axis bounding box mean +- sigmas * std of the outputs."""
    width = settings.BIN_BOX_SIGMAS if sigmas is None else sigmas
    center = samples.outputs.mean(axis=0)
    std = samples.outputs.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return center - width * std, center + width * std


def mi_binned(
    samples: ChannelSamples,
    bins_per_axis: int,
    *,
    box: tuple[Vector, Vector] | None = None,
) -> float:
    """Discrete mutual information (nats) between state label and output cell.

    Outputs outside the box fall into the edge cells. Cells of a grid with
    B bins per axis are unions of cells of any grid with a multiple of B
    bins on the same box.
    """
    if samples.labels is None:
        raise InvalidInputError("binned estimate needs samples of a discrete ensemble")
    if bins_per_axis < 2:
        raise InvalidInputError(f"bins_per_axis must be at least 2, got {bins_per_axis}")
    labels = samples.labels
    if np.unique(labels).size < 2:
        return 0.0

    lo, hi = binning_box(samples) if box is None else box
    t = (samples.outputs - lo) / (hi - lo)
    cells = np.clip(np.floor(t * bins_per_axis), 0, bins_per_axis - 1).astype(np.int64)
    _, cell_ids = np.unique(cells, axis=0, return_inverse=True)
    cell_ids = cell_ids.reshape(-1)

    joint, counts = np.unique(np.column_stack([labels, cell_ids]), axis=0, return_counts=True)
    n = float(labels.size)
    n_x = np.bincount(labels)[joint[:, 0]]
    n_y = np.bincount(cell_ids)[joint[:, 1]]
    value = float(np.sum(counts / n * np.log(counts * n / (n_x * n_y))))
    return max(value, 0.0)


def binned_refinement(
    samples: ChannelSamples,
    chain: Sequence[int] = (4, 16, 64),
    box: tuple[Vector, Vector] | None = None,
) -> list[MIEstimate]:
    """mi_binned along a refinement chain on one shared box."""
    shared = binning_box(samples) if box is None else box
    estimates = []
    for bins in chain:

        def estimator(s: ChannelSamples, bins: int = bins) -> float:
            return mi_binned(s, bins, box=shared)

        estimates.append(
            MIEstimate(value=estimator(samples), stderr=split_standard_error(samples, estimator))
        )
    return estimates


def _check_pd(matrix: npt.ArrayLike, *, name: str) -> Matrix:
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInputError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if np.linalg.norm(a - a.T, 2) > settings.SYMMETRY_TOL * float(np.linalg.norm(a, 2)):
        raise InvalidInputError(f"{name} is not symmetric")
    return (a + a.T) / 2


def entropy_decomposition_check(
    sigma: npt.ArrayLike, hc_matrix: npt.ArrayLike, theta: float
) -> EntropyDecomposition:
    """Both sides of h(p) = -D(p || p_H) + theta E_p[H_c] + log m, in closed form.

    p = N(0, sigma), H_c(z) = (1/2) z^T hc_matrix z and
    p_H = exp(-theta H_c) / m = N(0, (theta hc_matrix)^-1).
    """
    sig = _check_pd(sigma, name="sigma")
    h = _check_pd(hc_matrix, name="hc_matrix")
    if sig.shape != h.shape:
        raise InvalidInputError("sigma and hc_matrix must have the same shape")
    if not np.isfinite(theta) or theta <= 0:
        raise InvalidInputError(f"theta must be positive, got {theta}")

    dim = sig.shape[0]
    precision = theta * h
    logdet_precision = logdet_pd(precision, name="theta * hc_matrix")
    logdet_sigma = logdet_pd(sig, name="sigma")
    kl = 0.5 * (float(np.trace(precision @ sig)) - dim - logdet_precision - logdet_sigma)
    expected_energy = 0.5 * float(np.trace(h @ sig))
    log_normalizer = 0.5 * dim * float(np.log(2.0 * np.pi)) - 0.5 * logdet_precision

    lhs = gaussian_differential_entropy(sig)
    rhs = -kl + theta * expected_energy + log_normalizer
    return EntropyDecomposition(
        lhs=lhs,
        rhs=rhs,
        gap=abs(lhs - rhs),
        kl_divergence=kl,
        expected_energy=expected_energy,
        log_normalizer=log_normalizer,
    )
