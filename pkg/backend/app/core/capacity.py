"""Energy-constrained classical capacity of a Gaussian measurement channel.

For input covariance alpha and measurement noise beta the capacity is the
maximal output entropy minus the minimal one,

    C = (1/2) log det(alpha_E + beta) - (1/2) log det(beta + (1/2) Delta J_beta),

where alpha_E maximizes det(alpha + beta) under Sp(epsilon alpha) <= E. The
expression is a capacity only when alpha_E >= (1/2) Delta J_beta (the
threshold condition); otherwise it is reported as an upper bound.
"""

import logging
import math
from collections.abc import Callable, Iterable
from functools import cached_property

import numpy as np
import numpy.typing as npt

from app.core.channel import canonicalize_measurement, logdet_pd
from app.core.config import settings
from app.core.errors import (
    ChannelError,
    InfeasibleEnergyError,
    InvalidInputError,
    ThresholdViolationError,
)
from app.core.optimizer import maximize_logdet_barrier
from app.core.symplectic import (
    check_covariance,
    complex_structure,
    is_quantum_valid,
    pure_covariance,
)
from app.models import (
    CapacityForms,
    CapacityResult,
    CapacityStatus,
    CovarianceMatrix,
    EnergyConstraint,
    GaussianMeasurement,
    GroundState,
    HeterodyneCapacity,
    Matrix,
    OptimalEnsemble,
    OptimizerPath,
    SymplecticSpace,
)

logger = logging.getLogger(__name__)

_LOG2 = math.log(2.0)


def _symmetric_inverse(a: Matrix) -> Matrix:
    inv = np.linalg.inv(a)
    return np.asarray((inv + inv.T) / 2, dtype=np.float64)


def _negligible(difference: Matrix, reference: Matrix) -> bool:
    scale = max(float(np.linalg.norm(reference)), 1.0)
    return float(np.linalg.norm(difference)) <= settings.FEASIBILITY_MARGIN * scale


def check_energy_matrix(epsilon: npt.ArrayLike, space: SymplecticSpace) -> Matrix:
    eps = check_covariance(epsilon, space, name="epsilon")
    w = np.linalg.eigvalsh(eps)
    if w[0] <= settings.VALIDITY_TOL * max(abs(w[-1]), 1.0):
        raise InvalidInputError("epsilon is not positive definite")
    return eps


def _vacuum(b: Matrix, space: SymplecticSpace) -> Matrix:
    j = complex_structure(b, space, require_valid=False)
    return np.asarray(pure_covariance(j, space))


def noise_vacuum(beta: npt.ArrayLike, space: SymplecticSpace) -> Matrix:
    """(1/2) Delta J_beta, the pure covariance sharing beta's complex structure."""
    return _vacuum(check_covariance(beta, space, name="beta"), space)


def _ground_state(eps: Matrix, eps_inv: Matrix, space: SymplecticSpace) -> GroundState:
    ground = pure_covariance(complex_structure(eps_inv, space, require_valid=False), space)
    return GroundState(e_min=float(np.trace(eps @ np.asarray(ground))), ground_covariance=ground)


def min_energy(epsilon: npt.ArrayLike, space: SymplecticSpace) -> GroundState:
    """Minimum of Sp(epsilon alpha) over quantum-valid alpha.

    The minimizer is the vacuum of the complex structure of epsilon^-1; its
    energy equals the sum of the symplectic eigenvalues of epsilon.
    """
    eps = check_energy_matrix(epsilon, space)
    return _ground_state(eps, _symmetric_inverse(eps), space)


def _check_energy(energy: float, ground: Callable[[], GroundState]) -> GroundState:
    if not math.isfinite(energy) or energy <= 0:
        raise InvalidInputError(f"energy must be positive and finite, got {energy}")
    if energy > settings.MAX_ENERGY:
        raise InvalidInputError(
            f"energy {energy:.12g} exceeds the supported maximum {settings.MAX_ENERGY:.12g}"
        )
    state = ground()
    if energy < state.e_min - settings.FEASIBILITY_MARGIN * max(state.e_min, 1.0):
        raise InfeasibleEnergyError(
            f"energy {energy:.12g} is below the minimal energy {state.e_min:.12g}",
            e_min=state.e_min,
        )
    return state


class _Noise:
    """Measurement noise beta with its vacuum (1/2) Delta J_beta, computed on first use."""

    def __init__(self, beta: Matrix, space: SymplecticSpace) -> None:
        self.beta = beta
        self.space = space

    @cached_property
    def vacuum(self) -> Matrix:
        return _vacuum(self.beta, self.space)

    @cached_property
    def lowest(self) -> Matrix:
        return self.beta + self.vacuum

    @cached_property
    def lowest_inv(self) -> Matrix:
        return _symmetric_inverse(self.lowest)

    @cached_property
    def logdet_min(self) -> float:
        return logdet_pd(self.lowest, name="beta + vacuum")

    def dominated_by(self, a: Matrix) -> bool:
        lowest = float(np.linalg.eigvalsh(a - self.vacuum)[0])
        return lowest >= -settings.THRESHOLD_TOL * float(np.linalg.norm(a, 2))

    def forms(self, a: Matrix) -> CapacityForms:
        logdet_out = logdet_pd(a + self.beta, name="alpha + beta")
        gain = np.eye(self.space.dim) + (a - self.vacuum) @ self.lowest_inv
        sign, logdet_gain = np.linalg.slogdet(gain)
        if sign <= 0:
            raise InvalidInputError("gain matrix has a non-positive determinant")
        return CapacityForms(
            logdet_out=logdet_out,
            logdet_min=self.logdet_min,
            entropy_form=0.5 * (logdet_out - self.logdet_min),
            gain_form=0.5 * float(logdet_gain),
        )

    def ensemble(self, a: Matrix) -> OptimalEnsemble:
        mean = a - self.vacuum
        if _negligible(mean, a):
            # Point mass: the input is the vacuum itself
            return OptimalEnsemble(
                coherent_covariance=CovarianceMatrix(a), mean_covariance=np.zeros_like(a)
            )
        w, v = np.linalg.eigh((mean + mean.T) / 2)
        mean = (v * np.clip(w, 0.0, None)) @ v.T
        return OptimalEnsemble(
            coherent_covariance=CovarianceMatrix(self.vacuum),
            mean_covariance=(mean + mean.T) / 2,
        )


class _Channel:
    """Energy matrix and noise of one capacity problem, shared across energies."""

    def __init__(self, epsilon: npt.ArrayLike, beta: npt.ArrayLike, space: SymplecticSpace) -> None:
        self.space = space
        self.epsilon = check_energy_matrix(epsilon, space)
        self.epsilon_inv = _symmetric_inverse(self.epsilon)
        self.noise = _Noise(check_covariance(beta, space, name="beta"), space)
        self.beta_energy = float(np.trace(self.epsilon @ self.noise.beta))

    @cached_property
    def ground(self) -> GroundState:
        return _ground_state(self.epsilon, self.epsilon_inv, self.space)

    @cached_property
    def threshold_energy(self) -> float:
        w, v = np.linalg.eigh(self.epsilon)
        root = (v * np.sqrt(w)) @ v.T
        top = float(np.linalg.eigvalsh(root @ self.noise.lowest @ root)[-1])
        return self.space.dim * top - self.beta_energy

    def check_energy(self, energy: float) -> GroundState:
        return _check_energy(energy, lambda: self.ground)

    def candidate(self, energy: float) -> Matrix:
        level = (energy + self.beta_energy) / self.space.dim
        return np.asarray(level * self.epsilon_inv - self.noise.beta, dtype=np.float64)

    def maximize(self, energy: float) -> tuple[Matrix, OptimizerPath]:
        ground = self.ground
        if energy <= ground.e_min + settings.FEASIBILITY_MARGIN * max(ground.e_min, 1.0):
            return np.asarray(ground.ground_covariance), OptimizerPath.GROUND_STATE

        candidate = self.candidate(energy)
        if is_quantum_valid(candidate, self.space):
            return candidate, OptimizerPath.WATER_FILLING
        if self.noise.dominated_by(candidate):
            raise ChannelError(
                "water-filling candidate satisfies the threshold condition but violates the uncertainty relation"
            )

        logger.info(f"water-filling candidate is not a quantum covariance at E={energy:.6g}, using barrier method")
        scale = 0.5 * (1.0 + energy / ground.e_min)
        start = scale * np.asarray(ground.ground_covariance)
        result = maximize_logdet_barrier(
            self.epsilon, self.noise.beta, energy, self.space, start
        )
        logger.info(f"barrier method converged after {result.iterations} Newton steps")
        return result.alpha, OptimizerPath.BARRIER

    def capacity(self, energy: float) -> CapacityResult:
        ground = self.check_energy(energy)
        alpha, path = self.maximize(energy)
        noise = self.noise
        forms = noise.forms(alpha)
        threshold_ok = noise.dominated_by(alpha)

        ensemble: OptimalEnsemble | None
        if path is OptimizerPath.GROUND_STATE:
            # Only one admissible input state: no information can be carried,
            # whether or not it dominates the vacuum of beta
            status = CapacityStatus.EXACT
            nats = 0.0
            ensemble = OptimalEnsemble(
                coherent_covariance=CovarianceMatrix(alpha), mean_covariance=np.zeros_like(alpha)
            )
        elif threshold_ok:
            status = CapacityStatus.EXACT
            scale = max(1.0, abs(forms.entropy_form))
            if abs(forms.entropy_form - forms.gain_form) > settings.FORM_AGREEMENT_TOL * scale:
                raise ChannelError(
                    f"capacity forms disagree: {forms.entropy_form:.12g} vs {forms.gain_form:.12g}"
                )
            nats = 0.0 if _negligible(alpha - noise.vacuum, alpha) else max(forms.entropy_form, 0.0)
            ensemble = noise.ensemble(alpha)
        else:
            status = CapacityStatus.UPPER_BOUND_ONLY
            nats = 0.0 if _negligible(alpha - noise.vacuum, alpha) else max(forms.entropy_form, 0.0)
            ensemble = None
            logger.warning(
                f"threshold condition fails at E={energy:.6g} (needs E >= {self.threshold_energy:.6g}); "
                "reporting an upper bound only"
            )

        logger.info(f"capacity at E={energy:.6g}: {nats:.6g} nats ({status.value}, {path.value})")
        return CapacityResult(
            alpha_opt=CovarianceMatrix(alpha),
            threshold_ok=threshold_ok,
            capacity_nats=nats,
            capacity_bits=nats / _LOG2,
            status=status,
            ensemble=ensemble,
            energy=energy,
            e_min=ground.e_min,
            threshold_energy=self.threshold_energy,
            logdet_out=forms.logdet_out,
            logdet_min=forms.logdet_min,
            optimizer=path,
        )


def water_filling_candidate(
    epsilon: npt.ArrayLike, beta: npt.ArrayLike, energy: float, space: SymplecticSpace
) -> Matrix:
    """Stationary point of log det(alpha + beta) on Sp(epsilon alpha) = E."""
    return _Channel(epsilon, beta, space).candidate(energy)


def optimal_input_covariance(
    c: EnergyConstraint, beta: npt.ArrayLike, space: SymplecticSpace
) -> CovarianceMatrix:
    """Maximizer of det(alpha + beta) over valid alpha with Sp(epsilon alpha) <= E."""
    b = check_covariance(beta, space, name="beta")
    if not is_quantum_valid(b, space):
        raise InvalidInputError("beta violates the uncertainty relation")
    channel = _Channel(c.epsilon, b, space)
    channel.check_energy(c.energy)
    alpha, _ = channel.maximize(c.energy)
    return CovarianceMatrix(alpha)


def threshold_check(alpha: npt.ArrayLike, beta: npt.ArrayLike, space: SymplecticSpace) -> bool:
    """alpha - (1/2) Delta J_beta is positive semidefinite, up to THRESHOLD_TOL * ||alpha||."""
    a = check_covariance(alpha, space)
    return _Noise(check_covariance(beta, space, name="beta"), space).dominated_by(a)


def threshold_energy(epsilon: npt.ArrayLike, beta: npt.ArrayLike, space: SymplecticSpace) -> float:
    """Smallest E at which the water-filling candidate meets the threshold condition.

    The candidate is c epsilon^-1 - beta with c = (E + Sp(epsilon beta)) / 2s,
    so the condition reads c >= lambda_max(epsilon^(1/2) (beta + vacuum) epsilon^(1/2)).
    """
    return _Channel(epsilon, beta, space).threshold_energy


def capacity_forms(
    alpha_opt: npt.ArrayLike, beta: npt.ArrayLike, space: SymplecticSpace
) -> CapacityForms:
    a = check_covariance(alpha_opt, space)
    return _Noise(check_covariance(beta, space, name="beta"), space).forms(a)


def optimal_ensemble(
    alpha_opt: npt.ArrayLike, beta: npt.ArrayLike, space: SymplecticSpace
) -> OptimalEnsemble:
    """J_beta-coherent states displaced by z ~ N(0, alpha_opt - (1/2) Delta J_beta)."""
    a = check_covariance(alpha_opt, space)
    noise = _Noise(check_covariance(beta, space, name="beta"), space)
    if not noise.dominated_by(a):
        raise ThresholdViolationError(
            "alpha_opt does not dominate the vacuum of beta; the capacity-achieving ensemble does not exist"
        )
    return noise.ensemble(a)


def _canonical_beta(m: GaussianMeasurement, space: SymplecticSpace) -> Matrix:
    b = np.asarray(canonicalize_measurement(m).canonical.beta)
    if b.shape != (space.dim, space.dim):
        raise InvalidInputError(
            f"measurement acts on {b.shape[0] // 2} mode(s), expected {space.s}"
        )
    return b


def capacity(
    c: EnergyConstraint, m: GaussianMeasurement, space: SymplecticSpace
) -> CapacityResult:
    return _Channel(c.epsilon, _canonical_beta(m, space), space).capacity(c.energy)


def capacity_sweep(
    epsilon: npt.ArrayLike,
    m: GaussianMeasurement,
    energies: Iterable[float],
    space: SymplecticSpace,
) -> list[CapacityResult]:
    """One capacity per energy, in grid order."""
    channel = _Channel(epsilon, _canonical_beta(m, space), space)
    return [channel.capacity(float(e)) for e in energies]


def coherent_ensemble_information(
    coherent_covariance: npt.ArrayLike,
    mean_covariance: npt.ArrayLike,
    beta: npt.ArrayLike,
) -> float:
    """Exact mutual information (nats) of a Gaussian ensemble of coherent states."""
    noise = np.asarray(coherent_covariance, dtype=np.float64) + np.asarray(beta, dtype=np.float64)
    total = noise + np.asarray(mean_covariance, dtype=np.float64)
    return 0.5 * (logdet_pd(total, name="output covariance") - logdet_pd(noise, name="noise covariance"))


def heterodyne_closed_form(beta1: float, beta2: float, energy: float) -> HeterodyneCapacity:
    """Single mode, epsilon = (1/2) I, beta = diag(beta1, beta2).

    C = log((2E + beta1 + beta2) / (2 sqrt(beta1 beta2) + 1)), valid for
    E >= (1/2)(max(sqrt(beta1/beta2), sqrt(beta2/beta1)) + |beta2 - beta1|).
    """
    for name, value in (("beta1", beta1), ("beta2", beta2), ("energy", energy)):
        if not math.isfinite(value) or value <= 0:
            raise InvalidInputError(f"{name} must be positive and finite, got {value}")
    if beta1 * beta2 < 0.25 * (1.0 - settings.VALIDITY_TOL):
        raise InvalidInputError(
            f"noise violates the uncertainty relation: beta1 * beta2 = {beta1 * beta2:.12g} < 1/4"
        )
    ratio = math.sqrt(beta1 / beta2)
    bound = 0.5 * (max(ratio, 1.0 / ratio) + abs(beta2 - beta1))
    if energy < bound * (1.0 - settings.THRESHOLD_TOL):
        raise ThresholdViolationError(
            f"energy {energy:.12g} is below the threshold bound {bound:.12g}", bound=bound
        )
    nats = math.log((2.0 * energy + beta1 + beta2) / (2.0 * math.sqrt(beta1 * beta2) + 1.0))
    return HeterodyneCapacity(capacity_nats=max(nats, 0.0), threshold_bound=bound)
