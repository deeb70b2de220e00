from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Self

from app.core.config import settings

Matrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]


def frozen_array(value: npt.ArrayLike) -> Matrix:
    arr = np.array(value, dtype=np.float64)
    arr.setflags(write=False)
    return arr


class _MatrixValue:
    """Immutable matrix wrapper usable wherever numpy expects an array."""

    entries: Matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", frozen_array(self.entries))

    def __array__(self, dtype: Any = None, copy: bool | None = None) -> Matrix:
        return np.array(self.entries, dtype=dtype)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.entries.shape)


# =============================================================================
# Symplectic structure
# =============================================================================


@dataclass(frozen=True, eq=False)
class SymplecticSpace:
    s: int
    delta: Matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", frozen_array(self.delta))

    @property
    def dim(self) -> int:
        return 2 * self.s


@dataclass(frozen=True, eq=False)
class CovarianceMatrix(_MatrixValue):
    entries: Matrix


@dataclass(frozen=True, eq=False)
class ComplexStructure(_MatrixValue):
    entries: Matrix


@dataclass(frozen=True, eq=False)
class SymplecticSpectrum:
    # One value per mode, sorted descending
    values: Vector
    valid: bool
    pure: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", frozen_array(self.values))


@dataclass(frozen=True, eq=False)
class SymplecticBasisDecomposition:
    # Row j holds e_j (resp. h_j)
    e_vectors: Matrix
    h_vectors: Matrix
    values: Vector

    def __post_init__(self) -> None:
        for name in ("e_vectors", "h_vectors", "values"):
            object.__setattr__(self, name, frozen_array(getattr(self, name)))


# =============================================================================
# Gaussian measurement model
# =============================================================================


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: Vector
    covariance: CovarianceMatrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", frozen_array(self.mean))
        if not isinstance(self.covariance, CovarianceMatrix):
            object.__setattr__(self, "covariance", CovarianceMatrix(self.covariance))


@dataclass(frozen=True, eq=False)
class GaussianMeasurement:
    k_matrix: Matrix
    beta: CovarianceMatrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_matrix", frozen_array(self.k_matrix))
        if not isinstance(self.beta, CovarianceMatrix):
            object.__setattr__(self, "beta", CovarianceMatrix(self.beta))


@dataclass(frozen=True, eq=False)
class CanonicalMeasurement:
    canonical: GaussianMeasurement
    # Raw outcome z corresponds to canonical outcome u = outcome_map @ z
    outcome_map: Matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcome_map", frozen_array(self.outcome_map))


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    mean: Vector
    covariance: Matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", frozen_array(self.mean))
        object.__setattr__(self, "covariance", frozen_array(self.covariance))


# =============================================================================
# Capacity
# =============================================================================


class CapacityStatus(str, Enum):
    EXACT = "exact"
    UPPER_BOUND_ONLY = "upper_bound_only"


class OptimizerPath(str, Enum):
    WATER_FILLING = "water_filling"
    BARRIER = "barrier"
    GROUND_STATE = "ground_state"


@dataclass(frozen=True, eq=False)
class EnergyConstraint:
    epsilon: Matrix
    energy: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", frozen_array(self.epsilon))
        object.__setattr__(self, "energy", float(self.energy))


@dataclass(frozen=True, eq=False)
class GroundState:
    e_min: float
    ground_covariance: CovarianceMatrix


@dataclass(frozen=True, eq=False)
class OptimalEnsemble:
    coherent_covariance: CovarianceMatrix
    mean_covariance: Matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean_covariance", frozen_array(self.mean_covariance))


@dataclass(frozen=True)
class CapacityForms:
    logdet_out: float
    logdet_min: float
    # (1/2) log det(alpha + beta) - (1/2) log det(beta + (1/2) Delta J_beta)
    entropy_form: float
    # (1/2) log det[I + (alpha - (1/2) Delta J_beta)(beta + (1/2) Delta J_beta)^-1]
    gain_form: float


@dataclass(frozen=True, eq=False)
class CapacityResult:
    alpha_opt: CovarianceMatrix
    threshold_ok: bool
    capacity_nats: float
    capacity_bits: float
    status: CapacityStatus
    ensemble: OptimalEnsemble | None
    energy: float
    e_min: float
    threshold_energy: float
    logdet_out: float
    logdet_min: float
    optimizer: OptimizerPath


@dataclass(frozen=True)
class HeterodyneCapacity:
    capacity_nats: float
    threshold_bound: float


@dataclass(frozen=True, eq=False)
class BarrierResult:
    alpha: Matrix
    iterations: int
    duality_gap: float


# =============================================================================
# Monte Carlo validation
# =============================================================================


@dataclass(frozen=True, eq=False)
class GaussianCoherentEnsemble:
    coherent_covariance: CovarianceMatrix
    mean_covariance: Matrix

    def __post_init__(self) -> None:
        if not isinstance(self.coherent_covariance, CovarianceMatrix):
            object.__setattr__(
                self, "coherent_covariance", CovarianceMatrix(self.coherent_covariance)
            )
        object.__setattr__(self, "mean_covariance", frozen_array(self.mean_covariance))

    @classmethod
    def from_optimal(cls, ensemble: OptimalEnsemble) -> "GaussianCoherentEnsemble":
        return cls(
            coherent_covariance=ensemble.coherent_covariance,
            mean_covariance=ensemble.mean_covariance,
        )


@dataclass(frozen=True, eq=False)
class DiscreteEnsemble:
    entries: tuple[tuple[float, GaussianState], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "entries", tuple((float(w), state) for w, state in self.entries)
        )

    @property
    def weights(self) -> Vector:
        return np.array([w for w, _ in self.entries], dtype=np.float64)

    @property
    def states(self) -> list[GaussianState]:
        return [state for _, state in self.entries]


@dataclass(frozen=True, eq=False)
class ChannelSamples:
    # Input displacements, expressed in the measurement's outcome coordinates
    inputs: Matrix
    outputs: Matrix
    seed: int
    # State index per sample, discrete ensembles only
    labels: npt.NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", frozen_array(self.inputs))
        object.__setattr__(self, "outputs", frozen_array(self.outputs))
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.outputs.shape[0])


@dataclass(frozen=True)
class MIEstimate:
    value: float
    stderr: float


@dataclass(frozen=True)
class EntropyDecomposition:
    lhs: float
    rhs: float
    gap: float
    kl_divergence: float
    expected_energy: float
    log_normalizer: float


# =============================================================================
# Command line
# =============================================================================


class EnergySweep(BaseModel):
    model_config = ConfigDict(extra="forbid")

    start: float = Field(gt=0)
    stop: float = Field(gt=0)
    steps: int = Field(ge=2)

    @model_validator(mode="after")
    def _check_bounds(self) -> Self:
        if not self.start < self.stop:
            raise ValueError("energy_sweep requires start < stop")
        return self


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    modes: int = Field(ge=1)
    # Row-major 2s x 2s matrices
    epsilon: list[float]
    beta: list[float]
    k_matrix: list[float] | None = None
    energy: float | None = Field(default=None, gt=0)
    energy_sweep: EnergySweep | None = None
    samples: int = Field(default_factory=lambda: settings.DEFAULT_SAMPLES, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    log_base: Literal["2", "e"] = "2"

    @model_validator(mode="after")
    def _check_dimensions(self) -> Self:
        size = (2 * self.modes) ** 2
        for name in ("epsilon", "beta", "k_matrix"):
            value = getattr(self, name)
            if value is not None and len(value) != size:
                raise ValueError(
                    f"{name} must have {size} entries for {self.modes} mode(s), got {len(value)}"
                )
        if (self.energy is None) == (self.energy_sweep is None):
            raise ValueError("give exactly one of energy or energy_sweep")
        return self

    def _square(self, values: list[float]) -> Matrix:
        dim = 2 * self.modes
        return np.array(values, dtype=np.float64).reshape(dim, dim)

    def epsilon_matrix(self) -> Matrix:
        return self._square(self.epsilon)

    def beta_matrix(self) -> Matrix:
        return self._square(self.beta)

    def k(self) -> Matrix:
        if self.k_matrix is None:
            return np.eye(2 * self.modes)
        return self._square(self.k_matrix)

    def energies(self) -> Vector:
        if self.energy_sweep is None:
            raise ValueError("energy_sweep is not configured")
        sweep = self.energy_sweep
        return np.linspace(sweep.start, sweep.stop, sweep.steps)


@dataclass
class CommandOutput:
    text: str
    exit_code: int = 0
    notes: list[str] = field(default_factory=list)
