from pathlib import Path

from pydantic import ValidationError

from app.core.channel import check_measurement
from app.core.errors import InvalidInputError
from app.core.symplectic import build_symplectic_form
from app.models import EnergyConstraint, GaussianMeasurement, RunConfig, SymplecticSpace


def load_config(path: Path, *, seed: int | None = None) -> RunConfig:
    """Parse a JSON run configuration; `seed` overrides the configured one."""
    try:
        text = path.read_text()
    except OSError as e:
        raise InvalidInputError(f"cannot read config {path}: {e.strerror}")
    try:
        config = RunConfig.model_validate_json(text)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in e.errors()
        )
        raise InvalidInputError(f"invalid config: {problems}")
    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    return config


def get_space(config: RunConfig) -> SymplecticSpace:
    return build_symplectic_form(config.modes)


def get_measurement(config: RunConfig) -> GaussianMeasurement:
    m = GaussianMeasurement(k_matrix=config.k(), beta=config.beta_matrix())
    check_measurement(m)
    return m


def get_constraint(config: RunConfig) -> EnergyConstraint:
    if config.energy is None:
        raise InvalidInputError("this command needs a single energy")
    return EnergyConstraint(epsilon=config.epsilon_matrix(), energy=config.energy)
