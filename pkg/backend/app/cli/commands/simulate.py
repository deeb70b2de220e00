import logging

from app.cli.deps import get_constraint, get_measurement, get_space
from app.core.capacity import capacity
from app.core.errors import ThresholdViolationError
from app.core.montecarlo import estimate_information, simulate_ensemble
from app.models import CommandOutput, GaussianCoherentEnsemble, RunConfig
from app.utils import fmt, write_csv

logger = logging.getLogger(__name__)

HEADER = ("n", "seed", "mi_estimate_nats", "mi_stderr_nats", "capacity_nats", "abs_gap_nats")


def run(config: RunConfig, *, strict: bool = False) -> CommandOutput:  # noqa: ARG001
    """Plug-in estimate of the information carried by the optimal ensemble."""
    space = get_space(config)
    m = get_measurement(config)
    result = capacity(get_constraint(config), m, space)
    if result.ensemble is None:
        raise ThresholdViolationError(
            f"threshold condition fails at E={fmt(result.energy)}: no optimal ensemble to "
            f"simulate (needs E >= {fmt(result.threshold_energy)})",
            bound=result.threshold_energy,
        )
    logger.info(f"simulating {config.samples} samples with seed {config.seed}")
    samples = simulate_ensemble(
        GaussianCoherentEnsemble.from_optimal(result.ensemble), m, config.samples, config.seed
    )
    estimate = estimate_information(samples)
    row = (
        str(samples.n),
        str(samples.seed),
        fmt(estimate.value),
        fmt(estimate.stderr),
        fmt(result.capacity_nats),
        fmt(abs(estimate.value - result.capacity_nats)),
    )
    return CommandOutput(text=write_csv(HEADER, [row]))
