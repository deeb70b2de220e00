from app.cli.deps import get_measurement, get_space
from app.core.capacity import capacity_sweep
from app.core.errors import InvalidInputError, ThresholdViolationError
from app.models import CapacityStatus, CommandOutput, RunConfig
from app.utils import fmt, write_csv

HEADER = (
    "energy",
    "e_min",
    "threshold_ok",
    "capacity_nats",
    "capacity_bits",
    "logdet_out",
    "logdet_min",
    "status",
)


def run(config: RunConfig, *, strict: bool = False) -> CommandOutput:
    if config.energy_sweep is None:
        raise InvalidInputError("sweep needs energy_sweep in the config")
    space = get_space(config)
    results = capacity_sweep(
        config.epsilon_matrix(), get_measurement(config), config.energies(), space
    )
    rows = [
        (
            fmt(r.energy),
            fmt(r.e_min),
            str(r.threshold_ok).lower(),
            fmt(r.capacity_nats),
            fmt(r.capacity_bits),
            fmt(r.logdet_out),
            fmt(r.logdet_min),
            r.status.value,
        )
        for r in results
    ]
    text = write_csv(HEADER, rows)
    failing = [r for r in results if r.status is CapacityStatus.UPPER_BOUND_ONLY]
    if not failing:
        return CommandOutput(text=text)
    level = "error" if strict else "warning"
    note = (
        f"{level}: threshold condition fails on {len(failing)} of {len(results)} energies; "
        f"it holds for E >= {fmt(failing[0].threshold_energy)}"
    )
    exit_code = ThresholdViolationError.exit_code if strict else 0
    return CommandOutput(text=text, exit_code=exit_code, notes=[note])
