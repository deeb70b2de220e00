from app.cli.deps import get_constraint, get_measurement, get_space
from app.core.capacity import capacity
from app.core.errors import ThresholdViolationError
from app.models import CapacityResult, CapacityStatus, CommandOutput, RunConfig
from app.utils import fmt, fmt_matrix, render_template


def threshold_note(result: CapacityResult, *, strict: bool) -> str:
    level = "error" if strict else "warning"
    return (
        f"{level}: threshold condition fails at E={fmt(result.energy)}; it holds for "
        f"E >= {fmt(result.threshold_energy)}. The reported value is an upper bound only"
    )


def run(config: RunConfig, *, strict: bool = False) -> CommandOutput:
    space = get_space(config)
    result = capacity(get_constraint(config), get_measurement(config), space)
    in_bits = config.log_base == "2"
    ensemble = None
    if result.ensemble is not None:
        ensemble = {
            "coherent": fmt_matrix(result.ensemble.coherent_covariance),
            "mean": fmt_matrix(result.ensemble.mean_covariance),
        }
    text = render_template(
        template_name="capacity.txt",
        context={
            "energy": fmt(result.energy),
            "e_min": fmt(result.e_min),
            "threshold_energy": fmt(result.threshold_energy),
            "optimizer": result.optimizer.value,
            "alpha_opt": fmt_matrix(result.alpha_opt),
            "threshold_ok": str(result.threshold_ok).lower(),
            "status": result.status.value,
            "capacity": fmt(result.capacity_bits if in_bits else result.capacity_nats),
            "unit": "bits" if in_bits else "nats",
            "capacity_nats": fmt(result.capacity_nats),
            "capacity_bits": fmt(result.capacity_bits),
            "ensemble": ensemble,
        },
    )
    if result.status is CapacityStatus.EXACT:
        return CommandOutput(text=text)
    exit_code = ThresholdViolationError.exit_code if strict else 0
    return CommandOutput(
        text=text, exit_code=exit_code, notes=[threshold_note(result, strict=strict)]
    )
