import logging

from app.cli.deps import get_space
from app.core.capacity import min_energy
from app.core.channel import check_measurement
from app.core.errors import InvalidInputError
from app.core.symplectic import check_covariance, symplectic_spectrum, uncertainty_margin
from app.models import CommandOutput, GaussianMeasurement, RunConfig
from app.utils import fmt, fmt_matrix, fmt_vector, render_template

logger = logging.getLogger(__name__)


def run(config: RunConfig, *, strict: bool = False) -> CommandOutput:  # noqa: ARG001
    """Symplectic spectrum and validity of beta and of the ground state of epsilon."""
    space = get_space(config)
    beta = check_covariance(config.beta_matrix(), space, name="beta")
    spectrum = symplectic_spectrum(beta, space)
    ground = min_energy(config.epsilon_matrix(), space)
    ground_spectrum = symplectic_spectrum(ground.ground_covariance, space)
    if spectrum.valid:
        check_measurement(GaussianMeasurement(k_matrix=config.k(), beta=beta))

    text = render_template(
        template_name="validate.txt",
        context={
            "modes": space.s,
            "beta_values": fmt_vector(spectrum.values),
            "beta_valid": str(spectrum.valid).lower(),
            "beta_pure": str(spectrum.pure).lower(),
            "beta_margin": fmt(uncertainty_margin(beta, space)),
            "ground": fmt_matrix(ground.ground_covariance),
            "ground_values": fmt_vector(ground_spectrum.values),
            "ground_valid": str(ground_spectrum.valid).lower(),
            "ground_pure": str(ground_spectrum.pure).lower(),
            "e_min": fmt(ground.e_min),
        },
    )
    if not spectrum.valid:
        detail = (
            "beta is not a quantum covariance: it violates the uncertainty relation "
            f"beta + (i/2) Delta >= 0 (smallest symplectic eigenvalue {fmt(spectrum.values[-1])} < 1/2)"
        )
        logger.info(detail)
        return CommandOutput(
            text=text, exit_code=InvalidInputError.exit_code, notes=[f"error: {detail}"]
        )
    return CommandOutput(text=text)
