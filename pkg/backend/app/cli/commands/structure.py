from app.cli.deps import get_measurement, get_space
from app.core.symplectic import complex_structure, pure_covariance, symplectic_basis
from app.models import CommandOutput, RunConfig
from app.utils import fmt_matrix, fmt_vector, render_template


def run(config: RunConfig, *, strict: bool = False) -> CommandOutput:  # noqa: ARG001
    space = get_space(config)
    beta = get_measurement(config).beta
    j = complex_structure(beta, space)
    basis = symplectic_basis(beta, space)
    text = render_template(
        template_name="structure.txt",
        context={
            "modes": space.s,
            "j": fmt_matrix(j),
            "vacuum": fmt_matrix(pure_covariance(j, space)),
            "values": fmt_vector(basis.values),
            "e_vectors": fmt_matrix(basis.e_vectors),
            "h_vectors": fmt_matrix(basis.h_vectors),
        },
    )
    return CommandOutput(text=text)
