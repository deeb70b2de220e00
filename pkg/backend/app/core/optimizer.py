"""Log-barrier maximization of log det(alpha + beta).

Feasible set: symmetric alpha with alpha + (i/2) Delta >= 0 (quantum
validity) and Sp(epsilon alpha) <= E. The objective is concave and the set is
convex, so damped Newton steps on the barrier problem converge from any
strictly feasible start.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from app.core.config import settings
from app.core.errors import InvalidInputError, OptimizerConvergenceError
from app.models import BarrierResult, Matrix, SymplecticSpace

logger = logging.getLogger(__name__)

_ARMIJO = 0.25
_MIN_STEP = 1e-20


@dataclass
class _NewtonSystem:
    value: float
    gradient: Matrix
    hessian: Matrix


class _BarrierProblem:
    """min  -log det(alpha + beta) - (1/t) [log det(alpha + (i/2) Delta) + log(E - Sp(eps alpha))]

    over the upper-triangular coordinates of alpha. The objective stays O(1)
    as t grows.
    """

    def __init__(
        self, epsilon: Matrix, beta: Matrix, energy: float, space: SymplecticSpace
    ) -> None:
        self.epsilon = epsilon
        self.beta = beta
        self.energy = energy
        self.space = space
        rows, cols = np.triu_indices(space.dim)
        self.rows = rows
        self.cols = cols
        basis = np.zeros((rows.size, space.dim, space.dim))
        basis[np.arange(rows.size), rows, cols] = 1.0
        basis[np.arange(rows.size), cols, rows] = 1.0
        self.basis = basis
        self.energy_gradient = np.einsum("ab,kba->k", epsilon, basis)
        # Barrier parameter: 2s for the Hermitian cone plus one linear constraint
        self.degree = space.dim + 1

    def pack(self, alpha: Matrix) -> Matrix:
        return np.asarray(alpha[self.rows, self.cols], dtype=np.float64)

    def unpack(self, x: Matrix) -> Matrix:
        return np.asarray(np.tensordot(x, self.basis, axes=1), dtype=np.float64)

    def slack(self, alpha: Matrix) -> float:
        return self.energy - float(np.trace(self.epsilon @ alpha))

    def _factors(self, alpha: Matrix) -> tuple[Matrix, Matrix, float] | None:
        slack = self.slack(alpha)
        if slack <= 0:
            return None
        try:
            chol_out = linalg.cholesky(alpha + self.beta, lower=True)
            chol_cone = linalg.cholesky(alpha + 0.5j * self.space.delta, lower=True)
        except linalg.LinAlgError:
            return None
        return chol_out, chol_cone, slack

    def _value(self, factors: tuple[Matrix, Matrix, float], t: float) -> float:
        chol_out, chol_cone, slack = factors
        barrier = 2.0 * float(np.sum(np.log(np.abs(np.diag(chol_cone))))) + float(np.log(slack))
        return -2.0 * float(np.sum(np.log(np.diag(chol_out)))) - barrier / t

    def value(self, x: Matrix, t: float) -> float | None:
        """Barrier value, or None outside the open feasible set."""
        factors = self._factors(self.unpack(x))
        return None if factors is None else self._value(factors, t)

    def newton_system(self, x: Matrix, t: float) -> _NewtonSystem:
        factors = self._factors(self.unpack(x))
        if factors is None:
            raise InvalidInputError("barrier iterate left the feasible set")
        chol_out, chol_cone, slack = factors
        inv_out = linalg.cho_solve((chol_out, True), np.eye(self.space.dim))
        inv_cone = linalg.cho_solve((chol_cone, True), np.eye(self.space.dim, dtype=complex))
        out_basis = inv_out @ self.basis
        cone_basis = inv_cone @ self.basis
        gradient = -np.einsum("kaa->k", out_basis) + (
            -np.einsum("kaa->k", cone_basis).real + self.energy_gradient / slack
        ) / t
        hessian = np.einsum("kab,lba->kl", out_basis, out_basis) + (
            np.einsum("kab,lba->kl", cone_basis, cone_basis).real
            + np.outer(self.energy_gradient, self.energy_gradient) / slack**2
        ) / t
        return _NewtonSystem(
            value=self._value(factors, t), gradient=gradient, hessian=hessian
        )


def maximize_logdet_barrier(
    epsilon: Matrix,
    beta: Matrix,
    energy: float,
    space: SymplecticSpace,
    start: Matrix,
) -> BarrierResult:
    """Maximize log det(alpha + beta) over valid alpha with Sp(epsilon alpha) <= energy.

    `start` must be strictly feasible. Raises OptimizerConvergenceError when
    BARRIER_MAX_ITER Newton steps do not reach the requested accuracy.
    """
    problem = _BarrierProblem(epsilon, beta, energy, space)
    x = problem.pack(start)
    t = 1.0
    iterations = 0
    if problem.value(x, t) is None:
        raise InvalidInputError("barrier start point is not strictly feasible")

    while True:
        # Centering by damped Newton
        while True:
            point = problem.newton_system(x, t)
            step = -linalg.solve(point.hessian, point.gradient, assume_a="sym")
            decrement = float(-point.gradient @ step)
            if decrement / 2 <= settings.BARRIER_GRADIENT_TOL * max(1.0, abs(point.value)):
                break
            iterations += 1
            if iterations > settings.BARRIER_MAX_ITER:
                raise OptimizerConvergenceError(
                    f"barrier method did not converge within {settings.BARRIER_MAX_ITER} Newton steps",
                    iterations=iterations,
                )
            size = 1.0
            while size > _MIN_STEP:
                trial = problem.value(x + size * step, t)
                if (
                    trial is not None
                    and trial < point.value
                    and trial <= point.value - _ARMIJO * size * decrement
                ):
                    break
                size /= 2
            else:
                # No strict decrease representable in double precision
                logger.debug(f"barrier line search stalled at t={t:.3e}")
                break
            x = x + size * step

        gap = problem.degree / t
        logger.debug(f"barrier t={t:.3e} gap={gap:.3e} newton_steps={iterations}")
        if gap <= settings.BARRIER_GRADIENT_TOL:
            break
        t *= settings.BARRIER_MU

    alpha = problem.unpack(x)
    violation = max(
        -problem.slack(alpha),
        -float(linalg.eigvalsh(alpha + 0.5j * space.delta)[0]),
        0.0,
    )
    if violation > settings.BARRIER_VIOLATION_TOL:
        raise OptimizerConvergenceError(
            f"barrier solution violates the constraints by {violation:.3e}",
            iterations=iterations,
        )
    return BarrierResult(alpha=alpha, iterations=iterations, duality_gap=gap)
