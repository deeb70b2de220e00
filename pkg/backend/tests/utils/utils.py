import numpy as np
from scipy import linalg

from app.models import Matrix, SymplecticSpace


def random_symplectic(space: SymplecticSpace, rng: np.random.Generator, scale: float = 0.4) -> Matrix:
    """exp(Delta H) for a random symmetric H."""
    h = rng.normal(scale=scale, size=(space.dim, space.dim))
    return np.asarray(linalg.expm(space.delta @ (h + h.T) / 2))


def random_pure_covariance(space: SymplecticSpace, rng: np.random.Generator) -> Matrix:
    s_mat = random_symplectic(space, rng)
    return 0.5 * s_mat @ s_mat.T


def random_symplectic_values(space: SymplecticSpace, rng: np.random.Generator) -> Matrix:
    return 0.5 + rng.exponential(1.0, size=space.s)


def random_valid_covariance(
    space: SymplecticSpace, rng: np.random.Generator, values: Matrix | None = None
) -> Matrix:
    """S diag(nu_1, nu_1, ..., nu_s, nu_s) S^T with nu_j >= 1/2."""
    nu = random_symplectic_values(space, rng) if values is None else values
    s_mat = random_symplectic(space, rng)
    sigma = s_mat @ np.diag(np.repeat(nu, 2)) @ s_mat.T
    return (sigma + sigma.T) / 2


def random_positive_definite(dim: int, rng: np.random.Generator) -> Matrix:
    a = rng.normal(size=(dim, dim))
    return a @ a.T / dim + 0.5 * np.eye(dim)


def random_invertible(dim: int, rng: np.random.Generator) -> Matrix:
    return rng.normal(size=(dim, dim)) + 3.0 * np.eye(dim)


def rotation(theta: float) -> Matrix:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def pure_state_with_energy(epsilon: Matrix, energy: float, theta: float, branch: int) -> Matrix:
    """Single-mode pure covariance (1/2) R diag(x, 1/x) R^T with Sp(epsilon alpha) = energy.

    `branch` (+1 or -1) picks the root x = (E +- sqrt(E^2 - u w)) / u of the
    energy shell, where u, w are the diagonal of R^T epsilon R.
    """
    r = rotation(theta)
    rotated = r.T @ epsilon @ r
    u, w = rotated[0, 0], rotated[1, 1]
    x = (energy + branch * np.sqrt(energy**2 - u * w)) / u
    return np.asarray(0.5 * r @ np.diag([x, 1.0 / x]) @ r.T)
