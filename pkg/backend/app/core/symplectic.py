"""Symplectic linear algebra on the phase space R^2s.

Coordinates are ordered mode by mode, z = (x_1, y_1, ..., x_s, y_s), so the
symplectic form is block diagonal. Covariances are in units with hbar = 1:
the vacuum is (1/2) I and quantum validity reads alpha + (i/2) Delta >= 0.
"""

import numpy as np
import numpy.typing as npt

from app.core.config import settings
from app.core.errors import InvalidInputError
from app.models import (
    ComplexStructure,
    CovarianceMatrix,
    Matrix,
    SymplecticBasisDecomposition,
    SymplecticSpace,
    SymplecticSpectrum,
)

_MODE_BLOCK = np.array([[0.0, 1.0], [-1.0, 0.0]])

# Minimal residual norm for a Gram-Schmidt candidate inside an eigenspace
_GS_MIN_NORM = 1e-4


def build_symplectic_form(s: int) -> SymplecticSpace:
    if isinstance(s, bool) or not isinstance(s, int | np.integer) or s < 1:
        raise InvalidInputError(f"number of modes must be a positive integer, got {s!r}")
    return SymplecticSpace(s=int(s), delta=np.kron(np.eye(int(s)), _MODE_BLOCK))


def check_covariance(
    alpha: npt.ArrayLike, space: SymplecticSpace, *, name: str = "alpha"
) -> Matrix:
    """Return `alpha` as a symmetric float matrix of the space's dimension.

    Raises:
        InvalidInputError: wrong shape, non-finite entries or not symmetric
            within SYMMETRY_TOL relative to the Frobenius norm.
    """
    a = np.array(alpha, dtype=np.float64)
    if a.shape != (space.dim, space.dim):
        raise InvalidInputError(
            f"{name} must be {space.dim}x{space.dim} for {space.s} mode(s), got shape {a.shape}"
        )
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    if np.linalg.norm(a - a.T) > settings.SYMMETRY_TOL * float(np.linalg.norm(a)):
        raise InvalidInputError(f"{name} is not symmetric")
    return (a + a.T) / 2


def _spectral_roots(a: Matrix, *, name: str) -> tuple[Matrix, Matrix]:
    """Square root and inverse square root of a positive definite matrix."""
    w, v = np.linalg.eigh(a)
    if w[0] <= settings.VALIDITY_TOL * max(abs(w[-1]), 1.0):
        raise InvalidInputError(f"{name} is singular or not positive definite")
    root = (v * np.sqrt(w)) @ v.T
    inv_root = (v / np.sqrt(w)) @ v.T
    return root, inv_root


def _validity_tol(values: npt.NDArray[np.float64]) -> float:
    return settings.VALIDITY_TOL * max(float(np.max(values)), 0.5)


def uncertainty_matrix(
    alpha: npt.ArrayLike, space: SymplecticSpace
) -> npt.NDArray[np.complex128]:
    """The Hermitian matrix alpha + (i/2) Delta."""
    a = check_covariance(alpha, space)
    return a + 0.5j * space.delta


def uncertainty_margin(alpha: npt.ArrayLike, space: SymplecticSpace) -> float:
    """Smallest eigenvalue of alpha + (i/2) Delta; negative means invalid."""
    return float(np.linalg.eigvalsh(uncertainty_matrix(alpha, space))[0])


def is_quantum_valid(alpha: npt.ArrayLike, space: SymplecticSpace) -> bool:
    a = check_covariance(alpha, space)
    w = np.linalg.eigvalsh(a + 0.5j * space.delta)
    return bool(w[0] >= -settings.VALIDITY_TOL * max(float(w[-1]), 0.5))


def is_symplectic(s_matrix: npt.ArrayLike, space: SymplecticSpace) -> bool:
    s_mat = np.asarray(s_matrix, dtype=np.float64)
    if s_mat.shape != (space.dim, space.dim):
        return False
    scale = max(float(np.linalg.norm(s_mat, 2)) ** 2, 1.0)
    return bool(
        np.allclose(s_mat.T @ space.delta @ s_mat, space.delta, rtol=0.0, atol=1e-10 * scale)
    )


def symplectic_spectrum(alpha: npt.ArrayLike, space: SymplecticSpace) -> SymplecticSpectrum:
    """Symplectic eigenvalues of alpha, one per mode, sorted descending.

    They are the moduli of the eigenvalues of Delta^-1 alpha, obtained from the
    Hermitian matrix i alpha^(1/2) Delta^T alpha^(1/2) which is similar to
    i Delta^-1 alpha.
    """
    a = check_covariance(alpha, space)
    w, v = np.linalg.eigh(a)
    if w[0] < -settings.VALIDITY_TOL * max(abs(w[-1]), 1.0):
        raise InvalidInputError("covariance is not positive semidefinite")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    eigenvalues = np.linalg.eigvalsh(1j * (root @ space.delta.T @ root))
    values = np.sort(np.abs(eigenvalues[space.s :]))[::-1]

    tol = _validity_tol(values)
    valid = bool(values[-1] >= 0.5 - tol)
    pure = bool(np.all(np.abs(values - 0.5) <= tol))
    return SymplecticSpectrum(values=values, valid=valid, pure=pure)


def _eigenspace_basis(vectors: npt.NDArray[np.complex128]) -> list[npt.NDArray[np.complex128]]:
    """Deterministic orthonormal basis of span(vectors).

    Projects the canonical unit vectors, in coordinate order, onto the span
    and orthonormalizes them. Each accepted vector has a real positive
    component at the coordinate it was built from, which fixes its phase.
    """
    dim, rank = vectors.shape
    projector = vectors @ vectors.conj().T
    basis: list[npt.NDArray[np.complex128]] = []
    for k in range(dim):
        candidate = projector[:, k].copy()
        for _ in range(2):
            for q in basis:
                candidate -= q * (q.conj() @ candidate)
        norm = float(np.linalg.norm(candidate))
        if norm > _GS_MIN_NORM:
            basis.append(candidate / norm)
        if len(basis) == rank:
            break
    return basis


def _clusters(values: npt.NDArray[np.float64], tol: float) -> list[tuple[int, int]]:
    """Index ranges of runs of sorted values that agree within tol."""
    ranges: list[tuple[int, int]] = []
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and abs(values[start] - values[stop]) <= tol:
            stop += 1
        ranges.append((start, stop))
        start = stop
    return ranges


def symplectic_basis(
    alpha: npt.ArrayLike, space: SymplecticSpace
) -> SymplecticBasisDecomposition:
    """Basis {e_j, h_j} orthogonal in the alpha-metric with A e_j = a_j h_j,
    A h_j = -a_j e_j for A = Delta^-1 alpha, normalized so that
    e_j^T alpha e_j = h_j^T alpha h_j = a_j.

    With this normalization e_j^T Delta h_k = delta_jk, i.e. the basis is
    symplectic. Modes are ordered by descending symplectic eigenvalue;
    degenerate eigenvalues share one eigenspace whose basis is fixed by
    `_eigenspace_basis`.
    """
    a = check_covariance(alpha, space)
    root, inv_root = _spectral_roots(a, name="covariance")
    # u + i w is an eigenvector of i M for the eigenvalue +a_j, M = alpha^(1/2) Delta^-1 alpha^(1/2)
    eigenvalues, eigenvectors = np.linalg.eigh(1j * (root @ space.delta.T @ root))
    values = eigenvalues[space.s :][::-1]
    vectors = eigenvectors[:, space.s :][:, ::-1]

    e_rows: list[Matrix] = []
    h_rows: list[Matrix] = []
    mode_values: list[float] = []
    for start, stop in _clusters(values, _validity_tol(values)):
        value = float(values[start:stop].mean())
        cluster = _eigenspace_basis(vectors[:, start:stop])
        if len(cluster) != stop - start:
            raise InvalidInputError("could not resolve a degenerate symplectic eigenspace")
        for c in cluster:
            # u = sqrt(2) Re c and w = sqrt(2) Im c are orthonormal
            e_rows.append(inv_root @ (np.sqrt(2.0 * value) * c.real))
            h_rows.append(inv_root @ (np.sqrt(2.0 * value) * c.imag))
            mode_values.append(value)

    return SymplecticBasisDecomposition(
        e_vectors=np.array(e_rows), h_vectors=np.array(h_rows), values=np.array(mode_values)
    )


def complex_structure(
    alpha: npt.ArrayLike, space: SymplecticSpace, *, require_valid: bool = True
) -> ComplexStructure:
    """Polar factor J_alpha = (-A^2)^(-1/2) A of A = Delta^-1 alpha.

    Computed on the symmetrized similar matrix M = alpha^(1/2) A alpha^(-1/2),
    which is antisymmetric, so -M^2 = M^T M is symmetric positive definite.
    J_alpha commutes with A, squares to -I, and Delta J_alpha is symmetric
    positive definite.

    `require_valid=False` accepts any positive definite matrix, e.g. the
    inverse of an energy matrix.
    """
    a = check_covariance(alpha, space)
    if require_valid and not symplectic_spectrum(a, space).valid:
        raise InvalidInputError("covariance violates the uncertainty relation")
    root, inv_root = _spectral_roots(a, name="covariance")
    m = root @ space.delta.T @ root
    w, v = np.linalg.eigh(m.T @ m)
    if w[0] <= 0:
        raise InvalidInputError("covariance is singular")
    inv_abs = (v / np.sqrt(w)) @ v.T
    j = inv_root @ (inv_abs @ m) @ root
    return ComplexStructure(entries=j)


def check_complex_structure(j: npt.ArrayLike, space: SymplecticSpace) -> Matrix:
    j_mat = np.array(j, dtype=np.float64)
    if j_mat.shape != (space.dim, space.dim):
        raise InvalidInputError(
            f"complex structure must be {space.dim}x{space.dim}, got shape {j_mat.shape}"
        )
    tol = settings.VALIDITY_TOL * max(float(np.linalg.norm(j_mat)) ** 2, 1.0)
    if np.abs(j_mat @ j_mat + np.eye(space.dim)).max() > tol:
        raise InvalidInputError("complex structure must satisfy J^2 = -I")
    metric = space.delta @ j_mat
    if np.abs(metric - metric.T).max() > tol:
        raise InvalidInputError("Delta J must be symmetric")
    if np.linalg.eigvalsh((metric + metric.T) / 2)[0] < -tol:
        raise InvalidInputError("Delta J must be positive semidefinite")
    return j_mat


def pure_covariance(j: npt.ArrayLike, space: SymplecticSpace) -> CovarianceMatrix:
    """Covariance (1/2) Delta J of the J-vacuum."""
    j_mat = check_complex_structure(j, space)
    g = 0.5 * (space.delta @ j_mat)
    return CovarianceMatrix(entries=(g + g.T) / 2)
