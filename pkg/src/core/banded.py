"""Banded linear solves with pivot reporting for the finite-difference solvers."""

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from ..utils.errors import SolverError
from ..utils.logger import get_logger

logger = get_logger(__name__)

RESIDUAL_RTOL = 1e-8


def tridiagonal_bands(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """
    Pack a tridiagonal matrix into LAPACK banded storage for solve_banded((1, 1), ...).

    Args:
        lower: Sub-diagonal, lower[i] = A[i, i-1] (lower[0] ignored)
        diag: Main diagonal
        upper: Super-diagonal, upper[i] = A[i, i+1] (upper[-1] ignored)

    Returns:
        Array of shape (3, n)
    """
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return ab


def banded_matvec(l_and_u: tuple[int, int], ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = A·x for A stored in LAPACK banded form."""
    lower, upper = l_and_u
    n = ab.shape[1]
    y = np.zeros(n)
    for k in range(lower + upper + 1):
        offset = upper - k  # column j = i + offset
        if offset >= 0:
            y[: n - offset] += ab[k, offset:] * x[offset:]
        else:
            y[-offset:] += ab[k, : n + offset] * x[: n + offset]
    return y


def elimination_pivots(l_and_u: tuple[int, int], ab: np.ndarray) -> np.ndarray:
    """Diagonal of U from banded Gaussian elimination without row exchanges."""
    lower, upper = l_and_u
    n = ab.shape[1]
    dense_band = np.zeros((n, lower + upper + 1))
    # dense_band[i, j - i + lower] = A[i, j]
    for k in range(lower + upper + 1):
        offset = upper - k
        rows = np.arange(max(0, -offset), min(n, n - offset))
        dense_band[rows, offset + lower] = ab[k, rows + offset]
    pivots = np.zeros(n)
    for i in range(n):
        pivot = dense_band[i, lower]
        pivots[i] = pivot
        if pivot == 0.0:
            continue
        for r in range(i + 1, min(n, i + lower + 1)):
            col = i - r + lower
            factor = dense_band[r, col] / pivot
            if factor == 0.0:
                continue
            width = min(upper, n - 1 - i)
            dense_band[r, col : col + width + 1] -= factor * dense_band[i, lower : lower + width + 1]
    return pivots


def _failure(message: str, l_and_u: tuple[int, int], ab: np.ndarray) -> SolverError:
    pivots = np.abs(elimination_pivots(l_and_u, ab))
    index = int(np.argmin(pivots))
    logger.debug(f"banded solve failed; smallest pivot {pivots[index]:.3e} at row {index}")
    return SolverError(
        f"{message}: smallest elimination pivot {pivots[index]:.3e} at row {index}",
        pivot=float(pivots[index]),
        index=index,
    )


def solve_banded_system(l_and_u: tuple[int, int], ab: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Solve a banded system and verify the residual.

    Args:
        l_and_u: Number of sub- and super-diagonals
        ab: Matrix in LAPACK banded storage
        rhs: Right-hand side

    Returns:
        Solution vector

    Raises:
        SolverError: If the matrix is (numerically) singular; carries the
            smallest elimination pivot and its row
    """
    try:
        x = solve_banded(l_and_u, ab, rhs)
    except (LinAlgError, ValueError) as exc:
        raise _failure(f"banded system is singular ({exc})", l_and_u, ab) from exc

    if not np.all(np.isfinite(x)):
        raise _failure("banded solve produced non-finite values", l_and_u, ab)

    residual = np.max(np.abs(banded_matvec(l_and_u, ab, x) - rhs))
    scale = np.max(np.abs(ab)) * np.max(np.abs(x)) + np.max(np.abs(rhs))
    if scale > 0 and residual > RESIDUAL_RTOL * scale:
        raise _failure(f"banded solve is ill-conditioned (residual {residual:.3e})", l_and_u, ab)
    return x
