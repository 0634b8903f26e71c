"""Brute-force finite-difference reference solver for the interface problem."""

from typing import Optional

import numpy as np

from ..models.beam import BeamProblem, GridFunction
from ..models.reports import OracleSolution
from ..utils.errors import PreconditionError
from ..utils.logger import get_logger
from .banded import solve_banded_system
from .quadrature import sample_forcing

logger = get_logger(__name__)

MAX_SPACING = 1e-3
BANDS = (3, 2)


def snap_cells(x0: float, h: float) -> tuple[int, int]:
    """Cell counts on [0, x0] and [x0, 1], multiples of 4, with spacing closest to h."""
    m = 4 * max(1, round(x0 / (4.0 * h)))
    k = 4 * max(1, round((1.0 - x0) / (4.0 * h)))
    return int(m), int(k)


def _assemble(problem: BeamProblem, m: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Banded system (lower 3, upper 2) for u_0..u_m on [0, x0] and w_0..w_k on [x0, 1].

    Row m enforces A·u_m = B·w_0, row m + 1 the derivative law with one-sided
    3-point stencils; the other rows are boundary or central-difference rows.
    """
    x0 = problem.x0
    A, B = problem.a.left, problem.a.right
    P1, P2 = problem.p.left, problem.p.right
    hm, hp = x0 / m, (1.0 - x0) / k
    size = m + k + 2
    lower, upper = BANDS
    ab = np.zeros((lower + upper + 1, size))
    rhs = np.zeros(size)

    def put(i: int, j: int, value: float) -> None:
        ab[upper + i - j, j] += value

    put(0, 0, 1.0)
    left_nodes = hm * np.arange(1, m)
    rhs[1:m] = hm * hm * sample_forcing(problem.g, left_nodes, hm) / A
    for i in range(1, m):
        put(i, i - 1, 1.0)
        put(i, i, -2.0 + hm * hm * P1 / A)
        put(i, i + 1, 1.0)

    w0 = m + 1
    put(m, m, A)
    put(m, w0, -B)
    for j, coef in ((m, 3.0), (m - 1, -4.0), (m - 2, 1.0)):
        put(m + 1, j, A * coef / (2.0 * hm))
    for j, coef in ((w0, 3.0), (w0 + 1, -4.0), (w0 + 2, 1.0)):
        put(m + 1, j, B * coef / (2.0 * hp))

    right_nodes = x0 + hp * np.arange(1, k)
    rhs[w0 + 1 : w0 + k] = hp * hp * sample_forcing(problem.g, right_nodes, hp) / B
    for j in range(1, k):
        row = w0 + j
        put(row, row - 1, 1.0)
        put(row, row, -2.0 + hp * hp * P2 / B)
        put(row, row + 1, 1.0)
    put(w0 + k, w0 + k, 1.0)
    return ab, rhs


def _solve(problem: BeamProblem, m: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    ab, rhs = _assemble(problem, m, k)
    x = solve_banded_system(BANDS, ab, rhs)
    return x[: m + 1], x[m + 1 :]


def _order(fine: tuple, mid: tuple, coarse: tuple) -> Optional[float]:
    """log2 of the ratio of successive differences on the nodes shared by all three grids."""
    near = max(np.max(np.abs(f[::4] - m[::2])) for f, m in zip(fine, mid))
    far = max(np.max(np.abs(m[::2] - c)) for m, c in zip(mid, coarse))
    if near == 0.0 or far == 0.0:
        return None
    return float(np.log2(far / near))


def fd_interface_solve(problem: BeamProblem, h: float, estimate_order: bool = True) -> OracleSolution:
    """
    Second-order finite differences on both sides of x0 coupled by the interface laws.

    The interval is split into [0, x0] and [x0, 1] with uniform spacings
    h- = x0/m and h+ = (1 - x0)/k closest to h, so x0 is always a (doubled) node.

    Args:
        problem: Interface problem
        h: Requested spacing (<= 1e-3)
        estimate_order: Also solve at 2h and 4h and report the observed order

    Returns:
        OracleSolution

    Raises:
        PreconditionError: If h > 1e-3
        SolverError: If the banded system is singular (near a singular force)
    """
    if not 0.0 < h <= MAX_SPACING:
        raise PreconditionError(f"spacing must lie in (0, {MAX_SPACING}], got {h!r}")
    x0 = problem.x0
    m, k = snap_cells(x0, h)
    left, right = _solve(problem, m, k)

    order = None
    if estimate_order and min(m, k) >= 16:
        left2, right2 = _solve(problem, m // 2, k // 2)
        left4, right4 = _solve(problem, m // 4, k // 4)
        order = _order((left, right), (left2, right2), (left4, right4))

    hm, hp = x0 / m, (1.0 - x0) / k
    logger.debug(f"oracle solve: m={m}, k={k}, order estimate {order}")
    return OracleSolution(
        left=GridFunction(x0_grid=0.0, h=hm, values=left),
        right=GridFunction(x0_grid=x0, h=hp, values=right),
        stiffness=(problem.a.left, problem.a.right),
        h_minus=hm,
        h_plus=hp,
        order_estimate=order,
    )
