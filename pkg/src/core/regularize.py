"""Smoothed-coefficient regularization and uniform convergence away from x0."""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..models.beam import BeamProblem, GridFunction, JumpConstant, PiecewiseSolution
from ..models.config import get_settings
from ..models.reports import ConvergenceRow, ConvergenceTable
from ..utils.errors import DistBeamError, DomainError, PreconditionError, ResolutionError
from ..utils.logger import get_logger
from .banded import solve_banded_system, tridiagonal_bands
from .closed_form import solve
from .quadrature import sample_forcing

logger = get_logger(__name__)

MIN_NODES = 200
NODES_PER_TRANSITION = 20
STANDOFF = 0.1

CompactSet = tuple[tuple[float, float], ...]


def _sigma(t: np.ndarray) -> np.ndarray:
    return (15.0 * t - 10.0 * t**3 + 3.0 * t**5) / 8.0


def _sigma_d1(t: np.ndarray) -> np.ndarray:
    return 15.0 * (1.0 - t * t) ** 2 / 8.0


def _sigma_d2(t: np.ndarray) -> np.ndarray:
    return -7.5 * t * (1.0 - t * t)


class SmoothedCoefficient(BaseModel):
    """C² coefficient equal to the jump constant outside [x0 - eps, x0 + eps]."""

    model_config = ConfigDict(frozen=True)

    base: JumpConstant
    eps: float = Field(..., gt=0.0)

    def _t(self, x: Any) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.base.x0) / self.eps

    def eval(self, x: Any) -> Any:
        t = self._t(x)
        half_jump = 0.5 * (self.base.right - self.base.left)
        inner = self.base.midpoint + half_jump * _sigma(np.clip(t, -1.0, 1.0))
        out = np.where(t <= -1.0, self.base.left, np.where(t >= 1.0, self.base.right, inner))
        return out if out.ndim else float(out)

    def eval_d1(self, x: Any) -> Any:
        t = self._t(x)
        scale = 0.5 * (self.base.right - self.base.left) / self.eps
        out = np.where(np.abs(t) < 1.0, scale * _sigma_d1(np.clip(t, -1.0, 1.0)), 0.0)
        return out if out.ndim else float(out)

    def eval_d2(self, x: Any) -> Any:
        t = self._t(x)
        scale = 0.5 * (self.base.right - self.base.left) / self.eps**2
        out = np.where(np.abs(t) < 1.0, scale * _sigma_d2(np.clip(t, -1.0, 1.0)), 0.0)
        return out if out.ndim else float(out)

    def __call__(self, x: Any) -> Any:
        return self.eval(x)


def smooth_coefficient(a: JumpConstant, eps: float) -> SmoothedCoefficient:
    """
    Replace the jump by the odd quintic transition (15t - 10t³ + 3t⁵)/8 on [x0 - eps, x0 + eps].

    Raises:
        DomainError: If eps is not in (0, min(x0, 1 - x0))
    """
    if not 0.0 < eps < min(a.x0, 1.0 - a.x0):
        raise DomainError(f"eps must lie in (0, {min(a.x0, 1.0 - a.x0)!r}), got {eps!r}")
    return SmoothedCoefficient(base=a, eps=eps)


def solve_regularized(problem: BeamProblem, eps: float, n: int) -> GridFunction:
    """
    Solve (a_eps·u)'' + P·u = g, u(0) = u(1) = 0 on the uniform grid i/n.

    Works with v = a_eps·u: central differences for v'' + (P/a_eps)·v = g.

    Args:
        problem: Interface problem whose stiffness is smoothed
        eps: Transition half-width
        n: Number of grid cells

    Returns:
        GridFunction of u on [0, 1]

    Raises:
        PreconditionError: If n < 200
        ResolutionError: If 1/n > eps/20
        SolverError: If the tridiagonal system is singular
    """
    if n < MIN_NODES:
        raise PreconditionError(f"at least {MIN_NODES} cells required, got n={n}")
    coef = smooth_coefficient(problem.a, eps)
    h = 1.0 / n
    if h > eps / NODES_PER_TRANSITION:
        raise ResolutionError(
            f"grid spacing {h:.3e} does not resolve eps={eps!r} "
            f"(need h <= eps/{NODES_PER_TRANSITION}, i.e. n >= {math.ceil(NODES_PER_TRANSITION / eps)})",
            eps=eps,
            n=n,
        )

    nodes = np.linspace(0.0, 1.0, n + 1)
    interior = nodes[1:-1]
    a_eps = coef.eval(nodes)
    ratio = problem.p(interior) / a_eps[1:-1]
    rhs = h * h * sample_forcing(problem.g, interior, h)

    ones = np.ones(interior.size)
    ab = tridiagonal_bands(ones, -2.0 + h * h * ratio, ones)
    v = np.zeros(n + 1)
    v[1:-1] = solve_banded_system((1, 1), ab, rhs)
    logger.debug(f"regularized solve: eps={eps:.4g}, n={n}")
    return GridFunction(x0_grid=0.0, h=h, values=v / a_eps)


def default_n_rule(eps: float) -> int:
    """ceil(40/eps) clipped to [4000, 200000]."""
    return int(min(max(math.ceil(40.0 / eps), 4000), 200_000))


def default_compact_set(x0: float) -> CompactSet:
    """[0, x0 - 0.1] ∪ [x0 + 0.1, 1], dropping empty pieces."""
    pieces = ((0.0, x0 - STANDOFF), (x0 + STANDOFF, 1.0))
    return tuple((lo, hi) for lo, hi in pieces if hi >= lo)


def _distance(K: CompactSet, x0: float) -> float:
    return min(max(lo - x0, x0 - hi, 0.0) for lo, hi in K)


def _in_set(nodes: np.ndarray, K: CompactSet) -> np.ndarray:
    mask = np.zeros(nodes.shape, dtype=bool)
    for lo, hi in K:
        mask |= (nodes >= lo - 1e-12) & (nodes <= hi + 1e-12)
    return mask


def _row(
    problem: BeamProblem, closed: PiecewiseSolution, eps: float, n: int, K: CompactSet
) -> ConvergenceRow:
    try:
        grid = solve_regularized(problem, eps, n)
    except DistBeamError as exc:
        logger.warning(f"regularized solve failed for eps={eps!r}: {exc}")
        return ConvergenceRow(eps=eps, n=n, grid_h=1.0 / n, failed=True, message=str(exc))
    nodes = grid.nodes
    mask = _in_set(nodes, K)
    error = float(np.max(np.abs(grid.values[mask] - closed(nodes[mask]))))
    logger.info(f"eps={eps:.6g} n={n} sup error on K = {error:.3e}")
    return ConvergenceRow(eps=eps, n=n, grid_h=grid.h, sup_error=error, grid=grid)


def convergence_study(
    problem: BeamProblem,
    eps_list: Sequence[float],
    K: Optional[CompactSet] = None,
    n_rule: Optional[Callable[[float], int]] = None,
) -> ConvergenceTable:
    """
    Sup distance on K between regularized grid solutions and the closed form.

    Rows run in parallel (Settings.threads workers); a failed row is marked
    and the remaining rows still run.

    Args:
        problem: Interface problem with regular parameters
        eps_list: Strictly decreasing transition widths
        K: Compact set as closed intervals away from x0
        n_rule: Grid size per eps

    Returns:
        ConvergenceTable with rows in the order of eps_list

    Raises:
        PreconditionError: If eps_list is not strictly decreasing or K meets the
            widest transition zone
        SingularParameterError: If the closed-form solve fails
    """
    x0 = problem.x0
    K = default_compact_set(x0) if K is None else tuple(tuple(piece) for piece in K)  # type: ignore[misc]
    n_rule = default_n_rule if n_rule is None else n_rule
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise PreconditionError("eps_list is empty")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise PreconditionError(f"eps_list must be strictly decreasing, got {eps_list!r}")
    gap = _distance(K, x0)
    if not 0.0 < eps_list[0] <= gap * (1.0 + 1e-9):
        raise PreconditionError(f"eps values must lie in (0, {gap!r}] (distance from K to x0)")

    closed = solve(problem)
    workers = max(1, min(get_settings().threads, len(eps_list)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda e: _row(problem, closed, e, n_rule(e), K), eps_list))
    return ConvergenceTable(x0=x0, compact_set=K, rows=tuple(rows))
