"""Piecewise-function helpers shared by the solver modules."""

from typing import Any

import numpy as np

from ..models.beam import JumpConstant, OneSidedLimits, PiecewiseSolution
from ..utils.errors import DomainError


def eval_jump(c: JumpConstant, x: Any) -> Any:
    """
    Evaluate a jump coefficient.

    Args:
        c: Coefficient
        x: Point(s) in [0, 1]

    Returns:
        c.left for x < x0, c.right for x > x0 and the midpoint at x0

    Raises:
        DomainError: If any x lies outside [0, 1]
    """
    xs = np.asarray(x, dtype=float)
    if np.any((xs < 0.0) | (xs > 1.0)) or not np.all(np.isfinite(xs)):
        raise DomainError(f"eval_jump expects x in [0, 1], got {x!r}")
    out = np.where(xs < c.x0, c.left, np.where(xs > c.x0, c.right, c.midpoint))
    return out if out.ndim else float(out)


def one_sided_limits(s: PiecewiseSolution) -> tuple[float, float, float, float]:
    """(u(x0-), u(x0+), u'(x0-), u'(x0+)) from the branch formulas."""
    return s.limits.as_tuple()


def branch_limits(s: PiecewiseSolution) -> OneSidedLimits:
    """Re-evaluate the one-sided limits directly from the branch handles."""
    x0 = s.x0
    return OneSidedLimits(
        u_minus=float(s.u_minus(np.array([x0]))[0]),
        u_plus=float(s.u_plus(np.array([x0]))[0]),
        du_minus=float(s.du_minus(np.array([x0]))[0]),
        du_plus=float(s.du_plus(np.array([x0]))[0]),
    )
