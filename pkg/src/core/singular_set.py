"""Exceptional force values where the interface system is singular."""

from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.optimize import bisect, brentq

from ..models.beam import BeamProblem, JumpConstant
from ..models.config import get_settings
from ..models.reports import (
    Classification,
    Plane,
    Polyline,
    Provenance,
    SkippedBracket,
    SpectrumEntry,
    SpectrumReport,
    Verdict,
    ZeroCurveSet,
)
from ..utils.errors import DomainError, PreconditionError
from ..utils.logger import get_logger
from .closed_form import interface_matrix, normalized_det

logger = get_logger(__name__)

POLE_TOL = 1e-12
ROOT_XTOL = 1e-12
RATIONAL_DENOMINATOR_CAP = 10**6


def _pole_distance(s: float) -> float:
    """Distance from s to the nearest odd multiple of pi/2."""
    k = np.floor(s / np.pi)
    return float(abs(s - (k + 0.5) * np.pi))


def h_function(s: float, mu: float, nu: float) -> float:
    """
    tan(s) + nu·mu·tan(mu·s).

    Raises:
        DomainError: If s or mu·s is within 1e-12 of a tangent pole
    """
    if not (s > 0 and mu > 0 and nu > 0):
        raise DomainError(f"h_function expects s, mu, nu > 0, got ({s!r}, {mu!r}, {nu!r})")
    if _pole_distance(s) < POLE_TOL or _pole_distance(mu * s) < POLE_TOL:
        raise DomainError(f"s = {s!r} is at a tangent pole")
    return float(np.tan(s) + nu * mu * np.tan(mu * s))


def f_function(s: float, t: float, nu: float) -> float:
    """nu·t·sin(s)·cos(t) + s·sin(t)·cos(s)."""
    return nu * t * np.sin(s) * np.cos(t) + s * np.sin(t) * np.cos(s)


def mixed_function(s: float, t: float, nu: float) -> float:
    """Determinant function for P1 > 0 > P2: nu·t·sin(s)·cosh(t) + s·sinh(t)·cos(s)."""
    return nu * t * np.sin(s) * np.cosh(t) + s * np.sinh(t) * np.cos(s)


def _sinc(x: np.ndarray) -> np.ndarray:
    return np.sinc(np.asarray(x) / np.pi)


def _shc(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    return np.where(x == 0.0, 1.0, np.sinh(safe) / safe)


def _reduced_f(s, t, nu):
    # f / (s·t): removes the trivial zeros on the axes
    return nu * _sinc(s) * np.cos(t) + _sinc(t) * np.cos(s)


def _reduced_mixed(s, t, nu):
    return nu * _sinc(s) * np.cosh(t) + _shc(t) * np.cos(s)


def constant_force_residual(A: float, B: float, x0: float, P: float) -> float:
    """|det H|/scale for P1 = P2 = P."""
    h = interface_matrix(JumpConstant(left=A, right=B, x0=x0), JumpConstant.constant(P, x0))
    return normalized_det(h)[2]


def _is_rational(value: float) -> bool:
    frac = Fraction(value).limit_denominator(RATIONAL_DENOMINATOR_CAP)
    return abs(float(frac) - value) <= 1e-12 * max(1.0, abs(value))


def _poles(limit: float, mu: float) -> list[tuple[float, bool, bool]]:
    """Merged poles of tan(s) and tan(mu·s) up to limit: (s, from_tan_s, from_tan_mu_s)."""
    first = [(k + 0.5) * np.pi for k in range(int(limit / np.pi + 0.5) + 1)]
    second = [(k + 0.5) * np.pi / mu for k in range(int(limit * mu / np.pi + 0.5) + 1)]
    tagged = sorted(
        [(s, True, False) for s in first if s <= limit] + [(s, False, True) for s in second if s <= limit]
    )
    merged: list[tuple[float, bool, bool]] = []
    for s, a, b in tagged:
        if merged and abs(s - merged[-1][0]) <= POLE_TOL * max(1.0, s):
            prev = merged[-1]
            merged[-1] = (prev[0], prev[1] or a, prev[2] or b)
        else:
            merged.append((s, a, b))
    return merged


def pl_sequence(A: float, B: float, x0: float, count: int) -> SpectrumReport:
    """
    First `count` candidate singular values of a constant force P > 0.

    Z1 entries are roots of h between consecutive tangent poles (bisection to
    1e-12 in s, then P = A·(s/x0)^2); Z0 entries are the cosine zeros
    themselves, flagged with both_cosines when both cosine factors vanish.

    Args:
        A: Left stiffness
        B: Right stiffness
        x0: Interface location
        count: Number of entries

    Returns:
        SpectrumReport in increasing P

    Raises:
        DomainError: If the parameters are outside their domain
    """
    if not (A > 0 and B > 0 and 0 < x0 < 1 and count >= 1):
        raise DomainError(
            f"pl_sequence expects A, B > 0, 0 < x0 < 1, count >= 1; got {(A, B, x0, count)!r}"
        )

    mu = np.sqrt(A / B) * (1.0 - x0) / x0
    nu_eff = (B / A) * x0 / (1.0 - x0)
    rational = _is_rational(1.0 / mu)

    def to_p(s: float) -> float:
        return A * (s / x0) ** 2

    def h(s: float) -> float:
        return h_function(s, mu, nu_eff)

    limit = np.pi * (count + 1)
    while True:
        poles = _poles(limit, mu)
        entries: list[SpectrumEntry] = []
        skipped: list[SkippedBracket] = []
        for s, from_s, from_mu in poles:
            both = (from_s and from_mu) if rational else False
            p = to_p(s)
            entries.append(
                SpectrumEntry(
                    p=p,
                    s=s,
                    provenance=Provenance.Z0,
                    residual=constant_force_residual(A, B, x0, p),
                    both_cosines=both,
                )
            )
        for (lo, _, _), (hi, _, _) in zip(poles[:-1], poles[1:]):
            delta = min(1e-9, 1e-6 * (hi - lo))
            a, b = lo + delta, hi - delta
            ha, hb = h(a), h(b)
            if not (np.isfinite(ha) and np.isfinite(hb)) or ha * hb > 0:
                logger.debug(f"no sign change of h on ({lo:.12g}, {hi:.12g}); bracket skipped")
                skipped.append(SkippedBracket(lo=lo, hi=hi))
                continue
            root = bisect(h, a, b, xtol=ROOT_XTOL, maxiter=200)
            p = to_p(root)
            entries.append(
                SpectrumEntry(
                    p=p,
                    s=root,
                    provenance=Provenance.Z1,
                    residual=constant_force_residual(A, B, x0, p),
                )
            )
        entries.sort(key=lambda e: e.p)
        if len(entries) >= count:
            top = entries[count - 1].p
            logger.info(f"pl_sequence(A={A}, B={B}, x0={x0}): {count} entries up to P={top:.6g}")
            return SpectrumReport(entries=tuple(entries[:count]), skipped=tuple(skipped))
        limit *= 2.0


def _edge_root(func: Callable[[float], float], fa: float, fb: float) -> float:
    if fa == 0.0:
        return 0.0
    if fb == 0.0:
        return 1.0
    return brentq(func, 0.0, 1.0, xtol=1e-15, rtol=1e-15, maxiter=200)


def trace_zero_set(
    plane: Plane | str,
    A: float,
    B: float,
    x0: float,
    window: tuple[float, float, float, float],
    grid_n: int = 64,
) -> ZeroCurveSet:
    """
    Trace zero curves of the two-force determinant by marching squares.

    Signs are taken on a grid_n x grid_n lattice of the reduced function
    f/(s·t); crossings are refined along lattice edges with brentq, saddle cells
    are resolved by the sign at the cell center, and segments are linked into
    polylines through shared edges.

    Args:
        plane: M_prime (P1, P2 > 0) or N (P1 > 0 > P2)
        A: Left stiffness
        B: Right stiffness
        x0: Interface location; nu = x0/(1 - x0)
        window: (s_min, s_max, t_min, t_max) with s, t >= 0
        grid_n: Cells per axis

    Returns:
        ZeroCurveSet with vertices in (s, t) and mapped to (P1, P2)

    Raises:
        PreconditionError: If the window or grid is invalid
    """
    plane = Plane(plane)
    s_min, s_max, t_min, t_max = window
    if grid_n < 16:
        raise PreconditionError(f"grid_n must be at least 16, got {grid_n}")
    if not (0 <= s_min < s_max and 0 <= t_min < t_max):
        raise PreconditionError(f"window {window!r} must lie in the quadrant s, t >= 0")
    if not (A > 0 and B > 0 and 0 < x0 < 1):
        raise DomainError(f"invalid beam parameters {(A, B, x0)!r}")

    nu = x0 / (1.0 - x0)
    reduced = _reduced_f if plane is Plane.M_PRIME else _reduced_mixed

    s_axis = np.linspace(s_min, s_max, grid_n + 1)
    t_axis = np.linspace(t_min, t_max, grid_n + 1)
    S, T = np.meshgrid(s_axis, t_axis, indexing="ij")
    values = reduced(S, T, nu)
    positive = values >= 0.0

    points: dict[tuple, tuple[float, float]] = {}

    def edge_point(key: tuple) -> tuple[float, float]:
        if key in points:
            return points[key]
        kind, i, j = key
        p0 = (s_axis[i], t_axis[j])
        p1 = (s_axis[i + 1], t_axis[j]) if kind == "h" else (s_axis[i], t_axis[j + 1])

        def along(lam: float) -> float:
            return float(reduced(p0[0] + lam * (p1[0] - p0[0]), p0[1] + lam * (p1[1] - p0[1]), nu))

        i1, j1 = (i + 1, j) if kind == "h" else (i, j + 1)
        lam = _edge_root(along, float(values[i, j]), float(values[i1, j1]))
        points[key] = (p0[0] + lam * (p1[0] - p0[0]), p0[1] + lam * (p1[1] - p0[1]))
        return points[key]

    segments: list[tuple[tuple, tuple]] = []
    for i in range(grid_n):
        for j in range(grid_n):
            corners = (positive[i, j], positive[i + 1, j], positive[i + 1, j + 1], positive[i, j + 1])
            edges = (("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j))
            crossing = [edges[k] for k in range(4) if corners[k] != corners[(k + 1) % 4]]
            if len(crossing) == 2:
                segments.append((crossing[0], crossing[1]))
            elif len(crossing) == 4:
                center = reduced(0.5 * (s_axis[i] + s_axis[i + 1]), 0.5 * (t_axis[j] + t_axis[j + 1]), nu)
                if (center >= 0.0) == corners[0]:
                    # corner 0 joins corner 2 through the center; cut off corners 1 and 3
                    segments += [(edges[0], edges[1]), (edges[2], edges[3])]
                else:
                    segments += [(edges[3], edges[0]), (edges[1], edges[2])]

    curves = [
        _polyline(chain, closed, edge_point, plane, A, B, x0) for chain, closed in _link(segments)
    ]
    worst = max((_vertex_error(c, plane, nu) for c in curves), default=0.0)
    logger.info(f"trace_zero_set({plane.value}): {len(curves)} curves, max vertex |f| = {worst:.3e}")
    return ZeroCurveSet(plane=plane, window=tuple(window), curves=tuple(curves))


def _link(segments: list[tuple[tuple, tuple]]) -> list[tuple[list[tuple], bool]]:
    """Join segments sharing an edge into open and closed chains of edge keys."""
    adjacency: dict[tuple, list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        adjacency.setdefault(a, []).append(idx)
        adjacency.setdefault(b, []).append(idx)
    used = [False] * len(segments)

    def walk(start: tuple, first: int) -> list[tuple]:
        chain = [start]
        current, seg = start, first
        while seg is not None and not used[seg]:
            used[seg] = True
            a, b = segments[seg]
            current = b if a == current else a
            chain.append(current)
            seg = next((k for k in adjacency[current] if not used[k]), None)
        return chain

    chains: list[tuple[list[tuple], bool]] = []
    # open chains start at edges touched by a single segment (window boundary)
    for key in sorted(adjacency):
        if len(adjacency[key]) == 1 and not used[adjacency[key][0]]:
            chains.append((walk(key, adjacency[key][0]), False))
    for idx in range(len(segments)):
        if not used[idx]:
            chain = walk(segments[idx][0], idx)
            chains.append((chain, chain[0] == chain[-1]))
    return chains


def _polyline(
    chain: list[tuple], closed: bool, edge_point: Callable, plane: Plane, A: float, B: float, x0: float
) -> Polyline:
    st = np.array([edge_point(key) for key in chain])
    p1 = A * (st[:, 0] / x0) ** 2
    p2 = B * (st[:, 1] / (1.0 - x0)) ** 2
    if plane is Plane.N:
        p2 = -p2
    return Polyline(st=st, forces=np.column_stack([p1, p2]), closed=closed)


def _vertex_error(curve: Polyline, plane: Plane, nu: float) -> float:
    func = f_function if plane is Plane.M_PRIME else mixed_function
    return float(np.max(np.abs(func(curve.st[:, 0], curve.st[:, 1], nu)))) if curve.size else 0.0


def classify_parameters(
    problem: BeamProblem, thresholds: Optional[tuple[float, float]] = None
) -> Classification:
    """
    Uniqueness class of the problem's stiffness and force.

    Args:
        problem: Beam problem (g is ignored)
        thresholds: (singular, near_singular) on |det H|/scale (settings default)

    Returns:
        Unique when both forces are negative; otherwise Singular, NearSingular
        or Unique by the normalized determinant
    """
    settings = get_settings()
    singular, near = thresholds or (settings.singular_threshold, settings.near_singular_threshold)
    if problem.p.left < 0 and problem.p.right < 0:
        return Classification(verdict=Verdict.UNIQUE)
    _, _, residual = normalized_det(interface_matrix(problem.a, problem.p))
    if residual <= singular:
        return Classification(verdict=Verdict.SINGULAR, residual=residual)
    if residual <= near:
        return Classification(verdict=Verdict.NEAR_SINGULAR, residual=residual)
    return Classification(verdict=Verdict.UNIQUE, residual=residual)
