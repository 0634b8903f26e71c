"""CSV and JSON writers for solver reports."""

import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from ..models.beam import BeamProblem, GridFunction, PiecewiseSolution
from ..models.reports import (
    ConvergenceTable,
    Displacement,
    InterfaceSystem,
    ProductLimit,
    SpectrumReport,
    ZeroCurveSet,
)

SCHEMA_VERSION = 1


def _num(value: Any) -> Optional[float]:
    """JSON-safe float (non-finite values become null)."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _fmt(value: float) -> str:
    return f"{float(value):.17g}"


def _csv(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    return "\n".join(lines) + "\n"


class ReportWriter:
    """Render reports and write them under an output directory."""

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)

    def write(self, name: str, content: str) -> Path:
        """
        Write one output file.

        Args:
            name: File name inside the output directory
            content: Text content (UTF-8, '\\n' newlines)

        Returns:
            Path of the written file
        """
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        return path

    @staticmethod
    def to_json(payload: dict[str, Any]) -> str:
        """Versioned JSON document."""
        return json.dumps({"schema": SCHEMA_VERSION, **payload}, indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def solution_csv(s: PiecewiseSolution, samples: int) -> str:
        """x,u,side samples; x0 appears once per side with its one-sided value."""
        x0 = s.x0
        n_left = max(2, int(round(samples * x0)) + 1)
        n_right = max(2, samples - n_left + 2)
        left = np.linspace(0.0, x0, n_left)
        right = np.linspace(x0, 1.0, n_right)
        rows = [(x, u, "minus") for x, u in zip(left, np.atleast_1d(s.u_minus(left)))]
        rows += [(x, u, "plus") for x, u in zip(right, np.atleast_1d(s.u_plus(right)))]
        return _csv(("x", "u", "side"), rows)

    @staticmethod
    def grid_csv(grid: GridFunction, x0: float) -> str:
        """x,u,side for a grid function; side by position relative to x0."""
        return _csv(
            ("x", "u", "side"),
            ((x, u, "minus" if x < x0 else "plus") for x, u in zip(grid.nodes, grid.values)),
        )

    @staticmethod
    def displacement_csv(d: Displacement, samples: int) -> str:
        xs = np.linspace(0.0, 1.0, samples)
        return _csv(("x", "w", "w_prime"), zip(xs, d.w(xs), d.w_prime(xs)))

    @staticmethod
    def polylines_csv(curves: ZeroCurveSet) -> str:
        rows = []
        for index, curve in enumerate(curves.curves):
            for (s, t), (p1, p2) in zip(curve.st, curve.forces):
                rows.append((str(index), s, t, p1, p2))
        return _csv(("curve", "s", "t", "P1", "P2"), rows)


def problem_payload(problem: BeamProblem) -> dict[str, Any]:
    return {
        "A": problem.a.left,
        "B": problem.a.right,
        "x0": problem.x0,
        "P1": problem.p.left,
        "P2": problem.p.right,
        "g": problem.g.label,
        "singularities": [
            {"location": s.location, "exponent": s.exponent} for s in problem.g.singularities
        ],
    }


def system_payload(system: InterfaceSystem) -> dict[str, Any]:
    return {
        "H": [[system.h11, system.h12], [system.h21, system.h22]],
        "z": [system.z1, system.z2],
        "det": system.det,
        "scale": system.scale,
        "normalized_det": system.residual,
    }


def solve_payload(
    s: PiecewiseSolution,
    system: InterfaceSystem,
    weak_residual: float,
    delta_coefficients: tuple[float, float],
    displacement: Optional[Displacement] = None,
) -> dict[str, Any]:
    """
    Solve report: interface system, coefficients, one-sided limits and checks.

    jump_ratio is u(x0-)/u(x0+) (null when u(x0+) = 0); it equals B/A.
    """
    A, B = s.problem.a.left, s.problem.a.right
    lim = s.limits
    payload: dict[str, Any] = {
        "command": "solve",
        "problem": problem_payload(s.problem),
        "interface_system": system_payload(system),
        "det": system.det,
        "coefficients": {"c1": s.c1, "d1": s.d1},
        "branches": {"minus": s.branch_minus.value, "plus": s.branch_plus.value},
        "limits": {
            "u_minus": lim.u_minus,
            "u_plus": lim.u_plus,
            "du_minus": lim.du_minus,
            "du_plus": lim.du_plus,
        },
        "jump_ratio": _num(lim.u_minus / lim.u_plus) if lim.u_plus != 0.0 else None,
        "expected_jump_ratio": B / A,
        "interface_laws": {
            "value": A * lim.u_minus - B * lim.u_plus,
            "derivative": A * lim.du_minus - B * lim.du_plus,
        },
        "distributional": {
            "delta_coefficient": delta_coefficients[0],
            "delta_prime_coefficient": delta_coefficients[1],
        },
        "moments": {"minus": A * lim.u_minus, "plus": B * lim.u_plus},
        "weak_residual": weak_residual,
    }
    if displacement is not None:
        payload["displacement"] = {
            "jump_delta": displacement.jump_delta,
            "jump_theta": displacement.jump_theta,
        }
    return payload


def spectrum_payload(report: SpectrumReport, A: float, B: float, x0: float) -> dict[str, Any]:
    return {
        "command": "spectrum",
        "problem": {"A": A, "B": B, "x0": x0},
        "entries": [
            {
                "p": e.p,
                "s": e.s,
                "provenance": e.provenance.value,
                "residual": e.residual,
                "both_cosines": e.both_cosines,
            }
            for e in report.entries
        ],
        "skipped": [{"lo": b.lo, "hi": b.hi} for b in report.skipped],
    }


def trace_payload(curves: ZeroCurveSet, A: float, B: float, x0: float) -> dict[str, Any]:
    return {
        "command": "trace",
        "problem": {"A": A, "B": B, "x0": x0},
        "plane": curves.plane.value,
        "window": list(curves.window),
        "curves": [
            {
                "closed": c.closed,
                "st": c.st.tolist(),
                "forces": c.forces.tolist(),
            }
            for c in curves.curves
        ],
    }


def table_payload(table: ConvergenceTable, problem: BeamProblem) -> dict[str, Any]:
    return {
        "command": "regularize",
        "problem": problem_payload(problem),
        "compact_set": [list(piece) for piece in table.compact_set],
        "rows": [
            {
                "eps": r.eps,
                "n": r.n,
                "grid_h": r.grid_h,
                "sup_error": _num(r.sup_error),
                "failed": r.failed,
                "message": r.message,
            }
            for r in table.rows
        ],
    }


def limit_payload(
    limit: ProductLimit, pair: tuple[str, str], psi_at_x0: float, mollifier: str
) -> dict[str, Any]:
    """Product-check verdict; coefficient is value/psi(x0) for Converged limits."""
    coefficient = None
    if limit.value is not None and psi_at_x0 != 0.0:
        coefficient = _num(limit.value / psi_at_x0)
    return {
        "command": "product-check",
        "pair": list(pair),
        "mollifier": mollifier,
        "verdict": limit.kind.value,
        "value": _num(limit.value),
        "coefficient": coefficient,
        "rate": _num(limit.rate),
        "growth_exponent": _num(limit.growth_exponent),
        "eps": list(limit.eps),
        "pairings": [_num(v) for v in limit.pairings],
    }


def residual_payload(s: PiecewiseSolution, residual: float) -> dict[str, Any]:
    A, B = s.problem.a.left, s.problem.a.right
    lim = s.limits
    return {
        "command": "residual",
        "problem": problem_payload(s.problem),
        "coefficients": {"c1": s.c1, "d1": s.d1},
        "weak_residual": residual,
        "interface_laws": {
            "value": A * lim.u_minus - B * lim.u_plus,
            "derivative": A * lim.du_minus - B * lim.du_plus,
        },
    }
