"""Result models produced by the solver, spectrum, regularization and oracle modules."""

from enum import Enum
from typing import Any, Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .beam import GridFunction


class InterfaceSystem(BaseModel):
    """2x2 interface system H·(c1, d1) = z."""

    model_config = ConfigDict(frozen=True)

    h11: float
    h12: float
    h21: float
    h22: float
    z1: float
    z2: float
    det: float
    scale: float = Field(..., gt=0.0)

    @classmethod
    def build(cls, h: np.ndarray, z: np.ndarray) -> "InterfaceSystem":
        """Assemble from a 2x2 matrix and right-hand side; det and scale are derived."""
        h11, h12, h21, h22 = (float(v) for v in np.asarray(h, dtype=float).reshape(4))
        return cls(
            h11=h11,
            h12=h12,
            h21=h21,
            h22=h22,
            z1=float(z[0]),
            z2=float(z[1]),
            det=h11 * h22 - h12 * h21,
            scale=max(abs(h11 * h22), abs(h12 * h21), 1.0),
        )

    @model_validator(mode="after")
    def det_consistent(self) -> "InterfaceSystem":
        if self.det != self.h11 * self.h22 - self.h12 * self.h21:
            raise ValueError("det does not match the stored entries")
        return self

    @property
    def residual(self) -> float:
        """Normalized determinant |det| / scale."""
        return abs(self.det) / self.scale

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h21, self.h22]])

    @property
    def rhs(self) -> np.ndarray:
        return np.array([self.z1, self.z2])


class Displacement(BaseModel):
    """Displacement w with w'' = u, w(0) = w(1) = 0, and its jumps at x0."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    w: Callable[[Any], Any]
    w_prime: Callable[[Any], Any]
    jump_delta: float
    jump_theta: float


class Provenance(str, Enum):
    """Origin of a singular force value."""

    Z1 = "Z1"
    Z0 = "Z0"


class SpectrumEntry(BaseModel):
    """One candidate singular force value."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., gt=0.0)
    s: float
    provenance: Provenance
    residual: float
    both_cosines: Optional[bool] = None


class SkippedBracket(BaseModel):
    """Pole-to-pole interval of h without a sign change."""

    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float


class SpectrumReport(BaseModel):
    """Increasing candidate singular values of a constant axial force."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[SpectrumEntry, ...]
    skipped: tuple[SkippedBracket, ...] = ()

    @field_validator("entries")
    @classmethod
    def strictly_increasing(cls, v: tuple[SpectrumEntry, ...]) -> tuple[SpectrumEntry, ...]:
        for prev, cur in zip(v, v[1:]):
            if not cur.p > prev.p:
                raise ValueError(f"p_values must be strictly increasing ({prev.p!r}, {cur.p!r})")
        return v

    @property
    def p_values(self) -> list[float]:
        return [e.p for e in self.entries]

    @property
    def provenance(self) -> list[Provenance]:
        return [e.provenance for e in self.entries]

    @property
    def residuals(self) -> list[float]:
        return [e.residual for e in self.entries]


class Plane(str, Enum):
    """Sign quadrant of the two-force zero-set tracing."""

    M_PRIME = "M_prime"
    N = "N"


class Polyline(BaseModel):
    """Connected piece of a zero curve; vertices in (s, t) and in (P1, P2)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    st: np.ndarray
    forces: np.ndarray
    closed: bool

    @property
    def size(self) -> int:
        return int(self.st.shape[0])


class ZeroCurveSet(BaseModel):
    """Zero curves of the two-force determinant inside a window."""

    model_config = ConfigDict(frozen=True)

    plane: Plane
    window: tuple[float, float, float, float]
    curves: tuple[Polyline, ...]

    @property
    def vertex_count(self) -> int:
        return sum(c.size for c in self.curves)


class Verdict(str, Enum):
    """Uniqueness class of a parameter set."""

    UNIQUE = "Unique"
    SINGULAR = "Singular"
    NEAR_SINGULAR = "NearSingular"


class Classification(BaseModel):
    """Verdict and normalized determinant (None when unique by sign)."""

    model_config = ConfigDict(frozen=True)

    verdict: Verdict
    residual: Optional[float] = None


class LimitKind(str, Enum):
    """Outcome of a regularization limit."""

    CONVERGED = "Converged"
    DIVERGED = "Diverged"


class ProductLimit(BaseModel):
    """Limit of mollified pairings along an eps schedule."""

    model_config = ConfigDict(frozen=True)

    kind: LimitKind
    value: Optional[float] = None
    rate: Optional[float] = None
    growth_exponent: Optional[float] = None
    eps: tuple[float, ...]
    pairings: tuple[float, ...]


class ConvergenceRow(BaseModel):
    """Sup error on K for one regularization width."""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(..., gt=0.0)
    n: int
    grid_h: float
    sup_error: Optional[float] = None
    failed: bool = False
    message: Optional[str] = None
    grid: Optional[GridFunction] = None


class ConvergenceTable(BaseModel):
    """Convergence of regularized solutions on a compact set K away from x0."""

    model_config = ConfigDict(frozen=True)

    x0: float
    compact_set: tuple[tuple[float, float], ...]
    rows: tuple[ConvergenceRow, ...]

    @model_validator(mode="after")
    def check_rows(self) -> "ConvergenceTable":
        eps = [r.eps for r in self.rows]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("rows must be ordered by decreasing eps")
        if eps:
            widest = eps[0]
            for lo, hi in self.compact_set:
                if lo < self.x0 + widest and hi > self.x0 - widest:
                    raise ValueError(f"compact set piece [{lo}, {hi}] meets the transition zone")
        return self

    @property
    def errors(self) -> list[Optional[float]]:
        return [r.sup_error for r in self.rows]


class OracleSolution(BaseModel):
    """Finite-difference reference solution on two sub-grids sharing a doubled node at x0."""

    model_config = ConfigDict(frozen=True)

    left: GridFunction
    right: GridFunction
    stiffness: tuple[float, float]
    h_minus: float
    h_plus: float
    order_estimate: Optional[float] = None

    @model_validator(mode="after")
    def value_law(self) -> "OracleSolution":
        A, B = self.stiffness
        u_left, u_right = self.interface_values
        if abs(A * u_left - B * u_right) > 1e-8 * max(abs(A * u_left), 1.0):
            raise ValueError(f"doubled node violates A·u_L = B·u_R ({A * u_left!r} != {B * u_right!r})")
        return self

    @property
    def interface_values(self) -> tuple[float, float]:
        """(u_L, u_R) at the doubled node."""
        return float(self.left.values[-1]), float(self.right.values[0])

    def nodes_and_values(self) -> tuple[np.ndarray, np.ndarray]:
        """All nodes in order; x0 appears twice."""
        return (
            np.concatenate([self.left.nodes, self.right.nodes]),
            np.concatenate([self.left.values, self.right.values]),
        )
