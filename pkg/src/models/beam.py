"""Core domain types of the interface problem (a·u)'' + P·u = g on [0, 1]."""

from enum import Enum
from typing import Any, Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

INTERFACE_RTOL = 1e-10


class Branch(str, Enum):
    """Shape of the homogeneous solutions on one side of x0 (sign of force/coef)."""

    HYPERBOLIC = "hyperbolic"
    TRIGONOMETRIC = "trigonometric"
    POLYNOMIAL = "polynomial"

    @classmethod
    def for_force(cls, force: float) -> "Branch":
        if force < 0:
            return cls.HYPERBOLIC
        if force > 0:
            return cls.TRIGONOMETRIC
        return cls.POLYNOMIAL


class Side(str, Enum):
    """Side of the interface."""

    MINUS = "minus"
    PLUS = "plus"


class JumpConstant(BaseModel):
    """Piecewise-constant coefficient with a single interior jump at x0."""

    model_config = ConfigDict(frozen=True)

    left: float = Field(..., description="Value on [0, x0)")
    right: float = Field(..., description="Value on (x0, 1]")
    x0: float = Field(..., gt=0.0, lt=1.0, description="Jump location")

    @field_validator("left", "right")
    @classmethod
    def finite(cls, v: float) -> float:
        if not np.isfinite(v):
            raise ValueError("coefficient values must be finite")
        return v

    @classmethod
    def constant(cls, value: float, x0: float) -> "JumpConstant":
        """Coefficient without a jump (left = right)."""
        return cls(left=value, right=value, x0=x0)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.left + self.right)

    def reflected(self) -> "JumpConstant":
        """Image under x -> 1 - x."""
        return JumpConstant(left=self.right, right=self.left, x0=1.0 - self.x0)

    def __call__(self, x: Any) -> Any:
        from ..core.beam_core import eval_jump

        return eval_jump(self, x)


class Singularity(BaseModel):
    """Integrable power singularity |x - location|^exponent of a forcing term."""

    model_config = ConfigDict(frozen=True)

    location: float = Field(..., ge=0.0, le=1.0)
    exponent: float = Field(..., gt=-1.0, lt=0.0)


class ForcingTerm(BaseModel):
    """Right-hand side g with its declared integrable singularities."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    eval: Callable[[Any], Any]
    singularities: tuple[Singularity, ...] = ()
    label: str = "g"

    @field_validator("singularities")
    @classmethod
    def distinct_locations(cls, v: tuple[Singularity, ...]) -> tuple[Singularity, ...]:
        locations = [s.location for s in v]
        if len(set(locations)) != len(locations):
            raise ValueError("singularity locations must be distinct")
        return tuple(sorted(v, key=lambda s: s.location))

    @classmethod
    def zero(cls) -> "ForcingTerm":
        return cls(eval=lambda x: np.zeros_like(np.asarray(x, dtype=float)), label="0")

    @classmethod
    def constant(cls, value: float) -> "ForcingTerm":
        return cls(
            eval=lambda x: np.full_like(np.asarray(x, dtype=float), value),
            label=repr(float(value)),
        )

    @property
    def singular_points(self) -> tuple[float, ...]:
        return tuple(s.location for s in self.singularities)

    def exponent_at(self, location: float) -> Optional[float]:
        for s in self.singularities:
            if s.location == location:
                return s.exponent
        return None

    def __call__(self, x: Any) -> Any:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            values = np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)
        if values.shape != np.shape(x):
            values = np.broadcast_to(values, np.shape(x)).copy()
        return values if values.ndim else float(values)

    def scaled(self, factor: float) -> "ForcingTerm":
        return ForcingTerm(
            eval=lambda x: factor * self.eval(x),
            singularities=self.singularities,
            label=f"{factor!r}*({self.label})",
        )

    def reflected(self) -> "ForcingTerm":
        """g(1 - x), with mirrored singularities."""
        return ForcingTerm(
            eval=lambda x: self.eval(1.0 - np.asarray(x, dtype=float)),
            singularities=tuple(
                Singularity(location=1.0 - s.location, exponent=s.exponent)
                for s in self.singularities
            ),
            label=f"({self.label})(1-x)",
        )


class BeamProblem(BaseModel):
    """Stiffness a, axial force P and forcing g, with u(0) = u(1) = 0."""

    model_config = ConfigDict(frozen=True)

    a: JumpConstant
    p: JumpConstant
    g: ForcingTerm

    @model_validator(mode="after")
    def check_coefficients(self) -> "BeamProblem":
        if self.a.x0 != self.p.x0:
            raise ValueError("stiffness and axial force must jump at the same x0")
        if self.a.left <= 0 or self.a.right <= 0:
            raise ValueError("stiffness values must be positive")
        if self.a.left == self.a.right:
            raise ValueError("stiffness must actually jump (A != B)")
        return self

    @classmethod
    def from_values(
        cls,
        A: float,
        B: float,
        x0: float,
        P1: float,
        P2: Optional[float] = None,
        g: Optional[ForcingTerm] = None,
    ) -> "BeamProblem":
        """Build a problem from scalar data; P2 defaults to P1 (constant force)."""
        return cls(
            a=JumpConstant(left=A, right=B, x0=x0),
            p=JumpConstant(left=P1, right=P1 if P2 is None else P2, x0=x0),
            g=g if g is not None else ForcingTerm.zero(),
        )

    @property
    def x0(self) -> float:
        return self.a.x0

    def reflected(self) -> "BeamProblem":
        """Problem for v(x) = u(1 - x)."""
        return BeamProblem(a=self.a.reflected(), p=self.p.reflected(), g=self.g.reflected())


class OneSidedLimits(BaseModel):
    """u(x0-), u(x0+), u'(x0-), u'(x0+)."""

    model_config = ConfigDict(frozen=True)

    u_minus: float
    u_plus: float
    du_minus: float
    du_plus: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.u_minus, self.u_plus, self.du_minus, self.du_plus)


class PiecewiseSolution(BaseModel):
    """Closed-form solution u = u_- on [0, x0] and u_+ on [x0, 1]."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    problem: BeamProblem
    branch_minus: Branch
    branch_plus: Branch
    c1: float
    d1: float
    u_minus: Callable[[Any], Any]
    u_plus: Callable[[Any], Any]
    du_minus: Callable[[Any], Any]
    du_plus: Callable[[Any], Any]
    limits: OneSidedLimits

    @model_validator(mode="after")
    def interface_laws(self) -> "PiecewiseSolution":
        """A·u(x0-) = B·u(x0+) and A·u'(x0-) = B·u'(x0+)."""
        A, B = self.problem.a.left, self.problem.a.right
        lim = self.limits
        for left, right, what in (
            (A * lim.u_minus, B * lim.u_plus, "value"),
            (A * lim.du_minus, B * lim.du_plus, "derivative"),
        ):
            if abs(left - right) > INTERFACE_RTOL * (1.0 + abs(left)):
                raise ValueError(f"interface {what} law violated: {left!r} != {right!r}")
        return self

    @property
    def x0(self) -> float:
        return self.problem.x0

    def __call__(self, x: Any) -> Any:
        """u on [0, 1]; x0 itself takes the right-hand value."""
        return self._piecewise(x, self.u_minus, self.u_plus)

    def derivative(self, x: Any) -> Any:
        return self._piecewise(x, self.du_minus, self.du_plus)

    def _piecewise(self, x: Any, left: Callable, right: Callable) -> Any:
        xs = np.asarray(x, dtype=float)
        out = np.zeros(xs.shape)
        flat, res = xs.reshape(-1), out.reshape(-1)
        inside = (flat >= 0.0) & (flat <= 1.0)
        lo = inside & (flat < self.x0)
        hi = inside & (flat >= self.x0)
        if lo.any():
            res[lo] = left(flat[lo])
        if hi.any():
            res[hi] = right(flat[hi])
        return out if out.ndim else float(out)


class GridFunction(BaseModel):
    """Samples of a function on a uniform grid x_i = x0_grid + i·h."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x0_grid: float = Field(..., ge=0.0, le=1.0)
    h: float = Field(..., gt=0.0)
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def as_readonly_array(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError("values must be non-empty")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def within_unit_interval(self) -> "GridFunction":
        end = self.x0_grid + self.h * (self.values.size - 1)
        if end > 1.0 + 1e-12:
            raise ValueError(f"grid ends at {end!r}, outside [0, 1]")
        return self

    @property
    def nodes(self) -> np.ndarray:
        return self.x0_grid + self.h * np.arange(self.values.size)

    @property
    def size(self) -> int:
        return int(self.values.size)
