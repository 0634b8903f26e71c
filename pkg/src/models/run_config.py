"""Run configuration for the command-line front end."""

import re
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.errors import PreconditionError
from ..utils.validators import CompactSetValidator, ForceValidator, ScheduleValidator, WindowValidator
from .beam import Singularity
from .reports import Plane

PRESETS_PATH = Path(__file__).parent.parent.parent / "config" / "presets.yaml"

PAIR_NAME = re.compile(r"^(Hminus|Hplus|a|u|delta\d*)$")
DEFAULT_SCHEDULE = tuple(2.0**-k for k in range(3, 10))


class Command(str, Enum):
    """CLI subcommands."""

    SOLVE = "solve"
    SPECTRUM = "spectrum"
    TRACE = "trace"
    REGULARIZE = "regularize"
    PRODUCT_CHECK = "product-check"
    RESIDUAL = "residual"


class MollifierName(str, Enum):
    """Mollifiers selectable for product checks."""

    BUMP = "bump"
    ASYMMETRIC = "asymmetric"
    POLYNOMIAL = "polynomial"
    STRICT = "strict"


class RunConfig(BaseModel):
    """Validated configuration of one CLI run."""

    model_config = ConfigDict(frozen=True)

    command: Command

    # Problem
    A: float = Field(default=1.0, gt=0.0, description="Stiffness on [0, x0)")
    B: float = Field(default=2.0, gt=0.0, description="Stiffness on (x0, 1]")
    x0: float = Field(default=0.5, gt=0.0, lt=1.0, description="Interface location")
    P: Optional[float] = Field(default=None, description="Constant axial force")
    P1: Optional[float] = None
    P2: Optional[float] = None
    g: str = Field(default="0", min_length=1, description="Forcing expression in x")
    sing: tuple[Singularity, ...] = ()

    # Regularization
    eps: tuple[float, ...] = ()
    compact_set: Optional[tuple[tuple[float, float], ...]] = None
    n: Optional[int] = Field(default=None, ge=200)

    # Spectrum / trace
    count: int = Field(default=10, ge=1, le=10_000)
    plane: Plane = Plane.M_PRIME
    window: tuple[float, float, float, float] = (0.0, 10.0, 0.0, 10.0)
    grid_n: int = Field(default=64, ge=16)

    # Product check
    pair: tuple[str, str] = ("Hminus", "delta")
    mollifier: MollifierName = MollifierName.BUMP
    psi_center: Optional[float] = None
    psi_radius: float = Field(default=0.25, gt=0.0)

    # Output
    output_dir: Path = Path("output")
    samples: int = Field(default=1001, ge=2)
    seed: int = Field(default=0, ge=0)
    displacement: bool = False
    report: Optional[Path] = None

    @field_validator("pair")
    @classmethod
    def known_pair(cls, v: tuple[str, str]) -> tuple[str, str]:
        for name in v:
            if not PAIR_NAME.match(name):
                raise ValueError(f"unknown distribution {name!r} (Hminus, Hplus, a, u, delta, delta1, ...)")
        return v

    @field_validator("window")
    @classmethod
    def valid_window(cls, v: tuple[float, float, float, float]) -> tuple[float, float, float, float]:
        return WindowValidator.validate_window(v)

    @model_validator(mode="after")
    def consistent(self) -> "RunConfig":
        forces = ForceValidator.resolve_forces(self.P, self.P1, self.P2)
        if self.A == self.B:
            raise ValueError("stiffness must jump (A != B)")
        if self.command in (Command.SOLVE, Command.REGULARIZE) and forces is None:
            raise ValueError(f"{self.command.value} needs P or P1 and P2")
        if "u" in self.pair and self.command is Command.PRODUCT_CHECK and forces is None:
            raise ValueError("product-check with u needs P or P1 and P2")
        if self.command is Command.REGULARIZE:
            ScheduleValidator.validate_decreasing(self.eps)
        if self.compact_set is not None:
            CompactSetValidator.validate_pieces(self.compact_set, self.x0)
        if self.command is Command.RESIDUAL and self.report is None:
            raise ValueError("residual needs --report")
        return self

    @property
    def forces(self) -> Optional[tuple[float, float]]:
        return ForceValidator.resolve_forces(self.P, self.P1, self.P2)

    @property
    def schedule(self) -> tuple[float, ...]:
        """eps values for product checks; the default is 2^-3 .. 2^-9."""
        return self.eps if self.eps else DEFAULT_SCHEDULE


def load_preset(name: str, path: Optional[Path] = None) -> dict[str, Any]:
    """
    Read a named problem preset.

    Args:
        name: Preset key under `presets`
        path: YAML file (defaults to config/presets.yaml)

    Returns:
        Raw preset values (strings are parsed by the caller)

    Raises:
        PreconditionError: If the preset does not exist
    """
    path = PRESETS_PATH if path is None else Path(path)
    with path.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    presets = data.get("presets", {})
    if name not in presets:
        raise PreconditionError(f"unknown preset {name!r}; available: {', '.join(sorted(presets))}")
    return dict(presets[name])
