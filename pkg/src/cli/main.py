"""Command-line front end for the distributional beam solver."""

import argparse
import json
import sys
from typing import Any, NoReturn, Optional, Sequence

from pydantic import ValidationError as ConfigError

from ..core.expr import constant_value
from ..models.config import get_settings
from ..models.run_config import Command, MollifierName, RunConfig, load_preset
from ..models.reports import Plane
from ..services.experiment_service import ExperimentService
from ..utils.errors import DistBeamError, DomainError, UsageError
from ..utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

SCALAR_FIELDS = ("A", "B", "x0", "P", "P1", "P2", "psi_center", "psi_radius")

# options whose values may start with "-", e.g. --g "-cos(x)" or --P -3
VALUE_OPTIONS = frozenset(
    ["--A", "--B", "--x0", "--P", "--P1", "--P2", "--g", "--sing", "--eps", "--window"]
    + ["--compact-set", "--psi-center", "--psi-radius"]
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of printing usage and exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def join_option_values(argv: Sequence[str]) -> list[str]:
    """Rewrite `--g <value>` as `--g=<value>` so values may begin with a minus sign."""
    out: list[str] = []
    tokens = iter(argv)
    for token in tokens:
        if token in VALUE_OPTIONS:
            value = next(tokens, None)
            out.append(token if value is None else f"{token}={value}")
        else:
            out.append(token)
    return out


def _constant(text: Any) -> float:
    """Number or constant expression such as "1/30"."""
    if isinstance(text, (int, float)):
        return float(text)
    return constant_value(str(text))


def _constants(text: Any) -> tuple[float, ...]:
    items = text.split(",") if isinstance(text, str) else text
    return tuple(_constant(item) for item in items if str(item).strip())


def _singularity(text: Any) -> dict[str, float]:
    """'location:exponent', e.g. '2/3:-1/2'."""
    if isinstance(text, dict):
        return {k: _constant(v) for k, v in text.items()}
    location, sep, exponent = str(text).partition(":")
    if not sep:
        raise DomainError(f"singularity {text!r} must be written location:exponent")
    return {"location": _constant(location), "exponent": _constant(exponent)}


def _pieces(text: Any) -> tuple[tuple[float, float], ...]:
    """Compact set '0:0.4,0.6:1' (or a list of pairs from a preset)."""
    if isinstance(text, str):
        raw = [piece.split(":") for piece in text.split(",") if piece.strip()]
    else:
        raw = text
    pieces = []
    for piece in raw:
        if len(piece) != 2:
            raise DomainError(f"compact set piece {piece!r} must be lo:hi")
        pieces.append((_constant(piece[0]), _constant(piece[1])))
    return tuple(pieces)


def _coerce(values: dict[str, Any]) -> dict[str, Any]:
    """Turn raw preset and flag values into RunConfig field values."""
    out = dict(values)
    out.pop("name", None)
    for key in SCALAR_FIELDS:
        if out.get(key) is not None:
            out[key] = _constant(out[key])
    if "sing" in out:
        out["sing"] = tuple(_singularity(s) for s in out["sing"])
    if "eps" in out:
        out["eps"] = _constants(out["eps"])
    if "window" in out:
        out["window"] = _constants(out["window"])
    if "compact_set" in out:
        out["compact_set"] = _pieces(out["compact_set"])
    if isinstance(out.get("pair"), str):
        out["pair"] = tuple(name.strip() for name in out["pair"].split(","))
    return out


def _add_problem_args(parser: argparse.ArgumentParser, forcing: bool = True) -> None:
    group = parser.add_argument_group("problem")
    group.add_argument("--A", help="Stiffness on [0, x0)")
    group.add_argument("--B", help="Stiffness on (x0, 1]")
    group.add_argument("--x0", help="Interface location in (0, 1)")
    if forcing:
        group.add_argument("--P", help="Constant axial force")
        group.add_argument("--P1", help="Axial force on [0, x0)")
        group.add_argument("--P2", help="Axial force on (x0, 1]")
        group.add_argument("--g", help="Forcing expression in x")
        group.add_argument(
            "--sing",
            action="append",
            help="Declared singularity location:exponent (repeatable)",
        )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per Command."""
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--preset", help="Named preset from config/presets.yaml")
    common.add_argument("--output-dir", dest="output_dir", help="Directory for CSV/JSON output")
    common.add_argument("--seed", type=int, help="Seed for test-function placement")
    common.add_argument(
        "--log-level",
        dest="log_level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Override DISTBEAM_LOG_LEVEL",
    )

    parser = _Parser(
        prog="distbeam",
        description="Beam equation with a jumping stiffness coefficient, solved distributionally.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(
        name: Command, help_text: str, description: Optional[str] = None
    ) -> argparse.ArgumentParser:
        return sub.add_parser(
            name.value,
            parents=[common],
            help=help_text,
            description=description or help_text,
            argument_default=argparse.SUPPRESS,
        )

    solve = command(Command.SOLVE, "Closed-form solution and interface report")
    _add_problem_args(solve)
    solve.add_argument("--samples", type=int, help="Sample count of the u CSV")
    solve.add_argument("--displacement", action="store_true", help="Also recover w and w'")

    spectrum = command(Command.SPECTRUM, "Singular constant forces P_l")
    _add_problem_args(spectrum, forcing=False)
    spectrum.add_argument("--count", type=int, help="Number of singular forces")

    trace = command(Command.TRACE, "Zero set of det H in the (P1, P2) plane")
    _add_problem_args(trace, forcing=False)
    trace.add_argument("--plane", choices=[p.value for p in Plane])
    trace.add_argument("--window", help="s_min,s_max,t_min,t_max")
    trace.add_argument("--grid-n", dest="grid_n", type=int, help="Grid points per axis")

    regularize = command(Command.REGULARIZE, "Convergence of smoothed-coefficient solutions")
    _add_problem_args(regularize)
    regularize.add_argument("--eps", help="Strictly decreasing widths, comma separated")
    regularize.add_argument("--compact-set", dest="compact_set", help="Pieces lo:hi, comma separated")
    regularize.add_argument("--n", type=int, help="Grid cells (default grows with 1/eps)")

    product = command(
        Command.PRODUCT_CHECK,
        "Model product of two distributions",
        "Both Heaviside halves pair with delta to +delta/2: the regularized pairing of "
        "[Hminus·delta] converges to +psi(x0)/2, not -psi(x0)/2, since "
        "[Hminus·delta] + [Hplus·delta] must equal delta.",
    )
    _add_problem_args(product)
    product.add_argument("--pair", help="Two of Hminus, Hplus, a, u, delta, deltaK")
    product.add_argument("--mollifier", choices=[m.value for m in MollifierName])
    product.add_argument("--eps", help="Schedule, comma separated (default 2^-3..2^-9)")
    product.add_argument("--psi-center", dest="psi_center", help="Test function center")
    product.add_argument("--psi-radius", dest="psi_radius", help="Test function radius")

    residual = command(Command.RESIDUAL, "Weak residual of a stored solve report")
    residual.add_argument("--report", required=True, help="solve_report.json to re-check")

    return parser


def _error(payload: dict[str, Any]) -> None:
    print(json.dumps(payload), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name (defaults to sys.argv)

    Returns:
        Exit status: 0 success, 2 invalid input, 3 singular parameters, 4 numerical failure
    """
    tokens = join_option_values(sys.argv[1:] if argv is None else argv)
    try:
        args = vars(build_parser().parse_args(tokens))
    except UsageError as e:
        _error(e.to_dict())
        return e.exit_code
    settings = get_settings()
    setup_logging(
        log_level=args.pop("log_level", settings.log_level),
        log_file=settings.log_file,
        log_format=settings.log_format,
    )

    try:
        preset = args.pop("preset", None)
        values = load_preset(preset) if preset else {}
        values.update(args)
        config = RunConfig(**_coerce(values))
        outputs = ExperimentService(settings).run(config)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e.error_count()} error(s)")
        _error(
            {
                "error": "ValidationError",
                "detail": [
                    {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
                    for err in e.errors()
                ],
                "exit_code": 2,
            }
        )
        return 2
    except DistBeamError as e:
        logger.error(f"{type(e).__name__}: {e}")
        _error(e.to_dict())
        return e.exit_code

    print(json.dumps({name: str(path) for name, path in outputs.items()}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
