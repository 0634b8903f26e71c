"""Experiment service orchestrating solver runs and their reports."""

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

from ..core.closed_form import (
    assemble,
    distributional_second_derivative,
    interface_matrix,
    interface_system,
    normalized_det,
    recover_displacement,
    solve,
    weak_residual,
)
from ..core.expr import parse, to_forcing
from ..core.mollify import (
    DistDescriptor,
    MollifierSpec,
    asymmetric_bump,
    model_product_limit,
    polynomial_bump,
    strict_net,
    symmetric_bump,
)
from ..core.regularize import convergence_study
from ..core.report_writer import (
    ReportWriter,
    limit_payload,
    residual_payload,
    solve_payload,
    spectrum_payload,
    table_payload,
    trace_payload,
)
from ..core.singular_set import pl_sequence, trace_zero_set
from ..core.test_functions import Bump, bump_family
from ..models.beam import BeamProblem, JumpConstant
from ..models.config import Settings
from ..models.run_config import Command, MollifierName, RunConfig
from ..utils.errors import PreconditionError
from ..utils.logger import get_logger

logger = get_logger(__name__)


class ExperimentService:
    """Run one configured command and write its CSV/JSON outputs."""

    def __init__(self, settings: Settings):
        self.settings = settings

    def run(self, config: RunConfig) -> dict[str, Path]:
        """
        Dispatch a run configuration.

        Args:
            config: Validated run configuration

        Returns:
            Mapping of output kind to written file
        """
        handlers: dict[Command, Callable[[RunConfig, ReportWriter], dict[str, Path]]] = {
            Command.SOLVE: self.solve,
            Command.SPECTRUM: self.spectrum,
            Command.TRACE: self.trace,
            Command.REGULARIZE: self.regularize,
            Command.PRODUCT_CHECK: self.product_check,
            Command.RESIDUAL: self.residual,
        }
        writer = ReportWriter(config.output_dir)
        outputs = handlers[config.command](config, writer)
        logger.info(f"{config.command.value}: wrote {', '.join(str(p) for p in outputs.values())}")
        return outputs

    @staticmethod
    def build_problem(config: RunConfig) -> BeamProblem:
        """Problem from the configured stiffness, forces and forcing expression."""
        forces = config.forces
        if forces is None:
            raise PreconditionError(f"{config.command.value} needs P or P1 and P2")
        g = to_forcing(
            parse(config.g),
            [(s.location, s.exponent) for s in config.sing],
            label=config.g,
        )
        return BeamProblem.from_values(config.A, config.B, config.x0, forces[0], forces[1], g=g)

    def solve(self, config: RunConfig, writer: ReportWriter) -> dict[str, Path]:
        problem = self.build_problem(config)
        s = solve(problem)
        system = interface_system(problem)
        tests = bump_family(problem.x0, problem.g.singular_points, seed=config.seed)
        residual = weak_residual(s, tests=tests)
        displacement = recover_displacement(s) if config.displacement else None

        outputs = {"u": writer.write("solve_u.csv", writer.solution_csv(s, config.samples))}
        payload = solve_payload(s, system, residual, distributional_second_derivative(s), displacement)
        outputs["report"] = writer.write("solve_report.json", writer.to_json(payload))
        if displacement is not None:
            w_csv = writer.displacement_csv(displacement, config.samples)
            outputs["w"] = writer.write("solve_w.csv", w_csv)
        return outputs

    def spectrum(self, config: RunConfig, writer: ReportWriter) -> dict[str, Path]:
        report = pl_sequence(config.A, config.B, config.x0, config.count)
        payload = spectrum_payload(report, config.A, config.B, config.x0)
        return {"report": writer.write("spectrum.json", writer.to_json(payload))}

    def trace(self, config: RunConfig, writer: ReportWriter) -> dict[str, Path]:
        curves = trace_zero_set(config.plane, config.A, config.B, config.x0, config.window, config.grid_n)
        payload = trace_payload(curves, config.A, config.B, config.x0)
        return {
            "report": writer.write("trace.json", writer.to_json(payload)),
            "polylines": writer.write("trace.csv", writer.polylines_csv(curves)),
        }

    def regularize(self, config: RunConfig, writer: ReportWriter) -> dict[str, Path]:
        problem = self.build_problem(config)
        n = config.n
        n_rule = (lambda eps: n) if n is not None else None
        table = convergence_study(problem, config.eps, K=config.compact_set, n_rule=n_rule)
        report = writer.to_json(table_payload(table, problem))
        outputs = {"report": writer.write("regularize_table.json", report)}
        for index, row in enumerate(table.rows):
            if row.grid is not None:
                outputs[f"eps{index}"] = writer.write(
                    f"regularize_eps{index}.csv", writer.grid_csv(row.grid, problem.x0)
                )
        return outputs

    def _descriptor(self, name: str, config: RunConfig) -> DistDescriptor:
        x0 = config.x0
        if name == "Hminus":
            return DistDescriptor.heaviside_minus(x0)
        if name == "Hplus":
            return DistDescriptor.heaviside_plus(x0)
        if name == "a":
            return DistDescriptor.jump(config.A, config.B, x0)
        if name == "u":
            problem = self.build_problem(config)
            s = solve(problem)
            return DistDescriptor.piecewise_l1(s, x0, breakpoints=(x0, *problem.g.singular_points))
        order = int(name[len("delta") :] or 0)
        return DistDescriptor.delta(x0, order)

    @staticmethod
    def mollifier(name: MollifierName) -> MollifierSpec:
        if name is MollifierName.STRICT:
            return strict_net()
        profile = {
            MollifierName.BUMP: symmetric_bump,
            MollifierName.ASYMMETRIC: asymmetric_bump,
            MollifierName.POLYNOMIAL: polynomial_bump,
        }[name]()
        return MollifierSpec.model(profile)

    def product_check(self, config: RunConfig, writer: ReportWriter) -> dict[str, Path]:
        u, v = (self._descriptor(name, config) for name in config.pair)
        center = config.x0 if config.psi_center is None else config.psi_center
        psi = Bump(center, config.psi_radius)
        limit = model_product_limit(u, v, psi, self.mollifier(config.mollifier), config.schedule)
        payload = limit_payload(limit, config.pair, psi(config.x0), config.mollifier.value)
        return {"report": writer.write("product_check.json", writer.to_json(payload))}

    def residual(self, config: RunConfig, writer: ReportWriter) -> dict[str, Path]:
        """Re-check the coefficients of a stored solve report against its stored problem."""
        path = Path(config.report)  # type: ignore[arg-type]
        try:
            with path.open("r", encoding="utf-8") as f:
                stored = json.load(f)
        except OSError as exc:
            message = exc.strerror or str(exc)
            raise PreconditionError(f"cannot read solve report {path}: {message}") from exc
        except json.JSONDecodeError as exc:
            raise PreconditionError(
                f"{path} is not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})"
            ) from exc
        try:
            data, coefficients = stored["problem"], stored["coefficients"]
            stored_config = RunConfig(
                command=Command.SOLVE,
                A=data["A"],
                B=data["B"],
                x0=data["x0"],
                P1=data["P1"],
                P2=data["P2"],
                g=data["g"],
                sing=tuple(data.get("singularities", ())),
            )
            c1, d1 = float(coefficients["c1"]), float(coefficients["d1"])
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f"{config.report} is not a solve report: missing {exc}") from exc

        problem = self.build_problem(stored_config)
        s = assemble(problem, c1, d1)
        tests = bump_family(problem.x0, problem.g.singular_points, seed=config.seed)
        payload = residual_payload(s, weak_residual(s, tests=tests))
        return {"report": writer.write("residual.json", writer.to_json(payload))}

    def det_sign_sweep(self, draws: int, seed: int = 0, two_forces: bool = False) -> np.ndarray:
        """
        det H for random A, B in [0.1, 10], x0 in [0.05, 0.95] and negative forces.

        Draws are generated up front from one seeded generator and evaluated
        on Settings.threads workers; results keep the draw order.

        Args:
            draws: Number of parameter sets
            seed: Generator seed
            two_forces: Draw P1 and P2 independently instead of a constant P

        Returns:
            Array of determinants
        """
        rng = np.random.default_rng(seed)
        A = rng.uniform(0.1, 10.0, draws)
        B = rng.uniform(0.1, 10.0, draws)
        x0 = rng.uniform(0.05, 0.95, draws)
        P1 = -rng.uniform(0.01, 50.0, draws)
        P2 = -rng.uniform(0.01, 50.0, draws) if two_forces else P1

        def det(i: int) -> float:
            h = interface_matrix(
                JumpConstant(left=A[i], right=B[i], x0=x0[i]),
                JumpConstant(left=P1[i], right=P2[i], x0=x0[i]),
            )
            return normalized_det(h)[0]

        workers = max(1, min(self.settings.threads, draws))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(det, range(draws))))
