"""Tests for the closed-form interface solver."""

import numpy as np
import pytest
from scipy.integrate import quad

from src.core.closed_form import (
    Kernel,
    assemble,
    distributional_second_derivative,
    homogeneous_basis,
    interface_matrix,
    interface_system,
    normalized_det,
    particular_solution,
    recover_displacement,
    solve,
    weak_residual,
)
from src.core.beam_core import branch_limits, one_sided_limits
from src.core.singular_set import pl_sequence
from src.models.beam import BeamProblem, Branch, ForcingTerm, JumpConstant, Side
from src.models.config import get_settings
from src.models.reports import Provenance
from src.services.experiment_service import ExperimentService
from src.utils.errors import DomainError, SingularParameterError

SMOOTH_SETS = [
    (1.0, 2.0, 0.5, 1.0, 1.0),
    (2.0, 1.0, 0.4, -3.0, -3.0),
    (1.0, 3.0, 0.3, -2.0, 5.0),
    (3.0, 1.0, 0.6, 0.0, 0.0),
    (0.5, 4.0, 0.7, 2.0, -1.0),
]


def _problem(A, B, x0, P1, P2):
    g = ForcingTerm(eval=lambda x: np.cos(2.0 * x) + x, label="cos(2*x) + x")
    return BeamProblem.from_values(A, B, x0, P1, P2, g=g)


class TestKernel:
    """Tests for kernels and homogeneous bases."""

    def test_branches(self):
        """Test branch and frequency selection."""
        k = Kernel(2.0, -8.0)

        assert k.branch is Branch.HYPERBOLIC
        assert k.omega == pytest.approx(2.0)
        assert Kernel(2.0, 8.0).branch is Branch.TRIGONOMETRIC
        assert Kernel(2.0, 0.0).branch is Branch.POLYNOMIAL

    def test_non_positive_coefficient(self):
        """Test that the stiffness must be positive."""
        with pytest.raises(DomainError, match="positive"):
            Kernel(0.0, 1.0)

    def test_transfer_matches_basis(self):
        """Test that the propagator advances (S, C) consistently."""
        k = Kernel(1.5, 2.0)
        state = np.array([float(k.S(0.2)), float(k.C(0.2))])

        np.testing.assert_allclose(k.transfer(0.3) @ state, [float(k.S(0.5)), float(k.C(0.5))], atol=1e-14)

    def test_homogeneous_basis_scalar(self):
        """Test scalar evaluation and the derivative columns."""
        phi1, phi2, dphi1, dphi2 = homogeneous_basis(1.0, 4.0, 0.25)

        assert phi1 == pytest.approx(np.sin(0.5))
        assert phi2 == pytest.approx(np.cos(0.5))
        assert dphi1 == pytest.approx(2.0 * np.cos(0.5))
        assert dphi2 == pytest.approx(-2.0 * np.sin(0.5))


class TestParticularSolution:
    """Tests for Duhamel particular solutions."""

    def test_constant_load_polynomial_branch(self):
        """Test coef·u'' = 1 from the left: u = x²/(2·coef)."""
        value, derivative = particular_solution(Side.MINUS, ForcingTerm.constant(1.0), 2.0, 0.0, 0.5, x0=0.6)

        assert value == pytest.approx(0.0625, abs=1e-13)
        assert derivative == pytest.approx(0.25, abs=1e-13)

    def test_hyperbolic_constant_load(self):
        """Test u'' - u = 1 from the left: u = cosh(x) - 1."""
        g = ForcingTerm.constant(1.0)
        value, derivative = particular_solution(Side.MINUS, g, 1.0, -1.0, 0.3, x0=0.5)

        assert value == pytest.approx(np.cosh(0.3) - 1.0, abs=1e-13)
        assert derivative == pytest.approx(np.sinh(0.3), abs=1e-13)

    @pytest.mark.parametrize("x", [0.9, 0.6])
    def test_singular_load_plus_side(self, singular_problem, x):
        """Test the plus side against algebraic-weight quadrature from scipy."""
        sigma = 2.0 / 3.0
        kernel = Kernel(2.0, 1.0)

        def smooth(t):
            return -np.cos(11.0 * t) * kernel.S(x - t)

        if x < sigma:
            left = quad(smooth, x, sigma, weight="alg", wvar=(0.0, -0.5), epsabs=1e-13)[0]
            right = quad(smooth, sigma, 1.0, weight="alg", wvar=(-0.5, 0.0), epsabs=1e-13)[0]
            expected = -(left + right) / 2.0
        else:
            expected = -quad(lambda t: smooth(t) / np.sqrt(t - sigma), x, 1.0, epsabs=1e-13)[0] / 2.0

        value, _ = particular_solution(Side.PLUS, singular_problem.g, 2.0, 1.0, x, x0=0.5)

        assert value == pytest.approx(expected, abs=1e-8)

    def test_point_outside_side(self):
        """Test that x must lie on the requested side."""
        with pytest.raises(DomainError, match="outside the plus side"):
            particular_solution("plus", ForcingTerm.constant(1.0), 1.0, 1.0, 0.2, x0=0.5)


class TestSolve:
    """Tests for the closed-form solve."""

    @pytest.mark.parametrize("A,B,x0,P1,P2", SMOOTH_SETS)
    def test_boundary_and_interface_laws(self, A, B, x0, P1, P2):
        """Test u(0) = u(1) = 0 and the jump law u(x0-)/u(x0+) = B/A."""
        s = solve(_problem(A, B, x0, P1, P2))
        lim = s.limits

        assert s(0.0) == pytest.approx(0.0, abs=1e-12)
        assert s(1.0) == pytest.approx(0.0, abs=1e-12)
        assert A * lim.u_minus == pytest.approx(B * lim.u_plus, rel=1e-10, abs=1e-9)
        assert A * lim.du_minus == pytest.approx(B * lim.du_plus, rel=1e-10, abs=1e-9)
        if lim.u_plus != 0.0:
            assert lim.u_minus / lim.u_plus == pytest.approx(B / A, rel=1e-8)

    @pytest.mark.parametrize("A,B,x0,P1,P2", SMOOTH_SETS)
    def test_equation_on_each_side(self, A, B, x0, P1, P2):
        """Test coef·u'' + force·u = g by second differences away from x0."""
        problem = _problem(A, B, x0, P1, P2)
        s = solve(problem)
        h = 1e-3
        for x, coef, force, u in ((0.5 * x0, A, P1, s.u_minus), (0.5 * (1.0 + x0), B, P2, s.u_plus)):
            pts = np.array([x - h, x, x + h])
            values = u(pts)
            second = (values[0] - 2.0 * values[1] + values[2]) / h**2
            assert coef * second + force * values[1] == pytest.approx(float(problem.g(x)), abs=1e-4)

    def test_distributional_coefficients_vanish(self, smooth_problem):
        """Test that (a·u)'' has no delta or delta' part at x0."""
        delta, delta_prime = distributional_second_derivative(solve(smooth_problem))

        assert abs(delta) <= 1e-10
        assert abs(delta_prime) <= 1e-10

    def test_singular_force_rejected(self):
        """Test that a singular constant force raises with det data."""
        p = next(e for e in pl_sequence(1.0, 2.0, 0.5, 6).entries if e.provenance is Provenance.Z1)
        problem = BeamProblem.from_values(1.0, 2.0, 0.5, p.p, g=ForcingTerm.constant(1.0))

        with pytest.raises(SingularParameterError) as excinfo:
            solve(problem, threshold=1e-6)

        assert excinfo.value.exit_code == 3
        assert excinfo.value.scale >= 1.0

    def test_interface_system_depends_on_forces_only(self, smooth_problem):
        """Test that H does not depend on g."""
        system = interface_system(smooth_problem)
        h = interface_matrix(smooth_problem.a, smooth_problem.p)

        np.testing.assert_allclose(system.matrix, h)
        assert system.det == pytest.approx(normalized_det(h)[0])


class TestUniquenessSign:
    """Tests for the sign of det H under compressive forces."""

    def test_constant_negative_force(self):
        """Test det H < 0 for 100 random draws with P < 0."""
        dets = ExperimentService(get_settings()).det_sign_sweep(100, seed=1)

        assert dets.shape == (100,)
        assert np.all(dets < 0.0)

    def test_two_negative_forces(self):
        """Test det H < 0 for 100 random draws with P1, P2 < 0."""
        dets = ExperimentService(get_settings()).det_sign_sweep(100, seed=2, two_forces=True)

        assert np.all(dets < 0.0)

    def test_single_case(self):
        """Test the sign for one hand-picked parameter set."""
        h = interface_matrix(JumpConstant(left=1.0, right=2.0, x0=0.5), JumpConstant.constant(-1.0, 0.5))

        assert normalized_det(h)[0] < 0.0


class TestWeakResidual:
    """Tests for the distributional residual."""

    def test_smooth_forcing(self, smooth_problem):
        """Test the residual over the bump family for a smooth load."""
        assert weak_residual(solve(smooth_problem)) <= 1e-8

    def test_singular_forcing(self, singular_problem):
        """Test the residual for the singular load."""
        assert weak_residual(solve(singular_problem)) <= 1e-6

    def test_perturbed_coefficient(self, singular_problem):
        """Test that perturbing c1 by 0.1 is detected."""
        s = solve(singular_problem)
        perturbed = assemble(singular_problem, s.c1 + 0.1, s.d1)

        assert weak_residual(perturbed) > 1e-3

    def test_assemble_validates_on_request(self, smooth_problem):
        """Test that validated assembly rejects broken interface laws."""
        s = solve(smooth_problem)

        with pytest.raises(ValueError, match="interface value law"):
            assemble(smooth_problem, s.c1 + 0.1, s.d1, validate=True)


class TestDisplacement:
    """Tests for displacement recovery."""

    def test_continuous_displacement(self, smooth_problem):
        """Test that w and w' do not jump at x0."""
        d = recover_displacement(solve(smooth_problem))

        assert abs(d.jump_delta) <= 1e-10
        assert abs(d.jump_theta) <= 1e-10
        assert d.w(0.0) == pytest.approx(0.0, abs=1e-12)
        assert d.w(1.0) == pytest.approx(0.0, abs=1e-12)


class TestOneSidedLimits:
    """Tests for the one-sided limit helpers."""

    def test_limits_match_branches(self, smooth_problem):
        """Test stored limits against direct branch evaluation."""
        s = solve(smooth_problem)
        direct = branch_limits(s)

        np.testing.assert_allclose(one_sided_limits(s), direct.as_tuple(), rtol=1e-9, atol=1e-12)


class TestSymmetries:
    """Tests for linearity in g and reflection x -> 1 - x."""

    GRID = np.linspace(0.01, 0.99, 38)

    @pytest.mark.parametrize("factor", [-3.0, 0.5, 7.0])
    def test_linear_in_forcing(self, smooth_problem, factor):
        """Test solve(factor·g) = factor·solve(g)."""
        g = smooth_problem.g.scaled(factor)
        scaled = BeamProblem(a=smooth_problem.a, p=smooth_problem.p, g=g)
        expected = factor * solve(smooth_problem)(self.GRID)

        np.testing.assert_allclose(solve(scaled)(self.GRID), expected, rtol=1e-10, atol=1e-10)

    @pytest.mark.parametrize("A,B,x0,P1,P2", SMOOTH_SETS)
    def test_reflection(self, A, B, x0, P1, P2):
        """Test that solving the mirrored problem mirrors the solution."""
        problem = _problem(A, B, x0, P1, P2)
        mirrored = problem.reflected()

        assert mirrored.a.left == B
        assert mirrored.x0 == pytest.approx(1.0 - x0)
        np.testing.assert_allclose(
            solve(mirrored)(1.0 - self.GRID), solve(problem)(self.GRID), rtol=1e-9, atol=1e-9
        )


class TestNearSingularPoint:
    """Tests for evaluation next to a singular point of g."""

    @pytest.mark.parametrize("offset", [1e-6, 1e-10, 1e-14])
    def test_continuous_through_singular_point(self, singular_problem, offset):
        """Test that u stays finite and continuous approaching 2/3 from both sides."""
        s = solve(singular_problem)
        sigma = 2.0 / 3.0
        points = np.array([sigma - offset, sigma, sigma + offset])

        values = s(points)

        assert np.all(np.isfinite(values))
        assert values[0] == pytest.approx(values[1], abs=1e-4)
        assert values[2] == pytest.approx(values[1], abs=1e-4)

    def test_scalar_evaluation(self, singular_problem):
        """Test scalar evaluation just short of the singular point."""
        s = solve(singular_problem)

        assert np.isfinite(s(2.0 / 3.0 - 1e-6))
