"""Tests for the finite-difference reference solver."""

import numpy as np
import pytest

from src.core.closed_form import solve
from src.core.oracle import fd_interface_solve, snap_cells
from src.models.beam import BeamProblem, ForcingTerm
from src.utils.errors import PreconditionError

MIXED_SETS = [
    (1.0, 2.0, 0.5, 1.0, 1.0),
    (2.0, 1.0, 0.4, -3.0, -3.0),
    (1.0, 3.0, 0.3, -2.0, 5.0),
    (3.0, 1.0, 0.6, 0.0, 0.0),
    (0.5, 4.0, 0.7, 2.0, -1.0),
    (2.0, 0.5, 0.5, -1.0, 3.0),
    (1.0, 2.0, 0.25, 4.0, 4.0),
    (4.0, 1.0, 0.45, -6.0, 2.0),
    (1.5, 0.5, 0.35, 1.0, -5.0),
    (0.8, 2.5, 0.55, -2.0, -0.5),
]


def _max_gap(oracle, s):
    left = np.max(np.abs(oracle.left.values - s.u_minus(oracle.left.nodes)))
    right = np.max(np.abs(oracle.right.values - s.u_plus(oracle.right.nodes)))
    return max(left, right)


class TestSnapCells:
    """Tests for sub-grid snapping."""

    @pytest.mark.parametrize("x0,h", [(0.5, 1e-3), (0.4, 1e-3), (1 / 3, 5e-4), (0.7, 2.5e-4)])
    def test_multiples_of_four(self, x0, h):
        """Test that both cell counts are multiples of 4 with spacing near h."""
        m, k = snap_cells(x0, h)

        assert m % 4 == 0 and k % 4 == 0
        assert x0 / m == pytest.approx(h, rel=0.05)
        assert (1.0 - x0) / k == pytest.approx(h, rel=0.05)

    def test_tiny_side(self):
        """Test that a side shorter than 4h still gets 4 cells."""
        assert snap_cells(0.001, 1e-3)[0] == 4


class TestFdInterfaceSolve:
    """Tests for fd_interface_solve."""

    def test_spacing_too_large(self, smooth_problem):
        """Test the maximum spacing."""
        with pytest.raises(PreconditionError, match="spacing"):
            fd_interface_solve(smooth_problem, 2e-3)

    def test_doubled_node(self, smooth_problem):
        """Test that x0 appears twice and the value law holds there."""
        oracle = fd_interface_solve(smooth_problem, 1e-3, estimate_order=False)
        nodes, values = oracle.nodes_and_values()
        u_left, u_right = oracle.interface_values

        assert np.count_nonzero(np.isclose(nodes, smooth_problem.x0)) == 2
        assert values[0] == 0.0
        assert values[-1] == 0.0
        assert 2.0 * u_left == pytest.approx(1.0 * u_right, rel=1e-8, abs=1e-12)

    def test_agrees_with_closed_form(self, smooth_problem):
        """Test the closed form against the reference at h = 1e-3."""
        oracle = fd_interface_solve(smooth_problem, 1e-3, estimate_order=False)

        assert _max_gap(oracle, solve(smooth_problem)) <= 1e-5

    def test_second_order(self, smooth_problem):
        """Test the observed order for a smooth load."""
        oracle = fd_interface_solve(smooth_problem, 1e-3)

        assert oracle.order_estimate is not None
        assert 1.8 <= oracle.order_estimate <= 2.2

    def test_order_skipped_on_request(self, smooth_problem):
        """Test that the coarser solves can be switched off."""
        oracle = fd_interface_solve(smooth_problem, 1e-3, estimate_order=False)

        assert oracle.order_estimate is None

    @pytest.mark.slow
    def test_singular_forcing(self, singular_problem):
        """Test the singular load at h = 2.5e-4."""
        oracle = fd_interface_solve(singular_problem, 2.5e-4, estimate_order=False)

        assert _max_gap(oracle, solve(singular_problem)) <= 1e-5

    @pytest.mark.slow
    @pytest.mark.parametrize("A,B,x0,P1,P2", MIXED_SETS)
    def test_mixed_force_sets(self, A, B, x0, P1, P2):
        """Test closed form against the reference for mixed force signs at h = 2.5e-4."""
        g = ForcingTerm(eval=lambda x: np.cos(2.0 * x) + x, label="cos(2*x) + x")
        problem = BeamProblem.from_values(A, B, x0, P1, P2, g=g)

        oracle = fd_interface_solve(problem, 2.5e-4, estimate_order=False)

        assert _max_gap(oracle, solve(problem)) <= 1e-5
