"""Tests for adaptive quadrature and banded solves."""

import numpy as np
import pytest

from src.core.banded import (
    banded_matvec,
    elimination_pivots,
    solve_banded_system,
    tridiagonal_bands,
)
from src.core.quadrature import hat_average, integrate, integrate_forcing, sample_forcing
from src.models.beam import ForcingTerm, Singularity
from src.utils.errors import QuadratureError, SolverError


class TestIntegrate:
    """Tests for integrate."""

    def test_polynomial(self):
        """Test an integrand the rule integrates exactly."""
        result = integrate(lambda x: x**2, 0.0, 1.0)

        assert result.value == pytest.approx(1.0 / 3.0, abs=1e-14)
        assert result.error <= 1e-11

    def test_reversed_limits(self):
        """Test that a > b flips the sign."""
        assert integrate(np.cos, 1.0, 0.0).value == pytest.approx(-np.sin(1.0), abs=1e-13)

    def test_empty_interval(self):
        """Test a zero-length interval."""
        assert integrate(np.exp, 0.3, 0.3).value == 0.0

    def test_endpoint_singularity(self):
        """Test x^(-1/2) on [0, 1] with the singular substitution."""
        result = integrate(
            lambda x: x**-0.5,
            0.0,
            1.0,
            singularities=(Singularity(location=0.0, exponent=-0.5),),
        )

        assert result.value == pytest.approx(2.0, abs=1e-11)

    def test_interior_singularity(self):
        """Test |x - 0.3|^(-1/2) split at the singular point."""
        result = integrate(
            lambda x: np.abs(x - 0.3) ** -0.5,
            0.0,
            1.0,
            singularities=(Singularity(location=0.3, exponent=-0.5),),
        )

        assert result.value == pytest.approx(2.0 * (np.sqrt(0.3) + np.sqrt(0.7)), abs=1e-10)

    @pytest.mark.parametrize("width", [1e-6, 1e-10, 1e-14])
    def test_interval_ending_at_singularity(self, width):
        """Test cos(11x)/sqrt|x - 2/3| on [2/3 - width, 2/3]."""
        sigma = 2.0 / 3.0
        a = sigma - width
        length = sigma - a

        result = integrate(
            lambda x: np.cos(11.0 * x) / np.sqrt(np.abs(x - sigma)),
            a,
            sigma,
            singularities=(Singularity(location=sigma, exponent=-0.5),),
        )
        # two terms of the expansion of cos(11x) about sigma
        expected = 2.0 * np.cos(11.0 * sigma) * length**0.5
        expected += (22.0 / 3.0) * np.sin(11.0 * sigma) * length**1.5

        assert result.value == pytest.approx(expected, rel=1e-9)

    def test_end_just_short_of_singularity(self):
        """Test an interval stopping a few ulps before a declared singular point."""
        sigma = 2.0 / 3.0
        b = sigma - 1e-13
        gap = sigma - b

        result = integrate(
            lambda x: np.abs(x - sigma) ** -0.5,
            sigma - 1e-3,
            b,
            singularities=(Singularity(location=sigma, exponent=-0.5),),
        )
        expected = 2.0 * (np.sqrt(sigma - (sigma - 1e-3)) - np.sqrt(gap))

        assert result.value == pytest.approx(expected, rel=1e-10)

    def test_vector_valued(self):
        """Test integrands returning one column per component."""
        result = integrate(lambda x: np.stack([np.ones_like(x), x], axis=-1), 0.0, 2.0)

        np.testing.assert_allclose(result.value, [2.0, 2.0], atol=1e-13)

    def test_breakpoint_kink(self):
        """Test |x - 0.4| with a declared breakpoint."""
        result = integrate(lambda x: np.abs(x - 0.4), 0.0, 1.0, breakpoints=(0.4,))

        assert result.value == pytest.approx(0.5 * (0.16 + 0.36), abs=1e-14)

    def test_non_finite_integrand(self):
        """Test that an undeclared pole is reported."""
        with pytest.raises(QuadratureError, match="non-finite"):
            integrate(lambda x: 1.0 / (x - 0.5), 0.0, 1.0)

    def test_subdivision_cap(self):
        """Test that an undeclared singularity exhausts the bisection cap."""
        with pytest.raises(QuadratureError, match="exceeded"):
            integrate(lambda x: np.abs(x - 0.3) ** -0.5, 0.0, 1.0, max_subdivisions=3)


class TestForcingSamples:
    """Tests for forcing integrals and samples."""

    def test_integrate_forcing_weight(self):
        """Test ∫ x·g over [0, 1] for g = 1."""
        value = integrate_forcing(ForcingTerm.constant(1.0), 0.0, 1.0, weight=lambda x: x)

        assert value == pytest.approx(0.5, abs=1e-14)

    def test_hat_average_constant(self):
        """Test that the hat average of a constant is the constant."""
        assert hat_average(ForcingTerm.constant(3.0), 0.5, 0.01) == pytest.approx(3.0, abs=1e-12)

    def test_hat_average_at_singularity(self):
        """Test the hat average of |x - 1/2|^(-1/2) centered on the singular point."""
        h = 1e-3
        g = ForcingTerm(
            eval=lambda x: np.abs(x - 0.5) ** -0.5,
            singularities=(Singularity(location=0.5, exponent=-0.5),),
        )

        assert hat_average(g, 0.5, h) == pytest.approx((8.0 / 3.0) / np.sqrt(h), rel=1e-10)

    def test_sample_forcing_finite(self):
        """Test that nodes near a declared singularity get finite averages."""
        g = ForcingTerm(
            eval=lambda x: np.abs(x - 0.5) ** -0.5,
            singularities=(Singularity(location=0.5, exponent=-0.5),),
        )
        nodes = np.linspace(0.0, 1.0, 101)[1:-1]

        values = sample_forcing(g, nodes, 0.01, cells=2)

        assert np.all(np.isfinite(values))
        assert values[0] == pytest.approx(0.49**-0.5)


class TestBandedSolve:
    """Tests for banded linear solves."""

    @pytest.fixture
    def laplacian(self):
        """Tridiagonal (-1, 2, -1) matrix of size 6."""
        n = 6
        ab = tridiagonal_bands(-np.ones(n), 2.0 * np.ones(n), -np.ones(n))
        dense = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        return ab, dense

    def test_matvec(self, laplacian):
        """Test banded product against the dense matrix."""
        ab, dense = laplacian
        x = np.arange(6, dtype=float)

        np.testing.assert_allclose(banded_matvec((1, 1), ab, x), dense @ x)

    def test_solve(self, laplacian):
        """Test the solution against a dense solve."""
        ab, dense = laplacian
        rhs = np.linspace(1.0, 2.0, 6)

        np.testing.assert_allclose(solve_banded_system((1, 1), ab, rhs), np.linalg.solve(dense, rhs))

    def test_pivots(self, laplacian):
        """Test elimination pivots (k + 1)/k of the discrete Laplacian."""
        ab, _ = laplacian

        np.testing.assert_allclose(elimination_pivots((1, 1), ab), [(k + 1) / k for k in range(1, 7)])

    def test_singular_matrix(self):
        """Test that a singular system reports the smallest pivot."""
        n = 4
        ab = tridiagonal_bands(np.zeros(n), np.array([1.0, 0.0, 1.0, 1.0]), np.zeros(n))

        with pytest.raises(SolverError) as excinfo:
            solve_banded_system((1, 1), ab, np.ones(n))

        assert excinfo.value.pivot == 0.0
        assert excinfo.value.index == 1
