"""Scalar and matrix Mittag-Leffler evaluation against independent references."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from fracspline import MLParams, SystemMatrix, ml_matrix, ml_scalar, reference_solution
from fracspline.errors import NumericsError
from fracspline.mittag_leffler import _ml_matrix_series
from fracspline.solver import FractionalProblem
from helpers import mp_ml, mp_ml_neg

EXAMPLE2 = np.array([[-1.5, 0.5], [0.5, -1.5]])


class TestScalar:
    def test_exponential_identity(self):
        params = MLParams(1.0, 1.0)
        for z in np.linspace(-2.0, 2.0, 41):
            assert abs(ml_scalar(params, float(z)) - math.exp(z)) <= 1e-12

    def test_zero_argument(self):
        assert ml_scalar(MLParams(0.5, 1.0), 0.0) == 1.0

    def test_normalization_random_orders(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            gamma = float(rng.uniform(0.1, 2.0))
            beta = float(rng.uniform(0.3, 2.5))
            value = ml_scalar(MLParams(gamma, beta), 0.0)
            npt.assert_allclose(value, 1.0 / math.gamma(beta), rtol=1e-14)

    def test_half_order_against_extended_precision(self):
        value = ml_scalar(MLParams(0.5, 1.0), -1.0)
        assert abs(value - mp_ml(0.5, -1.0)) <= 1e-12

    @pytest.mark.parametrize(
        "gamma,z",
        [(0.1, -2.0), (0.1, -0.5), (0.25, -2.0), (0.35, -1.3), (0.45, -5.0)],
    )
    def test_cancellation_regime_against_laplace_inversion(self, gamma, z):
        # small orders force the branch-cut integral route; the oracle is
        # Talbot-contour Laplace inversion, independent of both routes
        value = ml_scalar(MLParams(gamma, 1.0), z)
        assert abs(value - mp_ml_neg(gamma, -z)) <= 1e-12

    def test_two_parameter_cancellation_regime(self):
        value = ml_scalar(MLParams(0.3, 1.2), -2.0)
        assert abs(value - mp_ml_neg(0.3, 2.0, beta=1.2)) <= 1e-12

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.8])
    def test_monotone_decay_on_negative_axis(self, gamma):
        params = MLParams(gamma, 1.0)
        values = [ml_scalar(params, float(z)) for z in np.linspace(0.0, -2.0, 21)]
        diffs = np.diff(values)
        assert np.all(diffs <= 1e-15)

    def test_trust_region_refusal(self):
        with pytest.raises(ValueError):
            ml_scalar(MLParams(0.5, 1.0), 51.0)
        with pytest.raises(ValueError):
            ml_scalar(MLParams(0.5, 1.0), 30.0, z_max=20.0)

    def test_term_budget_exhaustion(self):
        # the positive-axis series for tiny gamma keeps growing past any budget
        with pytest.raises(NumericsError):
            ml_scalar(MLParams(0.1, 1.0), 50.0)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            MLParams(0.0, 1.0)
        with pytest.raises(ValueError):
            MLParams(0.5, -1.0)


class TestMatrix:
    def test_zero_scale_is_identity(self):
        out = ml_matrix(MLParams(0.5, 1.0), 0.0, EXAMPLE2)
        npt.assert_array_equal(out, np.eye(2))

    def test_zero_scale_general_beta(self):
        out = ml_matrix(MLParams(0.5, 2.0), 0.0, EXAMPLE2)
        npt.assert_allclose(out, np.eye(2) / math.gamma(2.0), rtol=1e-15)

    def test_diagonal_short_circuit(self):
        params = MLParams(0.4, 1.0)
        out = ml_matrix(params, 1.3, np.diag([-1.0, -2.0]))
        expected = np.diag([ml_scalar(params, -1.3), ml_scalar(params, -2.6)])
        npt.assert_array_equal(out, expected)

    def test_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            ml_matrix(MLParams(0.5, 1.0), -1.0, EXAMPLE2)

    def test_route_agreement_random_symmetric(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = int(rng.integers(2, 4))
            raw = rng.standard_normal((m, m))
            sym = 0.5 * (raw + raw.T)
            radius = float(np.max(np.abs(np.linalg.eigvalsh(sym))))
            if radius > 0:
                sym *= rng.uniform(0.2, 2.0) / radius
            gamma = float(rng.uniform(0.3, 1.0))
            params = MLParams(gamma, 1.0)
            eigen = ml_matrix(params, 1.0, SystemMatrix(sym))
            series = _ml_matrix_series(params.gamma, params.beta, sym, 500)
            npt.assert_allclose(eigen, series, atol=1e-10)

    def test_eigen_route_on_coupled_system(self):
        # eigenvectors (1,1) and (1,-1) with eigenvalues -1 and -2
        params = MLParams(0.5, 1.0)
        out = ml_matrix(params, 1.0, SystemMatrix(EXAMPLE2)) @ np.array([1.0, 2.0])
        e1 = ml_scalar(params, -1.0)
        e2 = ml_scalar(params, -2.0)
        npt.assert_allclose(out, [1.5 * e1 - 0.5 * e2, 1.5 * e1 + 0.5 * e2], atol=1e-10)

    def test_eigen_equals_series_on_example_matrix(self):
        params = MLParams(0.5, 1.0)
        eigen = ml_matrix(params, 1.0, SystemMatrix(EXAMPLE2))
        series = ml_matrix(params, 1.0, SystemMatrix(EXAMPLE2, cond_cap=0.5))  # forces fallback
        npt.assert_allclose(eigen, series, atol=1e-10)

    def test_defective_matrix_series_fallback(self):
        # Jordan block: E_{1,1}(tJ) = e^t [[1, t], [0, 1]]
        jordan = np.array([[1.0, 1.0], [0.0, 1.0]])
        sysmat = SystemMatrix(jordan)
        assert not sysmat.has_eigen_data
        t = 0.7
        out = ml_matrix(MLParams(1.0, 1.0), t, sysmat)
        expected = math.exp(t) * np.array([[1.0, t], [0.0, 1.0]])
        npt.assert_allclose(out, expected, rtol=1e-12)

    def test_defective_outside_fallback_refused(self):
        jordan = np.array([[2.0, 1.0], [0.0, 2.0]])
        with pytest.raises(ValueError):
            ml_matrix(MLParams(0.9, 1.0), 4.0, jordan)  # spectral radius 8 > 5

    def test_nonsquare_rejected(self):
        with pytest.raises(ValueError):
            SystemMatrix(np.zeros((2, 3)))

    def test_nonsymmetric_diagonalizable(self):
        a = np.array([[-1.0, 1.0], [0.0, -2.0]])
        out = ml_matrix(MLParams(1.0, 1.0), 1.0, SystemMatrix(a))
        from scipy.linalg import expm

        npt.assert_allclose(out, expm(a), atol=1e-11)

    def test_complex_eigenvalue_pair(self):
        # exp of a rotation generator; exercises the complex eigen branch
        a = np.array([[0.0, 1.0], [-1.0, 0.0]])
        t = 0.7
        out = ml_matrix(MLParams(1.0, 1.0), t, SystemMatrix(a))
        expected = np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]])
        npt.assert_allclose(out, expected, atol=1e-13)


class TestReferenceSolution:
    def test_initial_state_exact(self):
        problem = FractionalProblem(A=EXAMPLE2, X0=np.array([1.0, 2.0]), gamma=0.5)
        npt.assert_array_equal(reference_solution(problem, 0.0), [1.0, 2.0])

    def test_half_order_closed_form(self):
        problem = FractionalProblem(A=EXAMPLE2, X0=np.array([1.0, 2.0]), gamma=0.5)
        out = reference_solution(problem, 1.0)
        params = MLParams(0.5, 1.0)
        e1 = ml_scalar(params, -1.0)
        e2 = ml_scalar(params, -2.0)
        npt.assert_allclose(out, [1.5 * e1 - 0.5 * e2, 1.5 * e1 + 0.5 * e2], atol=1e-12)

    def test_classical_order_is_matrix_exponential(self):
        from scipy.linalg import expm

        problem = FractionalProblem(A=EXAMPLE2, X0=np.array([1.0, 2.0]), gamma=1.0)
        out = reference_solution(problem, 0.8)
        npt.assert_allclose(out, expm(0.8 * EXAMPLE2) @ [1.0, 2.0], atol=1e-12)

    def test_zero_state_stays_zero(self):
        problem = FractionalProblem(A=EXAMPLE2, X0=np.zeros(2), gamma=0.5)
        npt.assert_array_equal(reference_solution(problem, 0.7), np.zeros(2))

    def test_forced_problem_refused(self):
        problem = FractionalProblem(
            A=np.array([[-1.0]]), X0=np.array([0.0]), gamma=0.5, forcing=(lambda t: t,)
        )
        with pytest.raises(ValueError):
            reference_solution(problem, 0.5)

    def test_negative_time_refused(self):
        problem = FractionalProblem(A=EXAMPLE2, X0=np.array([1.0, 2.0]), gamma=0.5)
        with pytest.raises(ValueError):
            reference_solution(problem, -0.1)
