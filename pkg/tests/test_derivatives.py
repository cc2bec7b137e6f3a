import numpy as np
import pytest
from hypothesis import given, strategies as st

from forcedvi.derivatives import (check_gradient, check_jacobian, directional_derivative,
                                  gradient, jacobian, max_relative_error)
from forcedvi.errors import NumericDomainError

finite = st.floats(-3.0, 3.0, allow_nan=False)


def test_gradient_of_quadratic():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    x = np.array([0.3, -1.2])
    g = gradient(lambda z: 0.5 * z @ A @ z, x)
    assert np.allclose(g, A @ x, atol=1e-9)


def test_jacobian_layout():
    J = jacobian(lambda z: np.array([z[0] * z[1], np.sin(z[0]), z[1] ** 2]), [1.0, 2.0])
    expected = np.array([[2.0, 1.0], [np.cos(1.0), 0.0], [0.0, 4.0]])
    assert J.shape == (3, 2)
    assert np.allclose(J, expected, atol=1e-9)


def test_fixed_step_jacobian():
    J = jacobian(lambda z: z ** 3, [1.0], step=1e-3)
    assert J[0, 0] == pytest.approx(3.0 + 1e-6, abs=1e-12)


def test_directional_derivative_is_fourth_order():
    f = lambda z: np.exp(z[0]) * np.cos(z[1])
    x, d = np.array([0.4, 0.7]), np.array([1.0, -2.0])
    exact = np.exp(0.4) * np.cos(0.7) + 2.0 * np.exp(0.4) * np.sin(0.7)
    assert abs(directional_derivative(f, x, d) - exact) < 1e-11


def test_directional_derivative_zero_direction():
    assert directional_derivative(lambda z: z @ z, [1.0, 2.0], [0.0, 0.0]) == 0.0


def test_non_finite_gradient_raises():
    with pytest.raises(NumericDomainError):
        gradient(lambda z: np.inf * z[0], [1.0])


def test_relative_error_rule():
    assert max_relative_error([1.0], [1.0 + 1e-7]) < 1e-6
    assert max_relative_error([2e6], [2e6 + 1.0]) == pytest.approx(0.5e-6)


def test_check_helpers_flag_wrong_derivative():
    pts = [np.array([0.5, -0.5]), np.array([1.0, 2.0])]
    f = lambda z: z[0] ** 2 * z[1]
    good = lambda z: np.array([2 * z[0] * z[1], z[0] ** 2])
    bad = lambda z: np.array([2 * z[0] * z[1], 2 * z[0]])
    assert check_gradient(f, good, pts) < 1e-8
    assert check_gradient(f, bad, pts) > 1e-2
    F = lambda z: np.array([z[0] * z[1], z[1]])
    J = lambda z: np.array([[z[1], z[0]], [0.0, 1.0]])
    assert check_jacobian(F, J, pts) < 1e-8


@given(st.lists(finite, min_size=4, max_size=4), finite, finite)
def test_gradient_of_cubic_polynomials(coeffs, x, y):
    c = np.array(coeffs)
    f = lambda z: c[0] * z[0] ** 3 + c[1] * z[0] * z[1] + c[2] * z[1] ** 2 + c[3]
    g = np.array([3 * c[0] * x ** 2 + c[1] * y, c[1] * x + 2 * c[2] * y])
    assert max_relative_error(gradient(f, [x, y]), g) < 1e-6
