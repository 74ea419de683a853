import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elastic_purcell.core import (
    Params,
    SingularResistanceError,
    State,
    _solve,
    assemble_resistance_closed,
    assemble_resistance_quadrature,
    block_decompose,
    control_fields,
    rhs_vector,
    velocity,
)

angle = st.floats(-np.pi, np.pi, allow_nan=False)
nus = st.floats(0.05, 2.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(angle, angle, angle, nus)
def test_closed_form_matches_quadrature(th, am, ap, nu):
    state = (0.3, -0.2, th, am, ap)
    p = Params(nu)
    np.testing.assert_allclose(assemble_resistance_closed(state, p),
                               assemble_resistance_quadrature(state, p), atol=1e-11)


@settings(max_examples=30, deadline=None)
@given(angle, angle, angle)
def test_resistance_matrix_symmetric_and_definite_translation_block(th, am, ap):
    R = assemble_resistance_closed((0, 0, th, am, ap), Params(0.5))
    np.testing.assert_allclose(R, R.T, atol=1e-15)
    A, _, _ = block_decompose(R)
    assert np.all(np.linalg.eigvalsh(A) < 0)  # drag opposes motion


def test_printed_variant_differs_from_quadrature():
    state = (0, 0, 0.4, 0.7, -0.3)
    p = Params(0.5)
    quad = assemble_resistance_quadrature(state, p)
    printed = assemble_resistance_closed(state, p, as_printed=True)
    assert np.max(np.abs(printed - quad)) > 1e-2


def test_straight_state_entries():
    R = assemble_resistance_closed(State.equilibrium(), Params(0.5))
    assert R[0, 0] == pytest.approx(-3.0)  # (3(1 - nu) - 3(1 + nu)) / (2 nu) = -3
    assert R[3, 3] == pytest.approx(-2 / 3)


def test_quadrature_node_count_validated():
    with pytest.raises(ValueError):
        assemble_resistance_quadrature(State.equilibrium(), Params(0.5), n_nodes=4)


def test_params_validation():
    with pytest.raises(ValueError):
        Params(0.0)
    with pytest.raises(ValueError):
        Params(float("nan"))


def test_bad_state_rejected(params):
    with pytest.raises(ValueError):
        velocity((0, 0, 0, 0), 0, 0, params)
    with pytest.raises(ValueError):
        velocity((0, 0, np.inf, 0, 0), 0, 0, params)


def test_singular_matrix_reports_condition():
    with pytest.raises(SingularResistanceError) as info:
        _solve(np.zeros((5, 5)), np.ones(5))
    assert info.value.condition > 1e10 or np.isinf(info.value.condition)


def test_velocity_is_affine_in_controls(params, rng):
    y = rng.uniform(-1, 1, 5)
    q0, q1, q2 = control_fields(params)
    u1, u2 = 0.3, -0.7
    np.testing.assert_allclose(velocity(y, u1, u2, params), q0(y) + u1 * q1(y) + u2 * q2(y),
                               rtol=1e-12, atol=1e-14)


def test_rhs_vector():
    np.testing.assert_array_equal(rhs_vector((0, 0, 0, 0.2, -0.1), 0.5, 0.1), [0, 0, 0, -0.3, -0.2])


def test_jacobian_matches_finite_differences(params, rng):
    q0, _, _ = control_fields(params)
    y = rng.uniform(-0.5, 0.5, 5)
    J = q0.jac(y)
    h = 1e-5
    fd = np.column_stack([(q0(y + h * e) - q0(y - h * e)) / (2 * h) for e in np.eye(5)])
    np.testing.assert_allclose(J, fd, atol=1e-8)


def test_drift_vanishes_at_equilibrium(params):
    q0, _, _ = control_fields(params)
    np.testing.assert_allclose(q0(State.equilibrium(0.3, 1.0, 2.0)), 0, atol=1e-15)
