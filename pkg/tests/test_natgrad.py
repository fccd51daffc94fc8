import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from simplexbundle import (
    AbsoluteContinuityViolation,
    Functional,
    GradientUnavailable,
    StepRejected,
    cramer_rao_gap,
    directional_derivative_check,
    entropy,
    entropy_functional,
    entropy_gradient,
    entropy_production,
    expectation_functional,
    make_distribution,
    natural_gradient,
    natural_gradient_flow,
)
from simplexbundle.zoo import entropy_curve, line_model
from conftest import distributions

# dH/dt along (t, (t - 1/2)^2, 3/4 - t^2), 30-digit reference values.
PRODUCTION_REFERENCE = [
    (0.15, 0.331926626606785736),
    (0.3, -0.332886791998343776),
    (0.45, -0.342792294055359604),
    (0.6, 0.301929413133475073),
    (0.75, -0.836988216785835773),
]


def test_entropy_and_gradient_reference():
    p = make_distribution(2, [0.75, 0.25])
    assert entropy(p) == pytest.approx(0.5623351446188083, abs=1e-15)
    np.testing.assert_allclose(entropy_gradient(p).score,
                               [-0.2746530721670274, 0.8239592165010823], atol=1e-15)


@pytest.mark.parametrize("t, expected", PRODUCTION_REFERENCE)
def test_entropy_production_reference(t, expected):
    assert entropy_production(entropy_curve(), t) == pytest.approx(expected, abs=1e-12)


def test_entropy_production_compensated_zero():
    assert entropy_production(entropy_curve(), 0.5) == 0.0


def test_entropy_production_transversal_contact():
    with pytest.raises(AbsoluteContinuityViolation):
        entropy_production(line_model(), 0.5)


def test_cramer_rao_worked_example():
    assert cramer_rao_gap(line_model(), [1.0, 0.0, 0.0], 0.25) == (1.0, 3.0)


@pytest.mark.parametrize("t", [0.15, 0.3, 0.5, 0.7])
@pytest.mark.parametrize("G", [expectation_functional([1.0, -2.0, 0.5]), entropy_functional()],
                         ids=["expectation", "entropy"])
def test_natural_gradient_identity(G, t):
    assert directional_derivative_check(G, entropy_curve(), t) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(distributions(min_support=2))
def test_fd_gradient_matches_analytic(p):
    analytic = entropy_gradient(p)
    fd = natural_gradient(Functional("H", entropy), p)
    np.testing.assert_allclose(fd.score, analytic.score, atol=1e-6)


def test_gradient_unavailable_at_vertex():
    with pytest.raises(GradientUnavailable):
        natural_gradient(Functional("H", entropy), make_distribution(3, [1, 0, 0]))
    with pytest.raises(GradientUnavailable):
        natural_gradient_flow(entropy_functional(), make_distribution(3, [0, 1, 0]))


def test_entropy_flow_reaches_face_barycenter():
    traj = natural_gradient_flow(entropy_functional(), make_distribution(3, [0.7, 0.3, 0.0]))
    assert traj.converged
    np.testing.assert_allclose(traj.final.weights, [0.5, 0.5, 0.0], atol=1e-6)
    assert all(np.array_equal(p.support, [True, True, False]) for _, p, _ in traj.points)
    assert all(b >= a for a, b in zip(traj.values, traj.values[1:]))


def test_descent_on_expectation_moves_mass_to_minimum():
    G = expectation_functional([3.0, 1.0, 2.0])
    traj = natural_gradient_flow(G, make_distribution(3, [1 / 3] * 3), step=1.0, n_steps=40,
                                 direction="descent")
    assert traj.values[-1] < traj.values[0]
    assert int(np.argmax(traj.final.weights)) == 1


def test_flow_rejects_when_no_step_improves():
    # A value that punishes every move away from the start.
    p0 = make_distribution(2, [0.3, 0.7])
    bad = Functional("spike", lambda p: -abs(p.weights[0] - 0.3) ** 0.25,
                     lambda p: np.array([1.0, 0.0]))
    with pytest.raises(StepRejected):
        natural_gradient_flow(bad, p0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.02, 0.48), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_cramer_rao_inequality(t, g):
    lhs, rhs = cramer_rao_gap(line_model(), g, t)
    assert lhs <= rhs + 1e-10
