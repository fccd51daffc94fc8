import math

import numpy as np
import pytest

from simplexbundle import (
    AbsoluteContinuityViolation,
    OutOfDomain,
    ParamCurve,
    SampleSpace,
    curve_from_table,
    fisher_information,
    gradient_orthogonality,
    score,
    sqrt_embedding,
    velocity,
)
from simplexbundle.curves import central_difference, default_fd_step
from simplexbundle.zoo import entropy_curve, line_model


def test_line_model_score_by_hand():
    # gamma = (t, t, 1 - 2t), velocity (1, 1, -2): s = (1/t, 1/t, -2/(1-2t)).
    res = score(line_model(), 0.25)
    np.testing.assert_allclose(res.values, [4.0, 4.0, -4.0], rtol=0, atol=1e-14)
    assert fisher_information(line_model(), 0.25) == pytest.approx(16.0, abs=1e-12)
    assert str(res.determined_mask) == "111"


def test_sqrt_embedding_line_model():
    rho, rho_dot = sqrt_embedding(line_model(), 0.25)
    np.testing.assert_allclose(rho, [1.0, 1.0, math.sqrt(2.0)], atol=1e-15)
    np.testing.assert_allclose(rho_dot, [2.0, 2.0, -2.0 * math.sqrt(2.0)], atol=1e-14)
    # Fisher information is the squared speed on the radius-2 sphere.
    assert np.dot(rho_dot, rho_dot) == pytest.approx(16.0, abs=1e-12)


def test_transversal_contact_raises():
    with pytest.raises(AbsoluteContinuityViolation):
        score(line_model(), 0.5)


def test_tangential_zero_is_determined_off_support():
    res = score(entropy_curve(), 0.5)
    np.testing.assert_allclose(res.values, [2.0, 0.0, -2.0], atol=1e-15)
    assert str(res.determined_mask) == "101"
    # Fisher information at the hit: 1/(1/2) + 1/(1/2) = 4.
    assert fisher_information(entropy_curve(), 0.5) == pytest.approx(4.0, abs=1e-12)


def test_out_of_domain():
    with pytest.raises(OutOfDomain):
        line_model().point(0.6)
    with pytest.raises(OutOfDomain):
        velocity(line_model(), -0.1)


def test_ill_conditioned_flag_near_face():
    assert score(line_model(), 1e-9).ill_conditioned
    assert not score(line_model(), 0.25).ill_conditioned


@pytest.mark.parametrize("t", [0.12, 0.3, 0.49, 0.61, 0.79])
def test_finite_difference_matches_analytic(t):
    exact = entropy_curve()
    fd = ParamCurve(exact.space, exact.domain, exact.eval, name="fd")
    np.testing.assert_allclose(velocity(fd, t).values, velocity(exact, t).values, atol=1e-9)
    assert fd.diff_mode == "central_fd"


def test_central_difference_richardson_order():
    f = math.exp
    h = 1e-2
    plain = abs(central_difference(f, 0.0, h, richardson=False) - 1.0)
    refined = abs(central_difference(f, 0.0, h) - 1.0)
    assert refined < plain / 100
    assert default_fd_step(10.0) == pytest.approx(10.0 * np.finfo(float).eps ** (1 / 3))


def test_fixed_step_near_boundary_rejected():
    c = entropy_curve()
    fd = ParamCurve(c.space, c.domain, c.eval, fd_step=0.05)
    with pytest.raises(OutOfDomain):
        velocity(fd, 0.12)
    velocity(fd, 0.15)


def test_gradient_orthogonality_for_implicit_relation():
    # p1 - p2 = 0 on the line model.
    for t in (0.1, 0.2, 0.4):
        assert abs(gradient_orthogonality(lambda w: np.array([1.0, -1.0, 0.0]),
                                          line_model(), t)) < 1e-12


def test_curve_from_table():
    ts = np.linspace(0.1, 0.4, 31)
    w = np.array([[t, t, 1 - 2 * t] for t in ts])
    curve = curve_from_table(ts, w, SampleSpace.of_size(3))
    np.testing.assert_allclose(score(curve, ts[10]).values, score(line_model(), ts[10]).values,
                               rtol=1e-9)
    with pytest.raises(ValueError):
        curve_from_table([0.0, 0.1, 0.3], w[:3])


def test_constant_curve_has_zero_information():
    const = ParamCurve(SampleSpace.of_size(3), (0.0, 1.0), lambda t: np.array([0.2, 0.0, 0.8]),
                       lambda t: np.zeros(3))
    assert fisher_information(const, 0.4) == 0.0
