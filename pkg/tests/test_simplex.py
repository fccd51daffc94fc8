import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from simplexbundle import (
    BaseMismatch,
    BundleElement,
    ContrastVector,
    EmptySubset,
    NegativeWeight,
    NotNormalized,
    ProbabilityVector,
    SampleSpace,
    center,
    contrast_basis,
    distribution_from_json,
    inner_product,
    make_distribution,
    tangent_membership,
)
from conftest import contrasts, distributions


def test_sample_space_labels_and_index():
    space = SampleSpace(("a", "b", "c"))
    assert space.d == 3
    assert space.index("b") == 1
    np.testing.assert_array_equal(space.basis_vector("c"), [0, 0, 1])
    assert SampleSpace.of_size(3).labels == ("1", "2", "3")
    with pytest.raises(KeyError):
        space.index("z")
    with pytest.raises(ValueError):
        SampleSpace(("a", "a"))


@pytest.mark.parametrize("weights, err", [
    ([0.5, 0.6, -0.1], NegativeWeight),
    ([0.5, 0.6, 0.0], NotNormalized),
    ([np.nan, 0.5, 0.5], ValueError),
])
def test_invalid_weights_rejected(weights, err):
    with pytest.raises(err):
        ProbabilityVector(SampleSpace.of_size(3), np.array(weights))


def test_support_and_faces():
    p = make_distribution(3, [0.5, 0.5, 0.0])
    assert str(p.support_indicator) == "110"
    assert p.support_indicator.labels == ("1", "2")
    assert not p.is_interior and not p.is_vertex
    assert make_distribution(3, [1, 0, 0]).is_vertex
    assert make_distribution(3, [0.2, 0.3, 0.5]).is_interior


def test_make_distribution_clamps_roundoff():
    p = make_distribution(3, [0.5, 0.5 + 1e-11, -1e-11])
    assert p.weights[2] == 0.0
    assert p.weights.sum() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(NegativeWeight):
        make_distribution(3, [0.5, 0.6, -0.1])


def test_weights_are_read_only():
    p = make_distribution(2, [0.5, 0.5])
    with pytest.raises(ValueError):
        p.weights[0] = 1.0


def test_json_round_trip():
    p = make_distribution(SampleSpace(("x", "y")), [0.25, 0.75])
    q = distribution_from_json(p.to_json())
    assert q.space == p.space
    np.testing.assert_array_equal(q.weights, p.weights)
    assert distribution_from_json(json.loads(p.to_json())).space.labels == ("x", "y")


def test_contrast_requires_zero_sum():
    ContrastVector(SampleSpace.of_size(3), [1.0, -1.0, 0.0])
    with pytest.raises(ValueError):
        ContrastVector(SampleSpace.of_size(3), [1.0, 0.0, 0.0])


def test_bundle_element_canonical_off_support():
    p = make_distribution(3, [0.5, 0.5, 0.0])
    u = BundleElement(p, [1.0, -1.0, 7.0])
    np.testing.assert_array_equal(u.score, [1.0, -1.0, 0.0])
    with pytest.raises(ValueError):
        BundleElement(p, [1.0, 1.0, 0.0])


def test_inner_product_base_mismatch():
    p = make_distribution(2, [0.5, 0.5])
    q = make_distribution(2, [0.25, 0.75])
    with pytest.raises(BaseMismatch):
        inner_product(p, center([1, 0], q), center([1, 0], p))


def test_contrast_basis_order_and_errors():
    space = SampleSpace(("a", "b", "c"))
    basis = contrast_basis(space, ["c", "a"])
    assert len(basis) == 1
    np.testing.assert_array_equal(basis[0].values, [1, 0, -1])
    with pytest.raises(EmptySubset):
        contrast_basis(space, [])


def test_tangent_membership_at_face():
    p = make_distribution(3, [0.5, 0.5, 0.0])
    assert tangent_membership(p, [1.0, -1.0, 0.0])
    assert not tangent_membership(p, [1.0, 0.0, -1.0])


@given(distributions(), st.data())
def test_center_is_mean_zero(p, data):
    u = data.draw(contrasts(p.space.d))
    c = center(u, p)
    assert abs(p.expect(c.score)) <= 1e-12 * (1 + np.abs(u).max())
    assert np.all(c.score[~p.support] == 0)


@given(distributions(), st.data())
def test_inner_product_symmetric_and_positive(p, data):
    u = center(data.draw(contrasts(p.space.d)), p)
    v = center(data.draw(contrasts(p.space.d)), p)
    assert inner_product(p, u, v) == pytest.approx(inner_product(p, v, u), abs=1e-12)
    assert inner_product(p, u, u) >= 0
