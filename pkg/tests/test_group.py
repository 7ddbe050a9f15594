import numpy as np
import pytest

from heisenflag.group import (
    GroupDims,
    GroupPoint,
    dilate,
    group_inv,
    group_mul,
    homogeneous_norm,
    identity,
)


def random_point(rng, n=1, scale=2.0):
    return GroupPoint(rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, n),
                      rng.uniform(-scale, scale))


def test_dims_validation():
    assert GroupDims(1).homogeneous_dim == 4
    assert GroupDims(3).homogeneous_dim == 8
    with pytest.raises(ValueError):
        GroupDims(2, homogeneous_dim=5)
    with pytest.raises(ValueError):
        GroupDims(0)


def test_product_twists_center():
    a = GroupPoint([1.0], [2.0], 0.5)
    b = GroupPoint([0.5], [3.0], -1.0)
    c = group_mul(a, b)
    assert np.allclose(c.x, [1.5]) and np.allclose(c.y, [5.0])
    assert c.t == 0.5 - 1.0 + 1.0 * 3.0


def test_associativity_random():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3):
        for _ in range(50):
            a, b, c = (random_point(rng, n) for _ in range(3))
            lhs = group_mul(group_mul(a, b), c)
            rhs = group_mul(a, group_mul(b, c))
            assert lhs.isclose(rhs, tol=1e-12)


def test_inverse_and_identity():
    rng = np.random.default_rng(8)
    for n in (1, 2):
        e = identity(n)
        for _ in range(50):
            a = random_point(rng, n)
            assert group_mul(a, group_inv(a)).isclose(e, tol=1e-12)
            assert group_mul(group_inv(a), a).isclose(e, tol=1e-12)
            assert group_mul(a, e).isclose(a)
            assert group_mul(e, a).isclose(a)


def test_noncommutativity_is_central():
    a = GroupPoint([1.0], [0.0], 0.0)
    b = GroupPoint([0.0], [1.0], 0.0)
    ab, ba = group_mul(a, b), group_mul(b, a)
    assert ab.t - ba.t == 1.0
    assert np.allclose(ab.x, ba.x) and np.allclose(ab.y, ba.y)


def test_dilation_is_automorphism():
    rng = np.random.default_rng(9)
    for _ in range(30):
        a, b = random_point(rng), random_point(rng)
        j = rng.uniform(0.2, 3.0)
        lhs = dilate(j, group_mul(a, b))
        rhs = group_mul(dilate(j, a), dilate(j, b))
        assert lhs.isclose(rhs, tol=1e-12)
    with pytest.raises(ValueError):
        dilate(0.0, a)
    with pytest.raises(ValueError):
        dilate(-1.0, a)


def test_norm_homogeneous_and_quasi_subadditive():
    rng = np.random.default_rng(10)
    for _ in range(50):
        a, b = random_point(rng, n=2), random_point(rng, n=2)
        j = rng.uniform(0.1, 4.0)
        assert np.isclose(homogeneous_norm(dilate(j, a)), j * homogeneous_norm(a),
                          rtol=1e-12)
        # |ab| <= C (|a| + |b|); C = 1.5 suffices for the l1 gauge
        assert homogeneous_norm(group_mul(a, b)) <= 1.5 * (
            homogeneous_norm(a) + homogeneous_norm(b)) + 1e-12
    assert homogeneous_norm(identity(2)) == 0.0


def test_norm_value():
    # l1 horizontal part plus sqrt of the center
    a = GroupPoint([3.0, -1.0], [0.5, 0.0], -4.0)
    assert homogeneous_norm(a) == 3.0 + 1.0 + 0.5 + 2.0


def test_validation_rejects_bad_points():
    with pytest.raises(ValueError):
        GroupPoint([1.0], [1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        GroupPoint([np.nan], [0.0], 0.0)
    with pytest.raises(ValueError):
        GroupPoint([0.0], [0.0], np.inf)
    with pytest.raises(ValueError):
        group_mul(GroupPoint([1.0], [0.0], 0.0), GroupPoint([1.0, 0.0], [0.0, 0.0], 0.0))
