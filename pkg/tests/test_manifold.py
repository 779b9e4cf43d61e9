"""Unit checks for the manifold primitives (S^3, SO(3), SPD cone)."""

import numpy as np
import pytest

from dmpkit import manifold
from dmpkit.errors import DimensionMismatch, DomainError, NotSpd


# ---------------------------------------------------------------------------
# quaternions
# ---------------------------------------------------------------------------

def test_quat_product_hand_value():
    # (w1 w2 - v1.v2, w1 v2 + w2 v1 + v1 x v2) expanded by hand
    q1 = np.array([0.5, 0.5, 0.5, 0.5])
    q2 = np.array([0.0, 1.0, 0.0, 0.0])
    np.testing.assert_allclose(manifold.quat_product(q1, q2),
                               [-0.5, 0.5, 0.5, -0.5], atol=1e-15)


def test_quat_product_identity_and_inverse():
    rng = np.random.default_rng(7)
    ident = np.array([1.0, 0.0, 0.0, 0.0])
    for _ in range(50):
        q = manifold.quat_normalize(rng.normal(size=4))
        np.testing.assert_allclose(manifold.quat_product(ident, q), q, atol=1e-15)
        np.testing.assert_allclose(
            manifold.quat_product(q, manifold.quat_conjugate(q)), ident, atol=1e-12)


def test_quat_normalize_zero_rejected():
    with pytest.raises(DomainError):
        manifold.quat_normalize(np.zeros(4))


def test_quat_log_of_axis_angle():
    # Log of a unit quaternion is the half-angle times the unit axis.
    axis = np.array([1.0, 2.0, 2.0]) / 3.0
    for angle in (0.3, 1.5, 2.9, 4.1):  # includes a rotation beyond pi
        q = manifold.quat_from_axis_angle(axis, angle)
        np.testing.assert_allclose(manifold.quat_log(q), 0.5 * angle * axis,
                                   atol=1e-12)


def test_quat_exp_log_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(200):
        w = rng.normal(size=3)
        n = np.linalg.norm(w)
        if n >= np.pi:
            w *= (rng.uniform(0.0, 0.99) * np.pi) / n
        q = manifold.quat_exp(w)
        assert abs(np.linalg.norm(q) - 1.0) < 1e-12
        np.testing.assert_allclose(manifold.quat_log(q), w, atol=1e-8)


def test_quat_exp_domain():
    with pytest.raises(DomainError):
        manifold.quat_exp(np.array([np.pi, 0.0, 0.0]))


def test_quat_align_flips_far_representative():
    q = np.array([1.0, 0.0, 0.0, 0.0])
    np.testing.assert_allclose(manifold.quat_align(-q, q), q)
    np.testing.assert_allclose(manifold.quat_align(q, q), q)


def test_quat_distance_separates_signs():
    # q and -q encode one rotation but sit a full turn apart on S^3.
    q = manifold.quat_from_axis_angle([0.0, 0.0, 1.0], 0.8)
    assert manifold.quat_distance(q, q) == 0.0
    assert abs(manifold.quat_distance(q, -q) - 2.0 * np.pi) < 1e-12
    ident = np.array([1.0, 0.0, 0.0, 0.0])
    assert abs(manifold.quat_distance(q, ident) - 0.8) < 1e-12


def test_quat_from_axis_angle_normalizes_axis():
    a = manifold.quat_from_axis_angle([0.0, 0.0, 10.0], 1.0)
    b = manifold.quat_from_axis_angle([0.0, 0.0, 1.0], 1.0)
    np.testing.assert_allclose(a, b, atol=1e-15)
    with pytest.raises(DomainError):
        manifold.quat_from_axis_angle([0.0, 0.0, 0.0], 1.0)


# ---------------------------------------------------------------------------
# rotation matrices
# ---------------------------------------------------------------------------

def test_rot_exp_quarter_turn():
    r = manifold.rot_exp(np.array([0.0, 0.0, np.pi / 2.0]))
    np.testing.assert_allclose(r, [[0.0, -1.0, 0.0],
                                   [1.0, 0.0, 0.0],
                                   [0.0, 0.0, 1.0]], atol=1e-12)


def test_rot_exp_log_roundtrip():
    rng = np.random.default_rng(13)
    for _ in range(200):
        w = rng.normal(size=3)
        n = np.linalg.norm(w)
        if n >= np.pi:
            w *= (rng.uniform(0.0, 0.99) * np.pi) / n
        r = manifold.rot_exp(w)
        np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(r) - 1.0) < 1e-12
        np.testing.assert_allclose(manifold.rot_log(r), w, atol=1e-8)


def test_rot_log_domain_at_half_turn():
    with pytest.raises(DomainError):
        manifold.rot_log(np.diag([1.0, -1.0, -1.0]))


def test_skew_matches_cross_product():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b = rng.normal(size=3), rng.normal(size=3)
        np.testing.assert_allclose(manifold.skew(a) @ b, np.cross(a, b),
                                   atol=1e-14)


def test_rot_distance_is_rotation_angle():
    r = manifold.rot_exp(np.array([0.4, -0.2, 0.1]))
    assert abs(manifold.rot_distance(r, np.eye(3))
               - np.linalg.norm([0.4, -0.2, 0.1])) < 1e-12


# ---------------------------------------------------------------------------
# SPD matrices
# ---------------------------------------------------------------------------

def _random_spd(rng, m, scale=1.0):
    a = rng.normal(size=(m, m))
    return scale * (a @ a.T + m * np.eye(m))


def test_check_spd_rejects_bad_input():
    with pytest.raises(NotSpd):
        manifold.check_spd(np.array([[1.0, 2.0], [0.0, 1.0]]))  # not symmetric
    with pytest.raises(NotSpd):
        manifold.check_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))  # eigenvalue -1


def test_spd_sqrt_and_logm_roundtrip():
    rng = np.random.default_rng(17)
    for _ in range(30):
        x = _random_spd(rng, 3)
        s = manifold.spd_sqrt(x)
        np.testing.assert_allclose(s @ s, x, atol=1e-9)
        np.testing.assert_allclose(manifold.spd_expm(manifold.spd_logm(x)), x,
                                   atol=1e-8)
        np.testing.assert_allclose(manifold.spd_invsqrt(x) @ s, np.eye(3),
                                   atol=1e-9)


def test_spd_exp_log_roundtrip():
    rng = np.random.default_rng(19)
    for _ in range(50):
        base = _random_spd(rng, 2)
        target = _random_spd(rng, 2)
        tangent = manifold.spd_log(base, target)
        np.testing.assert_allclose(manifold.spd_exp(base, tangent), target,
                                   atol=1e-8)


def test_spd_distance_affine_invariance():
    rng = np.random.default_rng(23)
    for _ in range(30):
        x, y = _random_spd(rng, 3), _random_spd(rng, 3)
        a = rng.normal(size=(3, 3)) + 3.0 * np.eye(3)
        d0 = manifold.spd_distance(x, y)
        d1 = manifold.spd_distance(a @ x @ a.T, a @ y @ a.T)
        assert abs(d0 - d1) < 1e-8 * max(1.0, d0)


def test_spd_geodesic_endpoints_and_midpoint():
    rng = np.random.default_rng(29)
    x, y = _random_spd(rng, 2), _random_spd(rng, 2)
    np.testing.assert_allclose(manifold.spd_geodesic(x, y, 0.0), x, atol=1e-10)
    np.testing.assert_allclose(manifold.spd_geodesic(x, y, 1.0), y, atol=1e-8)
    mid = manifold.spd_geodesic(x, y, 0.5)
    assert abs(manifold.spd_distance(x, mid)
               - manifold.spd_distance(mid, y)) < 1e-8


def test_spd_transport_preserves_inner_product():
    rng = np.random.default_rng(31)
    for _ in range(20):
        frm, to = _random_spd(rng, 2), _random_spd(rng, 2)
        u = manifold._sym(rng.normal(size=(2, 2)))
        v = manifold._sym(rng.normal(size=(2, 2)))
        ip0 = manifold.spd_inner(frm, u, v)
        ip1 = manifold.spd_inner(to, manifold.spd_transport(frm, to, u),
                                 manifold.spd_transport(frm, to, v))
        assert abs(ip0 - ip1) < 1e-8 * max(1.0, abs(ip0))


def test_mandel_roundtrip_and_isometry():
    rng = np.random.default_rng(37)
    for m in (1, 2, 3, 4):
        s = manifold._sym(rng.normal(size=(m, m)))
        v = manifold.mandel_vec(s)
        assert v.shape == (m * (m + 1) // 2,)
        np.testing.assert_allclose(manifold.mandel_mat(v), s, atol=1e-12)
        # the flattening preserves the Frobenius norm
        assert abs(np.linalg.norm(v) - np.linalg.norm(s)) < 1e-12


def test_mandel_mat_rejects_non_triangular_length():
    with pytest.raises(DimensionMismatch):
        manifold.mandel_mat(np.zeros(4))


def test_mandel_dim():
    assert manifold.mandel_dim(1) == 1
    assert manifold.mandel_dim(2) == 3
    assert manifold.mandel_dim(3) == 6
