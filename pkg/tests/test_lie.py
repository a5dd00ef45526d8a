import numpy as np
import pytest

from ctfusion import lie

from oracles import (
    numeric_jacobian,
    random_rotation,
    rel_err,
    se3_exp_matrix,
    se3_log_matrix,
    so3_exp_matrix,
)


def test_so3_exp_identity():
    r = lie.so3_exp(np.zeros(3))
    assert np.allclose(r.matrix, np.eye(3))


def test_so3_exp_quarter_turn_z():
    r = lie.so3_exp(np.array([0.0, 0.0, np.pi / 2]))
    assert np.allclose(r.apply(np.array([1.0, 0.0, 0.0])), [0.0, 1.0, 0.0], atol=1e-12)


def test_so3_round_trip_random():
    rng = np.random.default_rng(0)
    for _ in range(500):
        phi = rng.normal(size=3)
        phi *= rng.uniform(0.0, np.pi * 0.99) / np.linalg.norm(phi)
        back = lie.so3_log(lie.so3_exp(phi))
        assert np.abs(back - phi).max() < 1e-10


def test_so3_log_trivial_cases():
    assert np.allclose(lie.so3_log(lie.Rot3.identity()), np.zeros(3))
    r = lie.so3_exp(np.array([0.0, 0.0, 0.3]))
    assert np.allclose(lie.so3_log(r), [0.0, 0.0, 0.3], atol=1e-12)


def test_so3_log_angle_pi():
    r = lie.Rot3(so3_exp_matrix(np.array([np.pi, 0.0, 0.0])))
    out = lie.so3_log(r)
    assert np.allclose(out, [np.pi, 0.0, 0.0], atol=1e-9)
    # Sign convention: first nonzero component positive.
    r2 = lie.Rot3(so3_exp_matrix(np.array([0.0, -np.pi, 0.0])))
    out2 = lie.so3_log(r2)
    assert out2[1] > 0.0
    assert np.abs(so3_exp_matrix(out2) - r2.matrix).max() < 1e-9


def test_so3_log_near_pi_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(200):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = np.pi - 10.0 ** rng.uniform(-12, -2)
        r = lie.Rot3(so3_exp_matrix(axis * angle))
        out = lie.so3_log(r)
        assert np.abs(so3_exp_matrix(out) - r.matrix).max() < 1e-8
        assert np.linalg.norm(out) <= np.pi + 1e-12


def test_exp_log_matrix_oracle():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = random_rotation(rng)
        r = lie.Rot3(m)
        assert np.abs(so3_exp_matrix(lie.so3_log(r)) - m).max() < 1e-9


def test_right_jacobian_identities():
    rng = np.random.default_rng(3)
    assert np.allclose(lie.so3_right_jacobian(np.zeros(3)), np.eye(3))
    for _ in range(200):
        phi = rng.normal(size=3) * rng.uniform(0, 1.0)
        jr = lie.so3_right_jacobian(phi)
        jr_inv = lie.so3_right_jacobian_inv(phi)
        assert np.abs(jr @ jr_inv - np.eye(3)).max() < 1e-9
    # Small-angle series: J_r ~ I - 0.5 hat(phi).
    phi = np.array([1e-4, -2e-4, 5e-5])
    assert np.abs(lie.so3_right_jacobian(phi) - (np.eye(3) - 0.5 * lie.hat(phi))).max() < 1e-7


def test_right_jacobian_finite_difference():
    # exp(phi + d) ~ exp(phi) exp(J_r(phi) d)
    rng = np.random.default_rng(4)
    for _ in range(100):
        phi = rng.normal(size=3) * rng.uniform(0, 2.0)
        jr_fd = numeric_jacobian(
            lambda p: lie.so3_log(
                lie.Rot3(so3_exp_matrix(phi).T) @ lie.so3_exp(p)
            ),
            phi,
        )
        assert rel_err(lie.so3_right_jacobian(phi), jr_fd) < 1e-5


def test_se3_exp_trivial():
    assert np.allclose(lie.se3_exp(np.zeros(6)).matrix(), np.eye(4))
    t = lie.se3_exp(np.array([1.0, 2.0, 3.0, 0.0, 0.0, 0.0]))
    assert np.allclose(t.translation, [1.0, 2.0, 3.0])
    assert np.allclose(t.rotation.matrix, np.eye(3))


def test_se3_round_trip_random():
    rng = np.random.default_rng(5)
    for _ in range(500):
        xi = rng.normal(size=6)
        xi[3:] *= rng.uniform(0.0, np.pi * 0.99) / np.linalg.norm(xi[3:])
        back = lie.se3_log(lie.se3_exp(xi))
        assert np.abs(back - xi).max() < 1e-10


def test_se3_exp_matches_matrix_exponential():
    rng = np.random.default_rng(6)
    for _ in range(100):
        xi = rng.normal(size=6)
        assert np.abs(lie.se3_exp(xi).matrix() - se3_exp_matrix(xi)).max() < 1e-10
        t = lie.se3_exp(xi)
        assert np.abs(lie.se3_log(t) - se3_log_matrix(t.matrix())).max() < 1e-9


def test_se3_right_jacobian_block_formula_vs_finite_difference():
    rng = np.random.default_rng(7)
    for _ in range(100):
        xi = rng.normal(size=6)
        jr_fd = numeric_jacobian(
            lambda d: lie.se3_log(lie.se3_exp(xi).inverse() @ lie.se3_exp(xi + d)),
            np.zeros(6),
        )
        assert rel_err(lie.se3_right_jacobian(xi), jr_fd) < 1e-5


def test_se3_right_jacobian_inverse_consistency():
    rng = np.random.default_rng(8)
    for _ in range(200):
        xi = rng.normal(size=6)
        jr = lie.se3_right_jacobian(xi)
        jr_inv = lie.se3_right_jacobian_inv(xi)
        assert np.abs(jr @ jr_inv - np.eye(6)).max() < 1e-9


def _capped_tangent(rng, max_angle=2.5):
    xi = rng.normal(size=6)
    ang = np.linalg.norm(xi[3:])
    if ang > max_angle:
        xi[3:] *= max_angle / ang
    return xi


def test_series_product_matches_closed_form():
    rng = np.random.default_rng(9)
    for _ in range(200):
        xi = _capped_tangent(rng)
        w = rng.normal(size=6)
        val, _ = lie.se3_jr_product_jacobian(xi, w)
        assert np.abs(val - lie.se3_right_jacobian(xi) @ w).max() < 1e-12
        val_inv, _ = lie.se3_jr_inv_product_jacobian(xi, w)
        assert np.abs(val_inv - lie.se3_right_jacobian_inv(xi) @ w).max() < 1e-12


def test_series_product_jacobians_vs_finite_difference():
    rng = np.random.default_rng(10)
    for _ in range(100):
        xi = _capped_tangent(rng)
        w = rng.normal(size=6)
        _, deriv = lie.se3_jr_product_jacobian(xi, w)
        fd = numeric_jacobian(lambda x: lie.se3_right_jacobian(x) @ w, xi)
        assert rel_err(deriv, fd) < 1e-5
        _, deriv_inv = lie.se3_jr_inv_product_jacobian(xi, w)
        fd_inv = numeric_jacobian(lambda x: lie.se3_right_jacobian_inv(x) @ w, xi)
        assert rel_err(deriv_inv, fd_inv) < 1e-5


def test_composition_closure():
    rng = np.random.default_rng(11)
    r = lie.Rot3.identity()
    for _ in range(200):
        r = r @ lie.Rot3(random_rotation(rng))
    assert r.is_valid(1e-9)


def test_pose_composition_associative():
    rng = np.random.default_rng(12)
    a = lie.se3_exp(rng.normal(size=6))
    b = lie.se3_exp(rng.normal(size=6))
    c = lie.se3_exp(rng.normal(size=6))
    m1 = ((a @ b) @ c).matrix()
    m2 = (a @ (b @ c)).matrix()
    assert np.abs(m1 - m2).max() < 1e-9


def test_adjoint_conjugation():
    rng = np.random.default_rng(13)
    for _ in range(50):
        t = lie.se3_exp(rng.normal(size=6))
        xi = rng.normal(size=6) * 1e-4
        lhs = (t @ lie.se3_exp(xi) @ t.inverse()).matrix()
        rhs = lie.se3_exp(t.adjoint() @ xi).matrix()
        assert np.abs(lhs - rhs).max() < 1e-10


def test_twist_vector_round_trip():
    tw = lie.Twist(np.array([1.0, 2.0, 3.0]), np.array([0.1, 0.2, 0.3]))
    assert np.allclose(lie.Twist.from_vector(tw.vector).vector, tw.vector)
