"""White-noise-on-acceleration motion prior on SE(3).

The continuous-time trajectory is modeled by a body-frame constant-velocity
prior: the pose follows the body twist and the twist is driven by white
noise with power spectral density Qc. Between two knots the local state

    gamma(t) = [ xi(t); psi(t) ],   xi(t) = log(T_k^-1 T(t)),
    psi(t) = J_r(xi(t))^-1 * twist(t)

evolves as a linear double integrator, which gives the prior residual, its
transition covariance, and posterior-mean interpolation at any time inside
the knot interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import lie
from .lie import Pose3, Twist


class ExtrapolationError(ValueError):
    """Query time outside the supporting interval."""


@dataclass(frozen=True, eq=False)
class TrajectoryState:
    """Trajectory knot: pose of the body in the world plus body twist."""

    stamp: float
    pose: Pose3
    velocity: Twist


def _default_qc() -> np.ndarray:
    return 0.05 * np.eye(6)


@dataclass
class WnoaConfig:
    """Power spectral density of the white-noise generalized acceleration."""

    qc: np.ndarray = field(default_factory=_default_qc)

    def __post_init__(self):
        self.qc = np.asarray(self.qc, dtype=float)
        if self.qc.shape != (6, 6):
            raise ValueError("qc must be 6x6")
        if np.abs(self.qc - self.qc.T).max() > 1e-12:
            raise ValueError("qc must be symmetric")
        if np.linalg.eigvalsh(self.qc).min() <= 0.0:
            raise ValueError("qc must be positive definite")

    @staticmethod
    def isotropic(value: float) -> "WnoaConfig":
        return WnoaConfig(qc=value * np.eye(6))


def prior_residual(xk: TrajectoryState, xk1: TrajectoryState,
                   with_jacobians: bool = False):
    """Constant-velocity prior residual between adjacent knots.

    Rows: [dt * twist_k - log(T_k^-1 T_k1); twist_k - J_r(log)^-1 twist_k1].
    Zero exactly on any constant-twist pair. Jacobian blocks are ordered
    (pose_k, vel_k, pose_k1, vel_k1) on right-tangent perturbations.
    """
    dt = xk1.stamp - xk.stamp
    if dt <= 0.0:
        raise ValueError("knots must have strictly increasing stamps")
    xi = lie.se3_log(xk.pose.inverse() @ xk1.pose)
    w_k = xk.velocity.vector
    w_k1 = xk1.velocity.vector
    jr_inv = lie.se3_right_jacobian_inv(xi)
    r = np.concatenate([dt * w_k - xi, w_k - jr_inv @ w_k1])
    if not with_jacobians:
        return r
    jl_inv = lie.se3_left_jacobian_inv(xi)
    _, d_jrinv_w = lie.se3_jr_inv_product_jacobian(xi, w_k1)
    jac = {
        "pose_k": np.vstack([jl_inv, d_jrinv_w @ jl_inv]),
        "vel_k": np.vstack([dt * np.eye(6), np.eye(6)]),
        "pose_k1": np.vstack([-jr_inv, -d_jrinv_w @ jr_inv]),
        "vel_k1": np.vstack([np.zeros((6, 6)), -jr_inv]),
    }
    return r, jac


def prior_covariance(cfg: WnoaConfig, dt: float) -> np.ndarray:
    """Transition covariance of the double integrator over dt seconds."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    q = np.zeros((12, 12))
    q[:6, :6] = dt**3 / 3.0 * cfg.qc
    q[:6, 6:] = dt**2 / 2.0 * cfg.qc
    q[6:, :6] = dt**2 / 2.0 * cfg.qc
    q[6:, 6:] = dt * cfg.qc
    return q


def _blend_scalars(tau_rel: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """2x2 scalar blending matrices; Qc cancels because it is shared."""

    def b(d):
        return np.array([[d**3 / 3.0, d**2 / 2.0], [d**2 / 2.0, d]])

    def phi(d):
        return np.array([[1.0, d], [0.0, 1.0]])

    b_inv = np.array([[12.0 / dt**3, -6.0 / dt**2], [-6.0 / dt**2, 4.0 / dt]])
    psi = b(tau_rel) @ phi(dt - tau_rel).T @ b_inv
    lam = phi(tau_rel) - psi @ phi(dt)
    return lam, psi


@dataclass(frozen=True, eq=False)
class Interpolation:
    """Posterior-mean state at a query time plus tangent Jacobians.

    pose_jacobians / velocity_jacobians map right-tangent perturbations of
    (pose_k, vel_k, pose_k1, vel_k1) to perturbations of the interpolated
    pose (right tangent) and twist.
    """

    pose: Pose3
    velocity: Twist
    pose_jacobians: dict | None = None
    velocity_jacobians: dict | None = None


def interpolate(xk: TrajectoryState, xk1: TrajectoryState, tau: float,
                with_jacobians: bool = False) -> Interpolation:
    """Interpolate pose and twist at tau in [t_k, t_k1]."""
    dt = xk1.stamp - xk.stamp
    if dt <= 0.0:
        raise ValueError("knots must have strictly increasing stamps")
    if tau < xk.stamp - 1e-9 or tau > xk1.stamp + 1e-9:
        raise ExtrapolationError(
            f"query {tau} outside knot interval [{xk.stamp}, {xk1.stamp}]"
        )
    tau_rel = min(max(tau - xk.stamp, 0.0), dt)

    xi21 = lie.se3_log(xk.pose.inverse() @ xk1.pose)
    w_k = xk.velocity.vector
    w_k1 = xk1.velocity.vector
    jr_inv21 = lie.se3_right_jacobian_inv(xi21)
    psi2 = jr_inv21 @ w_k1

    lam, psi = _blend_scalars(tau_rel, dt)
    xi_t = lam[0, 1] * w_k + psi[0, 0] * xi21 + psi[0, 1] * psi2
    psi_t = lam[1, 1] * w_k + psi[1, 0] * xi21 + psi[1, 1] * psi2

    pose = xk.pose @ lie.se3_exp(xi_t)
    jr_t = lie.se3_right_jacobian(xi_t)
    velocity = Twist.from_vector(jr_t @ psi_t)
    if not with_jacobians:
        return Interpolation(pose, velocity)

    jl_inv21 = lie.se3_left_jacobian_inv(xi21)
    _, d_psi2 = lie.se3_jr_inv_product_jacobian(xi21, w_k1)
    # d xi21 / d perturbations of the two poses.
    dxi_pose_k = -jl_inv21
    dxi_pose_k1 = jr_inv21
    # Chain into the local state at tau.
    a = psi[0, 0] * np.eye(6) + psi[0, 1] * d_psi2
    b = psi[1, 0] * np.eye(6) + psi[1, 1] * d_psi2
    dxit = {
        "pose_k": a @ dxi_pose_k,
        "vel_k": lam[0, 1] * np.eye(6),
        "pose_k1": a @ dxi_pose_k1,
        "vel_k1": psi[0, 1] * jr_inv21,
    }
    dpsit = {
        "pose_k": b @ dxi_pose_k,
        "vel_k": lam[1, 1] * np.eye(6),
        "pose_k1": b @ dxi_pose_k1,
        "vel_k1": psi[1, 1] * jr_inv21,
    }
    # Output pose tangent: T(tau) = T_k exp(xi_t); perturbing T_k adds the
    # transported identity term on top of the xi_t sensitivity.
    pose_jac = {key: jr_t @ dxit[key] for key in dxit}
    pose_jac["pose_k"] = lie.se3_exp(-xi_t).adjoint() + pose_jac["pose_k"]
    _, d_jr_psit = lie.se3_jr_product_jacobian(xi_t, psi_t)
    vel_jac = {key: d_jr_psit @ dxit[key] + jr_t @ dpsit[key] for key in dxit}
    return Interpolation(pose, velocity, pose_jac, vel_jac)
