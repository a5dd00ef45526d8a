"""SO(3) / SE(3) primitives shared by every estimator module.

Conventions:
    Rotations are 3x3 orthonormal matrices. se(3) tangents and twists are
    ordered [linear, angular]. Pose perturbations act on the right,
    T <- T * exp(delta), so all tangent-space Jacobians in this package are
    right Jacobians unless named otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli as scipy_bernoulli

# Below this rotation angle the closed forms switch to Taylor expansions to
# avoid cancellation in sin/cos ratios.
SMALL_ANGLE = 1e-6


def hat(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


@dataclass(frozen=True, eq=False)
class Rot3:
    """Rotation as a 3x3 matrix."""

    matrix: np.ndarray

    @staticmethod
    def identity() -> "Rot3":
        return Rot3(np.eye(3))

    def inverse(self) -> "Rot3":
        return Rot3(self.matrix.T.copy())

    def __matmul__(self, other: "Rot3") -> "Rot3":
        return Rot3(self.matrix @ other.matrix)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def is_valid(self, tol: float = 1e-9) -> bool:
        m = self.matrix
        return (
            np.abs(m.T @ m - np.eye(3)).max() < tol
            and abs(np.linalg.det(m) - 1.0) < tol
        )


@dataclass(frozen=True, eq=False)
class Pose3:
    """Rigid transform; maps points from its own frame into the parent frame."""

    rotation: Rot3
    translation: np.ndarray

    @staticmethod
    def identity() -> "Pose3":
        return Pose3(Rot3.identity(), np.zeros(3))

    def inverse(self) -> "Pose3":
        rt = self.rotation.matrix.T
        return Pose3(Rot3(rt.copy()), -(rt @ self.translation))

    def __matmul__(self, other: "Pose3") -> "Pose3":
        return Pose3(
            self.rotation @ other.rotation,
            self.rotation.apply(other.translation) + self.translation,
        )

    def apply(self, point: np.ndarray) -> np.ndarray:
        return self.rotation.apply(point) + self.translation

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation.matrix
        m[:3, 3] = self.translation
        return m

    def adjoint(self) -> np.ndarray:
        """6x6 adjoint: exp(Ad(T) xi) = T exp(xi) T^-1, twists as [v, w]."""
        r = self.rotation.matrix
        ad = np.zeros((6, 6))
        ad[:3, :3] = r
        ad[:3, 3:] = hat(self.translation) @ r
        ad[3:, 3:] = r
        return ad


@dataclass(frozen=True, eq=False)
class Twist:
    """Body-frame generalized velocity, [linear m/s, angular rad/s]."""

    linear: np.ndarray
    angular: np.ndarray

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))

    @staticmethod
    def from_vector(v: np.ndarray) -> "Twist":
        v = np.asarray(v, dtype=float)
        return Twist(v[:3].copy(), v[3:].copy())

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])


# ---------------------------------------------------------------------------
# SO(3)
# ---------------------------------------------------------------------------

def so3_exp(phi: np.ndarray) -> Rot3:
    """Rodrigues formula with a Taylor fallback for tiny angles."""
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    k = hat(phi)
    if theta < SMALL_ANGLE:
        a = 1.0 - theta**2 / 6.0
        b = 0.5 - theta**2 / 24.0
    else:
        a = math.sin(theta) / theta
        b = (1.0 - math.cos(theta)) / theta**2
    return Rot3(np.eye(3) + a * k + b * (k @ k))


def so3_log(r: Rot3 | np.ndarray) -> np.ndarray:
    """Principal rotation vector, norm <= pi.

    The angle comes from atan2 of the skew norm and the trace, which stays
    well conditioned at both ends. Near angle pi the skew part vanishes, so
    the axis is extracted from the symmetric part; the sign is fixed so the
    first nonzero axis component is positive when the skew part cannot
    decide it.
    """
    m = r.matrix if isinstance(r, Rot3) else np.asarray(r, dtype=float)
    cos_theta = min(1.0, max(-1.0, 0.5 * (float(np.trace(m)) - 1.0)))
    skew = 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
    sin_theta = float(np.linalg.norm(skew))
    theta = math.atan2(sin_theta, cos_theta)
    if cos_theta >= 0.0:
        if sin_theta < 1e-9:
            return skew.copy()
        return skew * (theta / sin_theta)
    if sin_theta >= 1e-6:
        return skew * (theta / sin_theta)
    # Angle within ~1e-6 of pi: rebuild the axis from the symmetric part,
    # n_i n_j = B_ij / (1 - cos), anchored at the largest diagonal entry.
    d = 1.0 - cos_theta
    b = (m + m.T) / 2.0
    nn = np.maximum((np.diag(b) - cos_theta) / d, 0.0)
    i = int(np.argmax(nn))
    axis = np.empty(3)
    axis[i] = math.sqrt(nn[i])
    for j in range(3):
        if j != i:
            axis[j] = b[i, j] / (d * axis[i])
    axis /= np.linalg.norm(axis)
    if sin_theta > 1e-9:
        if float(np.dot(skew, axis)) < 0.0:
            axis = -axis
    else:
        for c in axis:
            if abs(c) > 1e-6:
                if c < 0.0:
                    axis = -axis
                break
    return theta * axis


def so3_left_jacobian(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    k = hat(phi)
    if theta < SMALL_ANGLE:
        a = 0.5 - theta**2 / 24.0
        b = 1.0 / 6.0 - theta**2 / 120.0
    else:
        a = (1.0 - math.cos(theta)) / theta**2
        b = (theta - math.sin(theta)) / theta**3
    return np.eye(3) + a * k + b * (k @ k)


def so3_right_jacobian(phi: np.ndarray) -> np.ndarray:
    return so3_left_jacobian(-np.asarray(phi, dtype=float))


def _jleft_inv_coeff(theta: float) -> float:
    # Coefficient of k^2 in J_l^-1; cot form stays finite through theta = pi.
    if theta < SMALL_ANGLE:
        return 1.0 / 12.0 + theta**2 / 720.0
    return 1.0 / theta**2 - 1.0 / (2.0 * theta * math.tan(0.5 * theta))


def so3_left_jacobian_inv(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    k = hat(phi)
    return np.eye(3) - 0.5 * k + _jleft_inv_coeff(theta) * (k @ k)


def so3_right_jacobian_inv(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    theta = np.linalg.norm(phi)
    k = hat(phi)
    return np.eye(3) + 0.5 * k + _jleft_inv_coeff(theta) * (k @ k)


# ---------------------------------------------------------------------------
# SE(3)
# ---------------------------------------------------------------------------

def se3_exp(xi: np.ndarray) -> Pose3:
    """Exponential of a [linear, angular] tangent vector."""
    xi = np.asarray(xi, dtype=float)
    rho, phi = xi[:3], xi[3:]
    return Pose3(so3_exp(phi), so3_left_jacobian(phi) @ rho)


def se3_log(t: Pose3) -> np.ndarray:
    phi = so3_log(t.rotation)
    rho = so3_left_jacobian_inv(phi) @ t.translation
    return np.concatenate([rho, phi])


def se3_ad(xi: np.ndarray) -> np.ndarray:
    """Algebra adjoint: se3_ad(a) @ b = bracket [a, b]."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros((6, 6))
    wk = hat(xi[3:])
    out[:3, :3] = wk
    out[:3, 3:] = hat(xi[:3])
    out[3:, 3:] = wk
    return out


def _se3_q_block(rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Translation-rotation coupling block of the SE(3) left Jacobian."""
    rk = hat(rho)
    pk = hat(phi)
    theta = np.linalg.norm(phi)
    if theta < SMALL_ANGLE:
        a = 1.0 / 6.0 - theta**2 / 120.0
        b = 1.0 / 24.0 - theta**2 / 720.0
        c = 1.0 / 15.0  # b - 3*(theta - sin - theta^3/6)/theta^5 as theta -> 0
    else:
        a = (theta - math.sin(theta)) / theta**3
        b = (1.0 - 0.5 * theta**2 - math.cos(theta)) / theta**4
        c = b - 3.0 * (theta - math.sin(theta) - theta**3 / 6.0) / theta**5
    pk2 = pk @ pk
    prp = pk @ rk @ pk
    return (
        0.5 * rk
        + a * (pk @ rk + rk @ pk + prp)
        - b * (pk2 @ rk + rk @ pk2 - 3.0 * prp)
        - 0.5 * c * (prp @ pk + pk @ prp)
    )


def se3_left_jacobian(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    rho, phi = xi[:3], xi[3:]
    j = so3_left_jacobian(phi)
    out = np.zeros((6, 6))
    out[:3, :3] = j
    out[:3, 3:] = _se3_q_block(rho, phi)
    out[3:, 3:] = j
    return out


def se3_left_jacobian_inv(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    rho, phi = xi[:3], xi[3:]
    jinv = so3_left_jacobian_inv(phi)
    q = _se3_q_block(rho, phi)
    out = np.zeros((6, 6))
    out[:3, :3] = jinv
    out[:3, 3:] = -jinv @ q @ jinv
    out[3:, 3:] = jinv
    return out


def se3_right_jacobian(xi: np.ndarray) -> np.ndarray:
    return se3_left_jacobian(-np.asarray(xi, dtype=float))


def se3_right_jacobian_inv(xi: np.ndarray) -> np.ndarray:
    return se3_left_jacobian_inv(-np.asarray(xi, dtype=float))


# ---------------------------------------------------------------------------
# Series evaluation of J(xi) w and its derivative in xi.
#
# J_r, J_r^-1 (and the left versions) are analytic series in ad(xi); the
# series converges for |angle| < 2*pi, far beyond the inter-knot motions these
# are used on. Differentiating term by term gives the exact derivative of
# J(xi) @ w with respect to xi, which the closed forms do not provide.
# ---------------------------------------------------------------------------

# (-1)^n * B_n / n! for J_r^-1 = sum c_n ad(xi)^n; odd Bernoulli numbers
# beyond B_1 vanish. 56 terms cover angles up to ~pi at machine precision.
_N_SERIES = 56
_JR_INV_COEFFS = (-1.0) ** np.arange(_N_SERIES) * scipy_bernoulli(_N_SERIES - 1) / np.array(
    [math.factorial(n) for n in range(_N_SERIES)]
)

# (-1)^n / (n+1)! for J_r = sum d_n ad(xi)^n.
_JR_COEFFS = np.array([(-1.0) ** n / math.factorial(n + 1) for n in range(_N_SERIES)])


def _ad_series_product_jacobian(coeffs: np.ndarray, xi: np.ndarray,
                                w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate M(xi) @ w and d/dxi [M(xi) @ w] for M = sum coeffs[n] ad(xi)^n."""
    u = se3_ad(xi)
    value = coeffs[0] * w
    deriv = np.zeros((6, 6))
    v_n = w.copy()          # ad(xi)^n w
    m_n = np.zeros((6, 6))  # d/dxi [ad(xi)^n w]
    for n in range(1, len(coeffs)):
        m_n = u @ m_n - se3_ad(v_n)
        v_n = u @ v_n
        c = coeffs[n]
        if c != 0.0:
            value = value + c * v_n
            deriv = deriv + c * m_n
        if n >= 6 and np.abs(v_n).max() < 1e-17 and np.abs(m_n).max() < 1e-17:
            break
    return value, deriv


def se3_jr_product_jacobian(xi: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (J_r(xi) @ w, d/dxi of it)."""
    return _ad_series_product_jacobian(_JR_COEFFS, np.asarray(xi, float), np.asarray(w, float))


def se3_jr_inv_product_jacobian(xi: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (J_r(xi)^-1 @ w, d/dxi of it)."""
    return _ad_series_product_jacobian(_JR_INV_COEFFS, np.asarray(xi, float), np.asarray(w, float))
