"""
Geometric primitives shared by every stage of the solver.

Image points are normalised into bearing vectors with the calibration
matrix, rotations are built with the Olinde-Rodrigues formula and the
essential matrix uses the skew-symmetric layout

    [T] = [[  0,  Tz, -Ty],
           [-Tz,   0,  Tx],
           [ Ty, -Tx,   0]]

so that ``m2ᵀ [T] R m1 = 0`` for corresponding rays. Angles are radians
internally; the error metrics return degrees for reporting.

Examples:
    >>> import numpy as np
    >>> from vertical_relpose.geometry import normalize_point, CameraIntrinsics, PixelPoint
    >>> normalize_point(CameraIntrinsics.from_fov(352, 288, 45.0), PixelPoint(176, 144))
    array([0., 0., 1.])
"""

from dataclasses import dataclass
from typing import Literal, Union
import math

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import InvalidCalibrationError, InvalidInputError

# 3-vectors and 3x3 matrices are plain float64 numpy arrays
BearingVector = np.ndarray
Rotation3 = np.ndarray
Translation3 = np.ndarray

ROTATION_TOL = 1e-12
UNIT_AXIS_TOL = 1e-10


@dataclass(frozen=True)
class PixelPoint:
    """A 2-coordinate image point in pixels."""

    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise InvalidInputError(f"Pixel coordinates must be finite, got ({self.u}, {self.v})")


@dataclass(frozen=True)
class CameraIntrinsics:
    """
    Upper-triangular 3x3 calibration matrix.

    Attributes:
        matrix: K with focal lengths and skew in the first two rows
    """

    matrix: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.matrix, dtype=float)
        if K.shape != (3, 3):
            raise InvalidCalibrationError(f"Calibration matrix must be 3x3, got shape {K.shape}")
        if not np.all(np.isfinite(K)):
            raise InvalidCalibrationError("Calibration matrix contains non-finite values")
        if np.any(np.abs(np.tril(K, -1)) > 0):
            raise InvalidCalibrationError("Calibration matrix must be upper triangular")
        if np.any(np.diag(K) <= 0):
            raise InvalidCalibrationError(
                f"Calibration diagonal must be strictly positive, got {np.diag(K).tolist()}"
            )
        object.__setattr__(self, "matrix", K)

    @classmethod
    def from_fov(cls, width: int, height: int, fov_deg: float) -> "CameraIntrinsics":
        """
        Pinhole intrinsics with square pixels and the principal point at the
        image centre; the horizontal field of view fixes the focal length
        ``f = (W/2) / tan(FOV/2)``.

        Examples:
            >>> K = CameraIntrinsics.from_fov(352, 288, 45.0)
            >>> round(K.focal, 1)
            424.9
        """
        if width <= 0 or height <= 0:
            raise InvalidInputError(f"Image size must be positive, got {width}x{height}")
        if not 0.0 < fov_deg < 180.0:
            raise InvalidInputError(f"Field of view must lie in (0, 180) degrees, got {fov_deg}")
        f = (width / 2.0) / math.tan(math.radians(fov_deg) / 2.0)
        return cls(np.array([[f, 0.0, width / 2.0], [0.0, f, height / 2.0], [0.0, 0.0, 1.0]]))

    @property
    def focal(self) -> float:
        """Horizontal focal length in pixels."""
        return float(self.matrix[0, 0])


@dataclass
class PoseHypothesis:
    """
    Relative pose ``X2 = R X1 + T`` (T up to positive scale).

    Attributes:
        rotation: 3x3 rotation matrix
        translation: unit baseline direction
        residual: max absolute epipolar residual over the minimal sample
        stage: "raw-candidate" (gravity-aligned frame) or "final-composed"
    """

    rotation: Rotation3
    translation: Translation3
    residual: float = 0.0
    stage: Literal["raw-candidate", "final-composed"] = "raw-candidate"

    def flipped(self) -> "PoseHypothesis":
        """Same hypothesis with the opposite baseline sign."""
        return PoseHypothesis(self.rotation, -self.translation, self.residual, self.stage)

    def to_dict(self) -> dict:
        return {
            "rotation": [float(x) for x in np.asarray(self.rotation).ravel()],
            "translation": [float(x) for x in self.translation],
            "residual": float(self.residual),
            "stage": self.stage,
        }


def as_matrix(K: Union[CameraIntrinsics, np.ndarray]) -> np.ndarray:
    if isinstance(K, CameraIntrinsics):
        return K.matrix
    return CameraIntrinsics(np.asarray(K, dtype=float)).matrix


def normalize_point(
    K: Union[CameraIntrinsics, np.ndarray],
    m: Union[PixelPoint, tuple],
) -> BearingVector:
    """
    Normalise a pixel into a bearing vector ``K⁻¹ (u, v, 1)ᵀ`` with z = 1.

    Args:
        K: Calibration matrix
        m: Pixel point (PixelPoint or (u, v) pair)

    Returns:
        3-vector with third component equal to 1

    Raises:
        InvalidCalibrationError: If K is singular or not a calibration matrix

    Examples:
        >>> normalize_point(np.diag([2.0, 2.0, 1.0]), (4, 6))
        array([2., 3., 1.])
    """
    Km = as_matrix(K)
    u, v = (m.u, m.v) if isinstance(m, PixelPoint) else (float(m[0]), float(m[1]))
    ray = solve_triangular(Km, np.array([u, v, 1.0]), lower=False)
    return ray / ray[2]


def project(K: Union[CameraIntrinsics, np.ndarray], ray: np.ndarray) -> PixelPoint:
    """Project a camera-frame ray with positive depth onto the image."""
    ray = np.asarray(ray, dtype=float)
    if ray[2] <= 0:
        raise InvalidInputError(f"Ray must have positive depth to project, got z={ray[2]}")
    p = as_matrix(K) @ (ray / ray[2])
    return PixelPoint(float(p[0] / p[2]), float(p[1] / p[2]))


def skew(T: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix in the coplanarity layout (``skew(T) v = v × T``)."""
    Tx, Ty, Tz = (float(x) for x in T)
    return np.array([[0.0, Tz, -Ty], [-Tz, 0.0, Tx], [Ty, -Tx, 0.0]])


def unit(v: np.ndarray, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise InvalidInputError(f"{name} must be a finite nonzero vector, got {v.tolist()}")
    return v / n


def rodrigues(axis: np.ndarray, angle: float) -> Rotation3:
    """
    Rotation about a unit axis by ``angle`` radians.

    ``R = I cosθ + sinθ [ω]ₓ + (1 − cosθ) ω ωᵀ`` with the usual
    right-handed cross-product matrix ``[ω]ₓ v = ω × v``.

    Raises:
        InvalidInputError: If the axis is not unit length within 1e-10

    Examples:
        >>> R = rodrigues(np.array([0.0, 0.0, 1.0]), np.pi / 2)
        >>> np.round(R @ np.array([1.0, 0.0, 0.0]), 12)
        array([0., 1., 0.])
    """
    w = np.asarray(axis, dtype=float)
    if w.shape != (3,) or abs(np.linalg.norm(w) - 1.0) > UNIT_AXIS_TOL:
        raise InvalidInputError(f"Rotation axis must be a unit 3-vector, got {w.tolist()}")
    c, s = math.cos(angle), math.sin(angle)
    wx = np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
    return np.eye(3) * c + s * wx + (1.0 - c) * np.outer(w, w)


def is_rotation(R: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return bool(
        np.allclose(R.T @ R, np.eye(3), rtol=0.0, atol=tol)
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def check_rotation(R: np.ndarray, name: str = "rotation", tol: float = 1e-9) -> Rotation3:
    R = np.asarray(R, dtype=float)
    if not is_rotation(R, tol):
        raise InvalidInputError(f"{name} is not a proper rotation matrix")
    return R


def essential_from_pose(R: Rotation3, T: Translation3) -> np.ndarray:
    """
    Essential matrix ``E = [T] R`` in the coplanarity skew layout.

    Examples:
        >>> essential_from_pose(np.eye(3), np.array([0.0, 0.0, 1.0]))
        array([[ 0.,  1.,  0.],
               [-1.,  0.,  0.],
               [ 0.,  0.,  0.]])
    """
    R = check_rotation(R)
    T = np.asarray(T, dtype=float)
    if np.linalg.norm(T) == 0.0:
        raise InvalidInputError("Translation must be nonzero")
    return skew(T) @ R


def rotation_angle(R: Rotation3) -> float:
    """Rotation angle in radians, in [0, π]."""
    R = np.asarray(R, dtype=float)
    cos_part = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    sin_part = 0.5 * np.linalg.norm([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return float(math.atan2(sin_part, cos_part))


def rotation_angle_error(R_true: Rotation3, R_est: Rotation3) -> float:
    """
    Angle of ``R_trueᵀ R_est`` in degrees, in [0, 180].

    Evaluated as ``atan2(sin, cos)`` of the relative rotation, which equals
    ``arccos(clamp((trace − 1)/2))`` but keeps full precision near zero.
    """
    R_rel = np.asarray(R_true, dtype=float).T @ np.asarray(R_est, dtype=float)
    return math.degrees(rotation_angle(R_rel))


def translation_angle_error(T_true: Translation3, T_est: Translation3) -> float:
    """
    Angle between two baseline directions in degrees, folded to [0, 90].

    The baseline is only defined up to sign by the coplanarity constraint,
    so ``θ`` and ``180° − θ`` are the same error.

    Raises:
        InvalidInputError: If either vector is zero
    """
    a = unit(T_true, "T_true")
    b = unit(T_est, "T_est")
    theta = math.degrees(math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b)))
    return min(theta, 180.0 - theta)
