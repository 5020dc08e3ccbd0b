"""
Gravity alignment of camera rays.

A camera's vertical direction is either measured by an IMU (pitch ``alpha``
about X, roll ``gamma`` about Z) or given by the vertical vanishing point.
Both yield a rotation ``R_ver`` mapping the camera vertical onto the world
Y axis; applying it to every ray of a view leaves a single unknown yaw
between two views.
"""

from dataclasses import dataclass
from typing import Union
import math

import numpy as np

from .exceptions import InvalidInputError
from .geometry import BearingVector, Rotation3, rodrigues

Y_WORLD = np.array([0.0, 1.0, 0.0])

# Verticals this close to unit norm are renormalised silently
RENORMALIZE_TOL = 1e-6
PARALLEL_TOL = 1e-12


@dataclass(frozen=True)
class ImuAttitude:
    """
    IMU tilt angles in radians.

    Attributes:
        alpha: rotation about the camera X axis (pitch)
        gamma: rotation about the camera Z axis (roll)
    """

    alpha: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.gamma)):
            raise InvalidInputError(f"IMU angles must be finite, got ({self.alpha}, {self.gamma})")

    @classmethod
    def from_degrees(cls, alpha_deg: float, gamma_deg: float) -> "ImuAttitude":
        return cls(math.radians(alpha_deg), math.radians(gamma_deg))


@dataclass(frozen=True)
class VerticalDirection:
    """
    Camera-frame unit vector toward the vertical vanishing point.

    Vectors within 1e-6 of unit norm are renormalised; anything further off
    is rejected.
    """

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise InvalidInputError(f"Vertical direction must be a finite 3-vector, got {v!r}")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > RENORMALIZE_TOL:
            raise InvalidInputError(f"Vertical direction must be unit length, got norm {norm:.9g}")
        object.__setattr__(self, "vector", v / norm)

    @property
    def x(self) -> float:
        return float(self.vector[0])

    @property
    def y(self) -> float:
        return float(self.vector[1])

    @property
    def z(self) -> float:
        return float(self.vector[2])


def rot_x(angle: float) -> Rotation3:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_z(angle: float) -> Rotation3:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def r_ver_from_imu(att: ImuAttitude) -> Rotation3:
    """
    Vertical rotation from IMU angles: ``Rz(gamma) @ Rx(alpha)``.

    Examples:
        >>> r_ver_from_imu(ImuAttitude(0.0, 0.0))
        array([[1., 0., 0.],
               [0., 1., 0.],
               [0., 0., 1.]])
    """
    return rot_z(att.gamma) @ rot_x(att.alpha)


def r_ver_from_vanishing(V: Union[VerticalDirection, np.ndarray]) -> Rotation3:
    """
    Rotation taking the vertical vanishing direction onto the world Y axis.

    The axis is ``V × Y_w`` normalised, i.e. ``(−Vz, 0, Vx)/d`` with
    ``d = √(Vx² + Vz²)``, and the angle is ``arccos(Vy)``, so that
    ``R @ V = (0, 1, 0)``. When V is (anti)parallel to Y the axis is
    undefined: +Y gives the identity and −Y a half turn about X.

    Args:
        V: Unit vertical direction in the camera frame

    Returns:
        Rotation matrix R_ver
    """
    if not isinstance(V, VerticalDirection):
        V = VerticalDirection(np.asarray(V, dtype=float))
    d = math.hypot(V.x, V.z)
    if d < PARALLEL_TOL:
        return np.eye(3) if V.y > 0 else rot_x(math.pi)
    axis = np.array([-V.z / d, 0.0, V.x / d])
    return rodrigues(axis, math.atan2(d, V.y))


def apply_vertical(R_ver: Rotation3, m: BearingVector) -> BearingVector:
    """
    Rotate a ray into the gravity-aligned frame.

    The result is the full 3-vector ``R_ver @ m``; it is deliberately not
    rescaled to z = 1 since the coplanarity polynomial uses all three
    components.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3,) or not np.any(m):
        raise InvalidInputError(f"Ray must be a nonzero 3-vector, got {m!r}")
    return np.asarray(R_ver, dtype=float) @ m


def vertical_from_rotation(R_ver: Rotation3) -> np.ndarray:
    """Camera-frame vertical implied by a vertical rotation (``R_verᵀ Y_w``)."""
    return np.asarray(R_ver, dtype=float).T @ Y_WORLD


def vertical_rotation(source: Union[ImuAttitude, VerticalDirection, np.ndarray]) -> Rotation3:
    """Dispatch to the IMU or vanishing-point construction."""
    if isinstance(source, ImuAttitude):
        return r_ver_from_imu(source)
    return r_ver_from_vanishing(source)
