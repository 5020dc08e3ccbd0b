"""
From algebraic solutions to relative poses.

A solution ``(Tx, Ty, Tz, t)`` of the coplanarity system describes the pose
between the two gravity-aligned frames: the yaw ``R_φ(t)`` and the baseline
``T``. ``compose_final`` undoes the vertical alignment of both views and
``cheirality_select`` picks the hypothesis that puts the observed points in
front of both cameras.
"""

from typing import Iterable, List, Optional, Sequence
import logging
import math

import numpy as np

from .coplanarity import Correspondence, Solution
from .exceptions import InvalidInputError
from .geometry import (
    PoseHypothesis,
    Rotation3,
    Translation3,
    check_rotation,
    essential_from_pose,
    unit,
)

logger = logging.getLogger(__name__)


def r_phi(t: float) -> Rotation3:
    """
    Yaw about the vertical axis parametrised by ``t = tan(φ/2)``.

    ``cos φ = (1 − t²)/(1 + t²)``, ``sin φ = 2t/(1 + t²)`` in the layout
    ``[[c, 0, −s], [0, 1, 0], [s, 0, c]]``.

    Examples:
        >>> r_phi(0.0)
        array([[ 1.,  0., -0.],
               [ 0.,  1.,  0.],
               [ 0.,  0.,  1.]])
    """
    if not math.isfinite(t):
        raise InvalidInputError(f"t must be finite, got {t}")
    d = 1.0 + t * t
    c, s = (1.0 - t * t) / d, 2.0 * t / d
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def yaw_to_t(phi: float) -> float:
    """Inverse parametrisation: ``t = tan(φ/2)``."""
    return math.tan(phi / 2.0)


def yaw_from_rotation(R: Rotation3) -> float:
    """Signed yaw φ of a rotation about Y in the ``r_phi`` layout."""
    return math.atan2(R[2, 0], R[0, 0])


def compose_final(
    R_ver1: Rotation3,
    R_ver2: Rotation3,
    R_phi: Rotation3,
    T: Translation3,
) -> PoseHypothesis:
    """
    Relative pose between the original camera frames.

    ``R_final = R_ver2ᵀ R_φ R_ver1`` and ``T_final = R_ver2ᵀ T``.
    """
    R_ver2 = np.asarray(R_ver2, dtype=float)
    R = R_ver2.T @ np.asarray(R_phi, dtype=float) @ np.asarray(R_ver1, dtype=float)
    return PoseHypothesis(R, R_ver2.T @ np.asarray(T, dtype=float), stage="final-composed")


def hypotheses_from_solutions(
    solutions: Iterable[Solution],
    R_ver1: Rotation3,
    R_ver2: Rotation3,
    aligned: Sequence[Correspondence] = (),
) -> List[PoseHypothesis]:
    """Compose every algebraic solution into a final pose hypothesis."""
    out = []
    for Tx, Ty, Tz, t in solutions:
        R_aligned = r_phi(t)
        T_aligned = np.array([Tx, Ty, Tz])
        residual = 0.0
        if aligned:
            raw = PoseHypothesis(R_aligned, T_aligned)
            residual = max(abs(algebraic_residual(raw, c)) for c in aligned)
        pose = compose_final(R_ver1, R_ver2, R_aligned, T_aligned)
        pose.residual = residual
        out.append(pose)
    return out


def algebraic_residual(pose: PoseHypothesis, c: Correspondence) -> float:
    """``m2ᵀ E m1`` for the pose's essential matrix."""
    return float(c.m2 @ essential_from_pose(pose.rotation, pose.translation) @ c.m1)


def _plane_angle(ray: np.ndarray, normal: np.ndarray) -> float:
    nn = np.linalg.norm(normal)
    if nn == 0.0:
        return 0.0
    s = abs(float(ray @ normal)) / (np.linalg.norm(ray) * nn)
    return math.asin(min(s, 1.0))


def epipolar_residual(
    pose: PoseHypothesis,
    c: Correspondence,
    symmetric: bool = True,
) -> float:
    """
    Angular distance (radians) of a ray from its epipolar plane.

    The one-sided value is the angle between ``m2`` and the plane with normal
    ``E m1``; the symmetric variant averages it with the angle between ``m1``
    and the plane with normal ``Eᵀ m2``.
    """
    E = essential_from_pose(pose.rotation, pose.translation)
    forward = _plane_angle(c.m2, E @ c.m1)
    if not symmetric:
        return forward
    return 0.5 * (forward + _plane_angle(c.m1, E.T @ c.m2))


def triangulate_midpoint(pose: PoseHypothesis, c: Correspondence) -> np.ndarray:
    """
    Midpoint triangulation returning ray parameters ``(λ1, λ2)``.

    Camera 1 sits at the origin, camera 2 at ``−Rᵀ T``; the point is
    ``λ1 m1`` in camera 1 and ``λ2 m2`` in camera 2. Positive parameters
    mean the point is in front of the camera.
    """
    R = np.asarray(pose.rotation, dtype=float)
    d1 = c.m1
    d2 = R.T @ c.m2
    center2 = -R.T @ pose.translation
    A = np.column_stack([d1, -d2])
    lam, *_ = np.linalg.lstsq(A, center2, rcond=None)
    return lam


def cheirality_score(pose: PoseHypothesis, samples: Sequence[Correspondence]) -> int:
    """Number of samples triangulated in front of both cameras."""
    return sum(int(np.all(triangulate_midpoint(pose, c) > 0)) for c in samples)


def cheiral_candidates(
    candidates: Sequence[PoseHypothesis],
    samples: Sequence[Correspondence],
) -> List[PoseHypothesis]:
    """
    Candidates (either baseline sign) putting every sample in front of both
    cameras, best mean epipolar residual first.
    """
    passing = []
    for cand in candidates:
        for pose in (cand, cand.flipped()):
            if cheirality_score(pose, samples) == len(samples):
                err = float(np.mean([epipolar_residual(pose, c) for c in samples]))
                passing.append((err, pose))
    passing.sort(key=lambda item: item[0])
    return [pose for _, pose in passing]


def cheirality_select(
    candidates: Sequence[PoseHypothesis],
    samples: Sequence[Correspondence],
) -> Optional[PoseHypothesis]:
    """
    Pick the hypothesis consistent with positive depths.

    Candidates are scored by the number of samples with positive depth in
    both views (both baseline signs tried), ties broken by the smaller mean
    epipolar residual.

    Args:
        candidates: Pose hypotheses in the original camera frames
        samples: Correspondences in the original camera frames

    Returns:
        The winning hypothesis, or None when no candidate puts every sample
        in front of both cameras (or the list is empty)
    """
    if not candidates or not samples:
        return None
    best = None
    best_key = None
    for cand in candidates:
        for pose in (cand, cand.flipped()):
            score = cheirality_score(pose, samples)
            err = float(np.mean([epipolar_residual(pose, c) for c in samples]))
            key = (-score, err)
            if best_key is None or key < best_key:
                best, best_key = pose, key
    if best_key[0] != -len(samples):
        logger.debug("no candidate passes cheirality on %d samples", len(samples))
        return None
    return best


def validate_pose(pose: PoseHypothesis) -> PoseHypothesis:
    check_rotation(pose.rotation)
    pose.translation = unit(pose.translation, "translation")
    return pose


def select_pose(
    candidates: Sequence[PoseHypothesis],
    sample: Sequence[Correspondence],
    verification: Sequence[Correspondence],
) -> Optional[PoseHypothesis]:
    """
    Cheirality over every available correspondence, falling back to the
    minimal sample when noise pushes a verification point behind a camera.
    """
    pose = cheirality_select(candidates, verification)
    if pose is None:
        fallback = cheiral_candidates(candidates, sample)
        pose = fallback[0] if fallback else None
    return pose
