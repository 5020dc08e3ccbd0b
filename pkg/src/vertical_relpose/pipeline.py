"""
Pipeline API for pixels → relative pose.

Combines normalisation, vertical alignment, the algebraic solver, pose
composition and cheirality in a single convenient interface.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from .coplanarity import Correspondence, build_system
from .exceptions import InvalidInputError
from .geometry import CameraIntrinsics, PixelPoint, PoseHypothesis, normalize_point
from .pose import hypotheses_from_solutions, select_pose
from .solver import SolverOptions, solve_system
from .vertical import ImuAttitude, VerticalDirection, apply_vertical, vertical_rotation

logger = logging.getLogger(__name__)

Vertical = Union[VerticalDirection, ImuAttitude, np.ndarray]
PixelPair = Tuple[Union[PixelPoint, Sequence[float]], Union[PixelPoint, Sequence[float]]]


@dataclass
class PoseEstimate:
    """
    Every composed hypothesis of a minimal sample and the one cheirality picks.

    Attributes:
        hypotheses: Composed poses in solver order
        selected: Index of the chosen hypothesis, or None when none passes
    """

    hypotheses: List[PoseHypothesis] = field(default_factory=list)
    selected: Optional[int] = None

    @property
    def best(self) -> Optional[PoseHypothesis]:
        return None if self.selected is None else self.hypotheses[self.selected]

    def to_dict(self) -> dict:
        return {
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "selected": self.selected,
        }


def _index_of(chosen: PoseHypothesis, hypotheses: List[PoseHypothesis]) -> int:
    same_rotation = [
        i for i, h in enumerate(hypotheses) if np.array_equal(h.rotation, chosen.rotation)
    ]
    for i in same_rotation:
        if np.allclose(hypotheses[i].translation, chosen.translation):
            return i
    # only the opposite baseline was solved: store the flipped one in its place
    hypotheses[same_rotation[0]] = chosen
    return same_rotation[0]


def estimate_from_rays(
    correspondences: Sequence[Correspondence],
    vertical1: Vertical,
    vertical2: Vertical,
    options: Optional[SolverOptions] = None,
) -> PoseEstimate:
    """
    Relative pose from bearing-vector pairs.

    The first three pairs are solved; every pair takes part in cheirality.

    Raises:
        InvalidInputError: With fewer than three pairs
        DegenerateConfigurationError: If the minimal sample is degenerate
    """
    if len(correspondences) < 3:
        raise InvalidInputError(f"Need at least 3 correspondences, got {len(correspondences)}")
    R_ver1, R_ver2 = vertical_rotation(vertical1), vertical_rotation(vertical2)
    sample = list(correspondences[:3])
    aligned = [
        Correspondence(apply_vertical(R_ver1, c.m1), apply_vertical(R_ver2, c.m2)) for c in sample
    ]
    solutions = solve_system(build_system(aligned), options)
    hypotheses = hypotheses_from_solutions(solutions, R_ver1, R_ver2, aligned)
    chosen = select_pose(hypotheses, sample, correspondences) if hypotheses else None

    estimate = PoseEstimate(hypotheses)
    if chosen is not None:
        estimate.selected = _index_of(chosen, hypotheses)
    logger.debug("%d hypotheses, selected %s", len(hypotheses), estimate.selected)
    return estimate


def estimate_pose(
    matches_px: Sequence[PixelPair],
    K1: Union[CameraIntrinsics, np.ndarray],
    K2: Union[CameraIntrinsics, np.ndarray],
    vertical1: Vertical,
    vertical2: Vertical,
    options: Optional[SolverOptions] = None,
) -> PoseEstimate:
    """
    Relative pose from pixel matches and the vertical of each view in one call.

    Args:
        matches_px: (view 1, view 2) pixel pairs; at least three
        K1: Calibration of view 1
        K2: Calibration of view 2
        vertical1: Vertical of view 1 (vanishing direction or IMU angles)
        vertical2: Vertical of view 2
        options: Solver tunables

    Returns:
        PoseEstimate with all composed hypotheses and the selected one

    Examples:
        >>> K = CameraIntrinsics.from_fov(352, 288, 45.0)
        >>> est = estimate_pose(matches, K, K, [0, 1, 0], ImuAttitude(0.01, -0.02))
        >>> est.best.translation
    """
    rays = [
        Correspondence(normalize_point(K1, p1), normalize_point(K2, p2)) for p1, p2 in matches_px
    ]
    return estimate_from_rays(rays, vertical1, vertical2, options)
