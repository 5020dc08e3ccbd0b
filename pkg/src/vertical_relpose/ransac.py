"""
RANSAC over the 3-point vertical solver, with local optimisation.

The whole sampling sequence is drawn from the seed before any hypothesis is
evaluated, so results depend only on (seed, input). Every hypothesis that
improves the consensus is refined on its inliers: a robust least-squares
fit of the yaw and the baseline direction in the gravity-aligned frame,
followed by re-scoring, repeated while the consensus does not shrink.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import least_squares

from .coplanarity import Correspondence, build_system
from .exceptions import DegenerateConfigurationError, InvalidInputError
from .geometry import PoseHypothesis, Rotation3
from .pose import (
    cheiral_candidates,
    cheirality_score,
    compose_final,
    hypotheses_from_solutions,
    r_phi,
    yaw_from_rotation,
)
from .solver import SolverOptions, solve_system
from .vertical import apply_vertical

logger = logging.getLogger(__name__)

SAMPLE_SIZE = 3
# Fewest inliers worth a least-squares refinement over (yaw, baseline)
MIN_REFINE_INLIERS = 6


@dataclass(frozen=True)
class RansacConfig:
    """
    Attributes:
        threshold: Inlier bound on the symmetric angular epipolar residual (radians)
        confidence: Probability of drawing at least one all-inlier sample
        max_iterations: Hard cap on the number of samples
        seed: Seed of the sampling sequence
        local_optimization: Refine improving hypotheses on their inliers
        lo_rounds: Refine-and-rescore rounds per improving hypothesis
    """

    threshold: float = 0.005
    confidence: float = 0.99
    max_iterations: int = 500
    seed: int = 0
    local_optimization: bool = True
    lo_rounds: int = 4

    def __post_init__(self):
        if not self.threshold > 0:
            raise InvalidInputError(f"threshold must be positive, got {self.threshold}")
        if not 0.0 < self.confidence < 1.0:
            raise InvalidInputError(f"confidence must lie in (0, 1), got {self.confidence}")
        if self.max_iterations < 1:
            raise InvalidInputError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.lo_rounds < 1:
            raise InvalidInputError(f"lo_rounds must be >= 1, got {self.lo_rounds}")


@dataclass
class RansacResult:
    """
    Attributes:
        pose: Best pose (None when no hypothesis reached 3 inliers)
        inlier_mask: Per-correspondence inlier flags
        iterations: Samples evaluated
        inlier_count: Number of True entries in the mask
    """

    pose: Optional[PoseHypothesis]
    inlier_mask: np.ndarray
    iterations: int
    inlier_count: int = field(init=False)

    def __post_init__(self):
        self.inlier_mask = np.asarray(self.inlier_mask, dtype=bool)
        self.inlier_count = int(self.inlier_mask.sum())

    @property
    def success(self) -> bool:
        return self.pose is not None

    def to_dict(self) -> dict:
        return {
            "pose": self.pose.to_dict() if self.pose is not None else None,
            "inlier_mask": [bool(x) for x in self.inlier_mask],
            "inliers": self.inlier_count,
            "iterations": self.iterations,
        }


@dataclass
class AlignedPose:
    """
    Pose between the gravity-aligned frames: yaw ``phi`` about Y and unit
    baseline ``T``.
    """

    phi: float
    T: np.ndarray

    @classmethod
    def from_final(cls, pose: PoseHypothesis, R_ver1: Rotation3, R_ver2: Rotation3):
        R_aligned = R_ver2 @ pose.rotation @ R_ver1.T
        return cls(yaw_from_rotation(R_aligned), R_ver2 @ pose.translation)

    @property
    def rotation(self) -> Rotation3:
        return r_phi(math.tan(self.phi / 2.0))

    def to_final(self, R_ver1: Rotation3, R_ver2: Rotation3) -> PoseHypothesis:
        return compose_final(R_ver1, R_ver2, self.rotation, self.T)


def required_iterations(inlier_ratio: float, confidence: float, cap: int) -> int:
    """
    ``log(1 − confidence) / log(1 − w³)``, capped.

    Examples:
        >>> required_iterations(0.5, 0.99, 1000)
        35
    """
    w3 = inlier_ratio ** SAMPLE_SIZE
    if w3 <= 0.0:
        return cap
    if w3 >= 1.0:
        return 1
    return min(cap, max(1, math.ceil(math.log(1.0 - confidence) / math.log(1.0 - w3))))


def _plane_sines(R: Rotation3, T: np.ndarray, M1: np.ndarray, M2: np.ndarray):
    """Signed sines of both rays' angles to their epipolar planes."""
    E = np.cross(T, (R @ M1.T).T)
    Et = np.cross(M2, T) @ R
    num = np.einsum("ni,ni->n", M2, E)
    with np.errstate(invalid="ignore", divide="ignore"):
        s2 = num / (np.linalg.norm(M2, axis=1) * np.linalg.norm(E, axis=1))
        s1 = num / (np.linalg.norm(M1, axis=1) * np.linalg.norm(Et, axis=1))
    return np.nan_to_num(s1), np.nan_to_num(s2)


def aligned_residuals(pose: AlignedPose, M1: np.ndarray, M2: np.ndarray) -> np.ndarray:
    """
    Symmetric angular epipolar residuals (radians) of aligned rays.

    Matches :func:`pose.epipolar_residual` of the composed pose on the
    original rays.
    """
    s1, s2 = _plane_sines(pose.rotation, pose.T, M1, M2)
    angles = np.arcsin(np.minimum(np.abs(np.stack([s1, s2])), 1.0))
    return 0.5 * (angles[0] + angles[1])


def _tangent_basis(T: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    helper = np.eye(3)[int(np.argmin(np.abs(T)))]
    e1 = np.cross(T, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(T, e1)


def refine_aligned_pose(
    pose: AlignedPose,
    M1: np.ndarray,
    M2: np.ndarray,
    threshold: float,
) -> AlignedPose:
    """
    Least-squares refinement of yaw and baseline direction on inlier rays.

    The baseline moves on the unit sphere through two tangent coordinates
    around its starting value; residuals are the signed sines of both
    epipolar plane angles under a soft-L1 loss scaled by ``threshold``.
    """
    T0 = pose.T / np.linalg.norm(pose.T)
    e1, e2 = _tangent_basis(T0)

    def unpack(x):
        T = T0 + x[1] * e1 + x[2] * e2
        return x[0], T / np.linalg.norm(T)

    def fun(x):
        phi, T = unpack(x)
        s1, s2 = _plane_sines(r_phi(math.tan(phi / 2.0)), T, M1, M2)
        return np.concatenate([s1, s2])

    res = least_squares(
        fun,
        np.array([pose.phi, 0.0, 0.0]),
        method="trf",
        loss="soft_l1",
        f_scale=threshold,
        x_scale="jac",
    )
    phi, T = unpack(res.x)
    return AlignedPose(float(phi), T)


def _local_optimization(
    pose: AlignedPose,
    mask: np.ndarray,
    M1: np.ndarray,
    M2: np.ndarray,
    cfg: RansacConfig,
) -> Tuple[AlignedPose, np.ndarray]:
    """
    Refine on the inliers and re-score while the consensus does not shrink.

    A refinement with the same inlier count is kept only if it does not
    raise the median residual over the current inliers.
    """
    residuals = aligned_residuals(pose, M1, M2)
    for _ in range(cfg.lo_rounds):
        if mask.sum() < MIN_REFINE_INLIERS:
            break
        refined = refine_aligned_pose(pose, M1[mask], M2[mask], cfg.threshold)
        if not abs(refined.phi) < math.pi:
            break
        refined_residuals = aligned_residuals(refined, M1, M2)
        refined_mask = refined_residuals < cfg.threshold
        if refined_mask.sum() < mask.sum():
            break
        if refined_mask.sum() == mask.sum() and (
            np.median(refined_residuals[mask]) > np.median(residuals[mask])
        ):
            break
        residuals = refined_residuals
        converged = np.array_equal(refined_mask, mask)
        pose, mask = refined, refined_mask
        if converged:
            break
    return pose, mask


def ransac_3pt(
    correspondences: Sequence[Correspondence],
    R_ver1: Rotation3,
    R_ver2: Rotation3,
    cfg: RansacConfig = RansacConfig(),
    options: Optional[SolverOptions] = None,
) -> RansacResult:
    """
    Robust relative pose from many correspondences and two vertical rotations.

    Args:
        correspondences: Rays in the original camera frames
        R_ver1: Vertical rotation of view 1
        R_ver2: Vertical rotation of view 2
        cfg: RANSAC parameters
        options: Solver tunables

    Returns:
        RansacResult; ``pose`` is None when no hypothesis has 3 inliers

    Raises:
        InvalidInputError: With fewer than 3 correspondences
    """
    n = len(correspondences)
    if n < SAMPLE_SIZE:
        raise InvalidInputError(f"RANSAC needs at least {SAMPLE_SIZE} correspondences, got {n}")
    R_ver1 = np.asarray(R_ver1, dtype=float)
    R_ver2 = np.asarray(R_ver2, dtype=float)
    aligned = [
        Correspondence(apply_vertical(R_ver1, c.m1), apply_vertical(R_ver2, c.m2))
        for c in correspondences
    ]
    M1 = np.array([c.m1 for c in aligned])
    M2 = np.array([c.m2 for c in aligned])
    rng = np.random.default_rng(cfg.seed)
    draws = [rng.choice(n, SAMPLE_SIZE, replace=False) for _ in range(cfg.max_iterations)]

    best_mask = np.zeros(n, dtype=bool)
    best: Optional[AlignedPose] = None
    bound = cfg.max_iterations
    iterations = 0
    for draw in draws:
        if iterations >= bound:
            break
        iterations += 1
        aligned_sample = [aligned[i] for i in draw]
        try:
            solutions = solve_system(build_system(aligned_sample), options)
        except (DegenerateConfigurationError, np.linalg.LinAlgError) as e:
            logger.debug("sample %s skipped: %s", list(draw), e)
            continue
        if not solutions:
            continue
        candidates = hypotheses_from_solutions(solutions, R_ver1, R_ver2, aligned_sample)
        sample = [correspondences[i] for i in draw]
        for final in cheiral_candidates(candidates, sample):
            pose = AlignedPose.from_final(final, R_ver1, R_ver2)
            mask = aligned_residuals(pose, M1, M2) < cfg.threshold
            if mask.sum() <= best_mask.sum():
                continue
            if cfg.local_optimization:
                pose, mask = _local_optimization(pose, mask, M1, M2, cfg)
            best, best_mask = pose, mask
            bound = required_iterations(mask.sum() / n, cfg.confidence, cfg.max_iterations)
    logger.debug("ransac: %d iterations, %d inliers", iterations, int(best_mask.sum()))

    if best is None or best_mask.sum() < SAMPLE_SIZE:
        return RansacResult(None, np.zeros(n, dtype=bool), iterations)
    pose = best.to_final(R_ver1, R_ver2)
    consensus = [c for c, keep in zip(correspondences, best_mask) if keep]
    # refinement keeps the baseline sign; confirm it on the consensus set
    if cheirality_score(pose.flipped(), consensus) > cheirality_score(pose, consensus):
        pose = pose.flipped()
    return RansacResult(pose, best_mask, iterations)
