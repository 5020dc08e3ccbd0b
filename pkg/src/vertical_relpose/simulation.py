"""
Synthetic two-view scenes and Monte-Carlo experiment sweeps.

Scenes follow the usual minimal-solver benchmark: camera 1 at the origin
looking down +Z, camera 2 displaced by the baseline along X (sideway) or
Z (forward) and turned by a small random yaw. Both cameras get a random
roll/pitch so that the vertical alignment is always exercised. Distances
are in units of the scene distance.

Every trial draws from its own generator seeded with ``(seed, trial)``, and
the random draws do not depend on the noise level, so sweeps reuse the same
scenes at every level.
"""

from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import ExitStack
from dataclasses import asdict, dataclass, field, fields, replace
from functools import partial
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple
import logging
import math
import statistics
import time

import numpy as np

from .coplanarity import Correspondence, build_system
from .exceptions import DegenerateConfigurationError, InvalidInputError
from .geometry import (
    CameraIntrinsics,
    PixelPoint,
    PoseHypothesis,
    Rotation3,
    normalize_point,
    project,
    rodrigues,
    rotation_angle_error,
    translation_angle_error,
    unit,
)
from .pose import hypotheses_from_solutions, r_phi, select_pose
from .solver import SolverOptions, solve_system
from .vertical import ImuAttitude, apply_vertical, r_ver_from_imu, r_ver_from_vanishing

logger = logging.getLogger(__name__)

Motion = Literal["sideway", "forward"]

# candidate points drawn per requested visible point before giving up
_DRAWS_PER_POINT = 20


@dataclass(frozen=True)
class SceneConfig:
    """
    Parameters of the synthetic scene and of a sweep.

    Attributes:
        motion: "sideway" (baseline along X) or "forward" (along Z)
        baseline: Distance between the camera centres
        fov: Horizontal field of view in degrees
        width: Image width in pixels
        height: Image height in pixels
        depth_min: Nearest point depth in camera 1
        depth_max: Farthest point depth in camera 1
        planar: Put every point on the plane Z = plane_depth
        plane_depth: Depth of the plane in planar mode
        sigma: Pixel noise standard deviation
        vertical_error: Angular error of each measured vertical, degrees
        trials: Instances per sweep level
        points: Correspondences per instance (the first three are solved,
            all of them resolve cheirality)
        max_tilt: Bound on each camera's roll and pitch, degrees
        max_yaw: Bound on the relative yaw, degrees
        seed: Master seed
    """

    motion: Motion = "sideway"
    baseline: float = 0.3
    fov: float = 45.0
    width: int = 352
    height: int = 288
    depth_min: float = 0.5
    depth_max: float = 2.5
    planar: bool = False
    plane_depth: float = 2.0
    sigma: float = 0.0
    vertical_error: float = 0.0
    trials: int = 2500
    points: int = 8
    max_tilt: float = 10.0
    max_yaw: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.motion not in ("sideway", "forward"):
            raise InvalidInputError(f"motion must be 'sideway' or 'forward', got '{self.motion}'")
        positive = ("baseline", "fov", "width", "height", "depth_min", "plane_depth")
        for name in positive:
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)}")
        if self.fov >= 180:
            raise InvalidInputError(f"fov must be below 180 degrees, got {self.fov}")
        if not self.depth_max > self.depth_min:
            raise InvalidInputError(
                f"depth_max ({self.depth_max}) must exceed depth_min ({self.depth_min})"
            )
        for name in ("sigma", "vertical_error", "max_tilt", "max_yaw"):
            if not getattr(self, name) >= 0:
                raise InvalidInputError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.max_yaw >= 180:
            raise InvalidInputError(f"max_yaw must be below 180 degrees, got {self.max_yaw}")
        if self.trials < 1:
            raise InvalidInputError(f"trials must be >= 1, got {self.trials}")
        if self.points < 3:
            raise InvalidInputError(f"points must be >= 3, got {self.points}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SceneConfig":
        """
        Build a config from a mapping, rejecting unknown keys.

        Examples:
            >>> SceneConfig.from_dict({"motion": "forward", "sigma": 0.5}).sigma
            0.5
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidInputError(
                f"Unknown scene option(s): {', '.join(unknown)}. "
                f"Known: {', '.join(sorted(known))}"
            )
        return cls(**data)

    def with_overrides(self, **overrides) -> "SceneConfig":
        """Copy with the non-None overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics.from_fov(self.width, self.height, self.fov)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SyntheticInstance:
    """
    One random two-view scene with ground truth.

    Attributes:
        rotation: True relative rotation, ``X2 = R X1 + T``
        translation: True unit baseline
        vertical1: True vertical direction in camera 1
        vertical2: True vertical direction in camera 2
        measured_vertical1: Vertical of camera 1 after the angular error
        measured_vertical2: Vertical of camera 2 after the angular error
        intrinsics: Calibration shared by both cameras
        pixels: Exact (view 1, view 2) pixel pairs
        noisy_pixels: Pixel pairs with Gaussian noise
        correspondences: Exact bearing pairs (z = 1)
        noisy_correspondences: Bearing pairs of the noisy pixels
        world_points: Points in the camera-1 frame
    """

    rotation: Rotation3
    translation: np.ndarray
    vertical1: np.ndarray
    vertical2: np.ndarray
    measured_vertical1: np.ndarray
    measured_vertical2: np.ndarray
    intrinsics: CameraIntrinsics
    pixels: List[Tuple[PixelPoint, PixelPoint]]
    noisy_pixels: List[Tuple[PixelPoint, PixelPoint]]
    correspondences: List[Correspondence]
    noisy_correspondences: List[Correspondence]
    world_points: np.ndarray

    @property
    def pose(self) -> PoseHypothesis:
        return PoseHypothesis(self.rotation, self.translation, stage="final-composed")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator of one trial, derived from the master seed and trial index."""
    return np.random.default_rng([seed, trial])


def _perturb_vertical(v: np.ndarray, error_deg: float, rng: np.random.Generator) -> np.ndarray:
    # rotate about a random axis orthogonal to the vertical
    a = rng.normal(size=3)
    a -= (a @ v) * v
    axis = unit(a, "perturbation axis")
    return rodrigues(axis, math.radians(error_deg)) @ v


def _in_image(p: PixelPoint, cfg: SceneConfig) -> bool:
    return 0.0 <= p.u <= cfg.width and 0.0 <= p.v <= cfg.height


def generate_scene(cfg: SceneConfig, trial: int = 0) -> SyntheticInstance:
    """
    Draw a random scene.

    Args:
        cfg: Scene parameters
        trial: Trial index, combined with ``cfg.seed`` into the trial's generator

    Returns:
        SyntheticInstance with ``cfg.points`` correspondences visible in both views

    Raises:
        InvalidInputError: If fewer than three points are visible in both views
    """
    rng = trial_rng(cfg.seed, trial)
    K = cfg.intrinsics()
    tilt = math.radians(cfg.max_tilt)
    att1 = ImuAttitude(rng.uniform(-tilt, tilt), rng.uniform(-tilt, tilt))
    att2 = ImuAttitude(rng.uniform(-tilt, tilt), rng.uniform(-tilt, tilt))
    R_ver1, R_ver2 = r_ver_from_imu(att1), r_ver_from_imu(att2)
    yaw = math.radians(rng.uniform(-cfg.max_yaw, cfg.max_yaw))
    R_yaw = r_phi(math.tan(yaw / 2.0))

    # camera i maps world X to R_i (X − C_i); R_ver_i R_i is a pure yaw
    R1 = R_ver1.T
    R2 = R_ver2.T @ R_yaw
    axis = (1.0, 0.0, 0.0) if cfg.motion == "sideway" else (0.0, 0.0, 1.0)
    C2 = cfg.baseline * np.array(axis)
    R_true = R2 @ R1.T
    T_true = unit(-R2 @ C2, "baseline")

    visible = []
    wanted = cfg.points
    for _ in range(_DRAWS_PER_POINT * wanted):
        u, v = rng.uniform(0.0, cfg.width), rng.uniform(0.0, cfg.height)
        depth = cfg.plane_depth if cfg.planar else rng.uniform(cfg.depth_min, cfg.depth_max)
        noise = rng.standard_normal(4)
        X1 = depth * normalize_point(K, (u, v))
        X2 = R_true @ X1 + cfg.baseline * T_true
        if X2[2] <= 0:
            continue
        p2 = project(K, X2)
        if not _in_image(p2, cfg):
            continue
        visible.append((X1, PixelPoint(u, v), p2, noise))
        if len(visible) == wanted:
            break
    if len(visible) < 3:
        raise InvalidInputError(
            f"Only {len(visible)} points visible in both views; "
            f"check baseline, depth range and field of view"
        )

    pixels, noisy_pixels, exact, noisy = [], [], [], []
    for X1, p1, p2, noise in visible:
        q1 = PixelPoint(p1.u + cfg.sigma * noise[0], p1.v + cfg.sigma * noise[1])
        q2 = PixelPoint(p2.u + cfg.sigma * noise[2], p2.v + cfg.sigma * noise[3])
        pixels.append((p1, p2))
        noisy_pixels.append((q1, q2))
        exact.append(Correspondence(normalize_point(K, p1), normalize_point(K, p2)))
        noisy.append(Correspondence(normalize_point(K, q1), normalize_point(K, q2)))

    v1 = R_ver1.T @ np.array([0.0, 1.0, 0.0])
    v2 = R_ver2.T @ np.array([0.0, 1.0, 0.0])
    return SyntheticInstance(
        rotation=R_true,
        translation=T_true,
        vertical1=v1,
        vertical2=v2,
        measured_vertical1=_perturb_vertical(v1, cfg.vertical_error, rng),
        measured_vertical2=_perturb_vertical(v2, cfg.vertical_error, rng),
        intrinsics=K,
        pixels=pixels,
        noisy_pixels=noisy_pixels,
        correspondences=exact,
        noisy_correspondences=noisy,
        world_points=np.array([X1 for X1, *_ in visible]),
    )


@dataclass
class TrialOutcome:
    pose: Optional[PoseHypothesis]
    rotation_error: float
    translation_error: float
    solve_seconds: float

    @property
    def failed(self) -> bool:
        return self.pose is None


def run_trial(instance: SyntheticInstance, options: Optional[SolverOptions] = None) -> TrialOutcome:
    """
    Solve an instance from its noisy data and measured verticals.

    A degenerate sample or a failed linear-algebra step counts as a failed
    trial rather than aborting the sweep.
    """
    R_ver1 = r_ver_from_vanishing(instance.measured_vertical1)
    R_ver2 = r_ver_from_vanishing(instance.measured_vertical2)
    data = instance.noisy_correspondences
    sample = data[:3]
    aligned = [
        Correspondence(apply_vertical(R_ver1, c.m1), apply_vertical(R_ver2, c.m2)) for c in sample
    ]
    start = time.perf_counter()
    try:
        solutions = solve_system(build_system(aligned), options)
    except (DegenerateConfigurationError, np.linalg.LinAlgError) as e:
        logger.debug("trial failed: %s", e)
        solutions = []
    elapsed = time.perf_counter() - start
    candidates = hypotheses_from_solutions(solutions, R_ver1, R_ver2, aligned)
    pose = select_pose(candidates, sample, data) if candidates else None
    if pose is None:
        return TrialOutcome(None, math.nan, math.nan, elapsed)
    return TrialOutcome(
        pose,
        rotation_angle_error(instance.rotation, pose.rotation),
        translation_angle_error(instance.translation, pose.translation),
        elapsed,
    )


CSV_COLUMNS = (
    "sigma_or_vertical_err",
    "mean_rot_err_deg",
    "median_rot_err_deg",
    "mean_trans_err_deg",
    "median_trans_err_deg",
    "failures",
    "mean_solve_us",
)


@dataclass
class ExperimentRow:
    """Aggregate errors (degrees) of one sweep level."""

    level: float
    mean_rot_err_deg: float
    median_rot_err_deg: float
    mean_trans_err_deg: float
    median_trans_err_deg: float
    failures: int
    mean_solve_us: float

    def as_tuple(self) -> tuple:
        return (
            self.level,
            self.mean_rot_err_deg,
            self.median_rot_err_deg,
            self.mean_trans_err_deg,
            self.median_trans_err_deg,
            self.failures,
            self.mean_solve_us,
        )


@dataclass
class ExperimentRecord:
    """
    Result of a sweep: the config echo and one row per level.

    Attributes:
        config: Scene parameters of the sweep
        parameter: Swept quantity, "sigma" (pixels) or "vertical_error" (degrees)
        rows: One row per level, in sweep order
    """

    config: SceneConfig
    parameter: Literal["sigma", "vertical_error"]
    rows: List[ExperimentRow] = field(default_factory=list)

    @property
    def levels(self) -> List[float]:
        return [r.level for r in self.rows]

    @property
    def total_failures(self) -> int:
        return sum(r.failures for r in self.rows)


def _aggregate(level: float, outcomes: Sequence[TrialOutcome], timing: bool) -> ExperimentRow:
    ok = [o for o in outcomes if not o.failed]
    rot = [o.rotation_error for o in ok]
    trans = [o.translation_error for o in ok]

    def mean(xs):
        return statistics.fmean(xs) if xs else math.nan

    def median(xs):
        return statistics.median(xs) if xs else math.nan

    solve_us = statistics.fmean(o.solve_seconds for o in outcomes) * 1e6 if timing else math.nan
    return ExperimentRow(
        float(level), mean(rot), median(rot), mean(trans), median(trans),
        len(outcomes) - len(ok), solve_us,
    )


def _trial_at(cfg: SceneConfig, options: Optional[SolverOptions], trial: int) -> TrialOutcome:
    return run_trial(generate_scene(cfg, trial), options)


def _run_level(
    cfg: SceneConfig,
    options: Optional[SolverOptions],
    executor: Optional[Executor],
) -> List[TrialOutcome]:
    trials = range(cfg.trials)
    if executor is None:
        return [_trial_at(cfg, options, k) for k in trials]
    chunk = max(1, cfg.trials // 64)
    return list(executor.map(partial(_trial_at, cfg, options), trials, chunksize=chunk))


def _sweep(
    cfg: SceneConfig,
    parameter: str,
    levels: Sequence[float],
    options: Optional[SolverOptions],
    timing: bool,
    workers: Optional[int] = None,
) -> ExperimentRecord:
    record = ExperimentRecord(cfg, parameter)
    # per-trial seeds come from (seed, trial), so results do not depend on workers
    with ExitStack() as stack:
        executor = None
        if workers is not None and workers > 1:
            executor = stack.enter_context(ProcessPoolExecutor(max_workers=workers))
        for level in levels:
            level_cfg = replace(cfg, **{parameter: float(level)})
            row = _aggregate(level, _run_level(level_cfg, options, executor), timing)
            logger.debug(
                "%s=%g: median rot %.3g deg, median trans %.3g deg, %d failures",
                parameter, level, row.median_rot_err_deg, row.median_trans_err_deg,
                row.failures,
            )
            record.rows.append(row)
    return record


def run_noise_sweep(
    cfg: SceneConfig,
    sigmas: Sequence[float],
    options: Optional[SolverOptions] = None,
    timing: bool = True,
    workers: Optional[int] = None,
) -> ExperimentRecord:
    """
    Pose errors against pixel noise.

    Args:
        cfg: Scene parameters; ``cfg.sigma`` is replaced by each level
        sigmas: Noise levels in pixels
        options: Solver tunables
        timing: Record mean solve time; when False the column is NaN and the
            record depends only on (config, seed)
        workers: Run the trials of each level in this many processes

    Returns:
        ExperimentRecord with one row per sigma
    """
    return _sweep(cfg, "sigma", sigmas, options, timing, workers)


def run_vertical_sweep(
    cfg: SceneConfig,
    errors_deg: Sequence[float],
    options: Optional[SolverOptions] = None,
    timing: bool = True,
    workers: Optional[int] = None,
) -> ExperimentRecord:
    """Pose errors against the angular error of the verticals at pixel noise ``cfg.sigma``."""
    for e in errors_deg:
        if not 0.0 <= e <= 0.5:
            raise InvalidInputError(f"Vertical errors must lie in [0, 0.5] degrees, got {e}")
    return _sweep(cfg, "vertical_error", errors_deg, options, timing, workers)


def run_planar_sweep(
    cfg: SceneConfig,
    sigmas: Sequence[float],
    options: Optional[SolverOptions] = None,
    timing: bool = True,
    workers: Optional[int] = None,
) -> ExperimentRecord:
    """Noise sweep with every point on the plane Z = ``cfg.plane_depth``."""
    return run_noise_sweep(replace(cfg, planar=True), sigmas, options, timing, workers)


def sweep_levels(maximum: float, step: float) -> List[float]:
    """
    ``0, step, …, maximum`` without float drift.

    Examples:
        >>> sweep_levels(1.0, 0.2)
        [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    """
    if step <= 0 or maximum < 0:
        raise InvalidInputError(f"Need step > 0 and maximum >= 0, got step={step}, max={maximum}")
    n = int(math.floor(maximum / step + 1e-9))
    return [round(k * step, 12) for k in range(n + 1)]
