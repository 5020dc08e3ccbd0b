"""
vertical-relpose - relative pose from three points and a known vertical

Aligns both views to the gravity direction, reduces the coplanarity
constraint to four polynomials in (Tx, Ty, Tz, t = tan(φ/2)) and solves them
with a Macaulay elimination template and an action matrix.

Examples:
    Pose from pixel matches:

    >>> from vertical_relpose import estimate_pose, CameraIntrinsics, ImuAttitude
    >>> K = CameraIntrinsics.from_fov(352, 288, 45.0)
    >>> est = estimate_pose(matches, K, K, ImuAttitude(0.02, -0.01), [0.0, 1.0, 0.0])
    >>> est.best.rotation, est.best.translation

    Robust estimation over many matches:

    >>> from vertical_relpose import ingest_correspondences, ransac_3pt
    >>> data = ingest_correspondences("matches.json")
    >>> result = ransac_3pt(data.correspondences(), *data.vertical_rotations())

    Synthetic benchmark:

    >>> from vertical_relpose import SceneConfig, run_noise_sweep, record_to_csv
    >>> record = run_noise_sweep(SceneConfig(trials=250), [0.0, 0.5, 1.0])
    >>> print(record_to_csv(record))
"""

from .geometry import (
    CameraIntrinsics,
    PixelPoint,
    PoseHypothesis,
    normalize_point,
    rodrigues,
    rotation_angle_error,
    translation_angle_error,
)
from .vertical import (
    ImuAttitude,
    VerticalDirection,
    apply_vertical,
    r_ver_from_imu,
    r_ver_from_vanishing,
)
from .coplanarity import Correspondence, CoplanaritySystem, build_system, solve_det_oracle
from .macaulay import basis_template, build_macaulay, compact_template, full_template
from .solver import (
    SolveOutcome,
    SolverOptions,
    eliminate_to_groebner,
    selftest,
    solve_system,
    solve_system_detailed,
)
from .pose import cheirality_select, compose_final, epipolar_residual, r_phi
from .ransac import RansacConfig, RansacResult, ransac_3pt
from .pipeline import PoseEstimate, estimate_from_rays, estimate_pose
from .simulation import (
    SceneConfig,
    generate_scene,
    run_noise_sweep,
    run_planar_sweep,
    run_vertical_sweep,
)
from .correspondences import (
    CorrespondenceSet,
    ingest_correspondences,
    parse_correspondences,
    write_correspondences,
)
from .report import ReportRenderer, record_to_csv
from .samples import load_sample
from .exceptions import (
    VerticalRelposeError,
    InvalidInputError,
    InvalidCalibrationError,
    DegenerateConfigurationError,
    NonGenericPositionError,
    TemplateMismatchError,
    CorrespondenceFileError,
    SelfTestError,
    RenderError,
)

# Read version from package metadata (single source of truth: pyproject.toml)
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("vertical-relpose")
except PackageNotFoundError:
    # Development mode (package not installed): read pyproject.toml directly
    from pathlib import Path

    try:
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib

        pyproject_path = Path(__file__).parent.parent.parent / "pyproject.toml"
        if pyproject_path.exists():
            with pyproject_path.open("rb") as f:
                __version__ = tomllib.load(f)["project"]["version"]
        else:
            __version__ = "0.0.0"
    except Exception:
        __version__ = "0.0.0"

__all__ = [
    # Geometry and verticals
    "CameraIntrinsics",
    "PixelPoint",
    "PoseHypothesis",
    "normalize_point",
    "rodrigues",
    "rotation_angle_error",
    "translation_angle_error",
    "ImuAttitude",
    "VerticalDirection",
    "apply_vertical",
    "r_ver_from_imu",
    "r_ver_from_vanishing",
    # Polynomial system and solver
    "Correspondence",
    "CoplanaritySystem",
    "build_system",
    "solve_det_oracle",
    "build_macaulay",
    "basis_template",
    "compact_template",
    "full_template",
    "SolverOptions",
    "SolveOutcome",
    "eliminate_to_groebner",
    "solve_system",
    "solve_system_detailed",
    "selftest",
    # Pose
    "r_phi",
    "compose_final",
    "cheirality_select",
    "epipolar_residual",
    "RansacConfig",
    "RansacResult",
    "ransac_3pt",
    "PoseEstimate",
    "estimate_pose",
    "estimate_from_rays",
    # Benchmark and files
    "SceneConfig",
    "generate_scene",
    "run_noise_sweep",
    "run_vertical_sweep",
    "run_planar_sweep",
    "CorrespondenceSet",
    "ingest_correspondences",
    "parse_correspondences",
    "write_correspondences",
    "load_sample",
    "ReportRenderer",
    "record_to_csv",
    # Exceptions
    "VerticalRelposeError",
    "InvalidInputError",
    "InvalidCalibrationError",
    "DegenerateConfigurationError",
    "NonGenericPositionError",
    "TemplateMismatchError",
    "CorrespondenceFileError",
    "SelfTestError",
    "RenderError",
]
