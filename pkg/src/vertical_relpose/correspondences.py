"""
Correspondence files.

A correspondence file holds the two calibrations, the vertical of each view
and the pixel matches::

    {
      "intrinsics1": [[f, 0, cx], [0, f, cy], [0, 0, 1]],
      "intrinsics2": [[f, 0, cx], [0, f, cy], [0, 0, 1]],
      "vertical1": [x, y, z],
      "vertical2": {"alpha_deg": 1.5, "gamma_deg": -0.4},
      "matches": [{"u1": 10.0, "v1": 20.0, "u2": 11.0, "v2": 19.5}, ...]
    }

A vertical is either a unit vector (vanishing-point direction) or IMU angles
in degrees. An optional ``ground_truth`` entry with ``rotation`` (row-major,
9 values) and ``translation`` is carried through untouched. JSON and YAML are
accepted; errors name the file, the line and the field.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union
import json
import logging

import numpy as np
import yaml

from .coplanarity import Correspondence
from .exceptions import CorrespondenceFileError, InvalidInputError
from .geometry import CameraIntrinsics, PixelPoint, Rotation3, normalize_point
from .vertical import ImuAttitude, VerticalDirection, vertical_rotation

logger = logging.getLogger(__name__)

FileFormat = Literal["auto", "json", "yaml"]
VerticalSource = Union[VerticalDirection, ImuAttitude]
PixelMatch = Tuple[PixelPoint, PixelPoint]

REQUIRED_KEYS = ("intrinsics1", "intrinsics2", "vertical1", "vertical2", "matches")
OPTIONAL_KEYS = ("ground_truth",)
MATCH_KEYS = ("u1", "v1", "u2", "v2")


@dataclass
class CorrespondenceSet:
    """
    Parsed content of a correspondence file.

    Attributes:
        intrinsics1: Calibration of view 1
        intrinsics2: Calibration of view 2
        vertical1: Vertical of view 1
        vertical2: Vertical of view 2
        matches: Pixel pairs (view 1, view 2)
        ground_truth: Optional reference pose, as stored in the file
    """

    intrinsics1: CameraIntrinsics
    intrinsics2: CameraIntrinsics
    vertical1: VerticalSource
    vertical2: VerticalSource
    matches: List[PixelMatch]
    ground_truth: Optional[Dict[str, Any]] = None

    def __len__(self) -> int:
        return len(self.matches)

    def correspondences(self) -> List[Correspondence]:
        """Bearing-vector pairs (z = 1) of every match."""
        return [
            Correspondence(
                normalize_point(self.intrinsics1, p1), normalize_point(self.intrinsics2, p2)
            )
            for p1, p2 in self.matches
        ]

    def vertical_rotations(self) -> Tuple[Rotation3, Rotation3]:
        return vertical_rotation(self.vertical1), vertical_rotation(self.vertical2)


def _detect_format(path: Path, fmt: FileFormat) -> str:
    if fmt != "auto":
        return fmt
    suffix = path.suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix in (".yaml", ".yml"):
        return "yaml"
    raise CorrespondenceFileError(
        f"Cannot infer format from suffix '{suffix}'; use .json, .yaml or pass a format",
        path=str(path),
    )


def _line_map(text: str) -> Dict[Any, int]:
    """
    1-based line of every top-level key and of every match entry.

    Keys are the top-level names and ``("matches", i)``. JSON is parsed as
    YAML here, which only serves positions; an unparsable document yields
    an empty map.
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return {}
    lines: Dict[Any, int] = {}
    if not isinstance(root, yaml.MappingNode):
        return lines
    for key_node, value_node in root.value:
        key = key_node.value
        lines[key] = key_node.start_mark.line + 1
        if key == "matches" and isinstance(value_node, yaml.SequenceNode):
            for i, item in enumerate(value_node.value):
                lines[("matches", i)] = item.start_mark.line + 1
    return lines


def _parse_text(text: str, fmt: str, path: str) -> Any:
    if fmt == "json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise CorrespondenceFileError(f"Invalid JSON: {e.msg}", path=path, line=e.lineno) from e
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise CorrespondenceFileError(f"Invalid YAML: {e}", path=path, line=line) from e


def _intrinsics(value: Any, key: str, path: str, line: Optional[int]) -> CameraIntrinsics:
    try:
        K = np.asarray(value, dtype=float)
        return CameraIntrinsics(K)
    except (TypeError, ValueError) as e:
        raise CorrespondenceFileError(str(e), path=path, line=line, field=key) from e


def _vertical(value: Any, key: str, path: str, line: Optional[int]) -> VerticalSource:
    try:
        if isinstance(value, dict):
            extra = sorted(set(value) - {"alpha_deg", "gamma_deg"})
            if extra or len(value) != 2:
                raise InvalidInputError(
                    "IMU vertical needs exactly 'alpha_deg' and 'gamma_deg'"
                    + (f", got extra {', '.join(extra)}" if extra else "")
                )
            return ImuAttitude.from_degrees(float(value["alpha_deg"]), float(value["gamma_deg"]))
        return VerticalDirection(np.asarray(value, dtype=float))
    except (TypeError, ValueError, KeyError) as e:
        raise CorrespondenceFileError(str(e), path=path, line=line, field=key) from e


def _match(value: Any, index: int, path: str, line: Optional[int]) -> PixelMatch:
    where = f"matches[{index}]"
    if not isinstance(value, dict):
        raise CorrespondenceFileError(
            f"Match must be a mapping with {', '.join(MATCH_KEYS)}",
            path=path,
            line=line,
            field=where,
        )
    missing = [k for k in MATCH_KEYS if k not in value]
    if missing:
        raise CorrespondenceFileError(
            f"Missing {', '.join(missing)}", path=path, line=line, field=where
        )
    try:
        u1, v1, u2, v2 = (float(value[k]) for k in MATCH_KEYS)
        return PixelPoint(u1, v1), PixelPoint(u2, v2)
    except (TypeError, ValueError) as e:
        raise CorrespondenceFileError(str(e), path=path, line=line, field=where) from e


def parse_correspondences(
    data: Any,
    path: str = "<data>",
    lines: Optional[Dict] = None,
) -> CorrespondenceSet:
    """
    Validate a loaded correspondence document.

    Args:
        data: Mapping as loaded from JSON or YAML
        path: Name used in error messages
        lines: Optional line map from :func:`_line_map`

    Raises:
        CorrespondenceFileError: On a missing, unknown or invalid field
    """
    lines = lines or {}
    if not isinstance(data, dict):
        raise CorrespondenceFileError("Top level must be a mapping", path=path, line=1)
    missing = [k for k in REQUIRED_KEYS if k not in data]
    if missing:
        raise CorrespondenceFileError(f"Missing required key(s): {', '.join(missing)}", path=path)
    unknown = sorted(set(data) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS))
    if unknown:
        raise CorrespondenceFileError(
            "Unknown key", path=path, line=lines.get(unknown[0]), field=unknown[0]
        )
    if not isinstance(data["matches"], list):
        raise CorrespondenceFileError(
            "Must be a list", path=path, line=lines.get("matches"), field="matches"
        )

    return CorrespondenceSet(
        intrinsics1=_intrinsics(data["intrinsics1"], "intrinsics1", path, lines.get("intrinsics1")),
        intrinsics2=_intrinsics(data["intrinsics2"], "intrinsics2", path, lines.get("intrinsics2")),
        vertical1=_vertical(data["vertical1"], "vertical1", path, lines.get("vertical1")),
        vertical2=_vertical(data["vertical2"], "vertical2", path, lines.get("vertical2")),
        matches=[
            _match(m, i, path, lines.get(("matches", i))) for i, m in enumerate(data["matches"])
        ],
        ground_truth=data.get("ground_truth"),
    )


def ingest_correspondences(
    path: Union[str, Path],
    format: FileFormat = "auto",
) -> CorrespondenceSet:
    """
    Read and validate a correspondence file.

    Args:
        path: JSON or YAML file
        format: "json", "yaml", or "auto" (from the suffix)

    Returns:
        CorrespondenceSet

    Raises:
        CorrespondenceFileError: If the file is missing, unparsable or invalid

    Examples:
        >>> data = ingest_correspondences("pair.json")
        >>> R1, R2 = data.vertical_rotations()
        >>> rays = data.correspondences()
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CorrespondenceFileError(f"Cannot read file: {e.strerror}", path=str(path)) from e
    data = _parse_text(text, fmt, str(path))
    result = parse_correspondences(data, str(path), _line_map(text))
    logger.debug("read %d matches from %s", len(result), path)
    return result


def _vertical_to_data(v: Union[VerticalSource, np.ndarray, Sequence[float]]) -> Any:
    if isinstance(v, ImuAttitude):
        return {"alpha_deg": float(np.degrees(v.alpha)), "gamma_deg": float(np.degrees(v.gamma))}
    if isinstance(v, VerticalDirection):
        v = v.vector
    return [float(x) for x in v]


def correspondences_to_dict(
    intrinsics1: Union[CameraIntrinsics, np.ndarray],
    intrinsics2: Union[CameraIntrinsics, np.ndarray],
    vertical1: Union[VerticalSource, np.ndarray],
    vertical2: Union[VerticalSource, np.ndarray],
    matches: Sequence[PixelMatch],
    ground_truth: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Document form of a correspondence set, as written by :func:`write_correspondences`."""

    def matrix(K):
        K = K.matrix if isinstance(K, CameraIntrinsics) else np.asarray(K, dtype=float)
        return [[float(x) for x in row] for row in K]

    data: Dict[str, Any] = {
        "intrinsics1": matrix(intrinsics1),
        "intrinsics2": matrix(intrinsics2),
        "vertical1": _vertical_to_data(vertical1),
        "vertical2": _vertical_to_data(vertical2),
        "matches": [
            {"u1": float(p1.u), "v1": float(p1.v), "u2": float(p2.u), "v2": float(p2.v)}
            for p1, p2 in matches
        ],
    }
    if ground_truth is not None:
        data["ground_truth"] = ground_truth
    return data


def write_correspondences(
    path: Union[str, Path],
    data: Union[CorrespondenceSet, Dict[str, Any]],
    format: FileFormat = "auto",
) -> Path:
    """
    Write a correspondence file readable by :func:`ingest_correspondences`.

    Floats are written in their shortest round-trip form, so reading the
    file back reproduces the values exactly.
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    if isinstance(data, CorrespondenceSet):
        data = correspondences_to_dict(
            data.intrinsics1, data.intrinsics2, data.vertical1, data.vertical2,
            data.matches, data.ground_truth,
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        text = json.dumps(data, indent=2) + "\n"
    else:
        text = yaml.safe_dump(data, sort_keys=False, default_flow_style=None)
    path.write_text(text, encoding="utf-8")
    return path
