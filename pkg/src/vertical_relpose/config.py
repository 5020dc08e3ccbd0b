"""
Configuration loading and the Jinja2 report environment.

Scene configs are YAML (or JSON) mappings of SceneConfig fields. Reports are
rendered from the package's ``templates/`` directory with LaTeX-compatible
delimiters, so the same environment serves the LaTeX tables and the plain
text reports.
"""

from pathlib import Path
from typing import Optional, Union
import math

import yaml
from jinja2 import Environment, FileSystemLoader, PackageLoader

from .exceptions import InvalidInputError
from .simulation import SceneConfig


def load_scene_config(path: Union[str, Path]) -> SceneConfig:
    """
    Load a SceneConfig from a YAML or JSON file.

    Args:
        path: File with a mapping of SceneConfig fields

    Returns:
        Validated SceneConfig (fields absent from the file keep their defaults)

    Raises:
        InvalidInputError: If the file is unreadable, not a mapping, has
            unknown keys or invalid values

    Examples:
        >>> cfg = load_scene_config("planar.yaml")
        >>> cfg.planar
        True
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InvalidInputError(f"Cannot read config {path}: {e.strerror}") from e
    except yaml.YAMLError as e:
        raise InvalidInputError(f"Invalid config {path}: {e}") from e
    if data is None:
        return SceneConfig()
    if not isinstance(data, dict):
        raise InvalidInputError(f"Config {path} must contain a mapping")
    return SceneConfig.from_dict(data)


def create_report_environment(custom_template_dir: Optional[Path] = None) -> Environment:
    """
    Create the Jinja2 environment for reports.

    Uses custom delimiters that don't conflict with LaTeX syntax:
    - Variables: ((( variable )))
    - Blocks: ((* if condition *))
    - Comments: ((# comment #))

    Args:
        custom_template_dir: Directory overriding the packaged templates

    Returns:
        Configured Jinja2 Environment instance
    """
    if custom_template_dir:
        loader = FileSystemLoader(custom_template_dir)
    else:
        loader = PackageLoader("vertical_relpose", "templates")

    env = Environment(
        loader=loader,
        block_start_string="((*",
        block_end_string="*))",
        variable_start_string="(((",
        variable_end_string=")))",
        comment_start_string="((#",
        comment_end_string="#))",
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
        # LaTeX is not HTML
        autoescape=False,
    )
    env.filters["latex_escape"] = latex_escape
    env.filters["num"] = format_number
    return env


def latex_escape(text: str) -> str:
    """
    Escape special LaTeX characters in text.

    Escapes the following characters:
    & % $ # _ { } ~ ^ \\

    Examples:
        >>> latex_escape("mean_rot_err_deg")
        'mean\\_rot\\_err\\_deg'
        >>> latex_escape("100% & more")
        '100\\% \\& more'

    Note:
        Backslash must be replaced first to avoid double-escaping.
    """
    if not isinstance(text, str):
        text = str(text)

    BACKSLASH_PLACEHOLDER = "\x00BACKSLASH\x00"
    text = text.replace("\\", BACKSLASH_PLACEHOLDER)

    replacements = {
        "&": r"\&",
        "%": r"\%",
        "$": r"\$",
        "#": r"\#",
        "_": r"\_",
        "{": r"\{",
        "}": r"\}",
        "~": r"\textasciitilde{}",
        "^": r"\^{}",
    }
    for char, escaped in replacements.items():
        text = text.replace(char, escaped)

    return text.replace(BACKSLASH_PLACEHOLDER, r"\textbackslash{}")


def format_number(value: float, digits: int = 4) -> str:
    """
    Compact number formatting for reports; NaN prints as ``--``.

    Examples:
        >>> format_number(0.000123456)
        '0.0001235'
        >>> format_number(float("nan"))
        '--'
    """
    if isinstance(value, float) and math.isnan(value):
        return "--"
    if isinstance(value, int):
        return str(value)
    return f"{value:.{digits}g}" if abs(value) < 1e-3 and value != 0 else f"{value:.{digits}f}"
