"""
Reports: CSV experiment records and Jinja2-rendered LaTeX / text.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Union
import csv
import io

from jinja2 import TemplateNotFound

from .config import create_report_environment
from .exceptions import RenderError
from .simulation import CSV_COLUMNS, ExperimentRecord
from .solver import SelfTestReport

LEVEL_LABELS = {"sigma": "sigma (px)", "vertical_error": "vertical error (deg)"}


def _cell(value: Any) -> str:
    # repr keeps the shortest round-trip form of a float
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_csv(record: ExperimentRecord, stream: TextIO) -> None:
    """Write the record as CSV: one header row, one row per sweep level."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in record.rows:
        writer.writerow([_cell(v) for v in row.as_tuple()])


def record_to_csv(record: ExperimentRecord, output: Optional[Union[str, Path]] = None) -> str:
    """
    CSV text of an experiment record, optionally saved to ``output``.

    Examples:
        >>> text = record_to_csv(run_noise_sweep(SceneConfig(trials=10), [0.0, 0.5]))
        >>> text.splitlines()[0].split(",")[:2]
        ['sigma_or_vertical_err', 'mean_rot_err_deg']
    """
    buf = io.StringIO()
    write_csv(record, buf)
    text = buf.getvalue()
    if output:
        output_path = Path(output)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(text, encoding="utf-8")
    return text


class ReportRenderer:
    """
    Renders reports from the packaged Jinja2 templates.

    Attributes:
        env: Jinja2 Environment instance
        custom_template_dir: Directory overriding the packaged templates, if any
    """

    def __init__(self, custom_template_dir: Optional[Path] = None):
        self.custom_template_dir = custom_template_dir
        self.env = create_report_environment(custom_template_dir)

    def render(
        self,
        template_name: str,
        context: Dict[str, Any],
        output: Optional[Union[str, Path]] = None,
    ) -> str:
        """
        Render one template.

        Raises:
            RenderError: If the template is missing or rendering fails
        """
        try:
            template = self.env.get_template(template_name)
        except TemplateNotFound as e:
            available = ", ".join(self.list_templates())
            raise RenderError(
                f"Report template '{template_name}' not found. Available: {available}"
            ) from e
        try:
            result = template.render(**context)
        except Exception as e:
            raise RenderError(f"Failed to render '{template_name}': {e}") from e

        if output:
            output_path = Path(output)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            output_path.write_text(result, encoding="utf-8")
        return result

    def list_templates(self) -> List[str]:
        return sorted(n for n in self.env.list_templates() if n.endswith(".j2"))

    def record_latex(
        self,
        record: ExperimentRecord,
        caption: Optional[str] = None,
        output: Optional[Union[str, Path]] = None,
    ) -> str:
        """LaTeX table of an experiment record (errors in degrees)."""
        from . import __version__

        cfg = record.config
        if caption is None:
            kind = "planar" if cfg.planar else "general"
            caption = (
                f"Pose errors vs {LEVEL_LABELS[record.parameter]}, "
                f"{cfg.motion} motion, {kind} scene, {cfg.trials} trials"
            )
        context = {
            "version": __version__,
            "config": cfg,
            "rows": record.rows,
            "level_label": LEVEL_LABELS[record.parameter],
            "caption": caption,
        }
        return self.render("record.tex.j2", context, output)

    def selftest_text(self, report: SelfTestReport) -> str:
        return self.render("selftest.txt.j2", {"report": report})
