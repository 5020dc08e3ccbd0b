#!/usr/bin/env python3
"""
Validates syntax of all report templates.

Checks every *.j2 file in src/vertical_relpose/templates/ (or a custom
directory) for Jinja2 syntax errors using the report environment, so the
custom delimiters and the latex_escape / num filters are in place.

Usage:
    uv run python dev/scripts/check_templates.py                # packaged templates
    uv run python dev/scripts/check_templates.py my_templates/  # custom directory
"""
import sys
from pathlib import Path

# Add src to path to import the report environment
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'src'))
from vertical_relpose.config import create_report_environment


def check_templates(template_dir: Path | None = None) -> bool:
    """
    Validate all templates for syntax errors.

    Args:
        template_dir: Optional directory to check instead of the packaged one.

    Returns:
        True if all templates pass validation, False otherwise.
    """
    if template_dir is not None and not template_dir.is_dir():
        print(f"✗ Templates directory not found: {template_dir}")
        return False

    env = create_report_environment(template_dir)
    names = sorted(n for n in env.list_templates() if n.endswith('.j2'))
    if not names:
        print("✗ No .j2 templates found")
        return False

    errors = []
    for name in names:
        try:
            env.get_template(name)
            print(f"  ✓ {name}")
        except Exception as e:
            errors.append((name, str(e)))
            print(f"  ✗ {name}: {e}")

    print(f"\nTemplates checked: {len(names)}, failed: {len(errors)}")
    if errors:
        return False
    print("✓ All templates are syntactically correct!")
    return True


if __name__ == '__main__':
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else None
    sys.exit(0 if check_templates(target) else 1)
