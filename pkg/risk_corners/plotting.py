"""Plot scripts written next to CSV outputs.

The package never imports matplotlib. Instead it writes a small script that
reads the CSV and draws the figure, so plots can be rebuilt or restyled
without rerunning a computation.
"""

import logging
from pathlib import Path
from string import Template

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / "templates"


def read_template(kind: str = "line") -> Template:
    """Load ``templates/plot_<kind>.txt``."""
    file_path = TEMPLATE_DIR / f"plot_{kind}.txt"
    try:
        return Template(file_path.read_text())
    except FileNotFoundError:
        raise ValueError(f"Plot template '{kind}' not found at {file_path}")


def write_plot_script(
    csv_path: Path,
    x: str,
    y: str,
    title: str = "",
    group: str | None = None,
    script_path: Path | None = None,
) -> Path:
    """Write a matplotlib script for ``csv_path`` and return its path.

    With ``group`` one step line is drawn per distinct value of that column.
    """
    csv_path = Path(csv_path)
    script_path = Path(script_path or csv_path.with_suffix(".plot.py"))
    template = read_template("grouped" if group else "line")
    script = template.substitute(
        csv_name=csv_path.name, x=x, y=y, group=group or "", title=title or f"{y} vs {x}"
    )
    script_path.write_text(script)
    logger.info("wrote plot script %s", script_path)
    return script_path
