"""Jinja2 rendering of the bundled text templates (BER plot script).

Example:
    >>> from src.utils.templates import TemplateRenderer, emit_plot_script
    >>> renderer = TemplateRenderer()
    >>> script = renderer.render("plot_ber.py", {"series": [], "csv_path": "ber.csv"})
    >>> emit_plot_script(records, Path("results/plot_ber.py"), csv_path=Path("results/ber.csv"))
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from jinja2 import Environment, StrictUndefined, TemplateSyntaxError, UndefinedError

from src.phy.modem import DISPLAY_NAMES
from src.runner import BerRecord
from src.utils.storage import write_text

logger = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).resolve().parent.parent / "templates"


class TemplateNotFoundError(Exception):
    """Template file does not exist in the templates folder."""

    def __init__(self, name: str, path: Path) -> None:
        self.name = name
        self.path = path
        super().__init__(f"Template not found for '{name}': {path}")


class TemplateRenderError(Exception):
    """Rendering failed: missing variable, syntax error or unreadable file."""

    pass


class TemplateRenderer:
    """Loads and renders Jinja2 templates from a folder.

    Example:
        >>> renderer = TemplateRenderer()
        >>> text = renderer.render("plot_ber.py", context)
    """

    def __init__(self, templates_dir: Path = TEMPLATES_DIR) -> None:
        self._dir = templates_dir
        self._env = Environment(
            undefined=StrictUndefined,
            autoescape=False,
            keep_trailing_newline=True,
        )

    def resolve(self, name: str) -> Path:
        """Path of <name>.j2 inside the templates folder.

        Raises:
            TemplateNotFoundError: File missing.
        """
        path = self._dir / f"{name}.j2"
        if not path.exists():
            raise TemplateNotFoundError(name, path)
        return path

    def render(self, name: str, context: dict[str, Any]) -> str:
        """Render template with given context.

        Raises:
            TemplateNotFoundError: Template file not found.
            TemplateRenderError: Missing variable, syntax error or IO error.
        """
        path = self.resolve(name)
        logger.debug("Template path resolved: %s", path)

        try:
            source = path.read_text(encoding="utf-8")
        except OSError as e:
            raise TemplateRenderError(f"Cannot read '{name}': {e}") from e

        try:
            template = self._env.from_string(source)
        except TemplateSyntaxError as e:
            raise TemplateRenderError(f"Syntax error in '{name}': {e.message}") from e

        try:
            return template.render(context)
        except UndefinedError as e:
            raise TemplateRenderError(f"Missing variable in '{name}': {e}") from e


def plot_series(records: Sequence[BerRecord]) -> list[dict[str, Any]]:
    """One series per modulation in first-appearance order, points by SNR.

    Zero-error points are left out because a log axis cannot show them.
    """
    grouped: dict[str, list[BerRecord]] = {}
    for record in records:
        grouped.setdefault(record.modulation, []).append(record)
    series = []
    for name, group in grouped.items():
        ordered = sorted(group, key=lambda r: r.snr_db)
        points = [(f"{r.snr_db:g}", f"{r.ber:.5e}") for r in ordered if r.bit_errors > 0]
        series.append(
            {
                "key": name,
                "label": DISPLAY_NAMES.get(name, name),
                "snr": [p[0] for p in points],
                "ber": [p[1] for p in points],
            }
        )
    return series


def emit_plot_script(
    records: Sequence[BerRecord],
    path: Path,
    csv_path: Path | None = None,
    renderer: TemplateRenderer | None = None,
) -> None:
    """Write a standalone matplotlib script plotting BER against SNR.

    The script embeds the series and, when csv_path is given, prefers the
    CSV at run time. Identical records always give identical bytes.

    Raises:
        TemplateRenderError: Template failed to render.
        StorageIOError: Script could not be written.
    """
    renderer = renderer or TemplateRenderer()
    detectors = sorted({r.detector for r in records})
    text = renderer.render(
        "plot_ber.py",
        {
            "series": plot_series(records),
            "csv_path": csv_path.as_posix() if csv_path is not None else "",
            "detector": ", ".join(detectors),
        },
    )
    write_text(path, text)
    logger.info("Plot script written to %s", path)
