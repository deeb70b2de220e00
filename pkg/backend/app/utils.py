import csv
import io
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt
from jinja2 import Template


def render_template(*, template_name: str, context: dict[str, Any]) -> str:
    template_str = (Path(__file__).parent / "templates" / template_name).read_text()
    return Template(template_str, keep_trailing_newline=True).render(context)


def fmt(x: float) -> str:
    """12 significant digits, locale independent."""
    return format(float(x), ".12g")


def fmt_matrix(matrix: npt.ArrayLike) -> str:
    """Nested list, row-major, parseable as JSON."""
    rows = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    return "[" + ", ".join("[" + ", ".join(fmt(x) for x in row) + "]" for row in rows) + "]"


def fmt_vector(vector: npt.ArrayLike) -> str:
    return "[" + ", ".join(fmt(x) for x in np.ravel(vector)) + "]"


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()
