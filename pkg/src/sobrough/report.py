"""JSON report assembly and serialisation.

Numbers are written as decimals with 17 significant digits so values
round-trip bit-faithfully; non-finite floats become null.  Key order is
insertion order, which together with seeded computation makes reports
byte-identical across runs.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from importlib import resources

import numpy as np

from . import __version__
from ._kernels import BACKEND


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e15:
        # keep integral floats compact but unambiguous
        return f"{x:.1f}"
    return f"{x:.17g}"


def dumps(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        parts = [f"{inner}{dumps(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(parts) + f"\n{pad}]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    return json.dumps(str(obj))


def build_report(config: dict, results: dict, provenance: dict,
                 diagnostics: dict | None = None) -> dict:
    diag = {"backend": BACKEND, "provenance": provenance}
    diag.update(diagnostics or {})
    return {"config": config, "results": results, "diagnostics": diag,
            "version": __version__}


def write_report(report: dict, out: str | None) -> None:
    """Serialise to stdout or atomically to a file."""
    text = dumps(report) + "\n"
    if out is None or out == "-":
        print(text, end="")
        return
    directory = os.path.dirname(os.path.abspath(out)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_schema() -> dict:
    with resources.files("sobrough").joinpath("schema/report.schema.json").open() as fh:
        return json.load(fh)
