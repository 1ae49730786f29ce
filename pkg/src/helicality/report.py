"""Report serialization: JSON, score table CSV, and intermediate matrix dumps."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
import tempfile

from .cqt import write_features_csv
from .pipeline import HelicalityReport, embedding_table

REPORT_KEYS = (
    "schema_version",
    "tool_version",
    "backend",
    "generated_at",
    "input_hash",
    "config",
    "warnings",
    "groups",
)
SCORE_COLUMNS = ("group", "n_files", "helicality", "mse", "radius", "a", "b")


def atomic_write(path, text: str):
    """Write ``text`` to a temp file beside ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_to_dict(report: HelicalityReport) -> dict:
    return {k: getattr(report, k) for k in REPORT_KEYS}


def dumps_report(report: HelicalityReport) -> str:
    """Sorted keys, floats at 17 significant digits, non-finite floats as strings."""
    return _encode(report_to_dict(report), 2, 0) + "\n"


def export_json(report: HelicalityReport, path):
    atomic_write(path, dumps_report(report))


def _revive_scores(groups):
    for g in groups:
        for key in ("helicality", "mse"):
            if isinstance(g.get(key), str):
                g[key] = float(g[key])
    return groups


def loads_report(text: str) -> HelicalityReport:
    data = json.loads(text)
    return HelicalityReport(
        config=data["config"],
        groups=_revive_scores(data["groups"]),
        tool_version=data["tool_version"],
        backend=data["backend"],
        input_hash=data["input_hash"],
        schema_version=data["schema_version"],
        generated_at=data["generated_at"],
        warnings=data["warnings"],
    )


def load_report(path) -> HelicalityReport:
    with open(path) as fh:
        return loads_report(fh.read())


def score_rows(report: HelicalityReport):
    """Successful groups sorted by descending helicality, then by name."""
    ok = [g for g in report.groups if "error" not in g]
    ok.sort(key=lambda g: (-g["helicality"], g["group"]))
    return [
        (g["group"], g["n_files"], g["helicality"], g["mse"], g["circle"]["radius"], g["line"]["a"], g["line"]["b"])
        for g in ok
    ]


def _cell(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def dumps_scores(report: HelicalityReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_COLUMNS)
    for row in score_rows(report):
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def export_csv(report: HelicalityReport, path):
    atomic_write(path, dumps_scores(report))


def safe_name(group: str) -> str:
    name = re.sub(r"[^A-Za-z0-9._-]+", "_", group).strip("._")
    return name or "group"


def _matrix_csv(matrix, labels) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_index", *labels])
    for lab, row in zip(labels, matrix):
        w.writerow([lab, *(repr(float(v)) for v in row)])
    return buf.getvalue()


def export_intermediates(report: HelicalityReport, directory):
    """Write ``<group>_{features,rho2,dist,geodesic,embedding}.csv`` per scored group."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, art in report.artifacts.items():
        stem = os.path.join(directory, safe_name(name))
        write_features_csv(art.features, stem + "_features.csv.tmp")
        os.replace(stem + "_features.csv.tmp", stem + "_features.csv")
        labels = [int(b) for b in art.embedding.bin_index]
        for suffix, mat in (("rho2", art.rho2), ("dist", art.distance), ("geodesic", art.geodesic)):
            atomic_write(f"{stem}_{suffix}.csv", _matrix_csv(mat, labels))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_index", "freq_hz", "chroma", "e1", "e2", "e3"])
        for row in embedding_table(art):
            w.writerow([row[0], repr(row[1]), row[2], *(repr(v) for v in row[3:])])
        atomic_write(f"{stem}_embedding.csv", buf.getvalue())
        written.extend(f"{stem}_{s}.csv" for s in ("features", "rho2", "dist", "geodesic", "embedding"))
    return written
