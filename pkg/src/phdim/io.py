"""CSV and TOML plumbing. Every CSV written here starts with ``# key=value``
comment lines so outputs carry the config hash and master seed."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import sys
from pathlib import Path

import numpy as np

from .geometry import EmptyInputError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    """Shortest round-trip text for a CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return "" if v is None else str(v)


def _meta_lines(meta) -> str:
    if not meta:
        return ""
    return "".join(f"# {k}={fmt(v)}\n" for k, v in meta.items())


def write_csv(path, fieldnames, rows, meta=None) -> Path:
    """Write dict rows in column order; ``meta`` becomes comment lines on top."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(_meta_lines(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fieldnames)
    for row in rows:
        w.writerow([fmt(row[k]) for k in fieldnames])
    path.write_text(buf.getvalue())
    return path


def read_comments(path) -> dict:
    """``# key=value`` lines at the top of a CSV."""
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            for part in body.split():
                if "=" in part:
                    k, v = part.split("=", 1)
                    meta[k] = v
    return meta


def ingest_point_cloud(path) -> np.ndarray:
    """Read a point-cloud CSV (header ``x1,...,xm``, one point per row)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    rows = []
    width = None
    header_seen = False
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            if not header_seen:
                header_seen = True
                try:
                    [float(c) for c in row]
                except ValueError:
                    width = len(row)
                    continue
            if width is None:
                width = len(row)
            if len(row) != width:
                raise ValueError(
                    f"line {lineno}: expected {width} columns, found {len(row)}"
                )
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise ValueError(f"line {lineno}: malformed number in {row!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"line {lineno}: non-finite coordinate in {row!r}")
            rows.append(vals)
    if not rows:
        raise EmptyInputError("empty input")
    return np.asarray(rows, dtype=np.float64)


def write_point_cloud(path, cloud, meta=None) -> Path:
    x = np.asarray(cloud, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    names = [f"x{k + 1}" for k in range(x.shape[1])]
    return write_csv(path, names, (dict(zip(names, r)) for r in x), meta)


def write_edges(path, lengths, meta=None) -> Path:
    return write_csv(path, ["edge_length"], ({"edge_length": v} for v in lengths), meta)


def write_barcode(path, barcode, meta=None) -> Path:
    meta = dict(meta or {})
    t = barcode.truncated_at
    meta["truncated_at"] = "none" if t is None else fmt(t)
    rows = []
    for deg in sorted(barcode.intervals):
        for b, d in barcode.intervals[deg]:
            rows.append({"degree": deg, "birth": b, "death": d})
    return write_csv(path, ["degree", "birth", "death"], rows, meta)


def load_config(path):
    """Parse a TOML config; returns ``(dict, sha256 hex of the file bytes)``."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        cfg = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    return cfg, hashlib.sha256(raw).hexdigest()


def config_hash(cfg: dict) -> str:
    """Hash of a config given as a dict (canonical, key-sorted repr)."""
    def canon(v):
        if isinstance(v, dict):
            return "{" + ",".join(f"{k}:{canon(v[k])}" for k in sorted(v)) + "}"
        if isinstance(v, (list, tuple)):
            return "[" + ",".join(canon(x) for x in v) + "]"
        return fmt(v)

    return hashlib.sha256(canon(cfg).encode()).hexdigest()
