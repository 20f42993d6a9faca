"""CSV ingestion/emission and flat key-value config files."""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, SchemaError, SeriesValidationError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SERIES_COLUMNS = ("region", "date", "cases", "confinement", "vaccination50")
WEEK = dt.timedelta(days=7)


@dataclass
class ObservedSeries:
    region_id: str
    dates: list[dt.date]
    y: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.c1 = np.asarray(self.c1, dtype=float)
        self.c2 = np.asarray(self.c2, dtype=float)
        n = len(self.dates)
        if not (len(self.y) == len(self.c1) == len(self.c2) == n):
            raise SeriesValidationError(f"region {self.region_id}: column lengths differ")
        for a, b in zip(self.dates, self.dates[1:]):
            if b - a != WEEK:
                raise SeriesValidationError(f"non-contiguous series at {a + WEEK if b > a else b}")
        if not np.all(np.isfinite(self.y)) or np.any(self.y < 0):
            raise SeriesValidationError(f"region {self.region_id}: counts must be finite and non-negative")

    def __len__(self):
        return len(self.y)


# --- comment headers -------------------------------------------------------

def toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "nan" if math.isnan(v) else repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(toml_value(x) for x in v) + "]"
    if isinstance(v, dict):
        raise ConfigError("nested tables are not supported in flat configs")
    return json.dumps(str(v))


def header_lines(echo: dict) -> str:
    return "".join(f"# {k} = {toml_value(v)}\n" for k, v in echo.items())


def read_header(path) -> dict:
    """Parse the leading ``# key = value`` comment block of an output file."""
    lines = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            lines.append(line[1:].strip())
    try:
        return tomllib.loads("\n".join(lines))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"unreadable header in {path}: {exc}") from None


def load_config(path) -> dict:
    """Flat ``key = value`` config (a TOML subset). Nested tables are rejected."""
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    nested = [k for k, v in cfg.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"{path}: nested tables not allowed: {nested}")
    return cfg


def _data_lines(path):
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.startswith("#") or not line.strip():
                continue
            yield lineno, line


# --- series files ----------------------------------------------------------

def load_series(path) -> list[ObservedSeries]:
    """Read ``region,date,cases,confinement,vaccination50`` rows, one series per region."""
    rows = list(_data_lines(path))
    if not rows:
        raise SchemaError(f"schema error: {path} is empty")
    reader = csv.reader([line for _, line in rows])
    header = [h.strip() for h in next(reader)]
    for col in SERIES_COLUMNS:
        if col not in header:
            raise SchemaError(f"schema error: missing column '{col}'")
    pos = {c: header.index(c) for c in SERIES_COLUMNS}
    by_region: dict[str, list] = {}
    for (lineno, _), rec in zip(rows[1:], reader):
        if len(rec) != len(header):
            raise SchemaError(f"schema error: row {lineno} has {len(rec)} fields, expected {len(header)}")
        region = rec[pos["region"]].strip()
        try:
            date = dt.date.fromisoformat(rec[pos["date"]].strip())
        except ValueError:
            raise SeriesValidationError(f"invalid date at row {lineno}: {rec[pos['date']]!r}") from None
        try:
            cases = float(rec[pos["cases"]])
        except ValueError:
            cases = math.nan
        if not math.isfinite(cases) or cases < 0:
            raise SeriesValidationError(f"invalid count at row {lineno}")
        flags = []
        for col in ("confinement", "vaccination50"):
            v = rec[pos[col]].strip()
            if v not in ("0", "1"):
                raise SeriesValidationError(f"invalid {col} indicator at row {lineno}: {v!r}")
            flags.append(float(v))
        by_region.setdefault(region, []).append((date, cases, *flags, lineno))
    out = []
    for region, recs in by_region.items():
        recs.sort(key=lambda r: r[0])
        for a, b in zip(recs, recs[1:]):
            if a[0] == b[0]:
                raise SeriesValidationError(f"duplicate date {b[0]} at row {b[4]}")
            if b[0] - a[0] != WEEK:
                raise SeriesValidationError(f"non-contiguous series at {a[0] + WEEK}")
        out.append(ObservedSeries(region, [r[0] for r in recs], [r[1] for r in recs],
                                  [r[2] for r in recs], [r[3] for r in recs]))
    return out


def series_csv(series: list[ObservedSeries]) -> str:
    """Canonical CSV text: floats as shortest round-trip repr, indicators as 0/1."""
    buf = io.StringIO()
    buf.write(",".join(SERIES_COLUMNS) + "\n")
    for s in series:
        for d, y, a, b in zip(s.dates, s.y, s.c1, s.c2):
            buf.write(f"{s.region_id},{d.isoformat()},{float(y)!r},{int(a)},{int(b)}\n")
    return buf.getvalue()


def write_text(path, body: str, echo: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if echo:
            fh.write(header_lines(echo))
        fh.write(body)
    return path


def write_series(path, series: list[ObservedSeries], echo: dict | None = None) -> Path:
    return write_text(path, series_csv(series), echo)


def table_csv(columns, rows) -> str:
    """CSV text of a numeric table; floats use their round-trip repr."""
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in row) + "\n")
    return buf.getvalue()


def read_table(path) -> tuple[list[str], list[list[str]]]:
    reader = csv.reader([line for _, line in _data_lines(path)])
    header = next(reader, None)
    if header is None:
        raise SchemaError(f"schema error: {path} is empty")
    return header, [r for r in reader if r]
