"""CSV sample files: header ``t,bx,by,bz``, seconds and nT, ``#`` comments.

Writers emit ``# sample_rate=<Hz>`` and ``# label=<text>`` comment lines so a
file round-trips exactly; readers fall back to inferring the rate from the
timestamps when the comment is absent.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import SampleSeries

HEADER = ("t", "bx", "by", "bz")


class CSVParseError(ValueError):
    def __init__(self, path, line: int, msg: str):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = path
        self.line = line


def write_series(series: SampleSeries, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# sample_rate={series.sample_rate!r}\n")
        if series.label:
            fh.write(f"# label={series.label}\n")
        fh.write(",".join(HEADER) + "\n")
        # tolist() gives Python floats whose repr round-trips exactly
        for t, (x, y, z) in zip(series.t.tolist(), series.b.tolist()):
            fh.write(f"{t!r},{x!r},{y!r},{z!r}\n")


def read_series(path, sample_rate: float | None = None) -> SampleSeries:
    """Parse a sample CSV; errors carry the offending line number."""
    path = Path(path)
    meta: dict[str, str] = {}
    rows = []
    header_seen = False
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                key, sep, val = s[1:].strip().partition("=")
                if sep:
                    meta[key.strip()] = val.strip()
                continue
            fields = [f.strip() for f in s.split(",")]
            if not header_seen:
                if tuple(fields) != HEADER:
                    raise CSVParseError(path, lineno, f"expected header {','.join(HEADER)}, got {s!r}")
                header_seen = True
                continue
            if len(fields) != 4:
                raise CSVParseError(path, lineno, f"expected 4 fields, got {len(fields)}")
            try:
                vals = [float(f) for f in fields]
            except ValueError as exc:
                raise CSVParseError(path, lineno, str(exc)) from None
            if not all(np.isfinite(vals)):
                raise CSVParseError(path, lineno, "non-finite value")
            rows.append(vals)
    if not header_seen:
        raise CSVParseError(path, 0, "missing header line")
    if not rows:
        raise CSVParseError(path, 0, "no samples")
    data = np.array(rows)
    t = data[:, 0]
    if np.any(np.diff(t) <= 0):
        i = int(np.argmax(np.diff(t) <= 0))
        raise CSVParseError(path, _data_line(path, i + 1), "timestamps not strictly increasing")
    if sample_rate is None:
        if "sample_rate" in meta:
            try:
                sample_rate = float(meta["sample_rate"])
            except ValueError:
                raise CSVParseError(path, 0, f"bad sample_rate {meta['sample_rate']!r}") from None
        elif len(t) > 1:
            sample_rate = (len(t) - 1) / (t[-1] - t[0])
        else:
            sample_rate = 1.0
    return SampleSeries(t, data[:, 1:], sample_rate, meta.get("label", path.stem))


def _data_line(path: Path, index: int) -> int:
    """Physical line number of the ``index``-th data row (0-based)."""
    seen = -1
    header = False
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if not header:
                header = True
                continue
            seen += 1
            if seen == index:
                return lineno
    return 0
