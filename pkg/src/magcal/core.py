"""Shared types, magnitude math, error metrics and preprocessing filters.

A field sample (``Vec3``) is a length-3 float array in nT. A series of
samples is stored column-wise in :class:`SampleSeries` as an ``(N,)`` time
vector and an ``(N, 3)`` field array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Vec3 = np.ndarray


class EmptySeriesError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


def as_vec3(v) -> Vec3:
    """Validate and convert ``v`` into a finite float array of shape (3,)."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite vector component in {arr}")
    return arr


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SampleSeries:
    """Time-stamped 3-axis field samples.

    Parameters
    ----------
    t : array_like, shape (N,)
        Strictly increasing timestamps in seconds.
    b : array_like, shape (N, 3)
        Field components in nT.
    sample_rate : float
        Nominal sampling rate in Hz. For uniformly spaced timestamps it must
        agree with the spacing to within 1%.
    label : str
        Free text.
    """

    t: np.ndarray
    b: np.ndarray
    sample_rate: float
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 2 or b.shape[1] != 3:
            raise ValueError(f"samples must have shape (N, 3), got {b.shape}")
        if t.shape[0] != b.shape[0]:
            raise ValueError(f"{t.shape[0]} timestamps for {b.shape[0]} samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(b))):
            raise ValueError("non-finite timestamp or sample")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if t.size > 1:
            dt = np.diff(t)
            if np.any(dt <= 0):
                i = int(np.argmax(dt <= 0))
                raise ValueError(f"timestamps not strictly increasing at index {i + 1}")
            if np.allclose(dt, dt[0], rtol=1e-6, atol=0.0):
                rate = (t.size - 1) / (t[-1] - t[0])
                if abs(rate - self.sample_rate) > 0.01 * self.sample_rate:
                    raise ValueError(
                        f"sample_rate {self.sample_rate} Hz inconsistent with "
                        f"timestamp spacing ({rate:.6g} Hz)"
                    )
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.t.shape[0]

    @classmethod
    def from_samples(cls, b, sample_rate: float, t0: float = 0.0, label: str = ""):
        """Build a uniformly sampled series from an ``(N, 3)`` array."""
        b = np.asarray(b, dtype=float).reshape(-1, 3)
        t = t0 + np.arange(b.shape[0]) / sample_rate
        return cls(t, b, sample_rate, label)

    def with_samples(self, b, label: str | None = None) -> "SampleSeries":
        """Same timestamps and rate, new field values."""
        return SampleSeries(self.t, b, self.sample_rate,
                            self.label if label is None else label)

    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.b, axis=1)


@dataclass(frozen=True)
class MetricReport:
    ptp: float
    variance: float
    mean_magnitude: float
    median_magnitude: float
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "ptp": self.ptp,
            "variance": self.variance,
            "mean_magnitude": self.mean_magnitude,
            "median_magnitude": self.median_magnitude,
            "n_samples": self.n_samples,
        }


def magnitude(v) -> float:
    return float(np.linalg.norm(as_vec3(v)))


def ptp(series: SampleSeries) -> float:
    """Peak-to-peak spread of the sample magnitudes, in nT."""
    if len(series) == 0:
        raise EmptySeriesError("ptp of an empty series")
    m = series.magnitudes()
    return float(m.max() - m.min())


def magnitude_variance(series: SampleSeries) -> float:
    """Population variance (divide by N) of the sample magnitudes, in nT^2."""
    if len(series) < 2:
        raise EmptySeriesError(f"variance needs at least 2 samples, got {len(series)}")
    return float(np.var(series.magnitudes()))


def metric_report(series: SampleSeries) -> MetricReport:
    m = series.magnitudes()
    if m.size == 0:
        raise EmptySeriesError("metrics of an empty series")
    return MetricReport(
        ptp=float(m.max() - m.min()),
        variance=float(np.var(m)) if m.size > 1 else 0.0,
        mean_magnitude=float(m.mean()),
        median_magnitude=float(np.median(m)),
        n_samples=int(m.size),
    )


def rmse(a, b) -> float:
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise EmptySeriesError("rmse of empty sequences")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def normalized_cross_correlation(a, b):
    """Pearson-normalised cross-correlation over all lags.

    ``c[k] = sum_i a'[i] * b'[i + k] / (N * std(a) * std(b))`` with ``a'``,
    ``b'`` mean-removed, so a sequence against itself gives 1 at lag 0.

    Returns
    -------
    lags : ndarray of int, shape (2N - 1,)
        ``-(N - 1) .. N - 1``.
    values : ndarray, shape (2N - 1,)
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    n = a.size
    if b.size != n:
        raise ValueError(f"length mismatch: {n} vs {b.size}")
    if n < 2:
        raise DegenerateInputError("cross-correlation needs at least 2 samples")
    a0 = a - a.mean()
    b0 = b - b.mean()
    sa, sb = a0.std(), b0.std()
    lags = np.arange(-(n - 1), n)
    if sa == 0 and sb == 0:
        raise DegenerateInputError("both sequences are constant")
    if sa == 0 or sb == 0:
        return lags, np.zeros(2 * n - 1)
    c = np.correlate(b0, a0, mode="full") / (n * sa * sb)
    return lags, np.clip(c, -1.0, 1.0)


def window_length(window_seconds: float, sample_rate: float) -> int:
    if not window_seconds > 0:
        raise ValueError(f"window must be positive, got {window_seconds}")
    w = int(round(window_seconds * sample_rate))
    if w < 1:
        raise ValueError(
            f"window of {window_seconds} s is shorter than one sample at {sample_rate} Hz"
        )
    return w


def moving_average(series: SampleSeries, window_seconds: float) -> SampleSeries:
    """Trailing per-component boxcar mean.

    The window spans ``w = round(window_seconds * sample_rate)`` samples; the
    output has ``N - w + 1`` samples stamped with the last timestamp of each
    window.
    """
    w = window_length(window_seconds, series.sample_rate)
    n = len(series)
    if w > n:
        raise ValueError(f"window of {w} samples longer than series of {n}")
    if w == 1:
        return series
    kernel = np.full(w, 1.0 / w)
    out = np.column_stack(
        [np.convolve(series.b[:, k], kernel, mode="valid") for k in range(3)]
    )
    return SampleSeries(series.t[w - 1:], out, series.sample_rate, series.label)
