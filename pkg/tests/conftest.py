import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from magcal.core import SampleSeries


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rotation(rng) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def series_of(b, rate=100.0):
    return SampleSeries.from_samples(np.asarray(b, dtype=float).reshape(-1, 3), rate)


def sine_fit_amplitude(t, y, f):
    """Least-squares amplitude of the ``f`` Hz component (independent oracle)."""
    a = np.column_stack([np.sin(2 * np.pi * f * t), np.cos(2 * np.pi * f * t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    return float(np.hypot(coef[0], coef[1]))


def boxcar_gain(f, w, fs):
    """|sin(pi f w / fs) / (w sin(pi f / fs))|."""
    return abs(np.sin(np.pi * f * w / fs) / (w * np.sin(np.pi * f / fs)))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(k: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[k])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
