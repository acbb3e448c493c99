"""Scalar calibration of 3-axis magnetometers.

Two interchangeable pipelines produce the same affine correction
``h_c = M (h_r - b)``: an algebraic ellipsoid fit (:mod:`magcal.geocal`) and
a small linear network (:mod:`magcal.nncal`). :mod:`magcal.synth` simulates
distorted sensor data and :mod:`magcal.coverage` measures how much of the
direction sphere a recording visits.
"""

__version__ = "0.1.0"

from .core import (MetricReport, SampleSeries, magnitude, magnitude_variance,
                   metric_report, moving_average, normalized_cross_correlation, ptp, rmse)
from .coverage import CoverageGrid, CoverageReport, coverage
from .ellipsoid import EllipsoidParams, QuadricCoefficients, extract_ellipsoid, fit_quadric
from .geocal import (CalibrationModel, apply, build_correction, calibrate_geometric,
                     estimate_field_magnitude)
from .nncal import (LinearNet, TrainConfig, TrainReport, calibrate_neural, export_model,
                    forward, init_net, train)
from .project import TrainingPairs, build_training_pairs, project_to_sphere
from .synth import DistortionTruth, SamplingPlan, generate, sample_directions, soft_iron_from_angles
