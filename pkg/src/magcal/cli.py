"""Command-line entry point: ``magcal <command> [options]``.

Exit codes: 0 success, 2 bad arguments, 3 unparseable input, 4 numerical
failure (degenerate geometry, divergence), 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import SampleSeries, metric_report, moving_average
from .coverage import CoverageGrid, coverage
from .ellipsoid import DegenerateGeometryError
from .geocal import CalibrationModel, apply, calibrate_geometric
from .io import CSVParseError, read_series, write_series
from .nncal import TrainConfig, TrainingDivergedError, calibrate_neural, export_model
from .synth import DEFAULT_FIELD, DistortionTruth, SamplingPlan, generate, random_truth
from .sweep import SweepConfig, extrapolate_minutes, run_sweep, summarize, write_table

log = logging.getLogger("magcal")

EXIT_OK, EXIT_ARGS, EXIT_PARSE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5


@dataclass(frozen=True)
class Preset:
    sample_rate: float | None
    window_seconds: float | None


# sampling configurations of the sensor/ADC comparison; window per the 0.1 s optimum
PRESETS = {
    "mag649-3khz": Preset(3000.0, 0.1),
    "mag649-250hz": Preset(250.0, 0.1),
    "mag648-1khz": Preset(1000.0, 0.1),
    "mag648-250hz": Preset(250.0, 0.1),
    "custom": Preset(None, None),
}


class UsageError(Exception):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2, allow_nan=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _window(args) -> float | None:
    if getattr(args, "window_seconds", None) is not None:
        return args.window_seconds if args.window_seconds > 0 else None
    return PRESETS[args.preset].window_seconds


def _load_input(args) -> SampleSeries:
    series = read_series(args.input, PRESETS[args.preset].sample_rate)
    w = _window(args)
    if w:
        series = moving_average(series, w)
    return series


def cmd_simulate(args) -> int:
    preset_rate = PRESETS[args.preset].sample_rate
    rate = args.sample_rate or preset_rate or 3000.0
    if args.random_distortion:
        truth = random_truth(np.random.default_rng(args.seed), args.max_angle_deg,
                             args.max_scale_err, args.max_offset, args.sigma, args.field)
    else:
        truth = DistortionTruth.from_angles(*np.radians(args.angles_deg), scales=args.scales,
                                            hard_iron=args.offset, noise_sigma=args.sigma,
                                            field=args.field)
    plan = SamplingPlan(args.mode, args.n, rate, args.seed, args.coverage, args.rev_rate)
    raw, ideal = generate(truth, plan)
    prefix = Path(args.output)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    write_series(raw, f"{prefix}.raw.csv")
    write_series(ideal, f"{prefix}.ideal.csv")
    _write_json({"truth": truth.to_dict(), "plan": plan.to_dict()}, f"{prefix}.truth.json")
    log.info("wrote %s.{raw,ideal}.csv and %s.truth.json", prefix, prefix)
    return EXIT_OK


def _report_path(args) -> Path:
    if args.report:
        return Path(args.report)
    out = Path(args.output)
    return out.with_name(out.stem + ".report.json")


def cmd_calibrate(args, method: str) -> int:
    raw = _load_input(args)
    before = metric_report(raw)
    extra = {}
    if method == "geo":
        model, after = calibrate_geometric(raw, args.field)
    else:
        cfg = TrainConfig(epochs=args.epochs, learning_rate=args.learning_rate,
                          batch_size=args.batch_size, seed=args.seed, retarget_every=1)
        model, after, train_report = calibrate_neural(raw, cfg, args.field)
        extra["train"] = {k: v for k, v in train_report.to_dict().items() if k != "loss_curve"}
        extra["train"]["loss_curve_tail"] = [float(x) for x in train_report.loss_curve[-10:]]
    model.save(args.output)
    report = {
        "method": method,
        "input": str(args.input),
        "window_seconds": _window(args),
        "target_field": model.target_field,
        "ptp_before": before.ptp,
        "ptp_after": after.ptp,
        "var_before": before.variance,
        "var_after": after.variance,
        "n_samples": after.n_samples,
        "before": before.to_dict(),
        "after": after.to_dict(),
        **extra,
    }
    _write_json(report, _report_path(args))
    log.info("%s: PTP %.4g -> %.4g nT, var %.4g -> %.4g nT^2", method, before.ptp,
             after.ptp, before.variance, after.variance)
    return EXIT_OK


def cmd_apply(args) -> int:
    series = read_series(args.input)
    model = CalibrationModel.load(args.model)
    write_series(apply(model, series), args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    series = _load_input(args)
    if args.model:
        series = apply(CalibrationModel.load(args.model), series)
    _write_json(metric_report(series).to_dict(), args.output)
    return EXIT_OK


def cmd_coverage(args) -> int:
    series = read_series(args.input)
    rep = coverage(series, CoverageGrid(args.n_theta, args.n_phi))
    _write_json(rep.to_dict(include_bald_cells=not args.summary), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    train = TrainConfig(epochs=args.epochs, learning_rate=args.learning_rate,
                        batch_size=args.batch_size, retarget_every=1)
    cfg = SweepConfig(coverages=tuple(args.coverages), sigmas=tuple(args.sigmas),
                      methods=tuple(args.methods.split(",")),
                      seeds=tuple(range(args.seed, args.seed + args.n_seeds)),
                      n_samples=args.n_samples, field=args.field or DEFAULT_FIELD,
                      train=train)
    for m in cfg.methods:
        if m not in ("geo", "nn"):
            raise UsageError(f"unknown method {m!r}")
    rows = run_sweep(cfg, progress=lambda r: log.info(
        "coverage=%.2f sigma=%.2f %s seed=%d ptp=%.4g", r["coverage"], r["sigma"],
        r["method"], r["seed"], r["ptp"]))
    out = Path(args.output)
    write_table(summarize(rows), out)
    write_table(rows, out.with_name(out.stem + ".runs.csv"),
                columns=("coverage", "sigma", "method", "seed", "ptp", "variance", "status"))
    minutes = extrapolate_minutes(args.duration_minutes, args.achieved_coverage,
                                  args.needed_coverage)
    _write_json({
        "rotation_minutes": args.duration_minutes,
        "achieved_coverage": args.achieved_coverage,
        "needed_coverage": args.needed_coverage,
        "extrapolated_minutes": minutes,
    }, out.with_name(out.stem + ".extrapolation.json"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="magcal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def io_opts(sp, model_out=False):
        sp.add_argument("--input", required=True)
        sp.add_argument("--output", required=model_out, default=None)
        sp.add_argument("--preset", choices=sorted(PRESETS), default="custom")
        sp.add_argument("--window-seconds", type=float, default=None,
                        help="moving-average width; 0 disables, overrides the preset")

    s = sub.add_parser("simulate", help="generate distorted synthetic data")
    s.add_argument("--output", required=True, help="path prefix for .raw.csv/.ideal.csv/.truth.json")
    s.add_argument("--n", type=_positive_int, default=100_000)
    s.add_argument("--mode", choices=("uniform_full", "uniform_cap", "trajectory"),
                   default="uniform_full")
    s.add_argument("--coverage", type=float, default=1.0)
    s.add_argument("--rev-rate", type=_positive_float, default=1.0)
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--field", type=_positive_float, default=DEFAULT_FIELD)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--preset", choices=sorted(PRESETS), default="custom")
    s.add_argument("--sample-rate", type=_positive_float, default=None)
    s.add_argument("--angles-deg", type=float, nargs=3, default=(0.5, 0.5, 0.5),
                   metavar=("V12", "V13", "V23"))
    s.add_argument("--scales", type=float, nargs=3, default=(1.003, 0.997, 1.002))
    s.add_argument("--offset", type=float, nargs=3, default=(200.0, -150.0, 80.0))
    s.add_argument("--random-distortion", action="store_true")
    s.add_argument("--max-angle-deg", type=float, default=1.0)
    s.add_argument("--max-scale-err", type=float, default=0.005)
    s.add_argument("--max-offset", type=float, default=10.0)
    s.set_defaults(func=cmd_simulate)

    for name, method in (("calibrate-geo", "geo"), ("calibrate-nn", "nn")):
        c = sub.add_parser(name, help=f"fit a calibration model ({method})")
        io_opts(c, model_out=True)
        c.add_argument("--report", default=None, help="metrics JSON (default <output>.report.json)")
        c.add_argument("--field", type=_positive_float, default=None,
                       help="target field in nT (default: median raw magnitude)")
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--epochs", type=_positive_int, default=300)
        c.add_argument("--learning-rate", type=_positive_float, default=0.1)
        c.add_argument("--batch-size", type=_positive_int, default=256)
        c.set_defaults(func=lambda a, m=method: cmd_calibrate(a, m))

    # the generic spelling with --method
    c = sub.add_parser("calibrate", help="fit a calibration model (--method geo|nn)")
    io_opts(c, model_out=True)
    c.add_argument("--method", choices=("geo", "nn"), default="geo")
    c.add_argument("--report", default=None)
    c.add_argument("--field", type=_positive_float, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--epochs", type=_positive_int, default=300)
    c.add_argument("--learning-rate", type=_positive_float, default=0.1)
    c.add_argument("--batch-size", type=_positive_int, default=256)
    c.set_defaults(func=lambda a: cmd_calibrate(a, a.method))

    a = sub.add_parser("apply", help="apply a calibration model to a CSV")
    a.add_argument("--input", required=True)
    a.add_argument("--model", required=True)
    a.add_argument("--output", required=True)
    a.set_defaults(func=cmd_apply)

    e = sub.add_parser("evaluate", help="PTP / variance of a series (optionally calibrated)")
    io_opts(e)
    e.add_argument("--model", default=None)
    e.set_defaults(func=cmd_evaluate)

    v = sub.add_parser("coverage", help="sphere coverage of the sample directions")
    v.add_argument("--input", required=True)
    v.add_argument("--output", default=None)
    v.add_argument("--n-theta", type=_positive_int, default=500)
    v.add_argument("--n-phi", type=_positive_int, default=400)
    v.add_argument("--summary", action="store_true", help="omit the bald-cell list")
    v.set_defaults(func=cmd_coverage)

    w = sub.add_parser("sweep", help="PTP/variance versus coverage and noise")
    w.add_argument("--output", required=True, help="summary CSV path")
    w.add_argument("--coverages", type=_float_list,
                   default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    w.add_argument("--sigmas", type=_float_list, default=[0.1, 0.3])
    w.add_argument("--methods", default="geo,nn")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--n-seeds", type=_positive_int, default=5)
    w.add_argument("--n-samples", type=_positive_int, default=100_000)
    w.add_argument("--field", type=_positive_float, default=None)
    w.add_argument("--epochs", type=_positive_int, default=60)
    w.add_argument("--learning-rate", type=_positive_float, default=0.1)
    w.add_argument("--batch-size", type=_positive_int, default=256)
    w.add_argument("--duration-minutes", type=_positive_float, default=2.0)
    w.add_argument("--achieved-coverage", type=_positive_float, default=0.26)
    w.add_argument("--needed-coverage", type=_positive_float, default=0.6)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (CSVParseError, json.JSONDecodeError, KeyError) as exc:
        print(f"magcal: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"magcal: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateGeometryError, TrainingDivergedError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"magcal: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
