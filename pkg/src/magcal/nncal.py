"""Linear 3-3-3-3 network calibration.

The network works on field-normalised coordinates (samples divided by the
field magnitude). Both layers are linear, so the whole net collapses to one
affine map ``x @ (W1 @ W2) + (b1 @ W2 + b2)`` which :func:`export_model`
turns into a :class:`~magcal.geocal.CalibrationModel`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import MetricReport, SampleSeries, metric_report
from .geocal import CalibrationModel, apply, estimate_field_magnitude
from .project import TrainingPairs, build_training_pairs, project_points

N_HIDDEN = 6


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class LinearNet:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        for name, shape in (("w1", (3, 3)), ("b1", (3,)), ("w2", (3, 3)), ("b2", (3,))):
            a = np.array(getattr(self, name), dtype=float).reshape(shape)
            if not np.all(np.isfinite(a)):
                raise ValueError(f"non-finite parameters in {name}")
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @classmethod
    def identity(cls) -> "LinearNet":
        return cls(np.eye(3), np.zeros(3), np.eye(3), np.zeros(3))

    def affine(self) -> tuple[np.ndarray, np.ndarray]:
        """Collapsed ``(W, c)`` with ``forward(x) = x @ W + c``."""
        return self.w1 @ self.w2, self.b1 @ self.w2 + self.b2

    def to_dict(self) -> dict:
        return {
            "w1": self.w1.reshape(9).tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.reshape(9).tolist(),
            "b2": self.b2.tolist(),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearNet":
        return cls(np.reshape(d["w1"], (3, 3)), d["b1"],
                   np.reshape(d["w2"], (3, 3)), d["b2"], d.get("seed"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "LinearNet":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent settings.

    ``retarget_every`` > 0 re-projects the current network outputs onto the
    unit sphere every that many epochs and uses them as the new targets; 0
    keeps the initial pairs fixed.
    """

    epochs: int = 3000
    learning_rate: float = 0.1
    dropout_count: int = 2
    dropout_period: int = 30
    batch_size: int = 256
    seed: int = 0
    retarget_every: int = 0
    retarget_hold: int = 2

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.dropout_count < N_HIDDEN:
            raise ValueError(f"dropout_count must be in [0, {N_HIDDEN})")
        if self.epochs < 0 or self.batch_size < 1 or self.dropout_period < 1:
            raise ValueError("epochs >= 0, batch_size >= 1 and dropout_period >= 1 required")
        if self.retarget_every < 0:
            raise ValueError("retarget_every must be >= 0")


@dataclass(frozen=True, eq=False)
class TrainReport:
    loss_curve: np.ndarray  # per-epoch mean batch MSE, nT^2
    final_loss: float       # full-network MSE after training, nT^2
    epochs_run: int
    seed: int
    initial_loss: float = math.nan

    def to_dict(self) -> dict:
        return {
            "loss_curve": [float(x) for x in self.loss_curve],
            "final_loss": self.final_loss,
            "initial_loss": self.initial_loss,
            "epochs_run": self.epochs_run,
            "seed": self.seed,
        }


def init_net(seed: int) -> LinearNet:
    """Weights ~ U(-1/sqrt(3), 1/sqrt(3)), zero biases."""
    rng = np.random.default_rng(seed)
    lim = 1.0 / math.sqrt(3.0)
    w1 = rng.uniform(-lim, lim, (3, 3))
    w2 = rng.uniform(-lim, lim, (3, 3))
    return LinearNet(w1, np.zeros(3), w2, np.zeros(3), seed)


def forward(net: LinearNet, v) -> np.ndarray:
    """Evaluate the network on one ``(3,)`` vector or an ``(N, 3)`` batch."""
    v = np.asarray(v, dtype=float)
    return (v @ net.w1 + net.b1) @ net.w2 + net.b2


def mse_and_grads(params, x, y, m1=None, m2=None):
    """MSE over all output components and its gradients.

    ``params`` is ``(w1, b1, w2, b2)``; ``m1``/``m2`` are optional per-neuron
    multipliers on the two hidden layers (dropout masks, already scaled).
    Returns ``(loss, (dw1, db1, dw2, db2))``.
    """
    w1, b1, w2, b2 = params
    h1 = x @ w1 + b1
    if m1 is not None:
        h1 = h1 * m1
    h2 = h1 @ w2 + b2
    if m2 is not None:
        h2 = h2 * m2
    r = h2 - y
    loss = float(np.mean(r * r))
    g2 = (2.0 / r.size) * r
    if m2 is not None:
        g2 = g2 * m2
    dw2 = h1.T @ g2
    db2 = g2.sum(axis=0)
    g1 = g2 @ w2.T
    if m1 is not None:
        g1 = g1 * m1
    dw1 = x.T @ g1
    db1 = g1.sum(axis=0)
    return loss, (dw1, db1, dw2, db2)


def _dropout_masks(rng: np.random.Generator, k: int):
    keep = np.full(N_HIDDEN, N_HIDDEN / (N_HIDDEN - k))
    keep[rng.choice(N_HIDDEN, size=k, replace=False)] = 0.0
    return keep[:3], keep[3:]


def _full_loss(w1, b1, w2, b2, x, y) -> float:
    r = (x @ w1 + b1) @ w2 + b2 - y
    return float(np.mean(r * r))


def train(pairs: TrainingPairs, cfg: TrainConfig = TrainConfig(),
          net: LinearNet | None = None) -> tuple[LinearNet, TrainReport]:
    """Mini-batch gradient descent on the MSE between outputs and targets.

    Every ``dropout_period``-th epoch (not the first) ``dropout_count`` of the
    six hidden neurons are zeroed for that epoch, survivors scaled by
    ``6 / (6 - dropout_count)``. Batches are reshuffled each epoch from the
    config seed, so a run is reproducible bit for bit.
    """
    if len(pairs) == 0:
        raise ValueError("no training pairs")
    scale = pairs.field
    x = pairs.inputs.b / scale
    y = pairs.targets.b / scale
    net = init_net(cfg.seed) if net is None else net
    # train on standardised inputs; exact reparametrisation of layer 1:
    # x @ w1 + b1 == xs @ (s * w1) + (b1 + mu @ w1) with xs = (x - mu) / s
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    x = (x - mu) / sd
    w1 = sd[:, None] * net.w1
    b1 = net.b1 + mu @ net.w1
    w2, b2 = np.array(net.w2), np.array(net.b2)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    n = x.shape[0]
    lr = cfg.learning_rate
    bs = cfg.batch_size

    initial = _full_loss(w1, b1, w2, b2, x, y)
    # floor by the target energy so a perfect start cannot trip the check
    blowup = 1e6 * max(initial, float(np.mean(y * y)))
    curve = np.empty(cfg.epochs)
    last_dropout = -cfg.retarget_hold - 1

    for epoch in range(cfg.epochs):
        if (cfg.retarget_every and epoch > 0 and epoch % cfg.retarget_every == 0
                and epoch > last_dropout + cfg.retarget_hold):
            y = project_points((x @ w1 + b1) @ w2 + b2, 1.0)
        m1 = m2 = None
        if cfg.dropout_count and epoch > 0 and epoch % cfg.dropout_period == 0:
            m1, m2 = _dropout_masks(rng, cfg.dropout_count)
            last_dropout = epoch
        order = rng.permutation(n)
        xs, ys = x[order], y[order]
        total = 0.0
        for start in range(0, n, bs):
            xb = xs[start:start + bs]
            loss, (dw1, db1, dw2, db2) = mse_and_grads((w1, b1, w2, b2), xb,
                                                       ys[start:start + bs], m1, m2)
            total += loss * xb.shape[0]
            w1 -= lr * dw1
            b1 -= lr * db1
            w2 -= lr * dw2
            b2 -= lr * db2
        epoch_loss = total / n
        curve[epoch] = epoch_loss * scale ** 2
        if not math.isfinite(epoch_loss) or epoch_loss > blowup:
            raise TrainingDivergedError(
                f"loss {epoch_loss:.3g} at epoch {epoch} exceeds 1e6 x initial "
                f"({initial:.3g}); lower the learning rate"
            )

    final = _full_loss(w1, b1, w2, b2, x, y) * scale ** 2
    w1_out = w1 / sd[:, None]
    trained = LinearNet(w1_out, b1 - mu @ w1_out, w2, b2, cfg.seed)
    return trained, TrainReport(curve, final, cfg.epochs, cfg.seed, initial * scale ** 2)


def export_model(net: LinearNet, field: float) -> CalibrationModel:
    """Equivalent ``h_c = M (h_r - b)`` model in nT.

    ``apply(model, v) == field * forward(net, v / field)``.
    """
    if not field > 0:
        raise ValueError(f"field must be positive, got {field}")
    w, c = net.affine()
    m = w.T
    if abs(np.linalg.det(m)) <= 1e-12:
        raise ValueError("network collapses to a singular linear map")
    offset = -field * np.linalg.solve(m, c)
    return CalibrationModel(m, offset, field, "neural")


def calibrate_neural(raw: SampleSeries, cfg: TrainConfig | None = None,
                     target_field: float | None = None
                     ) -> tuple[CalibrationModel, MetricReport, TrainReport]:
    """Project onto the median-field sphere, train, export and evaluate.

    With the default config the targets are refreshed every epoch.
    """
    cfg = cfg or TrainConfig(retarget_every=1)
    if target_field is None:
        target_field = estimate_field_magnitude(raw)
    pairs = build_training_pairs(raw, target_field)
    net, report = train(pairs, cfg)
    model = export_model(net, target_field)
    return model, metric_report(apply(model, raw)), report
