"""Gaussian pseudo-spectrum targets, MSE loss, AdamW, the training loop with
best-on-test checkpointing, and JSON model files."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from .dct_layer import DctCache, DctLayer, dct_layer_backward, dct_layer_forward
from .errors import ArchitectureMismatchError, ModelFileError, NumericFailure
from .net import Autoencoder, ForwardCache, LinearLayer, ae_backward, ae_forward
from .spectral import SPECTRUM_LEN

log = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

ARCHS = ("ae", "ae-dct")
MODEL_FORMAT_VERSION = 1
SELECTION_METRICS = ("rr_mse", "vector_mse")


# --- targets and loss -------------------------------------------------------

def gaussian_target(mu: float | npt.ArrayLike, sigma: float = 2.0,
                    length: int = SPECTRUM_LEN) -> FloatArray:
    """``exp(-(x - mu)^2 / sigma^2)`` for x = 0..length-1.

    ``mu`` may be an array of rates, giving one target row per rate.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    mu = np.asarray(mu, dtype=np.float64)
    if np.any(mu < 0) or np.any(mu > length - 1):
        raise ValueError(f"mu must lie in [0, {length - 1}]")
    x = np.arange(length, dtype=np.float64)
    return np.exp(-((x - mu[..., None]) ** 2) / sigma**2)


def mse_loss(pred: npt.ArrayLike, target: npt.ArrayLike) -> tuple[float, FloatArray]:
    """Mean squared error over every entry, and its gradient w.r.t. ``pred``.

    For a batch this is the mean over samples of each sample's vector MSE.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"pred shape {pred.shape} != target shape {target.shape}")
    diff = pred - target
    return float(np.mean(diff**2)), 2.0 * diff / diff.size


# --- model ------------------------------------------------------------------

@dataclass
class Model:
    """Autoencoder, optionally followed by the DCT layer (``arch == "ae-dct"``)."""

    arch: str
    ae: Autoencoder
    dct: DctLayer | None = None
    config: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown architecture {self.arch!r}; expected one of {ARCHS}")
        if (self.arch == "ae-dct") != (self.dct is not None):
            raise ValueError(f"architecture {self.arch!r} does not match presence of a DCT layer")

    @classmethod
    def init(cls, arch: str, seed: int, dct_m: int = 8) -> Model:
        rng = np.random.default_rng(seed)
        dct = DctLayer(n=SPECTRUM_LEN, m=dct_m) if arch == "ae-dct" else None
        return cls(arch, Autoencoder.init(rng), dct)

    def parameters(self) -> list[FloatArray]:
        params = self.ae.parameters()
        if self.dct is not None:
            params += self.dct.parameters()
        return params

    def copy(self) -> Model:
        ae = Autoencoder([LinearLayer(l.weight.copy(), l.bias.copy()) for l in self.ae.layers])
        dct = None
        if self.dct is not None:
            dct = DctLayer(self.dct.n, self.dct.m, self.dct.scales, self.dct.thresholds)
        return Model(self.arch, ae, dct, dict(self.config))


def model_forward(model: Model, x: npt.ArrayLike,
                  ) -> tuple[FloatArray, tuple[ForwardCache, DctCache | None]]:
    """Pseudo-spectrum for one spectrum (shape (32,)) or a batch (shape (B, 32))."""
    y, ae_cache = ae_forward(model.ae, x)
    dct_cache = None
    if model.dct is not None:
        y, dct_cache = dct_layer_forward(model.dct, y)
    return y, (ae_cache, dct_cache)


def model_backward(model: Model, cache: tuple[ForwardCache, DctCache | None],
                   grad_out: npt.ArrayLike) -> tuple[list[FloatArray], FloatArray]:
    """Gradients in ``model.parameters()`` order, plus the gradient w.r.t. the input."""
    ae_cache, dct_cache = cache
    g = np.asarray(grad_out, dtype=np.float64)
    dct_grads: list[FloatArray] = []
    if model.dct is not None:
        if dct_cache is None:
            raise ValueError("cache lacks the DCT stage required by this model")
        g, g_v, g_t = dct_layer_backward(model.dct, dct_cache, g)
        dct_grads = [g_v, g_t]
    grads, g_in = ae_backward(model.ae, ae_cache, g)
    return grads + dct_grads, g_in


def predict_rr(model: Model, x: npt.ArrayLike) -> npt.NDArray[np.int64] | int:
    """Argmax of the pseudo-spectrum (lowest index on ties)."""
    y, _ = model_forward(model, x)
    idx = np.argmax(y, axis=-1)
    return int(idx) if np.ndim(idx) == 0 else idx


# --- optimizer --------------------------------------------------------------

@dataclass
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 10000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    seed: int = 0
    arch: str = "ae-dct"
    sigma: float = 2.0
    dct_m: int = 8
    selection: str = "rr_mse"

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown architecture {self.arch!r}")
        if self.selection not in SELECTION_METRICS:
            raise ValueError(f"selection must be one of {SELECTION_METRICS}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        for name in ("learning_rate", "eps", "sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.weight_decay < 0 or not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("invalid AdamW hyperparameters")


@dataclass
class OptState:
    m: list[FloatArray]
    v: list[FloatArray]
    step: int = 0

    @classmethod
    def zeros_like(cls, params: list[FloatArray]) -> OptState:
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


def adamw_step(params: list[FloatArray], grads: list[FloatArray], state: OptState,
               cfg: TrainConfig) -> None:
    """One in-place AdamW update with bias correction and decoupled weight decay."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads and optimizer state must have equal length")
    for p, g, m in zip(params, grads, state.m):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError(f"shape mismatch: param {p.shape}, grad {g.shape}, state {m.shape}")
    state.step += 1
    bc1 = 1.0 - cfg.beta1**state.step
    bc2 = 1.0 - cfg.beta2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        p *= 1.0 - cfg.learning_rate * cfg.weight_decay
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        p -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)


# --- training loop ----------------------------------------------------------

@dataclass
class SplitData:
    """Precomputed network inputs (rows of 32 bins) and integer RR labels."""

    train_x: FloatArray
    train_rr: npt.NDArray[np.int64]
    test_x: FloatArray
    test_rr: npt.NDArray[np.int64]

    def __post_init__(self):
        for name in ("train", "test"):
            x = np.asarray(getattr(self, f"{name}_x"), dtype=np.float64)
            rr = np.asarray(getattr(self, f"{name}_rr"), dtype=np.int64)
            if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] != SPECTRUM_LEN:
                raise ValueError(f"{name} split must be a non-empty (n, {SPECTRUM_LEN}) array")
            if rr.shape != (x.shape[0],):
                raise ValueError(f"{name} labels do not match {name} inputs")
            setattr(self, f"{name}_x", x)
            setattr(self, f"{name}_rr", rr)


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    test_rr_mse: list[float] = field(default_factory=list)
    test_vector_mse: list[float] = field(default_factory=list)
    best_epoch: int = 0
    best_metric: float = float("inf")


def train(data: SplitData, cfg: TrainConfig) -> tuple[Model, History]:
    """Full-batch AdamW training; keeps the parameters with the lowest test metric.

    Epochs are 1-based. After each update the test split is scored; a snapshot is
    taken on strict improvement, so the earliest epoch wins ties.
    """
    model = Model.init(cfg.arch, cfg.seed, cfg.dct_m)
    model.config = asdict(cfg)
    params = model.parameters()
    state = OptState.zeros_like(params)
    y_train = gaussian_target(data.train_rr, cfg.sigma)
    y_test = gaussian_target(data.test_rr, cfg.sigma)
    hist = History()
    best = model.copy()

    for epoch in range(1, cfg.epochs + 1):
        try:
            pred, cache = model_forward(model, data.train_x)
            loss, grad = mse_loss(pred, y_train)
            if not np.isfinite(loss):
                raise NumericFailure("non-finite training loss")
            grads, _ = model_backward(model, cache, grad)
            adamw_step(params, grads, state, cfg)
            test_pred, _ = model_forward(model, data.test_x)
        except NumericFailure as exc:
            raise NumericFailure(str(exc), epoch) from exc
        rr_err = np.argmax(test_pred, axis=1) - data.test_rr
        rr_mse = float(np.mean(rr_err**2))
        vec_mse = float(np.mean((test_pred - y_test) ** 2))
        if not np.isfinite(vec_mse):
            raise NumericFailure("non-finite test output", epoch)
        hist.train_loss.append(loss)
        hist.test_rr_mse.append(rr_mse)
        hist.test_vector_mse.append(vec_mse)

        metric = rr_mse if cfg.selection == "rr_mse" else vec_mse
        if metric < hist.best_metric:
            hist.best_metric, hist.best_epoch = metric, epoch
            best = model.copy()

    log.info("trained %s: best %s %.4f at epoch %d/%d", cfg.arch, cfg.selection,
             hist.best_metric, hist.best_epoch, cfg.epochs)
    best.config["best_epoch"] = hist.best_epoch
    return best, hist


# --- model files ------------------------------------------------------------

def model_to_dict(model: Model) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "version": MODEL_FORMAT_VERSION,
        "arch": model.arch,
        "layers": [{"w": l.weight.tolist(), "b": l.bias.tolist()} for l in model.ae.layers],
        "config": model.config,
    }
    if model.dct is not None:
        doc["dct"] = {"n": model.dct.n, "m": model.dct.m,
                      "v": model.dct.scales.tolist(), "t": model.dct.thresholds.tolist()}
    return doc


def model_from_dict(doc: Any, arch: str | None = None) -> Model:
    if not isinstance(doc, dict):
        raise ModelFileError("model document must be a JSON object")
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ModelFileError(f"unsupported model file version {doc.get('version')!r}")
    if doc.get("arch") not in ARCHS:
        raise ModelFileError(f"unknown architecture {doc.get('arch')!r}")
    if arch is not None and doc["arch"] != arch:
        raise ArchitectureMismatchError(
            f"model file holds architecture {doc['arch']!r}, requested {arch!r}")
    try:
        ae = Autoencoder([LinearLayer(np.array(l["w"], dtype=np.float64),
                                      np.array(l["b"], dtype=np.float64))
                          for l in doc["layers"]])
        dct = None
        if doc["arch"] == "ae-dct":
            d = doc["dct"]
            dct = DctLayer(int(d["n"]), int(d["m"]), np.array(d["v"], dtype=np.float64),
                           np.array(d["t"], dtype=np.float64))
        return Model(doc["arch"], ae, dct, dict(doc.get("config") or {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"malformed model document: {exc}") from exc


def save_model(model: Model, path: str | Path) -> None:
    # Python's float repr round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(model), allow_nan=False) + "\n")


def load_model(path: str | Path, arch: str | None = None) -> Model:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ModelFileError(f"{path}: model file not found") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFileError(f"{path}: malformed model file ({exc})") from exc
    try:
        return model_from_dict(doc, arch)
    except ArchitectureMismatchError as exc:
        raise ArchitectureMismatchError(f"{path}: {exc}") from exc
    except ModelFileError as exc:
        raise ModelFileError(f"{path}: {exc}") from exc
