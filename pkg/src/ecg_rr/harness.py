"""RR estimation by method (DFT / AE / AE+DCT), error metrics, and the
three-split comparison experiment."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .datagen import load_dataset, split_dataset
from .errors import ConfigurationError
from .spectral import DEFAULT_RR_RANGE, EcgRecord, dft_peak_rr, extract_spectrum
from .training import Model, SplitData, TrainConfig, predict_rr, train

log = logging.getLogger(__name__)

METHODS = ("DFT", "AE", "AE+DCT")
METHOD_ARCH = {"AE": "ae", "AE+DCT": "ae-dct"}
CLI_METHODS = {"dft": "DFT", "ae": "AE", "ae-dct": "AE+DCT"}
N_TRAIN = 167
DEFAULT_SPLIT_SEEDS = (0, 1, 2)


@dataclass
class Method:
    name: str
    model: Model | None = None
    dft_range: tuple[int, int] = DEFAULT_RR_RANGE

    def __post_init__(self):
        self.name = CLI_METHODS.get(self.name, self.name)
        if self.name not in METHODS:
            raise ConfigurationError(f"unknown method {self.name!r}; expected one of {METHODS}")
        if self.name == "DFT":
            return
        if self.model is None:
            raise ConfigurationError(f"method {self.name} requires a trained model")
        if self.model.arch != METHOD_ARCH[self.name]:
            raise ConfigurationError(
                f"method {self.name} needs a {METHOD_ARCH[self.name]!r} model, "
                f"got {self.model.arch!r}")

    def estimate_spectra(self, spectra: np.ndarray) -> np.ndarray:
        """Integer RR estimates for a (n, 32) array of normalized spectra."""
        spectra = np.atleast_2d(spectra)
        if self.name == "DFT":
            lo, hi = self.dft_range
            return np.array([dft_peak_rr(s, lo, hi) for s in spectra], dtype=np.int64)
        return np.asarray(predict_rr(self.model, spectra), dtype=np.int64)


def estimate_rr(method: Method, record: EcgRecord) -> int:
    return int(method.estimate_spectra(extract_spectrum(record).mag[None, :])[0])


@dataclass(frozen=True)
class Metrics:
    mse_bpm2: float
    mae_bpm: float
    n: int


def metrics_from_errors(errors: Sequence[float] | np.ndarray) -> Metrics:
    err = np.asarray(errors, dtype=np.float64)
    if err.size == 0:
        raise ValueError("cannot evaluate an empty record list")
    return Metrics(float(np.mean(err**2)), float(np.mean(np.abs(err))), int(err.size))


def evaluate(method: Method, records: Sequence[EcgRecord]) -> Metrics:
    if not records:
        raise ValueError("cannot evaluate an empty record list")
    spectra = np.array([extract_spectrum(r).mag for r in records])
    truth = np.array([r.true_rr_bpm for r in records])
    return metrics_from_errors(method.estimate_spectra(spectra) - truth)


@dataclass
class ReportRow:
    split: str
    method: str
    mse: float
    mae: float


@dataclass
class Report:
    rows: list[ReportRow] = field(default_factory=list)

    def add(self, split: str, method: str, m: Metrics) -> None:
        self.rows.append(ReportRow(split, method, m.mse_bpm2, m.mae_bpm))

    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.rows))

    def add_average(self) -> None:
        split_rows = [r for r in self.rows if r.split != "average"]
        for method in self.methods():
            sel = [r for r in split_rows if r.method == method]
            self.rows.append(ReportRow("average", method,
                                       sum(r.mse for r in sel) / len(sel),
                                       sum(r.mae for r in sel) / len(sel)))

    def get(self, split: str, method: str) -> ReportRow:
        for r in self.rows:
            if r.split == split and r.method == method:
                return r
        raise KeyError((split, method))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["split", "method", "mse", "mae"])
        for r in self.rows:
            w.writerow([r.split, r.method, repr(r.mse), repr(r.mae)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> Report:
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls([ReportRow(r["split"], r["method"], float(r["mse"]), float(r["mae"]))
                    for r in rows])

    def to_table(self) -> str:
        """Split-by-metric table with one column per method."""
        methods = self.methods()
        splits = list(dict.fromkeys(r.split for r in self.rows))
        lines = [f"{'Split':<8}{'Metric':<8}" + "".join(f"{m:>10}" for m in methods)]
        for split in splits:
            for metric in ("mse", "mae"):
                vals = "".join(f"{getattr(self.get(split, m), metric):>10.4f}" for m in methods)
                lines.append(f"{split:<8}{metric.upper():<8}{vals}")
        return "\n".join(lines) + "\n"


def split_data(spectra: np.ndarray, labels: np.ndarray, split_seed: int,
               n_train: int = N_TRAIN) -> tuple[SplitData, np.ndarray, np.ndarray]:
    idx = np.arange(len(labels))
    tr, te = split_dataset(idx, split_seed, n_train)
    tr, te = np.array(tr), np.array(te)
    return SplitData(spectra[tr], labels[tr], spectra[te], labels[te]), tr, te


def load_spectra(data_dir: str | Path) -> tuple[np.ndarray, np.ndarray]:
    records, _ = load_dataset(data_dir)
    if not records:
        raise ValueError(f"{data_dir}: dataset holds no records")
    spectra = np.array([extract_spectrum(r).mag for r in records])
    labels = np.array([r.true_rr_bpm for r in records], dtype=np.int64)
    return spectra, labels


def run_experiment(data_dir: str | Path, seeds: Sequence[int] = DEFAULT_SPLIT_SEEDS,
                   cfg: TrainConfig | None = None, report_path: str | Path | None = None,
                   n_train: int = N_TRAIN) -> Report:
    """Train AE and AE+DCT on each seeded split and score all methods on its test part.

    The training seed for split ``s`` is ``s`` itself, so both architectures start
    from the same autoencoder weights.
    """
    cfg = cfg or TrainConfig()
    spectra, labels = load_spectra(data_dir)
    report = Report()
    try:
        for i, seed in enumerate(seeds, start=1):
            data, _, _ = split_data(spectra, labels, seed, n_train)
            split = str(i)
            dft = Method("DFT").estimate_spectra(data.test_x)
            report.add(split, "DFT", metrics_from_errors(dft - data.test_rr))
            for name, arch in METHOD_ARCH.items():
                run_cfg = TrainConfig(**{**cfg.__dict__, "arch": arch, "seed": seed})
                model, _ = train(data, run_cfg)
                est = Method(name, model).estimate_spectra(data.test_x)
                report.add(split, name, metrics_from_errors(est - data.test_rr))
            log.info("split %s (seed %d) done", split, seed)
    except Exception:
        if report_path is not None and report.rows:
            partial = Path(str(report_path) + ".partial")
            partial.write_text(report.to_csv())
            log.error("experiment failed; partial results written to %s", partial)
        raise
    report.add_average()
    if report_path is not None:
        Path(report_path).write_text(report.to_csv())
    return report
