"""Synthetic one-minute ECG records with respiration-driven baseline wander.

A record is a train of Gaussian QRS pulses plus ``A cos(phi(t))`` plus white
noise, where the breathing frequency ``f0 + df sin(2 pi t / T_mod)`` may wobble
("uneven breathing"). The label is the number of completed breath cycles in
the minute, rounded to an integer.

Datasets are stored as one single-column CSV per record (header ``ecg_mv``)
and a ``manifest.json`` describing labels, seeds and the generator settings.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import DatasetError, GenerationError
from .spectral import EcgRecord

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
DATASET_FORMAT_VERSION = 1
CSV_HEADER = "ecg_mv"
MAX_LABEL_RETRIES = 20


@dataclass(frozen=True)
class GenConfig:
    sample_rate_hz: float = 500.0
    duration_s: float = 60.0
    heart_rate_bpm: tuple[float, float] = (60.0, 90.0)
    qrs_amplitude_mv: float = 1.0
    qrs_width_s: float = 0.02
    baseline_amplitude_mv: float = 0.2
    rr_bpm: tuple[int, int] = (10, 26)
    # offset of the mean breathing rate from the integer target, in bpm
    rate_jitter_bpm: float = 0.5
    # modulation depth drawn for uneven records; 0.12 Hz * 20 s sits at the first
    # carrier null of the FM spectrum
    mod_depth_hz: tuple[float, float] = (0.05, 0.12)
    mod_period_s: float = 20.0
    noise_sigma_mv: float = 0.05
    uneven_fraction: float = 0.4

    def __post_init__(self):
        for name in ("qrs_amplitude_mv", "qrs_width_s", "baseline_amplitude_mv",
                     "noise_sigma_mv", "rate_jitter_bpm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.sample_rate_hz <= 0 or self.duration_s <= 0 or self.mod_period_s <= 0:
            raise ValueError("sample rate, duration and modulation period must be > 0")
        lo, hi = self.rr_bpm
        if not 10 <= lo <= hi <= 26:
            raise ValueError(f"rr_bpm range must lie within [10, 26], got {self.rr_bpm}")
        if not 0 <= self.mod_depth_hz[0] <= self.mod_depth_hz[1]:
            raise ValueError("mod_depth_hz must be an ordered non-negative range")
        if not 0.0 <= self.uneven_fraction <= 1.0:
            raise ValueError("uneven_fraction must lie in [0, 1]")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.duration_s))

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> GenConfig:
        d = dict(d)
        for key in ("heart_rate_bpm", "rr_bpm", "mod_depth_hz"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def breathing_phase(t: np.ndarray, rate_hz: float, mod_depth_hz: float, mod_period_s: float,
                    phase0: float = 0.0) -> np.ndarray:
    """``phase0 + 2 pi * integral_0^t (rate + depth sin(2 pi s / period)) ds``."""
    return (phase0 + 2.0 * np.pi * rate_hz * t
            + mod_depth_hz * mod_period_s * (1.0 - np.cos(2.0 * np.pi * t / mod_period_s)))


def qrs_train(t: np.ndarray, beat_times: np.ndarray, amplitude: float, width: float,
              ) -> np.ndarray:
    out = np.zeros_like(t)
    if width == 0.0 or amplitude == 0.0:
        return out
    fs = (len(t) - 1) / (t[-1] - t[0]) if len(t) > 1 else 1.0
    half = int(np.ceil(6.0 * width * fs))
    for tb in beat_times:
        c = int(round((tb - t[0]) * fs))
        lo, hi = max(c - half, 0), min(c + half + 1, len(t))
        if lo < hi:
            out[lo:hi] += amplitude * np.exp(-0.5 * ((t[lo:hi] - tb) / width) ** 2)
    return out


def synth_record(cfg: GenConfig, seed: int, *, uneven: bool = False,
                 rate_hz: float | None = None, mod_depth_hz: float | None = None) -> EcgRecord:
    """Generate one record deterministically from ``seed``.

    ``rate_hz`` / ``mod_depth_hz`` pin the mean breathing rate and modulation
    depth instead of drawing them; otherwise ``uneven`` selects a modulation
    depth drawn from ``cfg.mod_depth_hz`` or none at all.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(cfg.n_samples, dtype=np.float64) / cfg.sample_rate_hz
    lo, hi = cfg.rr_bpm

    depth = 0.0
    if mod_depth_hz is not None:
        depth = float(mod_depth_hz)
    elif uneven:
        depth = float(rng.uniform(*cfg.mod_depth_hz))
    phase0 = float(rng.uniform(0.0, 2.0 * np.pi))

    for _ in range(MAX_LABEL_RETRIES):
        if rate_hz is not None:
            f0 = float(rate_hz)
        else:
            target = int(rng.integers(lo, hi + 1))
            f0 = (target + rng.uniform(-cfg.rate_jitter_bpm, cfg.rate_jitter_bpm)) / 60.0
        cycles = (breathing_phase(np.array([cfg.duration_s]), f0, depth, cfg.mod_period_s)[0]
                  / (2.0 * np.pi))
        label = int(round(cycles))
        if lo <= label <= hi:
            break
        if rate_hz is not None:
            raise GenerationError(f"breathing rate {rate_hz} Hz gives label {label} outside "
                                  f"[{lo}, {hi}]")
    else:
        raise GenerationError(f"seed {seed}: no label within [{lo}, {hi}] after "
                              f"{MAX_LABEL_RETRIES} draws")

    hr_hz = rng.uniform(*cfg.heart_rate_bpm) / 60.0
    first_beat = rng.uniform(0.0, 1.0 / hr_hz)
    beats = np.arange(first_beat, cfg.duration_s, 1.0 / hr_hz)

    samples = qrs_train(t, beats, cfg.qrs_amplitude_mv, cfg.qrs_width_s)
    samples += cfg.baseline_amplitude_mv * np.cos(
        breathing_phase(t, f0, depth, cfg.mod_period_s, phase0))
    samples += rng.normal(0.0, cfg.noise_sigma_mv, size=t.size) if cfg.noise_sigma_mv else 0.0
    return EcgRecord(samples, cfg.sample_rate_hz, label)


@dataclass
class RecordEntry:
    file: str
    rr_bpm: int
    seed: int
    uneven: bool = False


@dataclass
class DatasetManifest:
    sample_rate_hz: float
    duration_s: float
    records: list[RecordEntry] = field(default_factory=list)
    gen_config: dict[str, Any] = field(default_factory=dict)
    version: int = DATASET_FORMAT_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "sample_rate_hz": self.sample_rate_hz,
            "duration_s": self.duration_s,
            "records": [asdict(r) for r in self.records],
            "gen_config": self.gen_config,
        }

    @classmethod
    def from_dict(cls, d: Any) -> DatasetManifest:
        if not isinstance(d, dict):
            raise DatasetError("manifest must be a JSON object")
        if d.get("version") != DATASET_FORMAT_VERSION:
            raise DatasetError(f"unsupported manifest version {d.get('version')!r}")
        try:
            records = [RecordEntry(str(r["file"]), int(r["rr_bpm"]), int(r["seed"]),
                                   bool(r.get("uneven", False))) for r in d["records"]]
            return cls(float(d["sample_rate_hz"]), float(d["duration_s"]), records,
                       dict(d.get("gen_config") or {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"malformed manifest: {exc}") from exc


def write_record_csv(path: Path, samples: np.ndarray) -> None:
    # %.17g round-trips float64
    with open(path, "w") as f:
        f.write(CSV_HEADER + "\n")
        np.savetxt(f, samples, fmt="%.17g")


def read_record_csv(path: Path) -> np.ndarray:
    try:
        lines = Path(path).read_text().split()
    except FileNotFoundError as exc:
        raise DatasetError(f"{path}: record file not found") from exc
    if not lines or lines[0] != CSV_HEADER:
        raise DatasetError(f"{path}: malformed record CSV, expected header {CSV_HEADER!r}")
    try:
        samples = np.array(lines[1:], dtype=np.float64)
    except ValueError as exc:
        raise DatasetError(f"{path}: malformed record CSV ({exc})") from exc
    if not np.all(np.isfinite(samples)):
        raise DatasetError(f"{path}: record contains non-finite samples")
    return samples


def generate_dataset(n: int, cfg: GenConfig, seed: int, out_dir: str | Path) -> DatasetManifest:
    """Write ``n`` records plus a manifest; ``round(uneven_fraction * n)`` are uneven."""
    if n < 0:
        raise ValueError("record count must be >= 0")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetError(f"{out}: cannot create dataset directory ({exc})") from exc

    rng = np.random.default_rng(seed)
    record_seeds = rng.integers(0, 2**63 - 1, size=n, dtype=np.int64)
    n_uneven = int(round(cfg.uneven_fraction * n))
    uneven = rng.permutation(n) < n_uneven

    manifest = DatasetManifest(cfg.sample_rate_hz, cfg.duration_s, gen_config=asdict(cfg))
    for i in range(n):
        rec_seed = int(record_seeds[i])
        rec = synth_record(cfg, rec_seed, uneven=bool(uneven[i]))
        name = f"record_{i:04d}.csv"
        try:
            write_record_csv(out / name, rec.samples)
        except OSError as exc:
            raise DatasetError(f"{out / name}: cannot write record ({exc})") from exc
        manifest.records.append(RecordEntry(name, rec.true_rr_bpm, rec_seed, bool(uneven[i])))

    (out / MANIFEST_NAME).write_text(json.dumps(manifest.to_dict(), indent=1) + "\n")
    log.info("wrote %d records (%d uneven) to %s", n, n_uneven, out)
    return manifest


def load_manifest(data_dir: str | Path) -> DatasetManifest:
    path = Path(data_dir) / MANIFEST_NAME
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise DatasetError(f"{path}: manifest not found") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: malformed manifest ({exc})") from exc
    return DatasetManifest.from_dict(doc)


def load_dataset(data_dir: str | Path) -> tuple[list[EcgRecord], DatasetManifest]:
    data_dir = Path(data_dir)
    manifest = load_manifest(data_dir)
    expected = int(round(manifest.sample_rate_hz * manifest.duration_s))
    records = []
    for entry in manifest.records:
        path = data_dir / entry.file
        samples = read_record_csv(path)
        if samples.size != expected:
            raise DatasetError(f"{path}: expected {expected} samples, found {samples.size}")
        records.append(EcgRecord(samples, manifest.sample_rate_hz, entry.rr_bpm))
    return records, manifest


def split_dataset(records: Sequence[Any], split_seed: int, n_train: int,
                  ) -> tuple[list[Any], list[Any]]:
    """Seeded permutation; the first ``n_train`` go to train, the rest to test."""
    if not 0 < n_train < len(records):
        raise ValueError(f"n_train must be in [1, {len(records) - 1}], got {n_train}")
    perm = np.random.default_rng(split_seed).permutation(len(records))
    return [records[i] for i in perm[:n_train]], [records[i] for i in perm[n_train:]]
