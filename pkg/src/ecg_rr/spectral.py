"""Windowed DFT magnitudes, the 32-bin network input, and the DFT-peak RR baseline.

With a 60 s analysis window, DFT bin k sits at k/60 Hz, i.e. k breaths per minute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .errors import DegenerateInputError

FloatArray = npt.NDArray[np.float64]

SPECTRUM_LEN = 32
DEFAULT_RR_RANGE = (10, 26)


@dataclass(frozen=True)
class EcgRecord:
    """One minute of ECG samples (mV) with its true respiration rate label."""

    samples: FloatArray
    sample_rate_hz: float
    true_rr_bpm: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def validate(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be > 0")
        if abs(self.duration_s - 60.0) > 1.0 / self.sample_rate_hz + 1e-12:
            raise ValueError(f"record must span 60 s, got {self.duration_s:.4f} s")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("record contains non-finite samples")


@dataclass(frozen=True)
class Spectrum32:
    """Normalized DFT magnitudes for bins 0..31 (peak = 1, bin 0 zeroed)."""

    mag: FloatArray

    def __post_init__(self):
        if self.mag.shape != (SPECTRUM_LEN,):
            raise ValueError(f"spectrum must have {SPECTRUM_LEN} entries, got {self.mag.shape}")


def hamming_window(n: int) -> FloatArray:
    """Symmetric Hamming window, ``0.54 - 0.46 cos(2 pi i / (n - 1))``."""
    if n < 2:
        raise ValueError("hamming window length must be >= 2")
    i = np.arange(n, dtype=np.float64)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * i / (n - 1))


def dft_magnitude(samples: npt.ArrayLike, k_max: int) -> FloatArray:
    """|DFT| of ``samples`` for bins 0..k_max-1 (no normalization)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must be a non-empty 1-D sequence")
    if not 1 <= k_max <= x.size:
        raise ValueError(f"k_max must be in [1, {x.size}], got {k_max}")
    if k_max <= x.size // 2 + 1:
        return np.abs(np.fft.rfft(x)[:k_max])
    return np.abs(np.fft.fft(x)[:k_max])


def extract_spectrum(record: EcgRecord) -> Spectrum32:
    """Mean-removed, Hamming-windowed, 32-bin magnitude spectrum scaled to peak 1."""
    record.validate()
    x = np.asarray(record.samples, dtype=np.float64)
    x = (x - x.mean()) * hamming_window(x.size)
    mag = dft_magnitude(x, SPECTRUM_LEN)
    mag[0] = 0.0
    peak = mag.max()
    if not peak > 0.0:
        raise DegenerateInputError("record has no spectral energy in bins 1..31")
    return Spectrum32(mag / peak)


def dft_peak_rr(spectrum: Spectrum32 | npt.ArrayLike, lo: int = DEFAULT_RR_RANGE[0],
                hi: int = DEFAULT_RR_RANGE[1]) -> int:
    """Index of the largest spectrum entry in ``[lo, hi]``; ties go to the lowest index."""
    mag = spectrum.mag if isinstance(spectrum, Spectrum32) else np.asarray(spectrum, dtype=np.float64)
    if not (1 <= lo <= hi <= SPECTRUM_LEN - 1):
        raise ValueError(f"peak search range must satisfy 1 <= lo <= hi <= 31, got [{lo}, {hi}]")
    return lo + int(np.argmax(mag[lo:hi + 1]))
