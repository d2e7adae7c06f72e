"""Mel filter bank, mel spectrogram, and cepstral coefficients.

The mel scale used here is the breakpoint form: linear below 1 kHz
(200/3 Hz per mel) and logarithmic above it, with the log region spanning
27 steps of ln(6.4) per octave-ish segment.  Filters are triangles between
neighboring center frequencies, scaled by 2 / (upper - lower) so each
filter integrates to roughly unit area regardless of bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dsp import PowerSpectrogram
from .types import LOG_FLOOR, FeatureMatrix

_MEL_HZ_PER_MEL = 200.0 / 3.0
_MEL_BREAK_HZ = 1000.0
_MEL_BREAK = _MEL_BREAK_HZ / _MEL_HZ_PER_MEL  # 15 mel at the breakpoint
_MEL_LOG_STEP = np.log(6.4) / 27.0


def hz_to_mel(hz):
    hz = np.asarray(hz, dtype=np.float64)
    mel = hz / _MEL_HZ_PER_MEL
    above = hz >= _MEL_BREAK_HZ
    if np.any(above):
        mel = np.where(above, _MEL_BREAK + np.log(np.maximum(hz, _MEL_BREAK_HZ) / _MEL_BREAK_HZ) / _MEL_LOG_STEP, mel)
    return mel if mel.ndim else float(mel)


def mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    hz = mel * _MEL_HZ_PER_MEL
    above = mel >= _MEL_BREAK
    if np.any(above):
        hz = np.where(above, _MEL_BREAK_HZ * np.exp(_MEL_LOG_STEP * (mel - _MEL_BREAK)), hz)
    return hz if hz.ndim else float(hz)


@dataclass
class MelFilterBank:
    weights: np.ndarray  # (n_mels, n_fft//2 + 1), non-negative
    center_frequencies: np.ndarray  # (n_mels,)
    fmin: float
    fmax: float

    @property
    def n_mels(self) -> int:
        return self.weights.shape[0]

    @property
    def bins(self) -> int:
        return self.weights.shape[1]


def build_mel_filterbank(
    sample_rate: int,
    n_fft: int,
    n_mels: int = 128,
    fmin: float = 0.0,
    fmax: float | None = None,
) -> MelFilterBank:
    """Triangular filters with centers equally spaced on the mel axis."""
    if fmax is None:
        fmax = sample_rate / 2.0
    if not 0 <= fmin < fmax <= sample_rate / 2.0:
        raise ValueError(f"need 0 <= fmin < fmax <= sr/2, got fmin={fmin}, fmax={fmax}")
    if n_mels < 1:
        raise ValueError(f"n_mels must be >= 1, got {n_mels}")

    points = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)

    lower = points[:-2, None]
    center = points[1:-1, None]
    upper = points[2:, None]
    rising = (freqs[None, :] - lower) / (center - lower)
    falling = (upper - freqs[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    weights *= 2.0 / (upper - lower)  # area normalization

    return MelFilterBank(
        weights=weights.astype(np.float32),
        center_frequencies=points[1:-1].copy(),
        fmin=float(fmin),
        fmax=float(fmax),
    )


def mel_spectrogram(power: PowerSpectrogram, bank: MelFilterBank) -> FeatureMatrix:
    """Project a power spectrogram onto the filter bank: rows=bands, cols=frames."""
    if bank.bins != power.bins:
        raise ValueError(f"bank has {bank.bins} bins but spectrogram has {power.bins}")
    # Accumulate in float64; band energies span many orders of magnitude.
    values = bank.weights.astype(np.float64) @ power.values.T.astype(np.float64)
    return FeatureMatrix(
        kind="mel", values=values.astype(np.float32), frame_hop_seconds=power.hop_seconds
    )


def dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Orthonormal type-II DCT matrix (n_out, n_in)."""
    j = np.arange(n_in)
    n = np.arange(n_out)[:, None]
    mat = np.cos(np.pi * n * (j + 0.5) / n_in)
    mat[0] *= np.sqrt(1.0 / n_in)
    mat[1:] *= np.sqrt(2.0 / n_in)
    return mat


def mfcc(mel: FeatureMatrix, n_mfcc: int = 20) -> FeatureMatrix:
    """Cepstral coefficients: log of the mel bands, then an orthonormal DCT."""
    if mel.kind != "mel":
        raise ValueError(f"mfcc expects a mel matrix, got kind {mel.kind!r}")
    if n_mfcc > mel.rows:
        raise ValueError(f"n_mfcc={n_mfcc} exceeds the {mel.rows} mel bands")
    log_mel = np.log(mel.values.astype(np.float64) + LOG_FLOOR)
    coeffs = dct_matrix(n_mfcc, mel.rows) @ log_mel
    return FeatureMatrix(
        kind="mfcc", values=coeffs.astype(np.float32), frame_hop_seconds=mel.frame_hop_seconds
    )
