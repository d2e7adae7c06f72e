"""Onset strength, windowed autocorrelation, and octave-folded tempo features.

The rhythm path is: log-mel flux -> onset envelope -> local autocorrelation
over a sliding window (one column per window position, one row per lag) ->
fold the lag axis onto a single tempo octave.  Folding makes a pulse at
tempo t and one at 2t land in the same bin, which is what lets the feature
describe rhythm without caring about the absolute beat rate.
"""

from __future__ import annotations

import numpy as np

from .types import LOG_FLOOR, FeatureMatrix


def onset_envelope(mel: FeatureMatrix) -> np.ndarray:
    """Positive spectral flux over log mel bands; element 0 is defined as 0."""
    if mel.kind != "mel":
        raise ValueError(f"onset_envelope expects a mel matrix, got kind {mel.kind!r}")
    if mel.cols < 2:
        raise ValueError("onset envelope needs at least 2 frames")
    log_mel = np.log(mel.values.astype(np.float64) + LOG_FLOOR)
    flux = np.maximum(0.0, log_mel[:, 1:] - log_mel[:, :-1]).mean(axis=0)
    return np.concatenate(([0.0], flux))


def autocorrelation_tempogram(onset: np.ndarray, win_frames: int, hop_frames: int = 1) -> np.ndarray:
    """Local autocorrelation of the onset envelope.

    Column c holds R(tau) for the window starting at frame c*hop_frames, with
    lags tau = 0..win_frames-1 computed strictly inside the window (the
    product sum is truncated at the window end).  Each column is divided by
    its R(0) when that is positive, so a constant envelope decays as
    (win - tau) / win.
    """
    onset = np.asarray(onset, dtype=np.float64)
    if win_frames < 1 or hop_frames < 1:
        raise ValueError("win_frames and hop_frames must be >= 1")
    if win_frames > onset.shape[0]:
        raise ValueError(f"window of {win_frames} frames exceeds envelope length {onset.shape[0]}")

    n_cols = 1 + (onset.shape[0] - win_frames) // hop_frames
    out = np.empty((win_frames, n_cols))
    for c in range(n_cols):
        w = onset[c * hop_frames : c * hop_frames + win_frames]
        r = np.correlate(w, w, mode="full")[win_frames - 1 :]
        if r[0] > 0:
            r = r / r[0]
        out[:, c] = r
    return out


def cyclic_tempogram(
    tempogram: np.ndarray,
    frame_period_s: float,
    n_cyclic_bins: int = 64,
    ref_tempo_bpm: float = 60.0,
    window_hop_frames: int = 1,
) -> FeatureMatrix:
    """Fold the lag axis of a tempogram onto one tempo octave.

    Lag tau (in envelope frames of length frame_period_s) corresponds to the
    tempo 60 / (tau * frame_period_s) BPM.  Its cyclic position is
    log2(tempo / ref_tempo) mod 1, discretized into n_cyclic_bins; all
    octaves of the same position accumulate into the same bin.  Lag 0 has no
    tempo and is ignored.

    A windowed autocorrelation of window w underestimates long lags by the
    factor (w - tau) / w (fewer product terms fit), which would let one-beat
    lags of fast pulses outvote their octave-stacked multiples.  Each lag is
    rescaled by w / (w - tau) before folding so contributions are comparable
    across octaves.
    """
    tempogram = np.asarray(tempogram, dtype=np.float64)
    if tempogram.ndim != 2 or tempogram.size == 0:
        raise ValueError("tempogram must be a non-empty 2-D matrix")
    if frame_period_s <= 0:
        raise ValueError("frame_period_s must be positive")

    n_lags = tempogram.shape[0]
    lags = np.arange(1, n_lags)
    tempo_bpm = 60.0 / (lags * frame_period_s)
    position = np.mod(np.log2(tempo_bpm / ref_tempo_bpm), 1.0)
    bins = np.floor(position * n_cyclic_bins).astype(np.int64) % n_cyclic_bins

    debias = n_lags / (n_lags - lags).astype(np.float64)
    folded = np.zeros((n_cyclic_bins, tempogram.shape[1]))
    np.add.at(folded, bins, tempogram[1:] * debias[:, None])
    return FeatureMatrix(
        kind="cyclic_tempogram",
        values=folded.astype(np.float32),
        frame_hop_seconds=frame_period_s * window_hop_frames,
    )
