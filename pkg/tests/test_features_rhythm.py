"""Onset envelope, windowed autocorrelation, and cyclic tempo folding."""

import numpy as np
import pytest

from srfe.audio import AudioClip
from srfe.features import autocorrelation_tempogram, cyclic_tempogram, onset_envelope
from srfe.features.pipeline import extract_feature_matrices
from srfe.features.types import FeatureMatrix

import synth


def mel_matrix(values):
    return FeatureMatrix(kind="mel", values=np.asarray(values, dtype=np.float32),
                         frame_hop_seconds=512 / 22050)


class TestOnsetEnvelope:
    def test_constant_input_gives_zero_flux(self):
        env = onset_envelope(mel_matrix(np.full((16, 30), 3.0)))
        assert env.shape == (30,)
        np.testing.assert_allclose(env, 0.0, atol=1e-12)

    def test_single_loud_frame_peaks_there(self):
        values = np.full((16, 40), 1e-6)
        values[:, 10] = 5.0
        env = onset_envelope(mel_matrix(values))
        assert env.argmax() == 10
        assert env[0] == 0.0

    def test_click_train_peak_spacing(self):
        clip = AudioClip(synth.click_train(120.0), synth.SR)
        mel = extract_feature_matrices(clip, ["mel"])["mel"]
        env = onset_envelope(mel)
        # Brute-force local maxima above half the global peak.
        peaks = [
            m for m in range(1, len(env) - 1)
            if env[m] > env[m - 1] and env[m] >= env[m + 1] and env[m] > 0.5 * env.max()
        ]
        spacing = np.diff(peaks)
        expected = 0.5 * synth.SR / 512  # 0.5 s in frames
        assert np.all(np.abs(spacing - expected) <= 1.0)

    def test_needs_two_frames(self):
        with pytest.raises(ValueError):
            onset_envelope(mel_matrix(np.ones((4, 1))))


class TestAutocorrelationTempogram:
    def test_constant_envelope_triangular_decay(self):
        win = 50
        gram = autocorrelation_tempogram(np.ones(120), win_frames=win, hop_frames=10)
        taus = np.arange(win)
        expected = (win - taus) / win
        for col in gram.T:
            np.testing.assert_allclose(col, expected, rtol=1e-12)

    def test_impulse_train_peaks_at_period_multiples(self):
        period = 7
        onset = np.zeros(140)
        onset[::period] = 1.0
        gram = autocorrelation_tempogram(onset, win_frames=70, hop_frames=70)
        col = gram[:, 0]
        # Brute-force reference on the same window.
        w = onset[:70]
        ref = np.array([np.sum(w[: 70 - tau] * w[tau:70]) for tau in range(70)])
        ref /= ref[0]
        np.testing.assert_allclose(col, ref, rtol=1e-12)
        interior = col[1:]
        top = np.argsort(interior)[::-1][:9] + 1
        assert set(top) == {period * k for k in range(1, 10)}

    def test_zero_envelope_stays_zero(self):
        gram = autocorrelation_tempogram(np.zeros(100), win_frames=40)
        assert np.all(gram == 0)

    def test_window_longer_than_envelope_rejected(self):
        with pytest.raises(ValueError):
            autocorrelation_tempogram(np.ones(10), win_frames=11)


class TestCyclicTempogram:
    FRAME_PERIOD = 512 / 22050

    def test_zero_tempogram(self):
        out = cyclic_tempogram(np.zeros((50, 3)), self.FRAME_PERIOD)
        assert out.kind == "cyclic_tempogram"
        assert out.values.shape == (64, 3)
        assert np.all(out.values == 0)

    def test_reference_tempo_lands_in_bin_zero(self):
        # A single lag exactly at the reference tempo.
        lag = int(round(60.0 / (60.0 * self.FRAME_PERIOD)))  # tempo == ref
        gram = np.zeros((200, 1))
        gram[lag, 0] = 1.0
        period = 60.0 / (60.0 * lag)  # frame period making the lag exact
        out = cyclic_tempogram(gram, frame_period_s=period, ref_tempo_bpm=60.0)
        assert out.values[:, 0].argmax() == 0

    def test_impulse_trains_octave_apart_share_argmax(self):
        args = []
        for period in (6, 12):
            onset = np.zeros(150)
            onset[::period] = 1.0
            gram = autocorrelation_tempogram(onset, win_frames=96)
            out = cyclic_tempogram(gram, self.FRAME_PERIOD).values
            args.append(int(out.mean(axis=1).argmax()))
        diff = abs(args[0] - args[1])
        assert min(diff, 64 - diff) <= 1

    def test_end_to_end_click_tempo_octaves(self):
        args = []
        for bpm in (60.0, 120.0, 240.0):
            clip = AudioClip(synth.click_train(bpm), synth.SR)
            out = extract_feature_matrices(clip, ["cyclic_tempogram"])["cyclic_tempogram"]
            assert out.values.shape[0] == 64
            args.append(int(out.values.mean(axis=1).argmax()))
        for other in args[1:]:
            diff = abs(args[0] - other)
            assert min(diff, 64 - diff) <= 1
