"""The six spectral and rhythm features plus the fixed-size image conversion.

Feature kinds and their canonical row counts:

    mel               128   triangular filter bank energies
    mfcc               20   orthonormal DCT of the log mel bands
    cyclic_tempogram   64   octave-folded autocorrelation tempogram
    chroma_stft        12   pitch-class energy from the power spectrogram
    chroma_cqt         12   pitch-class energy from constant-Q magnitudes
    chroma_cens        12   normalized, quantized, smoothed chroma

Every kind ends up as a 128x216 single-channel image in [0, 1] before it
reaches the classifier (see `image.to_feature_image`).
"""

from .types import FEATURE_KINDS, FeatureImage, FeatureMatrix
from .mel import MelFilterBank, build_mel_filterbank, hz_to_mel, mel_to_hz, mel_spectrogram, mfcc
from .rhythm import autocorrelation_tempogram, cyclic_tempogram, onset_envelope
from .chroma import (
    ChromaMap,
    CqtKernel,
    build_chroma_map,
    build_cqt_kernel,
    cens_chromagram,
    cqt,
    cqt_chromagram,
    fold_cqt_to_chroma,
    stft_chromagram,
)
from .image import bilinear_resize, read_feature_file, to_feature_image, write_feature_file
from .pipeline import FeatureParams, extract_feature_images

__all__ = [
    "FEATURE_KINDS",
    "FeatureImage",
    "FeatureMatrix",
    "MelFilterBank",
    "ChromaMap",
    "CqtKernel",
    "FeatureParams",
    "build_mel_filterbank",
    "build_chroma_map",
    "build_cqt_kernel",
    "hz_to_mel",
    "mel_to_hz",
    "mel_spectrogram",
    "mfcc",
    "onset_envelope",
    "autocorrelation_tempogram",
    "cyclic_tempogram",
    "stft_chromagram",
    "cqt",
    "cqt_chromagram",
    "fold_cqt_to_chroma",
    "cens_chromagram",
    "to_feature_image",
    "bilinear_resize",
    "write_feature_file",
    "read_feature_file",
    "extract_feature_images",
]
