"""srfe: spectral and rhythm features, a from-scratch CNN, and evaluation.

The pipeline: WAV clips are decoded, resampled to 22,050 Hz and padded or
trimmed to 5 seconds; six feature kinds (mel spectrogram, MFCC, cyclic
tempogram, and STFT / CQT / CENS chromagrams) are rendered as fixed-size
128x216 images; a convolutional classifier trains on them; evaluation
produces confusion matrices plus precision/recall/F1 at class and category
level.
"""

from .audio import AudioClip, load_wav, pad_or_trim, resample, write_wav
from .config import RunConfig
from .dataset import ClipRecord, SplitAssignment, category_of, parse_manifest, stratified_split

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "load_wav",
    "write_wav",
    "resample",
    "pad_or_trim",
    "RunConfig",
    "ClipRecord",
    "SplitAssignment",
    "parse_manifest",
    "stratified_split",
    "category_of",
    "__version__",
]
