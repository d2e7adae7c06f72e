"""Exception types shared across the toolkit.

Argument/precondition violations raise plain ValueError; the classes here
cover failures tied to external data (files, manifests, checkpoints).
"""


class SrfeError(Exception):
    """Base class for toolkit-specific errors."""


class DecodeError(SrfeError):
    """WAV container is malformed (bad RIFF header, truncated chunks)."""


class UnsupportedFormatError(SrfeError):
    """WAV is valid but uses a codec we do not decode (non-PCM, odd widths)."""


class EmptyAudioError(SrfeError):
    """WAV decoded to zero samples."""


class FeatureFileError(SrfeError):
    """Feature file is corrupt: bad magic, version, dimensions, or truncation."""


class ManifestError(SrfeError):
    """Dataset manifest cannot be used (missing columns, bad rows)."""


class DuplicateFilenameError(ManifestError):
    """Manifest lists the same clip filename twice."""


class StratificationError(SrfeError):
    """A class has too few records to split into train and validation."""


class CheckpointError(SrfeError):
    """Model checkpoint is corrupt or does not match the expected layout."""
