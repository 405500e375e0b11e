from .model import Discriminator, Vocoder, VocoderConfig
from .losses import spectral_loss, DEFAULT_RESOLUTIONS
from .slicing import slice_segments

__all__ = [
    "Discriminator",
    "Vocoder",
    "VocoderConfig",
    "spectral_loss",
    "DEFAULT_RESOLUTIONS",
    "slice_segments",
]
