from .model import (
    PosteriorEncoder,
    PosteriorEncoderConfig,
    PosteriorSample,
    kl_aligned,
    kl_sample_term,
)

__all__ = [
    "PosteriorEncoder",
    "PosteriorEncoderConfig",
    "PosteriorSample",
    "kl_aligned",
    "kl_sample_term",
]
