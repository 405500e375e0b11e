from .vocab import Vocabulary, char_vocab, PAD, BLANK
from .model import CharSequence, PriorStats, TextEncoder, TextEncoderConfig

__all__ = [
    "Vocabulary",
    "char_vocab",
    "PAD",
    "BLANK",
    "CharSequence",
    "PriorStats",
    "TextEncoder",
    "TextEncoderConfig",
]
