from .wavio import read_wav, write_wav
from .dsp import (
    Waveform,
    LinearSpectrogram,
    stft_linear,
    magnitude_stft_tensor,
    rms_normalize,
    trim_silence,
    rms_dbfs,
    preprocess,
)
from .corpus import (
    CorpusConfig,
    CorpusEntry,
    CorpusManifest,
    LanguageProfile,
    SpeakerProfile,
    language_profile,
    speaker_profile,
    synth_corpus,
    load_manifest,
    save_manifest,
)

__all__ = [
    "read_wav",
    "write_wav",
    "Waveform",
    "LinearSpectrogram",
    "stft_linear",
    "magnitude_stft_tensor",
    "rms_normalize",
    "trim_silence",
    "rms_dbfs",
    "preprocess",
    "CorpusConfig",
    "CorpusEntry",
    "CorpusManifest",
    "LanguageProfile",
    "SpeakerProfile",
    "language_profile",
    "speaker_profile",
    "synth_corpus",
    "load_manifest",
    "save_manifest",
]
