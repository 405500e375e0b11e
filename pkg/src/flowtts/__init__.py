"""Desk-scale zero-shot multi-speaker flow TTS.

Subpackages:
    ndgrad   -- reverse-mode autodiff over dense arrays, AdamW, named RNG streams
    audio    -- STFT, loudness normalization, silence trimming, WAV I/O, synthetic corpus
    spkenc   -- trainable speaker encoder, SECS, EER, speaker consistency loss
    textenc  -- character transformer encoder with language embeddings and prior head
    flow     -- invertible coupling-flow decoder with speaker conditioning
    postenc  -- posterior encoder and KL terms
    duration -- monotonic alignment search and the stochastic duration flow
    vocoder  -- latent-to-waveform generator and multi-resolution spectral loss
    train    -- loss assembly, batch samplers, checkpoints, training loops
    cli      -- command-line surface
"""

__version__ = "0.1.0"
