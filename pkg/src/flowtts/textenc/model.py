"""Character-level transformer encoder with concatenated language embeddings.

Each character embedding (d_h - 4 dims) is concatenated with the
utterance's 4-dim trainable language embedding before sinusoidal positions
and the transformer stack. A linear head maps hidden states to per-token
prior mean and log-stddev; log-stddev is clamped to [-9, 2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..ndgrad import Tensor, clip, concat, matmul, softmax, take, tanh, transpose
from ..nn import LayerNorm, Linear, Module

LANG_DIM = 4
LOG_SIGMA_MIN, LOG_SIGMA_MAX = -9.0, 2.0


@dataclass
class TextEncoderConfig:
    vocab_size: int = 16
    n_languages: int = 2
    d_h: int = 64
    d_z: int = 16
    n_blocks: int = 2
    n_heads: int = 2
    d_ffn: int = 128

    @classmethod
    def paper_scale(cls, vocab_size: int, n_languages: int) -> "TextEncoderConfig":
        # full-size preset: 10 blocks, 196 hidden channels
        return cls(vocab_size=vocab_size, n_languages=n_languages, d_h=196, n_blocks=10, n_heads=2, d_ffn=768, d_z=192)


@dataclass
class CharSequence:
    token_ids: list[int]
    language_id: int


@dataclass
class PriorStats:
    mu: Tensor  # (L, d_z)
    log_sigma: Tensor  # (L, d_z)


_POS_CACHE: dict = {}


def sinusoidal_positions(length: int, dim: int, dtype=np.float32) -> np.ndarray:
    key = (length, dim, np.dtype(dtype).name)
    pe = _POS_CACHE.get(key)
    if pe is None:
        pos = np.arange(length, dtype=np.float64)[:, None]
        i = np.arange(dim, dtype=np.float64)[None, :]
        angles = pos / np.power(10000.0, (i // 2) * 2.0 / dim)
        pe = np.where(i % 2 == 0, np.sin(angles), np.cos(angles)).astype(dtype)
        _POS_CACHE[key] = pe
    return pe


class SelfAttention(Module):
    def __init__(self, rng, d_h: int, n_heads: int, dtype=np.float32):
        super().__init__()
        if d_h % n_heads:
            raise ValueError("d_h must divide evenly across heads")
        self.n_heads = n_heads
        self.d_k = d_h // n_heads
        self.wq = self.add_module("wq", Linear(rng, d_h, d_h, dtype=dtype))
        self.wk = self.add_module("wk", Linear(rng, d_h, d_h, dtype=dtype))
        self.wv = self.add_module("wv", Linear(rng, d_h, d_h, dtype=dtype))
        self.wo = self.add_module("wo", Linear(rng, d_h, d_h, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        q, k, v = self.wq(x), self.wk(x), self.wv(x)
        heads = []
        scale = 1.0 / math.sqrt(self.d_k)
        for h in range(self.n_heads):
            sl = slice(h * self.d_k, (h + 1) * self.d_k)
            qh, kh, vh = q[:, sl], k[:, sl], v[:, sl]
            scores = matmul(qh, transpose(kh)) * scale
            heads.append(matmul(softmax(scores, axis=-1), vh))
        return self.wo(concat(heads, axis=1))


class TransformerBlock(Module):
    def __init__(self, rng, d_h: int, n_heads: int, d_ffn: int, dtype=np.float32):
        super().__init__()
        self.ln1 = self.add_module("ln1", LayerNorm(d_h, dtype=dtype))
        self.attn = self.add_module("attn", SelfAttention(rng, d_h, n_heads, dtype=dtype))
        self.ln2 = self.add_module("ln2", LayerNorm(d_h, dtype=dtype))
        self.ff1 = self.add_module("ff1", Linear(rng, d_h, d_ffn, dtype=dtype))
        self.ff2 = self.add_module("ff2", Linear(rng, d_ffn, d_h, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        x = x + self.attn(self.ln1(x))
        return x + self.ff2(tanh(self.ff1(self.ln2(x))))


class TextEncoder(Module):
    def __init__(self, rng: np.random.Generator, cfg: TextEncoderConfig, dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        d_char = cfg.d_h - LANG_DIM
        self.token_table = self.add_param(
            "token_table", (rng.normal(size=(cfg.vocab_size, d_char)) * 0.1).astype(dtype), decay=False
        )
        self.lang_table = self.add_param(
            "lang_table", (rng.normal(size=(cfg.n_languages, LANG_DIM)) * 0.1).astype(dtype), decay=False
        )
        self.blocks = [
            self.add_module(f"block{i}", TransformerBlock(rng, cfg.d_h, cfg.n_heads, cfg.d_ffn, dtype=dtype))
            for i in range(cfg.n_blocks)
        ]
        self.ln_out = self.add_module("ln_out", LayerNorm(cfg.d_h, dtype=dtype))
        self.prior_head = self.add_module("prior_head", Linear(rng, cfg.d_h, 2 * cfg.d_z, dtype=dtype))
        self.dtype = dtype

    def __call__(self, seq: CharSequence) -> tuple[Tensor, PriorStats]:
        return self.encode(seq.token_ids, seq.language_id)

    def encode(self, token_ids: list[int], language_id: int) -> tuple[Tensor, PriorStats]:
        """Returns (hidden (L, d_h), prior over (L, d_z))."""
        if len(token_ids) == 0:
            raise DataError("empty token sequence")
        if any(t < 0 or t >= self.cfg.vocab_size for t in token_ids):
            raise DataError("token id outside the vocabulary")
        if not (0 <= language_id < self.cfg.n_languages):
            raise DataError(f"unknown language id {language_id}")
        length = len(token_ids)
        chars = take(self.token_table, token_ids)
        lang = take(self.lang_table, [language_id] * length)
        x = concat([chars, lang], axis=1)
        x = x + Tensor(sinusoidal_positions(length, self.cfg.d_h, self.dtype))
        for block in self.blocks:
            x = block(x)
        hidden = self.ln_out(x)
        stats = self.prior_head(hidden)
        mu = stats[:, : self.cfg.d_z]
        log_sigma = clip(stats[:, self.cfg.d_z :], LOG_SIGMA_MIN, LOG_SIGMA_MAX)
        return hidden, PriorStats(mu, log_sigma)
