"""The assembled TTS model: text encoder, flow decoder, posterior encoder,
duration flow, and vocoder, with one parameter namespace for checkpoints."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ..duration import DurationFlow, DurationFlowConfig
from ..flow import FlowConfig, FlowStack
from ..ndgrad import RngStreams, Tensor, take
from ..postenc import PosteriorEncoder, PosteriorEncoderConfig
from ..textenc.model import LANG_DIM, TextEncoder, TextEncoderConfig
from ..vocoder import Vocoder, VocoderConfig


@dataclass
class ModelConfig:
    vocab_symbols: list[str]
    n_languages: int
    d_z: int = 16
    d_h: int = 64
    d_spk: int = 32
    flow_hidden: int = 32
    post_hidden: int = 32
    dur_hidden: int = 16
    n_fft: int = 512
    hop: int = 128
    sample_rate: int = 16000
    coupling: str = "additive"
    upsample_factors: tuple[int, ...] = (8, 4, 4)
    voc_channels: tuple[int, ...] = (32, 16, 8, 4)
    text_blocks: int = 2
    text_heads: int = 2
    text_ffn: int = 128
    flow_layers: int = 4
    flow_blocks: int = 4
    post_blocks: int = 4

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["upsample_factors"] = list(self.upsample_factors)
        d["voc_channels"] = list(self.voc_channels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["upsample_factors"] = tuple(d["upsample_factors"])
        d["voc_channels"] = tuple(d["voc_channels"])
        return cls(**d)


class TtsModel:
    def __init__(self, cfg: ModelConfig, streams: RngStreams, dtype=np.float32):
        self.cfg = cfg
        self.dtype = dtype
        bins = cfg.n_fft // 2 + 1
        self.text_encoder = TextEncoder(
            streams.fresh("init_textenc"),
            TextEncoderConfig(
                vocab_size=len(cfg.vocab_symbols),
                n_languages=cfg.n_languages,
                d_h=cfg.d_h,
                d_z=cfg.d_z,
                n_blocks=cfg.text_blocks,
                n_heads=cfg.text_heads,
                d_ffn=cfg.text_ffn,
            ),
            dtype=dtype,
        )
        self.flow = FlowStack(
            streams.fresh("init_flow"),
            FlowConfig(
                d_z=cfg.d_z,
                hidden=cfg.flow_hidden,
                d_spk=cfg.d_spk,
                n_layers=cfg.flow_layers,
                n_blocks=cfg.flow_blocks,
                coupling=cfg.coupling,
            ),
            dtype=dtype,
        )
        self.posterior = PosteriorEncoder(
            streams.fresh("init_postenc"),
            PosteriorEncoderConfig(
                n_bins=bins,
                d_z=cfg.d_z,
                hidden=cfg.post_hidden,
                d_spk=cfg.d_spk,
                n_blocks=cfg.post_blocks,
            ),
            dtype=dtype,
        )
        self.duration_flow = DurationFlow(
            streams.fresh("init_duration"),
            DurationFlowConfig(cond_dim=cfg.d_h + cfg.d_spk + LANG_DIM, hidden=cfg.dur_hidden),
            dtype=dtype,
        )
        self.vocoder = Vocoder(
            streams.fresh("init_vocoder"),
            VocoderConfig(
                d_z=cfg.d_z,
                d_spk=cfg.d_spk,
                hop=cfg.hop,
                factors=cfg.upsample_factors,
                channels=cfg.voc_channels,
            ),
            dtype=dtype,
        )
        self._modules = {
            "textenc": self.text_encoder,
            "flow": self.flow,
            "postenc": self.posterior,
            "duration": self.duration_flow,
            "vocoder": self.vocoder,
        }

    def lang_row(self, language_id: int) -> Tensor:
        return take(self.text_encoder.lang_table, [language_id]).reshape((LANG_DIM,))

    def named_params(self) -> dict[str, Tensor]:
        out = {}
        for prefix, mod in self._modules.items():
            out.update(mod.named_params(prefix + "."))
        return out

    def no_decay_names(self) -> set[str]:
        out = set()
        for prefix, mod in self._modules.items():
            out |= mod.no_decay_names(prefix + ".")
        return out

    def param_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_params().items()}
