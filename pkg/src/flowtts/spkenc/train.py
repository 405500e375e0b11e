"""Episodic training of the speaker encoder on a corpus, plus holdout EER."""

from __future__ import annotations

import logging

import numpy as np

from ..audio.corpus import CorpusManifest
from ..audio.dsp import Waveform, preprocess, stft_linear
from ..audio.wavio import read_wav
from ..errors import DataError
from ..ndgrad import AdamW, OptimHyper, RngStreams, Tensor, backward
from .loss import angular_proto_loss
from .metrics import eer, secs
from .model import SpeakerEncoder, SpkEncConfig

log = logging.getLogger(__name__)


def _load_specs(manifest: CorpusManifest, cfg: SpkEncConfig) -> dict[int, list[np.ndarray]]:
    by_speaker: dict[int, list[np.ndarray]] = {}
    for e in manifest.entries:
        samples, sr = read_wav(manifest.wav_path(e))
        wav = preprocess(Waveform(samples, sr))
        spec = stft_linear(wav, cfg.n_fft, cfg.hop)
        by_speaker.setdefault(e.speaker_id, []).append(spec.magnitudes.astype(np.float32))
    return by_speaker


def train_spkenc(manifest: CorpusManifest, cfg: SpkEncConfig | None = None) -> tuple[SpeakerEncoder, float]:
    """Train the encoder episodically; returns (model, holdout EER)."""
    cfg = cfg if cfg is not None else SpkEncConfig()
    by_speaker = _load_specs(manifest, cfg)
    speakers = sorted(by_speaker)
    if len(speakers) < 2:
        raise DataError("speaker encoder training needs at least 2 speakers")

    holdout: dict[int, list[np.ndarray]] = {}
    train: dict[int, list[np.ndarray]] = {}
    for s in speakers:
        utts = by_speaker[s]
        k = min(cfg.holdout_per_speaker, max(0, len(utts) - 2))
        holdout[s] = utts[:k]
        train[s] = utts[k:]
        if len(train[s]) < 2:
            raise DataError(f"speaker {s} needs at least 2 training utterances")

    streams = RngStreams(cfg.seed)
    model = SpeakerEncoder(streams.fresh("spkenc_init"), cfg)
    w = Tensor(np.asarray(10.0, dtype=np.float32), requires_grad=True)
    b = Tensor(np.asarray(-5.0, dtype=np.float32), requires_grad=True)
    params = model.named_params()
    params["proto.w"] = w
    params["proto.b"] = b
    opt = AdamW(params, OptimHyper(lr0=cfg.lr, gamma=0.999, weight_decay=1e-4), no_decay={"proto.w", "proto.b"})

    sampler = streams.get("spkenc_batch")
    for step in range(cfg.steps):
        n = min(cfg.speakers_per_batch, len(speakers))
        chosen = sampler.choice(speakers, size=n, replace=False)
        queries, protos = [], []
        for s in chosen:
            utts = train[int(s)]
            i, j = sampler.choice(len(utts), size=2, replace=False)
            queries.append(model.embed_tensor(Tensor(utts[int(i)])))
            protos.append(model.embed_tensor(Tensor(utts[int(j)])))
        loss = angular_proto_loss(queries, protos, w, b)
        opt.zero_grad()
        backward(loss, params=list(params.values()))
        opt.step()
        if step % 100 == 0:
            log.info("spkenc step %d loss %.4f", step, loss.item())

    holdout_eer = evaluate_eer(model, holdout if any(holdout.values()) else train)
    return model, holdout_eer


def evaluate_eer(model: SpeakerEncoder, utts_by_speaker: dict[int, list[np.ndarray]]) -> float:
    embs: dict[int, list[np.ndarray]] = {}
    for s, utts in utts_by_speaker.items():
        for mag in utts:
            from ..audio.dsp import LinearSpectrogram

            spec = LinearSpectrogram(mag, model.cfg.n_fft, model.cfg.hop)
            embs.setdefault(s, []).append(model.embed(spec).vector)
    genuine, impostor = [], []
    speakers = sorted(embs)
    for a_idx, sa in enumerate(speakers):
        ea = embs[sa]
        for i in range(len(ea)):
            for j in range(i + 1, len(ea)):
                genuine.append(secs(ea[i], ea[j]))
        for sb in speakers[a_idx + 1 :]:
            for va in ea:
                for vb in embs[sb]:
                    impostor.append(secs(va, vb))
    return eer(genuine, impostor)


def corpus_embeddings(model: SpeakerEncoder, manifest: CorpusManifest) -> dict[str, np.ndarray]:
    """Frozen-encoder embedding for every manifest entry, keyed by wav path."""
    out = {}
    for e in manifest.entries:
        samples, sr = read_wav(manifest.wav_path(e))
        wav = preprocess(Waveform(samples, sr))
        spec = stft_linear(wav, model.cfg.n_fft, model.cfg.hop)
        out[e.wav_path] = model.embed(spec).vector
    return out
