"""Dataset preparation and the training / adaptation loops."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np

from ..audio.corpus import CorpusManifest
from ..audio.dsp import Waveform, preprocess, stft_linear
from ..audio.wavio import read_wav
from ..errors import DataError
from ..ndgrad import AdamW, OptimHyper, RngStreams, backward
from ..spkenc import SpeakerEncoder, secs
from ..textenc import Vocabulary, char_vocab
from .checkpoint import save_checkpoint
from .config import TrainConfig
from .losses import total_loss
from .model import ModelConfig, TtsModel
from .sampler import adaptation_batches, language_balanced_batches

log = logging.getLogger(__name__)


@dataclass
class BatchItem:
    wav: np.ndarray
    spec: np.ndarray
    token_ids: list[int]
    language_id: int
    speaker_id: int
    spk_embedding: np.ndarray
    wav_path: str


@dataclass
class Dataset:
    items: list[BatchItem]
    vocab: Vocabulary
    n_languages: int

    @property
    def language_ids(self) -> list[int]:
        return [it.language_id for it in self.items]


def prepare_dataset(
    manifest: CorpusManifest,
    spk_encoder: SpeakerEncoder,
    vocab: Vocabulary | None = None,
    n_fft: int = 512,
    hop: int = 128,
    min_frames: int | None = None,
) -> Dataset:
    """Load, preprocess, and featurize every manifest entry; cache frozen
    speaker embeddings for conditioning."""
    if vocab is None:
        vocab = char_vocab(manifest.charsets())
    n_languages = max(manifest.languages) + 1
    items = []
    for e in manifest.entries:
        samples, sr = read_wav(manifest.wav_path(e))
        wav = preprocess(Waveform(samples, sr))
        spec = stft_linear(wav, n_fft, hop)
        token_ids = vocab.encode(e.text)
        if spec.frames < max(min_frames or 0, len(token_ids)):
            raise DataError(f"{e.wav_path}: too short ({spec.frames} frames) for its text")
        emb = spk_encoder.embed(spec).vector
        items.append(
            BatchItem(
                wav=wav.samples,
                spec=spec.magnitudes.astype(np.float32),
                token_ids=token_ids,
                language_id=e.language_id,
                speaker_id=e.speaker_id,
                spk_embedding=emb,
                wav_path=e.wav_path,
            )
        )
    return Dataset(items, vocab, n_languages)


def _holdout_secs(model: TtsModel, spk_encoder: SpeakerEncoder, dataset: Dataset, cfg: TrainConfig) -> float:
    """Quick zero-shot probe: synthesize one short utterance per speaker and
    compare against the speaker's reference embedding."""
    from ..infer import synthesize_waveform
    from ..audio.dsp import stft_linear as stft

    seen = {}
    for it in dataset.items:
        if it.speaker_id not in seen:
            seen[it.speaker_id] = it
    vals = []
    for sid, it in sorted(seen.items()):
        wav, _ = synthesize_waveform(
            model,
            it.token_ids[:6],
            it.language_id,
            it.spk_embedding,
            noise_scale=cfg.noise_scale,
            duration_noise_scale=0.0,
            prior_rng=np.random.default_rng(0),
        )
        min_len = model.cfg.n_fft + 7 * model.cfg.hop  # embed() needs >= 8 frames
        if len(wav) < min_len:
            continue
        emb = spk_encoder.embed(stft(Waveform(wav, model.cfg.sample_rate), model.cfg.n_fft, model.cfg.hop)).vector
        vals.append(secs(emb, it.spk_embedding))
    return float(np.mean(vals)) if vals else float("nan")


def train_loop(
    dataset: Dataset,
    cfg: TrainConfig,
    spk_encoder: SpeakerEncoder,
    model: TtsModel | None = None,
    model_cfg: ModelConfig | None = None,
    out_dir: str | None = None,
) -> tuple[TtsModel, list[dict]]:
    """Run cfg.steps optimization steps; returns (model, metrics log).

    When cfg.adaptation is set, batches carry exactly ceil(B * fraction)
    items of the adapted speaker and the model usually starts from a
    loaded checkpoint.
    """
    streams = RngStreams(cfg.seed)
    if model is None:
        if model_cfg is None:
            model_cfg = ModelConfig(vocab_symbols=dataset.vocab.symbols, n_languages=dataset.n_languages)
        model = TtsModel(model_cfg, streams)
    spk_encoder.set_trainable(False)

    params = model.named_params()
    opt = AdamW(params, OptimHyper(), no_decay=model.no_decay_names())

    sampler_rng = streams.get("sampler")
    if cfg.adaptation is not None:
        adapted = [i for i, it in enumerate(dataset.items) if it.speaker_id == cfg.adaptation.speaker_id]
        if not adapted:
            raise DataError(f"adapted speaker {cfg.adaptation.speaker_id} has no samples")
        batches = adaptation_batches(
            dataset.language_ids, adapted, cfg.batch_size, sampler_rng, cfg.adaptation.fraction
        )
        n_steps = cfg.adaptation.steps
    else:
        batches = language_balanced_batches(dataset.language_ids, cfg.batch_size, sampler_rng)
        n_steps = cfg.steps

    metrics: list[dict] = []
    for step in range(n_steps):
        idx = next(batches)
        items = [dataset.items[i] for i in idx]
        loss, components = total_loss(items, model, spk_encoder, cfg, streams)
        opt.zero_grad()
        backward(loss, params=list(params.values()))
        lr = opt.step()

        if step % cfg.log_every == 0 or step == n_steps - 1:
            rec = {"step": step, "lr": lr, **components}
            if cfg.secs_every and (step % cfg.secs_every == 0 or step == n_steps - 1):
                rec["secs_holdout"] = _holdout_secs(model, spk_encoder, dataset, cfg)
            metrics.append(rec)
            log.info(
                "step %d lr %.3g total %.4f recon %.4f kl %.4f dur %.4f%s",
                step, lr, components["total"], components["recon"], components["kl"], components["dur"],
                f" scl {components['scl']:.4f}" if "scl" in components else "",
            )
        if out_dir and cfg.checkpoint_every and step and step % cfg.checkpoint_every == 0:
            _write_checkpoint(os.path.join(out_dir, f"ckpt_{step:06d}.bin"), model, spk_encoder, opt.state.step)

    if out_dir:
        _write_checkpoint(os.path.join(out_dir, "ckpt_final.bin"), model, spk_encoder, opt.state.step)
    return model, metrics


def _write_checkpoint(path: str, model: TtsModel, spk_encoder: SpeakerEncoder, step: int) -> None:
    arrays = dict(model.param_arrays())
    for name, p in spk_encoder.named_params().items():
        arrays["spkenc." + name] = p.data
    config = {"model": model.cfg.to_dict(), "spkenc": {"d_spk": spk_encoder.cfg.d_spk, "hidden": spk_encoder.cfg.hidden,
                                                       "n_fft": spk_encoder.cfg.n_fft, "hop": spk_encoder.cfg.hop}}
    save_checkpoint(path, arrays, config, step)


def load_model_from_checkpoint(path: str):
    """Rebuild (model, spk_encoder, step) from a checkpoint file."""
    from ..spkenc import SpkEncConfig
    from .checkpoint import load_checkpoint, load_partial

    arrays, config, step = load_checkpoint(path)
    if "model" not in config:
        raise DataError(f"{path}: checkpoint lacks a model config snapshot")
    model_cfg = ModelConfig.from_dict(config["model"])
    model = TtsModel(model_cfg, RngStreams(0))
    report = load_partial(arrays, model.named_params())
    if report["reinitialized"]:
        raise DataError(f"{path}: checkpoint is missing arrays: {report['reinitialized'][:5]}")

    sc = config.get("spkenc", {})
    spk_cfg = SpkEncConfig(d_spk=sc.get("d_spk", 32), hidden=sc.get("hidden", 32),
                           n_fft=sc.get("n_fft", 512), hop=sc.get("hop", 128))
    spk_encoder = SpeakerEncoder(np.random.default_rng(0), spk_cfg)
    spk_arrays = {k[len("spkenc."):]: v for k, v in arrays.items() if k.startswith("spkenc.")}
    spk_report = load_partial(spk_arrays, spk_encoder.named_params())
    if spk_report["reinitialized"]:
        raise DataError(f"{path}: checkpoint is missing speaker-encoder arrays")
    spk_encoder.set_trainable(False)
    return model, spk_encoder, step
