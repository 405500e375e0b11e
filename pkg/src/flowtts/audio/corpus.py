"""Deterministic synthetic multi-speaker, multi-language corpus.

Each synthetic speaker is a voice recipe: base pitch, two resonant
"formant" peaks, and an amplitude-envelope style. Each language is a
symbol -> (frame duration, pitch offset, formant shift) mapping drawn
once per language, with distinct mean durations so rhythm genuinely
differs between languages. Every character of an utterance renders as a
harmonic segment of duration * hop samples; utterances are normalized to
-27 dBFS on disk.

All randomness hangs off SeedSequence chains keyed by (seed, role, index),
so speaker k sounds identical no matter how many speakers a corpus has.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from .dsp import Waveform, rms_normalize
from .wavio import write_wav

LETTERS = "abcdefghijklmnopqrstuvwxyz"
# language mean durations in frames per symbol; index 0 deliberately 6.0
LANG_MEAN_FRAMES = [6, 9, 7, 11, 8, 10, 6, 9]
DURATION_OFFSETS = [-2, -1, -1, 0, 0, 1, 1, 2]  # zero-sum, keeps the charset mean exact


def default_charset(language_id: int) -> str:
    return "".join(LETTERS[(2 * language_id + j) % 26] for j in range(8))


@dataclass
class SpeakerProfile:
    f0: float
    formant1: float
    formant2: float
    bw1: float
    bw2: float
    attack: float
    decay: float
    am_depth: float
    am_rate: float
    rolloff: float


@dataclass
class LanguageProfile:
    language_id: int
    charset: str
    sym_frames: dict[str, int]
    sym_pitch: dict[str, float]  # semitone offsets
    sym_formant: dict[str, float]  # multiplicative shift
    mean_frames: float


@dataclass
class CorpusEntry:
    wav_path: str
    speaker_id: int
    language_id: int
    text: str


@dataclass
class CorpusManifest:
    entries: list[CorpusEntry]
    root: str = "."

    @property
    def speakers(self) -> list[int]:
        return sorted({e.speaker_id for e in self.entries})

    @property
    def languages(self) -> list[int]:
        return sorted({e.language_id for e in self.entries})

    def charsets(self) -> dict[int, str]:
        sets: dict[int, set] = {}
        for e in self.entries:
            sets.setdefault(e.language_id, set()).update(e.text)
        return {k: "".join(sorted(v)) for k, v in sets.items()}

    def wav_path(self, entry: CorpusEntry) -> str:
        return os.path.join(self.root, entry.wav_path)


@dataclass
class CorpusConfig:
    n_speakers: int = 3
    n_languages: int = 2
    utterances_per_speaker: int = 40  # total per speaker, split across languages
    seed: int = 0
    vocab: dict[int, str] | None = None  # per-language charsets; default_charset otherwise
    sample_rate: int = 16000
    hop: int = 128
    text_len: tuple[int, int] = (5, 9)


def _rng(seed: int, *key) -> np.random.Generator:
    parts = [int(seed) & 0xFFFFFFFF]
    for k in key:
        if isinstance(k, str):
            parts.extend(k.encode("utf-8"))
        else:
            parts.append(int(k))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(parts)))


def speaker_profile(seed: int, speaker_id: int) -> SpeakerProfile:
    r = _rng(seed, "speaker", speaker_id)
    # deterministic wide spread (pitch ladder + low-discrepancy formant grid)
    # so small speaker sets stay far apart; jitter keeps profiles organic
    f0 = 110.0 * (1.26 ** (speaker_id % 8)) * r.uniform(0.97, 1.03)
    u1 = (speaker_id * 0.6180339887 + 0.17) % 1.0
    u2 = (speaker_id * 0.3819660113 + 0.55) % 1.0
    return SpeakerProfile(
        f0=f0,
        formant1=350.0 + 550.0 * u1 + r.uniform(-25.0, 25.0),
        formant2=1300.0 + 1300.0 * u2 + r.uniform(-60.0, 60.0),
        bw1=r.uniform(80.0, 150.0),
        bw2=r.uniform(150.0, 260.0),
        attack=r.uniform(0.08, 0.22),
        decay=r.uniform(0.10, 0.30),
        am_depth=r.uniform(0.0, 0.15),
        am_rate=r.uniform(3.0, 7.0),
        rolloff=r.uniform(0.5, 1.0),
    )


def language_profile(seed: int, language_id: int, charset: str | None = None) -> LanguageProfile:
    charset = charset if charset is not None else default_charset(language_id)
    if not charset:
        raise DataError(f"empty character set for language {language_id}")
    r = _rng(seed, "language", language_id)
    mean = LANG_MEAN_FRAMES[language_id % len(LANG_MEAN_FRAMES)]
    offsets = list(DURATION_OFFSETS)
    while len(offsets) < len(charset):
        offsets += [0]
    offsets = offsets[: len(charset)]
    r.shuffle(offsets)
    sym_frames = {c: max(2, mean + o) for c, o in zip(charset, offsets)}
    sym_pitch = {c: float(r.uniform(-3.0, 3.0)) for c in charset}
    sym_formant = {c: float(r.uniform(0.90, 1.12)) for c in charset}
    actual_mean = float(np.mean([sym_frames[c] for c in charset]))
    return LanguageProfile(language_id, charset, sym_frames, sym_pitch, sym_formant, actual_mean)


def render_utterance(
    text: str,
    spk: SpeakerProfile,
    lang: LanguageProfile,
    rng: np.random.Generator,
    sample_rate: int = 16000,
    hop: int = 128,
) -> np.ndarray:
    """Render text as concatenated harmonic segments; returns float64 samples."""
    pieces = []
    for ch in text:
        if ch not in lang.sym_frames:
            raise DataError(f"character {ch!r} is not in language {lang.language_id}'s charset")
        jitter = int(rng.choice([-1, 0, 0, 1]))
        frames = max(2, lang.sym_frames[ch] + jitter)
        n = frames * hop
        t = np.arange(n) / sample_rate
        f0 = spk.f0 * 2.0 ** (lang.sym_pitch[ch] / 12.0)
        shift = lang.sym_formant[ch]
        f1, f2 = spk.formant1 * shift, spk.formant2 * shift
        seg = np.zeros(n)
        h = 1
        while h * f0 < 0.475 * sample_rate:
            fh = h * f0
            res = np.exp(-((fh - f1) ** 2) / (2 * spk.bw1**2)) + 0.8 * np.exp(-((fh - f2) ** 2) / (2 * spk.bw2**2))
            amp = (0.15 + res) / h**spk.rolloff
            seg += amp * np.sin(2 * np.pi * fh * t + rng.uniform(0, 2 * np.pi))
            h += 1
        env = np.full(n, 1.0)
        na, nd = max(1, int(spk.attack * n)), max(1, int(spk.decay * n))
        env[:na] = np.linspace(0.3, 1.0, na)
        env[-nd:] = np.linspace(1.0, 0.3, nd)
        env *= 1.0 - spk.am_depth * (0.5 + 0.5 * np.sin(2 * np.pi * spk.am_rate * t))
        seg *= env / max(1e-9, np.max(np.abs(seg)))
        pieces.append(seg)
    return np.concatenate(pieces)


def utterance_text(seed: int, speaker_id: int, language_id: int, utt_index: int, charset: str, text_len=(5, 9)) -> str:
    r = _rng(seed, "text", speaker_id, language_id, utt_index)
    n = int(r.integers(text_len[0], text_len[1] + 1))
    return "".join(r.choice(list(charset)) for _ in range(n))


def synth_corpus(cfg: CorpusConfig, out_dir: str) -> CorpusManifest:
    """Generate WAVs + manifest.jsonl under out_dir; deterministic under cfg.seed."""
    if cfg.n_speakers < 2:
        raise DataError("need at least 2 speakers")
    if cfg.n_languages < 1:
        raise DataError("need at least 1 language")
    charsets = dict(cfg.vocab) if cfg.vocab else {i: default_charset(i) for i in range(cfg.n_languages)}
    for lid, cs in charsets.items():
        if not cs:
            raise DataError(f"empty character set for language {lid}")
    langs = {i: language_profile(cfg.seed, i, charsets.get(i)) for i in range(cfg.n_languages)}
    os.makedirs(os.path.join(out_dir, "wav"), exist_ok=True)

    entries = []
    for sid in range(cfg.n_speakers):
        spk = speaker_profile(cfg.seed, sid)
        for u in range(cfg.utterances_per_speaker):
            lid = u % cfg.n_languages
            lang = langs[lid]
            text = utterance_text(cfg.seed, sid, lid, u, lang.charset, cfg.text_len)
            rng = _rng(cfg.seed, "render", sid, lid, u)
            samples = render_utterance(text, spk, lang, rng, cfg.sample_rate, cfg.hop)
            wav = rms_normalize(Waveform(samples, cfg.sample_rate), -27.0)
            rel = os.path.join("wav", f"s{sid:03d}_l{lid}_u{u:04d}.wav")
            write_wav(os.path.join(out_dir, rel), wav.samples, cfg.sample_rate)
            entries.append(CorpusEntry(rel, sid, lid, text))

    manifest = CorpusManifest(entries, root=out_dir)
    save_manifest(manifest, os.path.join(out_dir, "manifest.jsonl"))
    meta = {
        "seed": cfg.seed,
        "sample_rate": cfg.sample_rate,
        "hop": cfg.hop,
        "charsets": {str(k): v for k, v in charsets.items()},
        "mean_frames": {str(k): langs[k].mean_frames for k in langs},
    }
    with open(os.path.join(out_dir, "corpus_meta.json"), "w") as f:
        json.dump(meta, f, indent=2)
    return manifest


def save_manifest(manifest: CorpusManifest, path: str) -> None:
    with open(path, "w") as f:
        for e in manifest.entries:
            f.write(json.dumps({
                "wav_path": e.wav_path,
                "speaker_id": e.speaker_id,
                "language_id": e.language_id,
                "text": e.text,
            }) + "\n")


def load_manifest(path: str) -> CorpusManifest:
    if not os.path.exists(path):
        raise DataError(f"manifest not found: {path}")
    entries = []
    with open(path) as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                entries.append(CorpusEntry(rec["wav_path"], int(rec["speaker_id"]),
                                           int(rec["language_id"]), rec["text"]))
            except (json.JSONDecodeError, KeyError) as e:
                raise DataError(f"{path}:{line_no}: bad manifest record ({e})") from e
    if not entries:
        raise DataError(f"{path}: empty manifest")
    return CorpusManifest(entries, root=os.path.dirname(path) or ".")
