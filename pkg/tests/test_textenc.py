import numpy as np
import pytest

from flowtts import ndgrad as ng
from flowtts.errors import DataError
from flowtts.ndgrad import AdamW, OptimHyper, Tensor, backward, tsum
from flowtts.textenc import (
    BLANK,
    PAD,
    CharSequence,
    TextEncoder,
    TextEncoderConfig,
    Vocabulary,
    char_vocab,
)


def make_encoder(seed=0, **kw):
    cfg = TextEncoderConfig(vocab_size=12, n_languages=3, **kw)
    return TextEncoder(np.random.default_rng(seed), cfg), cfg


# ---- vocabulary -----------------------------------------------------------


def test_char_vocab_union_without_duplicates():
    v = char_vocab(["abcd", "cdef"])
    assert v.symbols[:2] == [PAD, BLANK]
    assert v.symbols[2:] == ["a", "b", "c", "d", "e", "f"]


def test_char_vocab_accepts_mapping():
    v = char_vocab({0: "ab", 1: "bc"})
    assert v.symbols[2:] == ["a", "b", "c"]


def test_vocab_round_trip(tmp_path):
    v = char_vocab(["abcxyz"])
    path = str(tmp_path / "vocab.txt")
    v.save(path)
    assert Vocabulary.load(path) == v


def test_vocab_unknown_char_names_it():
    v = char_vocab(["abc"])
    with pytest.raises(DataError, match="'z'"):
        v.encode("az")


def test_vocab_lowercases():
    v = char_vocab(["abc"])
    assert v.encode("AbC") == v.encode("abc")


# ---- encoder --------------------------------------------------------------


def test_encode_shapes():
    enc, cfg = make_encoder()
    hidden, prior = enc.encode([1, 2, 3, 4, 5], 0)
    assert hidden.shape == (5, cfg.d_h)
    assert prior.mu.shape == (5, cfg.d_z)
    assert prior.log_sigma.shape == (5, cfg.d_z)


def test_encode_deterministic():
    enc, _ = make_encoder()
    h1, p1 = enc.encode([1, 2, 3], 1)
    h2, p2 = enc.encode([1, 2, 3], 1)
    assert np.array_equal(h1.data, h2.data)
    assert np.array_equal(p1.mu.data, p2.mu.data)


def test_language_embedding_changes_prior():
    enc, _ = make_encoder()
    _, p0 = enc.encode([1, 2, 3], 0)
    _, p1 = enc.encode([1, 2, 3], 1)
    assert np.max(np.abs(p0.mu.data - p1.mu.data)) > 1e-9


def test_token_order_changes_output():
    enc, _ = make_encoder()
    h1, _ = enc.encode([1, 2, 3, 4], 0)
    h2, _ = enc.encode([4, 3, 2, 1], 0)
    assert not np.allclose(h1.data[0], h2.data[3], atol=1e-9)


def test_encode_rejects_bad_inputs():
    enc, _ = make_encoder()
    with pytest.raises(DataError):
        enc.encode([], 0)
    with pytest.raises(DataError):
        enc.encode([1, 99], 0)
    with pytest.raises(DataError):
        enc.encode([1], 7)


def test_log_sigma_clamped():
    enc, _ = make_encoder()
    # blow up the head bias so the clamp engages on both sides
    enc.prior_head.b.data[:] = 100.0
    enc.prior_head.b.data[-1] = -100.0
    _, prior = enc.encode([1, 2], 0)
    assert np.max(prior.log_sigma.data) <= 2.0
    assert np.min(prior.log_sigma.data) >= -9.0


def test_gradient_reaches_only_present_language_row():
    enc, _ = make_encoder(seed=3)
    params = enc.named_params()
    no_decay = enc.no_decay_names()
    assert "lang_table" in no_decay and "token_table" in no_decay
    before = enc.lang_table.data.copy()
    opt = AdamW(params, OptimHyper(lr0=1e-2), no_decay=no_decay)

    _, prior = enc.encode([1, 2, 3], language_id=1)
    loss = tsum(prior.mu * prior.mu) + tsum(prior.log_sigma * prior.log_sigma)
    opt.zero_grad()
    backward(loss, params=list(params.values()))
    opt.step()
    after = enc.lang_table.data
    assert np.any(after[1] != before[1])  # used row moved
    assert np.array_equal(after[0], before[0])  # absent rows untouched
    assert np.array_equal(after[2], before[2])


def test_paper_scale_preset_constructs():
    cfg = TextEncoderConfig.paper_scale(vocab_size=40, n_languages=3)
    assert cfg.n_blocks == 10 and cfg.d_h == 196
    enc = TextEncoder(np.random.default_rng(0), cfg)
    with ng.no_grad():
        hidden, prior = enc.encode([1, 2, 3], 0)
    assert hidden.shape == (3, 196)
    assert prior.mu.shape == (3, cfg.d_z)


def test_char_sequence_call():
    enc, cfg = make_encoder()
    hidden, _ = enc(CharSequence([1, 2], 0))
    assert hidden.shape == (2, cfg.d_h)
