import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowtts import ndgrad as ng
from flowtts.duration import (
    DurationFlow,
    DurationFlowConfig,
    build_condition,
    duration_nll,
    expand_prior,
    gaussian_log_lik_matrix,
    mas,
    sample_durations,
)
from flowtts.ndgrad import Tensor, backward

from helpers import finite_diff, rel_err


# ---- MAS oracle -------------------------------------------------------------


def monotonic_alignments(n_tok, n_frames):
    """All duration vectors: compositions of n_frames into n_tok positive parts."""
    for cuts in itertools.combinations(range(1, n_frames), n_tok - 1):
        bounds = (0,) + cuts + (n_frames,)
        yield np.diff(bounds)


def alignment_score(ll, durations):
    score, t = 0.0, 0
    for tok, d in enumerate(durations):
        for _ in range(d):
            score += ll[tok, t]
            t += 1
    return score


def brute_force_mas(ll):
    """Max score and the lexicographically-smallest argmax duration vector."""
    n_tok, n_frames = ll.shape
    best_score, best = -np.inf, None
    for dur in monotonic_alignments(n_tok, n_frames):
        s = alignment_score(ll, dur)
        if s > best_score + 1e-12:
            best_score, best = s, dur
        elif abs(s - best_score) <= 1e-12 and tuple(dur) < tuple(best):
            best = dur
    return best_score, np.asarray(best)


# ---- MAS tests ----------------------------------------------------------------


def test_mas_single_token_takes_all_frames():
    ll = np.random.default_rng(0).normal(size=(1, 7))
    assert np.array_equal(mas(ll), [7])


def test_mas_diagonal_dominant_gives_all_ones():
    n = 6
    ll = np.full((n, n), -10.0)
    np.fill_diagonal(ll, 5.0)
    assert np.array_equal(mas(ll), np.ones(n, dtype=int))


def test_mas_matches_brute_force_small_random():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n_tok = int(rng.integers(1, 6))
        n_frames = int(rng.integers(n_tok, 9))
        ll = rng.normal(size=(n_tok, n_frames))
        got = mas(ll)
        best_score, best = brute_force_mas(ll)
        assert abs(alignment_score(ll, got) - best_score) < 1e-9
        assert np.array_equal(got, best)


def test_mas_tie_break_prefers_earlier_advance():
    # constant matrices are all-ties; lexicographically smallest wins
    assert np.array_equal(mas(np.zeros((2, 3))), [1, 2])
    assert np.array_equal(mas(np.zeros((3, 4))), [1, 1, 2])
    # integer-valued matrices produce frequent ties: still must match the oracle
    rng = np.random.default_rng(2)
    for _ in range(100):
        n_tok = int(rng.integers(2, 5))
        n_frames = int(rng.integers(n_tok, 8))
        ll = rng.integers(-1, 2, size=(n_tok, n_frames)).astype(float)
        got = mas(ll)
        best_score, best = brute_force_mas(ll)
        assert abs(alignment_score(ll, got) - best_score) < 1e-9
        assert np.array_equal(got, best)


@given(st.integers(1, 5), st.integers(0, 6), st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_mas_invariants_hold(n_tok, extra, seed):
    n_frames = n_tok + extra
    ll = np.random.default_rng(seed).normal(size=(n_tok, n_frames))
    d = mas(ll)
    assert d.sum() == n_frames
    assert np.all(d >= 1)
    assert len(d) == n_tok


def test_mas_rejects_more_tokens_than_frames():
    with pytest.raises(ValueError):
        mas(np.zeros((4, 3)))


def test_mas_rejects_non_finite():
    ll = np.zeros((2, 3))
    ll[0, 0] = np.nan
    with pytest.raises(ValueError):
        mas(ll)


def test_gaussian_log_lik_matrix_matches_direct():
    rng = np.random.default_rng(3)
    z = rng.normal(size=(5, 4))
    mu = rng.normal(size=(3, 4))
    ls = rng.normal(size=(3, 4)) * 0.3
    got = gaussian_log_lik_matrix(z, mu, ls)
    for j in range(3):
        for t in range(5):
            want = np.sum(
                -0.5 * np.log(2 * np.pi) - ls[j] - 0.5 * (z[t] - mu[j]) ** 2 / np.exp(2 * ls[j])
            )
            assert got[j, t] == pytest.approx(want, rel=1e-12)


# ---- duration flow -------------------------------------------------------------


def make_flow(seed=0, cond_dim=12, dtype=np.float32, hidden=8):
    cfg = DurationFlowConfig(cond_dim=cond_dim, hidden=hidden)
    return DurationFlow(np.random.default_rng(seed), cfg, dtype=dtype)


def make_cond(rng, length, d_h=6, d_spk=4, dtype=np.float32):
    hidden = Tensor(rng.normal(size=(length, d_h)).astype(dtype))
    spk = Tensor(rng.normal(size=d_spk).astype(dtype))
    lang = Tensor(rng.normal(size=2).astype(dtype))
    return hidden, spk, lang


def randomize_heads(flow, rng, scale=0.2):
    for name, p in flow.named_params().items():
        if ".head." in name:
            p.data[...] = rng.normal(0, scale, size=p.data.shape).astype(p.data.dtype)


def test_zero_init_flow_nll_is_standard_normal_exactly():
    flow = make_flow()
    rng = np.random.default_rng(4)
    hidden, spk, lang = make_cond(rng, 5)
    d = np.array([3, 6, 5, 7, 4])
    nll = duration_nll(d, hidden, spk, lang, flow)
    x = np.log(d + 0.5).astype(np.float32)
    expected = 0.5 * float(np.sum(x.astype(np.float64) ** 2)) + 0.5 * len(d) * np.log(2 * np.pi)
    assert nll.item() == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("length", [1, 2, 5, 8])
def test_flow_round_trip(length):
    flow = make_flow(dtype=np.float64)
    rng = np.random.default_rng(5)
    randomize_heads(flow, rng)
    hidden, spk, lang = make_cond(rng, length, dtype=np.float64)
    cond = build_condition(hidden, spk, lang)
    x = Tensor(rng.normal(size=(length, 1)))
    with ng.no_grad():
        u, _ = flow.forward(x, cond)
        back = flow.inverse(u, cond)
    assert np.max(np.abs(back.data - x.data)) < 1e-5


def test_nll_gradient_matches_finite_differences():
    flow = make_flow(dtype=np.float64, cond_dim=6, hidden=4)
    rng = np.random.default_rng(6)
    randomize_heads(flow, rng)
    d = np.array([2, 5, 3])

    params = flow.named_params()
    hidden0 = rng.normal(size=(3, 2))
    spk0 = rng.normal(size=2)
    lang0 = rng.normal(size=2)

    hidden = Tensor(hidden0.copy(), requires_grad=True)
    spk = Tensor(spk0.copy(), requires_grad=True)
    lang = Tensor(lang0.copy(), requires_grad=True)
    out = duration_nll(d, hidden, spk, lang, flow)
    inputs = [hidden, spk, lang] + list(params.values())
    backward(out, params=inputs)

    def f(h, s, l):
        with ng.no_grad():
            return duration_nll(d, Tensor(h), Tensor(s), Tensor(l), flow).item()

    numeric = finite_diff(f, [hidden0.copy(), spk0.copy(), lang0.copy()])
    assert rel_err(hidden.grad, numeric[0]) < 1e-4
    assert rel_err(spk.grad, numeric[1]) < 1e-4
    assert rel_err(lang.grad, numeric[2]) < 1e-4

    # one representative flow parameter as well
    name, p = next((n, p) for n, p in params.items() if "cpl0.net1.w" in n)
    p0 = p.data.copy()

    def fp(w):
        p.data = w
        with ng.no_grad():
            val = duration_nll(d, Tensor(hidden0), Tensor(spk0), Tensor(lang0), flow).item()
        p.data = p0
        return val

    numeric_p = finite_diff(fp, [p0.copy()])[0]
    assert rel_err(p.grad, numeric_p) < 1e-4


def test_nll_rejects_bad_durations():
    flow = make_flow()
    rng = np.random.default_rng(7)
    hidden, spk, lang = make_cond(rng, 3)
    with pytest.raises(ValueError):
        duration_nll(np.array([1, 0, 2]), hidden, spk, lang, flow)
    with pytest.raises(ValueError):
        duration_nll(np.array([1, 2]), hidden, spk, lang, flow)


def test_sample_durations_always_positive_and_deterministic():
    flow = make_flow()
    rng = np.random.default_rng(8)
    randomize_heads(flow, rng)
    hidden, spk, lang = make_cond(rng, 6)
    noise = np.random.default_rng(0).standard_normal((6, 1)) * 2.0
    with ng.no_grad():
        d1 = sample_durations(hidden, spk, lang, flow, noise_scale=1.0, noise=noise)
        d2 = sample_durations(hidden, spk, lang, flow, noise_scale=1.0, noise=noise)
    assert np.array_equal(d1, d2)
    assert np.all(d1 >= 1)


def test_sample_durations_zero_noise_scale_is_flow_inverse_of_zero():
    flow = make_flow()
    rng = np.random.default_rng(9)
    randomize_heads(flow, rng)
    hidden, spk, lang = make_cond(rng, 4)
    with ng.no_grad():
        d0 = sample_durations(hidden, spk, lang, flow, noise_scale=0.0, rng=np.random.default_rng(1))
        cond = build_condition(hidden, spk, lang)
        x = flow.inverse(Tensor(np.zeros((4, 1), dtype=np.float32)), cond).data[:, 0]
    expected = np.maximum(np.ceil(np.exp(x) - 0.5), 1).astype(int)
    assert np.array_equal(d0, expected)


def test_integerization_maps_log_duration_intervals_correctly():
    # ceil(exp(x) - 0.5) recovers d for any x inside (log(d-0.5), log(d+0.5));
    # probe the interval midpoint x = log(d)
    for d in range(1, 50):
        assert int(np.ceil(np.exp(np.log(float(d))) - 0.5)) == d


# ---- expand_prior ---------------------------------------------------------------


def test_expand_prior_all_ones_is_identity():
    rng = np.random.default_rng(10)
    mu = Tensor(rng.normal(size=(4, 3)))
    ls = Tensor(rng.normal(size=(4, 3)))
    emu, els = expand_prior(mu, ls, np.ones(4, dtype=int))
    assert np.array_equal(emu.data, mu.data)
    assert np.array_equal(els.data, ls.data)


def test_expand_prior_repeats_rows_in_order():
    mu = Tensor(np.array([[0.0], [1.0]]))
    ls = Tensor(np.array([[10.0], [11.0]]))
    emu, _ = expand_prior(mu, ls, [2, 3])
    assert np.array_equal(emu.data[:, 0], [0, 0, 1, 1, 1])


def test_expand_prior_row_count_is_total_duration():
    rng = np.random.default_rng(11)
    mu = Tensor(rng.normal(size=(5, 2)))
    ls = Tensor(rng.normal(size=(5, 2)))
    d = np.array([1, 4, 2, 3, 1])
    emu, els = expand_prior(mu, ls, d)
    assert emu.shape == (d.sum(), 2)
    assert els.shape == (d.sum(), 2)


def test_expand_prior_mismatch_raises():
    mu = Tensor(np.zeros((3, 2)))
    ls = Tensor(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        expand_prior(mu, ls, [1, 2])
    with pytest.raises(ValueError):
        expand_prior(mu, ls, [1, 0, 2])
