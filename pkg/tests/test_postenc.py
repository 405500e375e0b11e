import numpy as np
import pytest

from flowtts import ndgrad as ng
from flowtts.ndgrad import Tensor, backward
from flowtts.postenc import (
    PosteriorEncoder,
    PosteriorEncoderConfig,
    kl_aligned,
    kl_sample_term,
)

from helpers import finite_diff, rel_err


def make_encoder(seed=0, dtype=np.float32):
    return PosteriorEncoder(np.random.default_rng(seed), dtype=dtype)


def random_inputs(rng, frames=12, bins=257, d_spk=32):
    mags = np.abs(rng.normal(size=(frames, bins))).astype(np.float32)
    spk = Tensor(rng.normal(size=d_spk).astype(np.float32))
    return mags, spk


def test_zero_noise_gives_mu_exactly():
    enc = make_encoder()
    rng = np.random.default_rng(1)
    mags, spk = random_inputs(rng)
    with ng.no_grad():
        post = enc.encode(mags, spk, noise=np.zeros((12, 16)))
    assert np.array_equal(post.z.data, post.mu.data)


def test_output_length_matches_frames():
    enc = make_encoder()
    rng = np.random.default_rng(2)
    for frames in (1, 5, 33):
        mags, spk = random_inputs(rng, frames=frames)
        with ng.no_grad():
            post = enc.encode(mags, spk, rng=np.random.default_rng(0))
        assert post.z.shape == (frames, 16)


def test_reparameterization_identity_bit_exact():
    enc = make_encoder()
    rng = np.random.default_rng(3)
    mags, spk = random_inputs(rng)
    noise = rng.standard_normal((12, 16)).astype(np.float32)
    with ng.no_grad():
        post = enc.encode(mags, spk, noise=noise)
        recon = post.mu.data + np.exp(post.log_sigma.data) * post.epsilon
    assert np.array_equal(post.z.data, recon)


def test_speaker_conditioning_changes_mu():
    enc = make_encoder()
    # emulate >= 1 training step: head weights non-zero
    rng = np.random.default_rng(4)
    enc.head.w.data[...] = rng.normal(0, 0.1, size=enc.head.w.data.shape).astype(np.float32)
    mags, spk1 = random_inputs(rng)
    spk2 = Tensor(rng.normal(size=32).astype(np.float32))
    with ng.no_grad():
        p1 = enc.encode(mags, spk1, noise=np.zeros((12, 16)))
        p2 = enc.encode(mags, spk2, noise=np.zeros((12, 16)))
    assert np.max(np.abs(p1.mu.data - p2.mu.data)) > 1e-9


def test_shape_mismatch_raises():
    enc = make_encoder()
    rng = np.random.default_rng(5)
    mags, spk = random_inputs(rng)
    with pytest.raises(ValueError):
        enc.encode(mags[:, :-1], spk)
    with pytest.raises(ValueError):
        enc.encode(mags, Tensor(rng.normal(size=31).astype(np.float32)))


# ---- KL -------------------------------------------------------------------


def test_kl_identical_is_zero():
    rng = np.random.default_rng(6)
    mu = Tensor(rng.normal(size=(4, 3)))
    ls = Tensor(rng.normal(size=(4, 3)) * 0.3)
    assert kl_aligned(mu, ls, Tensor(mu.data.copy()), Tensor(ls.data.copy())).item() == pytest.approx(0.0, abs=1e-12)


def test_kl_unit_shift_is_half():
    shape = (5, 2)
    mu_q = Tensor(np.ones(shape))
    zeros = Tensor(np.zeros(shape))
    kl = kl_aligned(mu_q, zeros, Tensor(np.zeros(shape)), Tensor(np.zeros(shape)))
    assert kl.item() == pytest.approx(0.5)


def test_kl_nonnegative_random():
    rng = np.random.default_rng(7)
    for _ in range(50):
        mu_q = Tensor(rng.normal(size=(3, 4)))
        ls_q = Tensor(rng.normal(size=(3, 4)) * 0.5)
        mu_p = Tensor(rng.normal(size=(3, 4)))
        ls_p = Tensor(rng.normal(size=(3, 4)) * 0.5)
        assert kl_aligned(mu_q, ls_q, mu_p, ls_p).item() >= 0.0


def mc_kl_oracle(mu_q, ls_q, mu_p, ls_p, n=100_000, seed=0):
    """Monte-Carlo estimate of E_q[log q - log p], averaged per element."""
    rng = np.random.default_rng(seed)
    sq, sp = np.exp(ls_q), np.exp(ls_p)
    total = 0.0
    chunk = 10_000
    done = 0
    while done < n:
        k = min(chunk, n - done)
        z = mu_q + sq * rng.standard_normal((k,) + mu_q.shape)
        log_q = -ls_q - 0.5 * np.log(2 * np.pi) - 0.5 * ((z - mu_q) / sq) ** 2
        log_p = -ls_p - 0.5 * np.log(2 * np.pi) - 0.5 * ((z - mu_p) / sp) ** 2
        total += np.sum(np.mean(log_q - log_p, axis=tuple(range(1, z.ndim))))
        done += k
    return total / n


def test_kl_matches_monte_carlo():
    rng = np.random.default_rng(8)
    for case in range(3):
        mu_q = rng.normal(size=(2, 3))
        ls_q = rng.normal(size=(2, 3)) * 0.4
        mu_p = rng.normal(size=(2, 3))
        ls_p = rng.normal(size=(2, 3)) * 0.4
        closed = kl_aligned(Tensor(mu_q), Tensor(ls_q), Tensor(mu_p), Tensor(ls_p)).item()
        mc = mc_kl_oracle(mu_q, ls_q, mu_p, ls_p, seed=case)
        assert abs(closed - mc) <= 0.02 * max(abs(mc), 1e-3)


def test_kl_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    mu_q0 = rng.normal(size=(2, 3))
    ls_q0 = rng.normal(size=(2, 3)) * 0.3
    mu_p0 = rng.normal(size=(2, 3))
    ls_p0 = rng.normal(size=(2, 3)) * 0.3

    tensors = [Tensor(a.copy(), requires_grad=True) for a in (mu_q0, ls_q0, mu_p0, ls_p0)]
    out = kl_aligned(*tensors)
    backward(out, params=tensors)

    def f(*arrs):
        with ng.no_grad():
            return kl_aligned(*[Tensor(a) for a in arrs]).item()

    numeric = finite_diff(f, [a.copy() for a in (mu_q0, ls_q0, mu_p0, ls_p0)])
    for t, n in zip(tensors, numeric):
        assert rel_err(t.grad, n) < 1e-4


def test_kl_sample_term_reduces_to_aligned_in_expectation():
    # with identity flow (log_det 0), averaging the sample term over noise
    # approaches the closed form
    rng = np.random.default_rng(10)
    mu_q = rng.normal(size=(2, 2))
    ls_q = rng.normal(size=(2, 2)) * 0.3
    mu_p = rng.normal(size=(2, 2))
    ls_p = rng.normal(size=(2, 2)) * 0.3
    closed = kl_aligned(Tensor(mu_q), Tensor(ls_q), Tensor(mu_p), Tensor(ls_p)).item()
    total = 0.0
    n = 20000
    zero_ld = Tensor(np.zeros(()))
    for i in range(n):
        z = mu_q + np.exp(ls_q) * rng.standard_normal((2, 2))
        total += kl_sample_term(Tensor(z), Tensor(ls_q), Tensor(mu_p), Tensor(ls_p), zero_ld).item()
    assert abs(total / n - closed) < 0.02 * max(abs(closed), 1e-2)


def test_kl_shape_mismatch_raises():
    with pytest.raises(ValueError):
        kl_aligned(Tensor(np.zeros((2, 2))), Tensor(np.zeros((2, 2))), Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 2))))


def test_paper_scale_preset_constructs():
    cfg = PosteriorEncoderConfig.paper_scale()
    assert cfg.n_blocks == 16 and cfg.d_z == 192
    enc = PosteriorEncoder(np.random.default_rng(0), cfg)
    rng = np.random.default_rng(1)
    with ng.no_grad():
        post = enc.encode(np.abs(rng.normal(size=(4, 257))).astype(np.float32),
                          Tensor(rng.normal(size=32).astype(np.float32)),
                          noise=np.zeros((4, 192)))
    assert post.z.shape == (4, 192)
