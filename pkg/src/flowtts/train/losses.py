"""Full training objective: reconstruction + KL + duration NLL (+ SCL)."""

from __future__ import annotations

import numpy as np

from ..duration import duration_nll, expand_prior, gaussian_log_lik_matrix, mas
from ..errors import NumericFault
from ..ndgrad import RngStreams, Tensor
from ..postenc import kl_sample_term
from ..spkenc import SpeakerEncoder, scl_loss
from ..vocoder import slice_segments, spectral_loss
from .config import TrainConfig
from .model import TtsModel


def total_loss(
    items,
    model: TtsModel,
    spk_encoder: SpeakerEncoder,
    cfg: TrainConfig,
    streams: RngStreams,
) -> tuple[Tensor, dict[str, float]]:
    """Assemble the weighted objective over a batch of prepared items.

    Every stochastic site draws from its own named stream, so toggling the
    SCL (which draws nothing) never shifts the other components. Returns
    (scalar tensor, per-component breakdown including 'total').
    """
    if not items:
        raise ValueError("empty batch")
    hop = model.cfg.hop
    dtype = model.dtype
    post_rng = streams.get("posterior_noise")
    slice_rng = streams.get("slice")

    recon_sum = None
    kl_sum = None
    dur_sum = None
    scl_pairs: list[tuple[Tensor, Tensor]] = []

    for item in items:
        spk = Tensor(item.spk_embedding.astype(dtype))
        noise = post_rng.standard_normal((item.spec.shape[0], model.cfg.d_z))
        post = model.posterior.encode(item.spec, spk, noise=noise)
        z_p, log_det = model.flow.forward(post.z, spk)

        hidden, prior = model.text_encoder.encode(item.token_ids, item.language_id)
        ll = gaussian_log_lik_matrix(z_p.data, prior.mu.data, prior.log_sigma.data)
        durations = mas(ll)
        mu_f, ls_f = expand_prior(prior.mu, prior.log_sigma, durations)
        kl = kl_sample_term(z_p, post.log_sigma, mu_f, ls_f, log_det)

        lang_row = model.lang_row(item.language_id)
        dur = duration_nll(durations, hidden, spk, lang_row, model.duration_flow) * (1.0 / len(durations))

        z_seg, wav_seg, _ = slice_segments(post.z, item.wav, cfg.seg_frames, hop, slice_rng)
        wav_hat = model.vocoder(z_seg, spk)
        recon = spectral_loss(wav_hat, wav_seg.astype(dtype), resolutions=cfg.spectral_resolutions)

        recon_sum = recon if recon_sum is None else recon_sum + recon
        kl_sum = kl if kl_sum is None else kl_sum + kl
        dur_sum = dur if dur_sum is None else dur_sum + dur
        if cfg.scl_enabled:
            scl_pairs.append((Tensor(wav_seg.astype(dtype)), wav_hat))

    n = float(len(items))
    recon_mean = recon_sum * (1.0 / n)
    kl_mean = kl_sum * (1.0 / n)
    dur_mean = dur_sum * (1.0 / n)

    components: dict[str, float] = {
        "recon": recon_mean.item(),
        "kl": kl_mean.item(),
        "dur": dur_mean.item(),
    }
    total = cfg.w_recon * recon_mean + cfg.w_kl * kl_mean + cfg.w_dur * dur_mean
    reported = cfg.w_recon * components["recon"] + cfg.w_kl * components["kl"] + cfg.w_dur * components["dur"]
    if cfg.scl_enabled:
        scl = scl_loss([p[0] for p in scl_pairs], [p[1] for p in scl_pairs], cfg.alpha, spk_encoder)
        components["scl"] = scl.item()
        total = total + scl
        reported += components["scl"]

    for name, value in components.items():
        if not np.isfinite(value):
            raise NumericFault(f"non-finite loss component: {name}")
    # the reported total is the float64 recombination of the reported parts,
    # so the breakdown always sums exactly; the tensor drives the gradients
    components["total"] = reported
    if not np.isfinite(components["total"]):
        raise NumericFault("non-finite loss component: total")
    return total, components
