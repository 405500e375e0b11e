"""Monotonic alignment search: exact DP over a token-by-frame score matrix.

Finds the monotonic, surjective (every token gets >= 1 frame) alignment
maximizing the summed per-frame log-likelihood. Ties are broken toward
the earlier token advance, i.e. among optimal alignments the returned
duration vector is lexicographically smallest.
"""

from __future__ import annotations

import numpy as np


def mas(log_lik: np.ndarray) -> np.ndarray:
    """log_lik (L, T) -> integer durations (L,) summing to T."""
    ll = np.asarray(log_lik, dtype=np.float64)
    if ll.ndim != 2:
        raise ValueError("log_lik must be a 2-D (tokens, frames) matrix")
    n_tok, n_frames = ll.shape
    if n_tok > n_frames:
        raise ValueError(f"cannot align {n_tok} tokens to {n_frames} frames (need L <= T)")
    if not np.all(np.isfinite(ll)):
        raise ValueError("log_lik entries must be finite")

    q = np.full((n_tok, n_frames), -np.inf)
    q[0, :] = np.cumsum(ll[0, :])
    for j in range(1, n_frames):
        hi = min(j, n_tok - 1)
        if hi >= 1:
            stay = q[1 : hi + 1, j - 1]
            advance = q[0:hi, j - 1]
            q[1 : hi + 1, j] = np.maximum(stay, advance) + ll[1 : hi + 1, j]

    durations = np.zeros(n_tok, dtype=np.int64)
    i = n_tok - 1
    for j in range(n_frames - 1, 0, -1):
        durations[i] += 1
        if i > 0 and q[i - 1, j - 1] > q[i, j - 1]:  # tie keeps the current token
            i -= 1
    durations[0] += 1  # frame 0 always belongs to token 0
    assert i == 0, "backtrack must terminate at the first token"
    return durations


def gaussian_log_lik_matrix(z_p: np.ndarray, mu: np.ndarray, log_sigma: np.ndarray) -> np.ndarray:
    """Per-(token, frame) diagonal-Gaussian log-likelihood, summed over channels.

    z_p (T, d), mu/log_sigma (L, d) -> (L, T) matrix of log N(z_p_t; mu_j, sigma_j).
    """
    z = np.asarray(z_p, dtype=np.float64)
    m = np.asarray(mu, dtype=np.float64)
    ls = np.asarray(log_sigma, dtype=np.float64)
    if z.ndim != 2 or m.shape != ls.shape or m.shape[1] != z.shape[1]:
        raise ValueError(f"incompatible shapes: z_p {z.shape}, mu {m.shape}, log_sigma {ls.shape}")
    inv_var = np.exp(-2.0 * ls)  # (L, d)
    diff2 = (z[None, :, :] - m[:, None, :]) ** 2  # (L, T, d)
    per = -0.5 * np.log(2.0 * np.pi) - ls[:, None, :] - 0.5 * diff2 * inv_var[:, None, :]
    return per.sum(axis=2)
