"""Training configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class AdaptationConfig:
    speaker_id: int
    fraction: float = 0.25
    steps: int = 1500

    def __post_init__(self):
        if not (0.0 < self.fraction < 1.0):
            raise ValueError(f"adaptation fraction must be in (0, 1), got {self.fraction}")


@dataclass
class TrainConfig:
    batch_size: int = 2
    seg_frames: int = 20
    w_recon: float = 45.0
    w_kl: float = 1.0
    w_dur: float = 1.0
    alpha: float = 9.0
    scl_enabled: bool = False
    steps: int = 2000
    seed: int = 0
    adaptation: AdaptationConfig | None = None
    log_every: int = 50
    secs_every: int = 500
    checkpoint_every: int = 0  # 0 = final only
    noise_scale: float = 0.667  # prior sampling temperature at inference
    duration_noise_scale: float = 0.8
    spectral_resolutions: tuple = ((512, 128), (256, 64), (1024, 256))

    def __post_init__(self):
        for name in ("w_recon", "w_kl", "w_dur", "alpha"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
