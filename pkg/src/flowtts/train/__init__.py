from .model import ModelConfig, TtsModel
from .config import AdaptationConfig, TrainConfig
from .losses import total_loss
from .sampler import language_balanced_batches, adaptation_batches
from .checkpoint import save_checkpoint, load_checkpoint, load_partial, CKPT_VERSION
from .loop import BatchItem, Dataset, prepare_dataset, train_loop

__all__ = [
    "ModelConfig",
    "TtsModel",
    "AdaptationConfig",
    "TrainConfig",
    "total_loss",
    "language_balanced_batches",
    "adaptation_batches",
    "save_checkpoint",
    "load_checkpoint",
    "load_partial",
    "CKPT_VERSION",
    "BatchItem",
    "Dataset",
    "prepare_dataset",
    "train_loop",
]
