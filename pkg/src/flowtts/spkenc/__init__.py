from .model import SpeakerEmbedding, SpeakerEncoder, SpkEncConfig
from .metrics import secs, eer
from .loss import scl_loss, angular_proto_loss
from .train import train_spkenc, corpus_embeddings
from .embed_io import save_embeddings, load_embeddings, load_scores, save_scores

__all__ = [
    "SpeakerEmbedding",
    "SpeakerEncoder",
    "SpkEncConfig",
    "secs",
    "eer",
    "scl_loss",
    "angular_proto_loss",
    "train_spkenc",
    "corpus_embeddings",
    "save_embeddings",
    "load_embeddings",
    "load_scores",
    "save_scores",
]
