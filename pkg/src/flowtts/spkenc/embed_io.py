"""On-disk formats: named-embedding container and verification score files.

Embedding container layout (little-endian):
    magic b"FTTSEMB1" | uint32 dim | uint32 count |
    repeated: uint16 name_len | name utf-8 | dim * float32
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import DataError

MAGIC = b"FTTSEMB1"


def save_embeddings(path: str, embeddings: dict[str, np.ndarray]) -> None:
    if not embeddings:
        raise DataError("refusing to write an empty embedding container")
    dims = {np.asarray(v).shape for v in embeddings.values()}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise DataError(f"embeddings must share one 1-D shape, got {dims}")
    d = next(iter(dims))[0]
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", d, len(embeddings)))
        for name, vec in embeddings.items():
            nb = name.encode("utf-8")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            f.write(np.asarray(vec, dtype="<f4").tobytes())


def load_embeddings(path: str) -> dict[str, np.ndarray]:
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except FileNotFoundError as e:
        raise DataError(f"embedding file not found: {path}") from e
    if blob[:8] != MAGIC:
        raise DataError(f"{path}: bad magic, not an embedding container")
    d, count = struct.unpack_from("<II", blob, 8)
    off = 16
    out = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", blob, off)
        off += 2
        name = blob[off : off + nlen].decode("utf-8")
        off += nlen
        vec = np.frombuffer(blob, dtype="<f4", count=d, offset=off).copy()
        off += 4 * d
        out[name] = vec
    if off != len(blob):
        raise DataError(f"{path}: trailing bytes, container corrupt")
    return out


def save_scores(path: str, genuine: list[float], impostor: list[float]) -> None:
    with open(path, "w") as f:
        for s in genuine:
            f.write(f"genuine {s}\n")
        for s in impostor:
            f.write(f"impostor {s}\n")


def load_scores(path: str) -> tuple[list[float], list[float]]:
    """Two-column (label, score) text; labels genuine/impostor or 1/0."""
    genuine, impostor = [], []
    try:
        fh = open(path)
    except FileNotFoundError as e:
        raise DataError(f"score file not found: {path}") from e
    with fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(f"{path}:{line_no}: expected 'label score'")
            label, score = parts
            try:
                val = float(score)
            except ValueError as e:
                raise DataError(f"{path}:{line_no}: bad score {score!r}") from e
            if label.lower() in ("genuine", "target", "1"):
                genuine.append(val)
            elif label.lower() in ("impostor", "nontarget", "0"):
                impostor.append(val)
            else:
                raise DataError(f"{path}:{line_no}: unknown label {label!r}")
    return genuine, impostor
