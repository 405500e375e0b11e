"""Versioned binary checkpoint container.

Layout (little-endian):
    magic b"FTTSCKP1" | uint32 version | uint32 config_len | config JSON |
    uint32 n_arrays | repeated:
        uint32 name_len | name utf-8 | uint32 rank | rank * uint32 dims |
        float32 row-major data
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from ..errors import DataError
from ..ndgrad import Tensor

MAGIC = b"FTTSCKP1"
CKPT_VERSION = 1


def save_checkpoint(path: str, arrays: dict[str, np.ndarray], config: dict, step: int) -> None:
    meta = dict(config)
    meta["step"] = int(step)
    blob = json.dumps(meta).encode("utf-8")
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<II", CKPT_VERSION, len(blob)))
            f.write(blob)
            f.write(struct.pack("<I", len(arrays)))
            for name, arr in arrays.items():
                nb = name.encode("utf-8")
                a = np.ascontiguousarray(arr, dtype="<f4")
                f.write(struct.pack("<I", len(nb)))
                f.write(nb)
                f.write(struct.pack("<I", a.ndim))
                f.write(struct.pack(f"<{a.ndim}I", *a.shape))
                f.write(a.tobytes())
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def load_checkpoint(path: str) -> tuple[dict[str, np.ndarray], dict, int]:
    """Returns (arrays, config, step)."""
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except FileNotFoundError as e:
        raise DataError(f"checkpoint not found: {path}") from e
    if blob[:8] != MAGIC:
        raise DataError(f"{path}: bad magic, not a checkpoint")
    try:
        version, clen = struct.unpack_from("<II", blob, 8)
        if version != CKPT_VERSION:
            raise DataError(f"{path}: unsupported checkpoint version {version}")
        off = 16
        meta = json.loads(blob[off : off + clen].decode("utf-8"))
        off += clen
        (count,) = struct.unpack_from("<I", blob, off)
        off += 4
        arrays = {}
        for _ in range(count):
            (nlen,) = struct.unpack_from("<I", blob, off)
            off += 4
            name = blob[off : off + nlen].decode("utf-8")
            off += nlen
            (rank,) = struct.unpack_from("<I", blob, off)
            off += 4
            dims = struct.unpack_from(f"<{rank}I", blob, off)
            off += 4 * rank
            size = int(np.prod(dims)) if rank else 1
            arr = np.frombuffer(blob, dtype="<f4", count=size, offset=off).reshape(dims).copy()
            off += 4 * size
            arrays[name] = arr
        if off != len(blob):
            raise DataError(f"{path}: trailing bytes, container corrupt")
    except (struct.error, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise DataError(f"{path}: corrupt checkpoint ({e})") from e
    step = int(meta.pop("step", 0))
    return arrays, meta, step


def load_partial(
    arrays: dict[str, np.ndarray],
    params: dict[str, Tensor],
    grow_embeddings: bool = False,
) -> dict[str, list[str]]:
    """Copy arrays into matching (name, shape) parameters; the rest keep their
    fresh initialization. With grow_embeddings, 2-D tables whose column count
    matches copy the overlapping rows instead of being fully reinitialized."""
    report = {"loaded": [], "reinitialized": [], "row_copied": []}
    for name, p in params.items():
        src = arrays.get(name)
        if src is not None and src.shape == p.data.shape:
            p.data[...] = src.astype(p.data.dtype)
            report["loaded"].append(name)
        elif (
            grow_embeddings
            and src is not None
            and src.ndim == 2
            and p.data.ndim == 2
            and src.shape[1] == p.data.shape[1]
        ):
            rows = min(src.shape[0], p.data.shape[0])
            p.data[:rows] = src[:rows].astype(p.data.dtype)
            report["row_copied"].append(name)
        else:
            report["reinitialized"].append(name)
    return report
