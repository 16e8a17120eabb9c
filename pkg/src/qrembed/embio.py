"""Embedding file formats.

Text: first line "n k", then one "id v1 ... vk" row per node with 6
significant digits (word2vec-style).  Binary: little-endian header
(magic b"QEMB", uint64 n, uint64 k) followed by row-major float32 data.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DomainError

MAGIC = b"QEMB"


def write_text(path, emb: np.ndarray):
    n, k = emb.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{n} {k}\n")
        for i in range(n):
            fh.write(str(i) + " " + " ".join(f"{v:.6g}" for v in emb[i]) + "\n")


def read_text(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DomainError(f"{path}: bad embedding header")
        n, k = int(header[0]), int(header[1])
        emb = np.empty((n, k))
        for line in fh:
            parts = line.split()
            if len(parts) != k + 1:
                raise DomainError(f"{path}: row has {len(parts) - 1} values, expected {k}")
            emb[int(parts[0])] = [float(v) for v in parts[1:]]
    return emb


def write_binary(path, emb: np.ndarray):
    n, k = emb.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", n, k))
        fh.write(np.ascontiguousarray(emb, dtype="<f4").tobytes())


def read_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise DomainError(f"{path}: not an embedding file (bad magic)")
        n, k = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != n * k:
        raise DomainError(f"{path}: truncated embedding file")
    return data.reshape(n, k).astype(np.float64)


def write(path, emb: np.ndarray, fmt: str = "text"):
    if fmt == "text":
        write_text(path, emb)
    elif fmt == "binary":
        write_binary(path, emb)
    else:
        raise DomainError(f"unknown embedding format {fmt!r}")


def read(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
    return read_binary(path) if magic == MAGIC else read_text(path)
