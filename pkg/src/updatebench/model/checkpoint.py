"""Versioned binary checkpoint container.

Byte layout (all integers little-endian):

    bytes 0-3   magic b"UBCP"
    u32         format version (currently 1)
    u32         length of the config JSON in bytes
    ...         config JSON, UTF-8: {"model": ModelConfig fields,
                "vocab": [subword, ...], "meta": {...}}
    u32         tensor count N
    N times:    u16 name length, name UTF-8,
                u8 ndim, ndim * u32 dimensions
    ...         tensor data: raw float32 little-endian, C order,
                concatenated in index order

Tensors are stored as float32 regardless of the in-memory training dtype;
loading restores the dtype named in the config. Writing is byte-stable:
no timestamps, tensor index sorted by name.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .config import ModelConfig
from ..corpusio import canonical_json

MAGIC = b"UBCP"
VERSION = 1


def save_checkpoint(
    path: str | Path,
    params: dict[str, np.ndarray],
    config: ModelConfig,
    vocab: list[str],
    meta: dict | None = None,
) -> None:
    config_json = canonical_json(
        {"model": config.to_dict(), "vocab": list(vocab), "meta": meta or {}}
    ).encode("utf-8")
    names = sorted(params)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(config_json)))
        fh.write(config_json)
        fh.write(struct.pack("<I", len(names)))
        for name in names:
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            shape = params[name].shape
            fh.write(struct.pack("<B", len(shape)))
            for dim in shape:
                fh.write(struct.pack("<I", dim))
        for name in names:
            fh.write(np.ascontiguousarray(params[name], dtype="<f4").tobytes())


def load_checkpoint(path: str | Path):
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path}: not an updatebench checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        (config_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(config_len).decode("utf-8"))
        config = ModelConfig.from_dict(header["model"])
        (count,) = struct.unpack("<I", fh.read(4))
        index = []
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim)) if ndim else ()
            index.append((name, shape))
        dtype = np.float32 if config.dtype == "float32" else np.float64
        params = {}
        for name, shape in index:
            n = int(np.prod(shape)) if shape else 1
            raw = fh.read(4 * n)
            params[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(dtype)
    return params, config, header["vocab"], header.get("meta", {})
