"""Model checkpoints: magic "CVXM", versioned JSON header, float32 LE blobs.

Layout: 4-byte magic, u32 version, u32 header length, JSON header
(architecture, hyperparameters, training seed, parameter manifest), then
every parameter and BN running statistic as raw little-endian float32 in
manifest order.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .model import ArchConfig, Model, build_model

MAGIC = b"CVXM"
VERSION = 1


def _state_arrays(model: Model) -> list[tuple[str, np.ndarray]]:
    arrays: list[tuple[str, np.ndarray]] = []
    for i, layer in enumerate(model.layers):
        for j, p in enumerate(layer.params()):
            arrays.append((f"layer{i}.param{j}", p))
        if hasattr(layer, "running_mean"):
            arrays.append((f"layer{i}.running_mean", layer.running_mean))
            arrays.append((f"layer{i}.running_var", layer.running_var))
    return arrays


def save_model(path, model: Model, train_cfg_dict: dict | None = None) -> None:
    arrays = _state_arrays(model)
    header = {
        "arch": model.arch.to_dict(),
        "init_seed": model.init_seed,
        "train": train_cfg_dict or {},
        "manifest": [[name, list(a.shape)] for name, a in arrays],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f4").tobytes())


def load_model(path) -> tuple[Model, dict]:
    """Rebuild the model and return it with the stored training metadata."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a model checkpoint (bad magic {magic!r})")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        header = json.loads(fh.read(hlen).decode())
        model = build_model(
            ArchConfig.from_dict(header["arch"]), seed=header["init_seed"], dtype=np.float32
        )
        arrays = _state_arrays(model)
        if len(arrays) != len(header["manifest"]):
            raise ValueError(f"{path}: manifest does not match the architecture")
        for (name, a), (m_name, m_shape) in zip(arrays, header["manifest"]):
            if name != m_name or list(a.shape) != m_shape:
                raise ValueError(f"{path}: checkpoint entry {m_name} does not match {name}")
            raw = fh.read(a.size * 4)
            a[...] = np.frombuffer(raw, dtype="<f4").reshape(a.shape)
    return model, header["train"]
