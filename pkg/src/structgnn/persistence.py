"""Binary model files.

Layout (all integers little-endian)::

    b"SGNN"  u32 version  u64 json_len  json (config + metadata, UTF-8)
    u32 n_arrays
    repeated: u32 name_len  name  u32 ndim  u64 dims[ndim]  float64 data

Arrays are the model parameters in init order followed by the descriptor
standardizer's ``scaler.mean`` and ``scaler.std``. The JSON block is written
with sorted keys so save -> load -> save reproduces the same bytes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import Tensor
from .encoders import Config, StructGNN, init_params
from .errors import CorruptFile, FileUnreadable, VersionMismatch
from .featurize import Standardizer

MAGIC = b"SGNN"
FORMAT_VERSION = 1


@dataclass
class ModelArtifact:
    model: StructGNN
    metadata: dict = field(default_factory=dict)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.blob):
            raise CorruptFile(f"model file truncated at byte {self.pos} (wanted {n} more)")
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def _arrays(model: StructGNN) -> list[tuple[str, np.ndarray]]:
    items = [(name, t.data) for name, t in model.params.items()]
    items.append(("scaler.mean", np.asarray(model.scaler.mean, dtype=float)))
    items.append(("scaler.std", np.asarray(model.scaler.std, dtype=float)))
    return items


def dumps_model(artifact: ModelArtifact, version: int = FORMAT_VERSION) -> bytes:
    header = {"config": artifact.model.config.to_dict(), "metadata": artifact.metadata}
    js = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", version), struct.pack("<Q", len(js)), js]
    arrays = _arrays(artifact.model)
    parts.append(struct.pack("<I", len(arrays)))
    for name, arr in arrays:
        raw = name.encode("utf-8")
        parts += [struct.pack("<I", len(raw)), raw, struct.pack("<I", arr.ndim)]
        parts += [struct.pack("<Q", d) for d in arr.shape]
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(parts)


def loads_model(blob: bytes) -> ModelArtifact:
    r = _Reader(blob)
    if r.take(4) != MAGIC:
        raise CorruptFile("not a model file (bad magic bytes)")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"model file format version {version} is not supported (this build reads version {FORMAT_VERSION})"
        )
    try:
        header = json.loads(r.take(r.u64()).decode("utf-8"))
        config = Config.from_dict(header["config"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptFile(f"bad model header: {exc}") from exc

    arrays: dict[str, np.ndarray] = {}
    for _ in range(r.u32()):
        name = r.take(r.u32()).decode("utf-8", errors="replace")
        shape = tuple(r.u64() for _ in range(r.u32()))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        arrays[name] = np.frombuffer(r.take(8 * count), dtype="<f8").astype(float).reshape(shape)
    if r.pos != len(blob):
        raise CorruptFile(f"{len(blob) - r.pos} trailing bytes after last array")

    expected = init_params(config)
    params = {}
    for name, ref in expected.items():
        arr = arrays.get(name)
        if arr is None or arr.shape != ref.shape:
            got = None if arr is None else arr.shape
            raise CorruptFile(f"parameter {name}: expected shape {ref.shape}, found {got}")
        params[name] = Tensor(arr.copy(), requires_grad=True)
    try:
        scaler = Standardizer(arrays["scaler.mean"].copy(), arrays["scaler.std"].copy())
    except KeyError as exc:
        raise CorruptFile(f"missing array {exc}") from exc
    return ModelArtifact(StructGNN(config, params, scaler), header.get("metadata", {}))


def save_model(artifact: ModelArtifact, path: str | Path) -> None:
    Path(path).write_bytes(dumps_model(artifact))


def load_model(path: str | Path) -> ModelArtifact:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    return loads_model(blob)
