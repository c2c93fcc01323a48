"""Single-file training checkpoints.

Layout::

    b"QINRCKPT"  uint32 version  uint64 header_length  header (UTF-8 JSON)
    tensor data (little-endian float64, concatenated in header order)
    uint32 CRC32 of everything before it

The header holds the resolved run config, the epoch, the optimizer step
counter, RNG stream states, the loss records so far and a directory of
``{name, shape, offset, count}`` tensor entries.
"""
import json
import logging
import os
import struct
import tempfile
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError

from src.core.exceptions import CheckpointCorruptError, CheckpointError, CheckpointVersionError
from src.core.neural import Module
from src.core.training.optimizer import OptimizerState
from src.models import HybridAutoencoder
from src.schemas.config import RunConfig
from src.schemas.training import TrainRecord

logger = logging.getLogger(__name__)

MAGIC = b"QINRCKPT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sIQ")
_CRC = struct.Struct("<I")
_MODEL = "model/"
_ADAM_M = "adam.m/"
_ADAM_V = "adam.v/"


@dataclass
class TrainingState:
    """Everything read back from a checkpoint, before it is applied to a model."""

    config: RunConfig
    epoch: int
    model_state: dict[str, np.ndarray]
    optimizer_t: int = 0
    adam_m: dict[str, np.ndarray] = field(default_factory=dict)
    adam_v: dict[str, np.ndarray] = field(default_factory=dict)
    rng_states: dict[str, dict] = field(default_factory=dict)
    records: list[TrainRecord] = field(default_factory=list)

    def restore_rng(self, name: str) -> Optional[np.random.Generator]:
        if name not in self.rng_states:
            return None
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng_states[name]
        return rng

    def restore_optimizer(self, state: OptimizerState) -> None:
        if set(state.m) != set(self.adam_m):
            raise CheckpointError("Optimizer moments do not match the model's parameters")
        for name in state.m:
            if state.m[name].shape != self.adam_m[name].shape:
                raise CheckpointError(f"{name}: stored moment shape {self.adam_m[name].shape}")
        for name in state.m:
            state.m[name][...] = self.adam_m[name]
            state.v[name][...] = self.adam_v[name]
        state.t = self.optimizer_t


def save_checkpoint(
    path,
    model: Module,
    config: RunConfig,
    epoch: int,
    optimizer: Optional[OptimizerState] = None,
    rngs: Optional[dict[str, np.random.Generator]] = None,
    records: Optional[list[TrainRecord]] = None,
) -> Path:
    path = Path(path)
    tensors: list[tuple[str, np.ndarray]] = [(_MODEL + k, v) for k, v in model.state_dict().items()]
    if optimizer is not None:
        tensors += [(_ADAM_M + k, v) for k, v in optimizer.m.items()]
        tensors += [(_ADAM_V + k, v) for k, v in optimizer.v.items()]

    directory = []
    blobs = []
    offset = 0
    for name, array in tensors:
        data = np.ascontiguousarray(array, dtype="<f8")
        directory.append({"name": name, "shape": list(data.shape), "offset": offset, "count": int(data.size)})
        blobs.append(data.tobytes())
        offset += data.size
    header = {
        "config": config.model_dump(mode="json"),
        "epoch": int(epoch),
        "optimizer": {"t": optimizer.t if optimizer is not None else 0},
        "rng": {name: rng.bit_generator.state for name, rng in (rngs or {}).items()},
        "records": [r.model_dump() for r in records or []],
        "tensors": directory,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + b"".join(blobs)
    payload = body + _CRC.pack(zlib.crc32(body))

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except Exception:
        logger.exception(f"Failed to write checkpoint {path}")
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.info(f"Saved checkpoint {path} (epoch {epoch})")
    return path


def load_checkpoint(path) -> TrainingState:
    """Parse and verify a checkpoint; nothing is applied to any model here."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"Checkpoint not found: {path}")
    raw = path.read_bytes()
    if len(raw) < _PREFIX.size + _CRC.size:
        raise CheckpointCorruptError(f"{path}: file too short to be a checkpoint")
    magic, version, header_length = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointCorruptError(f"{path}: not a checkpoint file")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path}: format version {version}, this build reads {FORMAT_VERSION}")
    body, (stored_crc,) = raw[: -_CRC.size], _CRC.unpack(raw[-_CRC.size :])
    if zlib.crc32(body) != stored_crc:
        raise CheckpointCorruptError(f"{path}: checksum mismatch (truncated or modified)")

    start = _PREFIX.size
    try:
        header = json.loads(body[start : start + header_length].decode("utf-8"))
        config = RunConfig.model_validate(header["config"])
        records = [TrainRecord.model_validate(r) for r in header.get("records", [])]
    except (ValueError, KeyError, ValidationError) as e:
        raise CheckpointCorruptError(f"{path}: unreadable header ({e})")

    data = np.frombuffer(body, dtype="<f8", offset=start + header_length)
    arrays: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        begin, count = entry["offset"], entry["count"]
        if begin + count > data.size:
            raise CheckpointCorruptError(f"{path}: tensor {entry['name']} runs past the end of the file")
        arrays[entry["name"]] = data[begin : begin + count].astype(np.float64).reshape(entry["shape"])

    def section(prefix: str) -> dict[str, np.ndarray]:
        return {k[len(prefix) :]: v for k, v in arrays.items() if k.startswith(prefix)}

    return TrainingState(
        config=config,
        epoch=int(header["epoch"]),
        model_state=section(_MODEL),
        optimizer_t=int(header["optimizer"]["t"]),
        adam_m=section(_ADAM_M),
        adam_v=section(_ADAM_V),
        rng_states=header.get("rng", {}),
        records=records,
    )


def restore_model(state: TrainingState) -> HybridAutoencoder:
    """Build the model the checkpoint describes and load its weights and BatchNorm statistics."""
    model = HybridAutoencoder(state.config.model, np.random.default_rng(state.config.seeds.init))
    model.load_state_dict(state.model_state)
    return model
