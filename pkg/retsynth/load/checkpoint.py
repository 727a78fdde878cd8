"""
Checkpoint files: networks, their build specs and training counters.

Layout (little-endian):

    magic "SYNR" | u32 version | u32 network count
    per network: str role | str kind | str spec (json) | u32 tensor count
        per tensor: str name | str dtype ("<f4") | u8 ndim | u32 dims... | payload
    i64 step | i64 epoch | i64 seed
    u32 crc32 of every preceding byte

Strings are a u16 byte length followed by utf-8. Files are written to a
temporary sibling and renamed into place, and a file is parsed and verified
completely before any network is touched.
"""

import json
import logging
import os
from pathlib import Path
import struct
import tempfile
import zlib
import numpy as np
from ..networks import build_network
from ..shared.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from ..shared.errors import CheckpointError, ContractError, RetsynthError

logger = logging.getLogger(__name__)

TENSOR_DTYPE = "<f4"
COUNTERS = ("step", "epoch", "seed")


def _pack_str(value):
    raw = value.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def _encode(networks, counters):
    chunks = [CHECKPOINT_MAGIC, struct.pack("<II", CHECKPOINT_VERSION, len(networks))]
    for role, network in networks.items():
        state = network.state_dict()
        chunks += [
            _pack_str(role),
            _pack_str(network.kind),
            _pack_str(json.dumps(network.spec, sort_keys=True)),
            struct.pack("<I", len(state)),
        ]
        for name, array in state.items():
            array = np.ascontiguousarray(array, dtype=TENSOR_DTYPE)
            chunks += [
                _pack_str(name),
                _pack_str(TENSOR_DTYPE),
                struct.pack("<B", array.ndim),
                struct.pack(f"<{array.ndim}I", *array.shape),
                array.tobytes(),
            ]
    chunks.append(struct.pack("<3q", *(int(counters.get(key, 0)) for key in COUNTERS)))
    body = b"".join(chunks)
    return body + struct.pack("<I", zlib.crc32(body))


def save_checkpoint(networks, counters, path):
    """writes networks and counters atomically

    Args:
        networks (dict[str, Network]): networks by role, e.g. {"generator": G}
        counters (dict): step, epoch and seed (missing ones are written as 0)
        path (str | Path): destination file

    Returns:
        Path: the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = _encode(networks, counters)

    handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(handle, "wb") as file:
            file.write(payload)
            file.flush()
            os.fsync(file.fileno())
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.remove(temp_name)
        raise
    logger.info("wrote checkpoint %s (%s networks, %s bytes)", path, len(networks), len(payload))
    return path


class _Reader:
    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, size):
        if self.offset + size > len(self.data):
            raise CheckpointError(
                f"checkpoint truncated: need {size} bytes at offset {self.offset}, "
                f"file body has {len(self.data)}"
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt):
        values = struct.unpack(fmt, self.take(struct.calcsize(fmt)))
        return values if len(values) > 1 else values[0]

    def string(self):
        return self.take(self.unpack("<H")).decode("utf-8")


def read_checkpoint(path):
    """parses and verifies a checkpoint without building anything

    Raises:
        CheckpointError: bad magic, unknown version, checksum failure or truncation

    Returns:
        tuple[dict, dict]: {role: {"kind", "spec", "state"}} and the counters
    """
    data = Path(path).read_bytes()
    if len(data) < len(CHECKPOINT_MAGIC) + 8 or data[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic or too short)")
    body, trailer = data[:-4], data[-4:]
    if zlib.crc32(body) != struct.unpack("<I", trailer)[0]:
        raise CheckpointError(f"{path}: checksum mismatch, file is corrupt or truncated")

    reader = _Reader(body)
    reader.take(len(CHECKPOINT_MAGIC))
    version, count = reader.unpack("<II")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")

    entries = {}
    for _ in range(count):
        role, kind, spec = reader.string(), reader.string(), json.loads(reader.string())
        state = {}
        for _ in range(reader.unpack("<I")):
            name, dtype = reader.string(), reader.string()
            if dtype != TENSOR_DTYPE:
                raise CheckpointError(f"{path}: tensor {name} has unsupported dtype {dtype}")
            ndim = reader.unpack("<B")
            shape = tuple(int(dim) for dim in np.atleast_1d(reader.unpack(f"<{ndim}I"))) if ndim else ()
            size = int(np.prod(shape)) if shape else 1
            payload = reader.take(size * 4)
            state[name] = np.frombuffer(payload, dtype=TENSOR_DTYPE).reshape(shape).astype(np.float32)
        entries[role] = {"kind": kind, "spec": spec, "state": state}
    counters = dict(zip(COUNTERS, reader.unpack("<3q")))
    if reader.offset != len(body):
        raise CheckpointError(f"{path}: {len(body) - reader.offset} trailing bytes")
    return entries, counters


def _check_kinds(path, entries, expected_kinds):
    if expected_kinds is None:
        return
    for role, kind in expected_kinds.items():
        if role not in entries:
            raise CheckpointError(f"{path}: no network with role '{role}'")
        if entries[role]["kind"] != kind:
            raise CheckpointError(
                f"{path}: role '{role}' holds a {entries[role]['kind']}, expected {kind}"
            )


def load_checkpoint(path, expected_kinds=None):
    """rebuilds every network from its spec and loads its weights

    Args:
        path (str | Path): checkpoint file
        expected_kinds (dict[str, str], optional): role -> required network kind

    Raises:
        CheckpointError: on any format, checksum or kind problem

    Returns:
        tuple[dict, dict]: networks by role and the counters
    """
    entries, counters = read_checkpoint(path)
    _check_kinds(path, entries, expected_kinds)
    networks = {}
    for role, entry in entries.items():
        try:
            network = build_network(entry["kind"], **entry["spec"])
            network.load_state_dict(entry["state"])
        except (RetsynthError, TypeError) as exc:
            raise CheckpointError(f"{path}: cannot rebuild '{role}': {exc}") from exc
        networks[role] = network
    logger.info("loaded checkpoint %s: %s", path, sorted(networks))
    return networks, counters


def restore_checkpoint(path, networks):
    """loads weights into existing networks; nothing changes unless every network fits

    Raises:
        CheckpointError: on any format, checksum, kind or shape problem
    """
    entries, counters = read_checkpoint(path)
    _check_kinds(path, entries, {role: network.kind for role, network in networks.items()})
    for role, network in networks.items():
        current = network.state_dict()
        state = entries[role]["state"]
        if set(current) != set(state) or any(current[k].shape != state[k].shape for k in state):
            raise CheckpointError(f"{path}: '{role}' tensors do not match the target network")
    for role, network in networks.items():
        try:
            network.load_state_dict(entries[role]["state"])
        except ContractError as exc:
            raise CheckpointError(f"{path}: '{role}': {exc}") from exc
    logger.info("restored %s from %s", sorted(networks), path)
    return counters
