"""Binary checkpoint format.

Layout (all integers little-endian)::

    magic    8 bytes  b"MMCRCKPT"
    version  u32
    count    u64
    count x  { name_len u32, name utf-8, rank u32, dims u64 * rank,
               values f32 * prod(dims) }
    crc32    u32 over every preceding byte
"""

from __future__ import annotations

import os
import struct
import tempfile
import zlib
from pathlib import Path

import numpy as np

from .params import ParameterStore
from .tensor import Tensor

MAGIC = b"MMCRCKPT"
VERSION = 1


class CheckpointError(ValueError):
    pass


def encode_checkpoint(store: ParameterStore) -> bytes:
    parts = [MAGIC, struct.pack("<IQ", VERSION, len(store))]
    for name, t in store.items():
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<I", t.ndim))
        parts.append(struct.pack(f"<{t.ndim}Q", *t.shape))
        parts.append(np.ascontiguousarray(t.data, dtype="<f4").tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def decode_checkpoint(blob: bytes) -> dict[str, np.ndarray]:
    if len(blob) < len(MAGIC) + 16:
        raise CheckpointError("truncated checkpoint")
    if blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    version, count = struct.unpack_from("<IQ", blob, len(MAGIC))
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {VERSION})")
    if zlib.crc32(body) != crc:
        raise CheckpointError("checksum mismatch (truncated or corrupted file)")
    pos = len(MAGIC) + 12
    out: dict[str, np.ndarray] = {}
    try:
        for _ in range(count):
            (nlen,) = struct.unpack_from("<I", body, pos)
            pos += 4
            name = body[pos : pos + nlen].decode("utf-8")
            pos += nlen
            (rank,) = struct.unpack_from("<I", body, pos)
            pos += 4
            dims = struct.unpack_from(f"<{rank}Q", body, pos)
            pos += 8 * rank
            size = int(np.prod(dims)) if rank else 1
            values = np.frombuffer(body, dtype="<f4", count=size, offset=pos)
            pos += 4 * size
            out[name] = values.astype(np.float32).reshape(dims)
    except (struct.error, ValueError) as exc:
        raise CheckpointError(f"truncated checkpoint ({exc})") from None
    if pos != len(body):
        raise CheckpointError("trailing bytes after last parameter")
    return out


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(store: ParameterStore, path: str | os.PathLike) -> None:
    atomic_write_bytes(path, encode_checkpoint(store))


def read_checkpoint(path: str | os.PathLike) -> dict[str, np.ndarray]:
    return decode_checkpoint(Path(path).read_bytes())


def load_checkpoint(
    path: str | os.PathLike, store: ParameterStore | None = None, partial: bool = False
) -> ParameterStore:
    """Load a checkpoint into ``store`` (or a fresh store when None).

    Strict loading requires the exact same names and shapes. ``partial``
    overwrites only the names present in both; shapes must still agree.
    """
    arrays = read_checkpoint(path)
    if store is None:
        return ParameterStore({n: Tensor(a) for n, a in arrays.items()})

    if not partial:
        missing = sorted(set(store.names()) - set(arrays))
        extra = sorted(set(arrays) - set(store.names()))
        if missing or extra:
            msg = []
            if missing:
                msg.append(f"missing from checkpoint: {', '.join(missing)}")
            if extra:
                msg.append(f"not in model: {', '.join(extra)}")
            raise CheckpointError("; ".join(msg))
    common = [n for n in store.names() if n in arrays]
    if partial and not common:
        raise CheckpointError("no parameter names in common with the model")
    bad = [f"{n} {arrays[n].shape} vs {store[n].shape}" for n in common if arrays[n].shape != store[n].shape]
    if bad:
        raise CheckpointError("shape mismatch: " + "; ".join(bad))
    for n in common:
        store[n].data = arrays[n].astype(store[n].dtype)
    return store
