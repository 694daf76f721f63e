"""Checkpoint directory format: a text manifest plus one packed binary blob.

Arrays are stored row-major as little-endian 32-bit floats. The manifest
lists, per array: name, element type, shape, byte offset, element count.
Save followed by load reproduces every array bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MANIFEST_FILE = "manifest.tsv"
BLOB_FILE = "params.bin"
META_FILE = "meta.txt"


class CheckpointError(RuntimeError):
    pass


@dataclass
class Checkpoint:
    arrays: dict[str, np.ndarray]
    epoch: int
    config_hash: str


def save_checkpoint(dirpath, arrays: dict[str, np.ndarray], epoch: int,
                    config_hash: str) -> Path:
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    manifest_lines = []
    chunks = []
    offset = 0
    for name, arr in arrays.items():
        flat = np.ascontiguousarray(arr, dtype="<f4")
        shape = ",".join(str(s) for s in flat.shape) or "scalar"
        manifest_lines.append(f"{name}\tf4\t{shape}\t{offset}\t{flat.size}")
        chunks.append(flat.tobytes())
        offset += flat.size * 4
    (dirpath / BLOB_FILE).write_bytes(b"".join(chunks))
    (dirpath / MANIFEST_FILE).write_text(
        "\n".join(manifest_lines) + "\n", encoding="utf-8"
    )
    (dirpath / META_FILE).write_text(
        f"epoch = {epoch}\nconfig_sha256 = {config_hash}\n", encoding="utf-8"
    )
    return dirpath


def load_checkpoint(dirpath, prefix: str | None = None) -> Checkpoint:
    """Load all arrays, or only those whose name starts with ``prefix``."""
    dirpath = Path(dirpath)
    manifest_path = dirpath / MANIFEST_FILE
    if not manifest_path.exists():
        raise CheckpointError(f"no manifest at {manifest_path}")
    blob = (dirpath / BLOB_FILE).read_bytes()
    arrays: dict[str, np.ndarray] = {}
    for line in manifest_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        try:
            name, dtype, shape_text, offset_text, numel_text = line.split("\t")
        except ValueError:
            raise CheckpointError(f"malformed manifest line: {line!r}") from None
        if dtype != "f4":
            raise CheckpointError(f"{name}: unsupported element type {dtype!r}")
        offset, numel = int(offset_text), int(numel_text)
        end = offset + numel * 4
        if end > len(blob):
            raise CheckpointError(
                f"{name}: blob truncated (need {end} bytes, have {len(blob)})"
            )
        if prefix is not None and not name.startswith(prefix):
            continue
        arr = np.frombuffer(blob[offset:end], dtype="<f4").copy()
        if shape_text != "scalar":
            shape = tuple(int(s) for s in shape_text.split(","))
            if int(np.prod(shape)) != numel:
                raise CheckpointError(f"{name}: shape/numel mismatch")
            arr = arr.reshape(shape)
        else:
            arr = arr.reshape(())
        arrays[name] = arr

    meta = _read_meta(dirpath / META_FILE)
    return Checkpoint(
        arrays=arrays,
        epoch=int(meta.get("epoch", "0")),
        config_hash=meta.get("config_sha256", ""),
    )


def _read_meta(path: Path) -> dict[str, str]:
    meta: dict[str, str] = {}
    if not path.exists():
        return meta
    for line in path.read_text(encoding="utf-8").splitlines():
        key, sep, value = line.partition("=")
        if sep:
            meta[key.strip()] = value.strip()
    return meta
