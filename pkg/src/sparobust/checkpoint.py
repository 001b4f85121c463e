"""Self-describing checkpoint container shared by all trainable components.

A checkpoint is a torch-serialized dict carrying a format version, the
component kind ("classifier", "generator", "manipulator", ...), the payload
(state dicts, optimizer state), and free-form metadata such as architecture
profile and config hash. Loaders validate version and kind before touching
the payload.
"""

import os

import torch

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path, kind, state, meta=None):
    """Write a versioned checkpoint atomically (tmp file + rename)."""
    blob = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "state": state,
        "meta": dict(meta or {}),
    }
    path = str(path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = path + ".tmp"
    torch.save(blob, tmp)
    os.replace(tmp, path)


def load_checkpoint(path, expected_kind=None):
    """Read a checkpoint, validating format version and component kind."""
    try:
        blob = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path!r}: {exc}") from exc
    if not isinstance(blob, dict) or "format_version" not in blob:
        raise CheckpointError(f"{path!r} is not a checkpoint container")
    if blob["format_version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint version {blob['format_version']} != supported {FORMAT_VERSION}"
        )
    if expected_kind is not None and blob["kind"] != expected_kind:
        raise CheckpointError(
            f"checkpoint kind {blob['kind']!r}, expected {expected_kind!r}"
        )
    return blob
