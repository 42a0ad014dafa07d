"""Run manifests: reproducibility records written next to every output."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_digest(payload: dict) -> str:
    """Digest of a config payload, stable under field reordering."""
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(
    command: str,
    params: dict,
    seeds: dict | None = None,
    input_paths=(),
    calibration_reference: str | None = None,
    tool_version: str = "",
) -> dict:
    core = {
        "command": command,
        "params": params,
        "seeds": seeds or {},
        "input_paths": [str(p) for p in input_paths],
        "calibration_reference": calibration_reference,
        "tool_version": tool_version,
    }
    return {**core, "digest": config_digest(core)}


def write_manifest(manifest: dict, outputs, path) -> Path:
    """Record output files (with content hashes) and write the manifest.

    Re-running the same configuration must reproduce files matching the
    recorded hashes; output paths are stored relative to the manifest.
    """
    path = Path(path)
    base = path.parent
    listed = []
    for out in outputs:
        out = Path(out)
        try:
            rel = str(out.relative_to(base))
        except ValueError:
            rel = str(out)
        listed.append({"path": rel, "sha256": file_sha256(out)})
    doc = {**manifest, "outputs": listed}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
