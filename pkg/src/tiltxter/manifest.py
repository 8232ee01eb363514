"""Run manifests: every artifact-producing command records how to remake it.

The manifest sits beside its artifact as ``<artifact>.manifest.json`` and
holds the full command configuration (seeds included) plus SHA-256
digests of all inputs and outputs, so a result can be audited or
regenerated from the manifest alone.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def sha256_of(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path(artifact) -> Path:
    return Path(str(artifact) + ".manifest.json")


def write_manifest(artifact, command: str, config: dict, inputs: dict | None = None) -> Path:
    """Write the manifest for ``artifact``; returns the manifest path."""
    from . import __version__

    doc = {
        "tool": "tiltxter",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {role: {"path": str(p), "sha256": sha256_of(p)}
                   for role, p in (inputs or {}).items()},
        "output": {"path": str(artifact), "sha256": sha256_of(artifact)},
    }
    path = manifest_path(artifact)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
