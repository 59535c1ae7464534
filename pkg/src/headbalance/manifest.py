"""Run manifests: a reproducibility record written next to every output file.

The manifest captures the command, every resolved parameter, digests of the
input files, and the tool version. Re-running the same command with the same
inputs must reproduce the output byte for byte, so manifests carry no
timestamps or host state.
"""

from __future__ import annotations

import hashlib
import json

from . import __version__


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(out_path) -> str:
    return str(out_path) + ".manifest.json"


def write_manifest(out_path, command: str, parameters: dict, inputs: dict,
                   seed: int | None = None) -> str:
    """Write the manifest for out_path; inputs maps label -> file path."""
    data = {
        "command": command,
        "parameters": parameters,
        "inputs": {name: _digest(path) for name, path in sorted(inputs.items())},
        "tool_version": __version__,
        "seed": seed,
    }
    target = manifest_path(out_path)
    with open(target, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return target
