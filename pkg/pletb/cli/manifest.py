from datetime import datetime, timezone
from pathlib import Path

from .io import write_json

__all__ = ["MANIFEST_NAME", "TOOL_NAME", "build_manifest", "write_manifest"]

MANIFEST_NAME = "manifest.json"
TOOL_NAME = "pletb"


def build_manifest(command, config, seed, outputs=()):
    """Provenance record of one run; ``created_at`` is the only field that differs
    between two runs with the same command, config and seed."""
    from .. import __version__

    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": list(command),
        "seed": int(seed),
        "config": config.to_dict(),
        "outputs": sorted(Path(p).name for p in outputs),
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def write_manifest(directory, command, config, seed, outputs=()):
    return write_json(Path(directory) / MANIFEST_NAME, build_manifest(command, config, seed, outputs))
