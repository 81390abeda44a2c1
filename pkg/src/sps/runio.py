"""Deterministic JSON output and run-manifest bookkeeping for the CLI.

Every CLI invocation that gets past argument validation writes
run_manifest.json into its output directory: argv, input file hashes, seed
and versions. No timestamps anywhere, so identical runs produce identical
bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import platform
from typing import Optional


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _versions() -> dict:
    import numpy

    try:
        from importlib.metadata import version

        own = version("sps")
    except Exception:
        own = "unknown"
    return {
        "sps": own,
        "numpy": numpy.__version__,
        "python": platform.python_version(),
    }


class RunManifest:
    """Collects inputs/outputs for one CLI run and serializes them."""

    def __init__(self, out_dir, command: str, argv: list[str], seed: Optional[int] = None):
        self.out_dir = os.fspath(out_dir)
        self.command = command
        self.argv = list(argv)
        self.seed = seed
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.status = "ok"
        self.error: Optional[str] = None

    def add_input(self, path) -> None:
        path = os.fspath(path)
        if os.path.isfile(path):
            self.inputs[path] = sha256_file(path)

    def add_input_dir(self, path, suffix: str = ".json") -> None:
        path = os.fspath(path)
        if os.path.isdir(path):
            for name in sorted(os.listdir(path)):
                if name.endswith(suffix):
                    self.add_input(os.path.join(path, name))

    def add_output(self, name: str) -> None:
        self.outputs.append(name)

    def fail(self, error: str) -> None:
        self.status = "failed"
        self.error = error

    def write(self) -> None:
        os.makedirs(self.out_dir, exist_ok=True)
        doc = {
            "command": self.command,
            "argv": self.argv,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "status": self.status,
            "error": self.error,
            "versions": _versions(),
        }
        write_json(os.path.join(self.out_dir, "run_manifest.json"), doc)
