"""Run manifests: one ``manifest.json`` per output directory."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import DataError

MANIFEST_NAME = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    argv: list[str]
    seeds: dict[str, int] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    version: str = __version__
    timestamp: str = ""

    def record_inputs(self, paths) -> None:
        for p in paths:
            p = Path(p)
            self.inputs[str(p.resolve())] = sha256_file(p)

    def record_outputs(self, out_dir) -> None:
        out_dir = Path(out_dir)
        self.outputs = {
            p.name: sha256_file(p)
            for p in sorted(out_dir.iterdir())
            if p.is_file() and p.name != MANIFEST_NAME
        }

    def write(self, out_dir) -> Path:
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        path = Path(out_dir) / MANIFEST_NAME
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**data)

    def verify_inputs(self) -> None:
        for path, digest in self.inputs.items():
            if not Path(path).exists():
                raise DataError(f"manifest input {path} is missing")
            if sha256_file(path) != digest:
                raise DataError(f"manifest input {path} changed since the recorded run")
