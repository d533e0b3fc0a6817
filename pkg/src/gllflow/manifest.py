"""Run manifests: every CLI output directory carries exactly one.

The manifest separates the deterministic payload (command, parameters,
grid, tolerances, results) from provenance (wall time); re-running the
same invocation reproduces the payload and all data files byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = "gllflow.run_manifest/1"
MANIFEST_NAME = "run_manifest.json"


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


@dataclass
class RunManifest:
    command: str
    parameters: dict
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    wall_time_s: float = 0.0
    schema_version: str = SCHEMA_VERSION

    @property
    def input_hash(self) -> str:
        payload = {"command": self.command, "parameters": self.parameters,
                   "grid": self.grid, "tolerances": self.tolerances}
        return hashlib.sha256(_canonical(payload).encode()).hexdigest()

    def payload(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "parameters": self.parameters,
            "grid": self.grid,
            "tolerances": self.tolerances,
            "results": self.results,
            "input_hash": self.input_hash,
        }

    def write(self, out_dir) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        doc = self.payload()
        doc["provenance"] = {"wall_time_s": self.wall_time_s}
        path = out_dir / MANIFEST_NAME
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def read(cls, out_dir):
        doc = json.loads((Path(out_dir) / MANIFEST_NAME).read_text())
        return doc
