"""Run manifests: a reproducibility stamp written beside every CLI output.

Identical (config_digest, seed, tool_version) must imply identical output
bytes; the timestamp records when, not what.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from datetime import datetime, timezone

from .version import __version__


def config_digest(config: dict) -> str:
    """sha256 of the canonical JSON encoding of a resolved configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config_digest: str
    seed: int
    tool_version: str
    timestamp: str

    @classmethod
    def create(cls, subcommand: str, config: dict, seed: int) -> "RunManifest":
        return cls(
            subcommand=subcommand,
            config_digest=config_digest(config),
            seed=int(seed),
            tool_version=__version__,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
