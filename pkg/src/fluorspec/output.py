"""Delimited output and run manifests.

CSV files are UTF-8 with LF line endings, a header row, and values in
scientific notation with exactly 12 significant digits — enough to keep
oracle comparisons meaningful after a round trip, and stable under
re-parsing (format -> parse -> format is a fixed point).

Each command writes a flat key/value manifest next to its outputs with
the resolved parameters, grid, method, seed and output list; re-running
the same configuration reproduces the output files byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["format_sig12", "write_csv", "RunManifest"]


def format_sig12(value: float) -> str:
    """12-significant-digit scientific notation."""
    return f"{value:.11e}"


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_sig12(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8",
                          newline="\n")


@dataclass
class RunManifest:
    """Flat key/value record of one CLI run (deterministic: no timestamps)."""

    command: str
    version: str
    entries: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def set(self, key: str, value) -> None:
        self.entries[key] = value

    def set_params(self, mapping: dict) -> None:
        for key, value in mapping.items():
            self.entries[f"params.{key}"] = value

    def add_output(self, path: Path) -> None:
        self.outputs.append(Path(path).name)

    def write(self, path: Path) -> None:
        lines = [f"command = {self.command}", f"version = {self.version}"]
        for key in sorted(self.entries):
            value = self.entries[key]
            if isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        lines.append(f"outputs = {';'.join(self.outputs)}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8",
                              newline="\n")


def read_manifest(path: Path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(" = ")
        out[key] = value
    return out
