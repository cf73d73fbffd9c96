"""Result records and CSV emission.

Data files are plain CSV with every float printed to 17 significant
digits (round-trip exact for 64-bit floats), so reruns with the same seed
and config produce byte-identical bodies.  Volatile metadata (wall time,
library version, echoed config) goes to a sidecar .meta.json instead of
the CSV.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


def fmt(value) -> str:
    """CSV cell formatting: %.17g floats, plain ints/strings/bools."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


@dataclass
class ResultRecord:
    """One experiment's tabular output plus reproducibility metadata."""

    experiment: str
    columns: list
    rows: list = field(default_factory=list)
    seed: int = 0
    config: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def add(self, **cells):
        self.rows.append([cells.get(c, "") for c in self.columns])

    def csv_body(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(fmt(c) for c in row))
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str, name: str | None = None) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = name or self.experiment
        csv_path = out / f"{name}.csv"
        csv_path.write_text(self.csv_body(), encoding="utf-8")
        meta = {
            "experiment": self.experiment,
            "seed": self.seed,
            "version": __version__,
            "wall_time_s": self.wall_time,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "config": self.config,
        }
        (out / f"{name}.meta.json").write_text(
            json.dumps(meta, indent=2, default=str) + "\n", encoding="utf-8")
        return csv_path
