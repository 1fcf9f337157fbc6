"""Experiment report container and CSV/JSON emission.

Emitted files are bit-reproducible for a fixed (config, seed, workers):
wall time is kept on the in-memory report but never written to disk.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StatRow:
    name: str
    estimate: float
    stderr: float
    n_samples: int
    exact: bool


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    seed: int
    workers: int
    rows: list[StatRow]
    library_version: str
    wall_time: float = 0.0
    notes: tuple[str, ...] = field(default_factory=tuple)

    def _params_str(self) -> str:
        return ";".join(f"{k}={self.params[k]}" for k in sorted(self.params))

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "seed": self.seed,
            "workers": self.workers,
            "library_version": self.library_version,
            "notes": list(self.notes),
            "rows": [
                {
                    "name": r.name,
                    "estimate": r.estimate,
                    "stderr": r.stderr,
                    "n_samples": r.n_samples,
                    "exact": r.exact,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["schema_version", "experiment", "params", "seed", "workers",
                    "library_version", "name", "estimate", "stderr", "n_samples", "exact"])
        for r in self.rows:
            w.writerow([SCHEMA_VERSION, self.experiment, self._params_str(),
                        self.seed, self.workers, self.library_version,
                        r.name, repr(r.estimate), repr(r.stderr), r.n_samples,
                        int(r.exact)])
        return buf.getvalue()

    def write(self, path: str, fmt: str = "csv") -> None:
        """Atomic write: temp file in the target directory, then rename."""
        text = self.to_csv() if fmt == "csv" else self.to_json()
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
