"""Regression ledger: pinned empirical constants with tolerance bands.

Several results guarantee the existence of uniform constants without giving
values.  The ledger records the constants fitted by dedicated calibration
runs; ordinary runs assert that their observations stay inside the pinned
bands.  Entries are append-only unless overwriting is requested explicitly.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import DomainError

DEFAULT_PATH = Path(__file__).parent / "data" / "ledger.json"


class RegressionLedger:
    def __init__(self, entries: dict | None = None):
        self.entries = dict(entries or {})

    @staticmethod
    def key(experiment: str, name: str) -> str:
        return f"{experiment}/{name}"

    @classmethod
    def load(cls, path: Path | str | None = None) -> "RegressionLedger":
        path = Path(path) if path is not None else DEFAULT_PATH
        if not path.exists():
            return cls()
        with open(path) as fh:
            return cls(json.load(fh))

    def save(self, path: Path | str | None = None) -> None:
        path = Path(path) if path is not None else DEFAULT_PATH
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(self.entries, fh, indent=1, sort_keys=True)
            fh.write("\n")

    def pin(self, experiment: str, name: str, value: float, band: float,
            overwrite: bool = False) -> None:
        key = self.key(experiment, name)
        if key in self.entries and not overwrite:
            raise DomainError(f"ledger entry {key!r} exists; overwriting requires the explicit flag")
        self.entries[key] = {"value": float(value), "band": float(band)}

    def get(self, experiment: str, name: str):
        key = self.key(experiment, name)
        if key not in self.entries:
            raise DomainError(f"no pinned constant {key!r}; run calibration first")
        e = self.entries[key]
        return e["value"], e["band"]

    def has(self, experiment: str, name: str) -> bool:
        return self.key(experiment, name) in self.entries

    def check(self, experiment: str, name: str, observed: float) -> bool:
        value, band = self.get(experiment, name)
        return abs(observed - value) <= band
