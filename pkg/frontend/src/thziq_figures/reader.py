"""Parsing of the simulator's CSV output.

Files carry one metadata comment line, a column header, and numeric rows:

    # scenario=<json> seed=<int>
    col_a,col_b,...
    1.5,2.25,...

All validation happens here so rendering can assume a well-formed table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Table:
    """One parsed result file."""

    path: str
    scenario: dict
    seed: int
    columns: tuple[str, ...]
    rows: np.ndarray

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ValueError(f"{self.path}: missing column '{name}'")
        return self.rows[:, self.columns.index(name)]

    @property
    def band(self) -> str:
        return str(self.scenario.get("band", ""))


def _parse_metadata(line: str, path: str) -> tuple[dict, int]:
    prefix = "# scenario="
    marker = " seed="
    if not line.startswith(prefix) or marker not in line:
        raise ValueError(f"{path}: first line is not a scenario metadata line")
    body = line[len(prefix):]
    json_part, _, seed_part = body.rpartition(marker)
    try:
        scenario = json.loads(json_part)
        seed = int(seed_part)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed scenario metadata: {exc}") from exc
    if not isinstance(scenario, dict):
        raise ValueError(f"{path}: scenario metadata is not an object")
    return scenario, seed


def load_table(path: str) -> Table:
    """Read and validate one result CSV."""
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError(f"{path}: file is missing the metadata or header line")
    scenario, seed = _parse_metadata(lines[0], path)
    columns = tuple(name.strip() for name in lines[1].split(","))
    if len(columns) < 2 or any(not c for c in columns):
        raise ValueError(f"{path}: invalid column header '{lines[1]}'")
    if len(lines) == 2:
        raise ValueError(f"{path}: table has no data rows")
    rows = []
    for i, line in enumerate(lines[2:], start=3):
        cells = line.split(",")
        if len(cells) != len(columns):
            raise ValueError(
                f"{path}: line {i} has {len(cells)} cells, expected {len(columns)}"
            )
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ValueError(f"{path}: line {i}: {exc}") from exc
    return Table(path, scenario, seed, columns, np.asarray(rows, dtype=float))
