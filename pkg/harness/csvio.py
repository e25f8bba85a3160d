"""Versioned CSV artifacts: one `# confined-diffusion v<semver>` line, then a header row."""

import csv
from pathlib import Path
from typing import Iterable, List, Sequence, TextIO, Tuple

import numpy as np

import config as CFG
from errors import ConfigError


def schema_line() -> str:
    return f"# {CFG.SCHEMA_NAME} v{CFG.SCHEMA_VERSION}"


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return CFG.CSV_FLOAT_FORMAT % float(value)
    return str(value)


def write_rows(fh: TextIO, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Schema line, header and rows to an open text stream."""
    fh.write(schema_line() + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"Row has {len(row)} cells, header has {len(columns)}")
        writer.writerow([_cell(v) for v in row])


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write rows under a header; floats use CFG.CSV_FLOAT_FORMAT."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        write_rows(fh, columns, rows)
    return path


def read_csv(path) -> Tuple[List[str], List[List]]:
    """Header and rows; numeric cells come back as float."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(f"# {CFG.SCHEMA_NAME} v"):
            raise ConfigError(f"{path}: missing '{CFG.SCHEMA_NAME}' schema line")
        reader = csv.reader(fh)
        columns = next(reader)
        rows = []
        for raw in reader:
            row = []
            for cell in raw:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
            rows.append(row)
    return columns, rows
