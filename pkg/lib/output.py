"""
Run artifacts: diagnostics.csv and the binary distribution dumps.

Dump layout: 16-byte magic, little-endian u64 N, Nx and species count,
then for each (cell, species) the N^3 field as little-endian f8 in grid
node order (ix fastest).
"""
import csv
import logging
import os
from typing import List, NamedTuple, Sequence

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticsRecord

logger = logging.getLogger(__name__)

DUMP_MAGIC = b'MIXKIN-DUMP-0001'
_HEADER_DTYPE = np.dtype('<u8')
_FIELD_DTYPE = np.dtype('<f8')


class DumpFormatError(Exception):
    """Raised when a file is not a readable distribution dump."""


class DumpContents(NamedTuple):
    points: int
    nx: int
    species: int
    fields: np.ndarray  # (nx, species, points ** 3)


def format_value(value: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(value), '.17g')


class DiagnosticsWriter:
    """Streams DiagnosticsRecord rows into a CSV file with the fixed header."""

    def __init__(self, path: str):
        self.path = path
        self._file = open(path, 'w', newline='')
        self._writer = csv.writer(self._file)
        self._writer.writerow(CSV_COLUMNS)
        self.rows = 0

    def write(self, record: DiagnosticsRecord):
        self._writer.writerow([format_value(v) for v in record.to_row()])
        self.rows += 1

    def close(self):
        if not self._file.closed:
            self._file.close()
            logger.info(f"Wrote {self.rows} diagnostics rows to {self.path}")

    def __enter__(self) -> 'DiagnosticsWriter':
        return self

    def __exit__(self, *exc):
        self.close()


def write_diagnostics(path: str, records: Sequence[DiagnosticsRecord]):
    with DiagnosticsWriter(path) as writer:
        for record in records:
            writer.write(record)


def read_diagnostics(path: str) -> List[dict]:
    """Rows of a diagnostics CSV as dicts of floats."""
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        return [{key: float(value) for key, value in row.items()} for row in reader]


def write_dump(path: str, points: int, cells: Sequence[Sequence[np.ndarray]]):
    """
    Write a dump.

    Args:
        path: destination file
        points: per-axis node count N
        cells: for each cell, the per-species fields (each of length N^3)
    """
    nx = len(cells)
    species = len(cells[0])
    header = np.array([points, nx, species], dtype=_HEADER_DTYPE)
    with open(path, 'wb') as f:
        f.write(DUMP_MAGIC)
        f.write(header.tobytes())
        for cell in cells:
            for field in cell:
                field = np.asarray(field, dtype=_FIELD_DTYPE)
                if field.shape != (points ** 3,):
                    raise ValueError(f"Dump field has shape {field.shape}, expected ({points ** 3},)")
                f.write(field.tobytes())
    logger.debug(f"Wrote dump {path}: N={points} Nx={nx} species={species}")


def read_dump(path: str) -> DumpContents:
    """
    Read a dump back; fields reproduce the written values bit-exactly.

    Raises:
        DumpFormatError: on a wrong magic or a truncated file
    """
    with open(path, 'rb') as f:
        data = f.read()
    if data[:len(DUMP_MAGIC)] != DUMP_MAGIC:
        raise DumpFormatError(f"{path} does not start with {DUMP_MAGIC.decode()}")
    offset = len(DUMP_MAGIC)
    if len(data) < offset + 3 * _HEADER_DTYPE.itemsize:
        raise DumpFormatError(f"{path} ends inside the dump header")
    header = np.frombuffer(data, dtype=_HEADER_DTYPE, count=3, offset=offset)
    points, nx, species = (int(v) for v in header)
    offset += header.nbytes

    expected = nx * species * points ** 3
    values = np.frombuffer(data, dtype=_FIELD_DTYPE, offset=offset)
    if values.size != expected:
        raise DumpFormatError(f"{path} holds {values.size} values, header promises {expected}")
    fields = values.reshape(nx, species, points ** 3).astype(float)
    return DumpContents(points, nx, species, fields)


def dump_filename(time: float, index: int) -> str:
    return f"dump_t{time:012.6f}_{index:05d}.bin"


def ensure_output_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
