"""CSV ingestion and emission for matrices, reports, and sweep tables.

The interchange format is deliberately dumb: one header line, then
rectangular numeric rows. Floats are written with 17 significant digits so
a save/load round trip is bit-exact.
"""

import csv
import logging
import math
import os

import numpy as np

from .errors import DataFormatError

log = logging.getLogger("mvlrt.dataio")

FLOAT_FMT = "%.17g"


def load_matrix(path):
    """Read a dense numeric matrix from a headered CSV file.

    The first line is a header and is discarded. Every following row must
    have the same number of cells as the header, every cell must parse as a
    finite float. Violations raise DataFormatError naming the 1-based line.
    """
    if not os.path.exists(path):
        raise DataFormatError(f"{path}: no such file")
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if lineno == 1:
                width = len(cells)
                continue
            if not cells:
                continue
            if len(cells) != width:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {width} cells, got {len(cells)}")
            try:
                row = [float(c) for c in cells]
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric cell") from None
            if any(not math.isfinite(v) for v in row):
                raise DataFormatError(f"{path}:{lineno}: non-finite value")
            rows.append(row)
    if width == 0 or not rows:
        raise DataFormatError(f"{path}: empty body")
    a = np.asarray(rows, dtype=float)
    log.info("loaded %s: %d x %d", path, a.shape[0], a.shape[1])
    return a


def save_matrix(path, a) -> None:
    """Write a matrix as headered CSV, floats at 17 significant digits."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"c{j}" for j in range(a.shape[1])) + "\n")
        for row in a:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")
    log.info("wrote %s: %d x %d", path, a.shape[0], a.shape[1])


def write_rows(path, header, rows) -> None:
    """Write one header plus pre-formatted rows via the csv module."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    log.info("wrote %s: %d rows", path, len(rows))
