"""CSV helpers shared by the experiment commands.

Complex matrices are stored row-major with one "re,im" pair per entry, i.e.
a shape (r, c) matrix becomes r rows of 2c numeric columns. The first line
is a comment header recording the shape.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def write_complex_matrix(path, matrix: np.ndarray):
    m = np.asarray(matrix, dtype=np.complex128)
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# complex matrix shape {m.shape[0]} {m.shape[1]}, row-major re,im pairs\n")
        w = csv.writer(fh)
        for row in m:
            flat = []
            for z in row:
                flat.extend((repr(float(z.real)), repr(float(z.imag))))
            w.writerow(flat)


def read_complex_matrix(path) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing complex-matrix header")
        rows = []
        for line in csv.reader(fh):
            vals = [float(v) for v in line]
            rows.append([complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
    return np.array(rows, dtype=np.complex128)


def write_rows(path, header: list, rows):
    """Plain CSV with a header row."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def read_rows(path):
    """Returns (header, rows-of-strings)."""
    with Path(path).open() as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, list(r)
