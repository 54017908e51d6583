"""CSV interchange for datasets, masks and matrices.

One dialect everywhere: comma-separated, a header row of feature names
f0..f{p-1}, decimal-point floats written with shortest round-trip
precision, an empty field for a missing cell, no quoting.
"""

import csv

import numpy as np


class CsvFormatError(ValueError):
    """Raised on malformed input; the message cites the 1-based data row
    and the column name."""


def _fmt(x: float) -> str:
    return repr(float(x))


def feature_names(p: int) -> list[str]:
    return [f"f{j}" for j in range(p)]


def write_data_csv(path, values) -> None:
    """Write an n x p float array; NaN becomes an empty field."""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(feature_names(values.shape[1]))
        for row in values:
            writer.writerow(["" if np.isnan(x) else _fmt(x) for x in row])


def read_data_csv(path) -> np.ndarray:
    """Read a data CSV back into an array with NaN for empty fields."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        p = len(header)
        rows = []
        for i, raw in enumerate(reader, start=1):
            if len(raw) != p:
                raise CsvFormatError(
                    f"{path}: row {i} has {len(raw)} fields, expected {p}"
                )
            row = np.empty(p)
            for j, tok in enumerate(raw):
                tok = tok.strip()
                if tok == "":
                    row[j] = np.nan
                    continue
                try:
                    row[j] = float(tok)
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {i}, column {header[j]}: "
                        f"cannot parse {tok!r} as a number"
                    ) from None
            rows.append(row)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    return np.vstack(rows)


def write_mask_csv(path, mask) -> None:
    """Write a boolean mask as 0/1 integers under the data header."""
    mask = np.asarray(mask, dtype=bool)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(feature_names(mask.shape[1]))
        for row in mask:
            writer.writerow(["1" if x else "0" for x in row])


def read_mask_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        p = len(header)
        rows = []
        for i, raw in enumerate(reader, start=1):
            if len(raw) != p:
                raise CsvFormatError(
                    f"{path}: row {i} has {len(raw)} fields, expected {p}"
                )
            try:
                rows.append([int(tok) for tok in raw])
            except ValueError:
                raise CsvFormatError(f"{path}: row {i}: mask entries must be 0 or 1") from None
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    arr = np.asarray(rows)
    if not np.isin(arr, (0, 1)).all():
        raise CsvFormatError(f"{path}: mask entries must be 0 or 1")
    return arr.astype(bool)


def write_matrix_csv(path, matrix) -> None:
    """Write a dense p x p matrix under the same header as the data."""
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(feature_names(matrix.shape[1]))
        for row in matrix:
            writer.writerow([_fmt(x) for x in row])


def read_matrix_csv(path) -> np.ndarray:
    arr = read_data_csv(path)
    if np.isnan(arr).any():
        raise CsvFormatError(f"{path}: matrix files may not contain empty fields")
    return arr
