"""CSV reading/writing and the column preprocessing used on real data."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

FLOAT_FMT = "%.17g"


class CsvParseError(ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path):
    """Read a rectangular numeric CSV.

    A first row with any non-numeric cell is taken as a header. Returns
    ``(values, header)`` where ``header`` is ``None`` when absent.
    """
    with open(path, newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise CsvParseError(path, 1, "empty file")
    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise CsvParseError(path, 2, "no data rows after header")
    width = len(header) if header is not None else len(rows[0][1])
    values = np.empty((len(rows), width))
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise CsvParseError(path, line, f"expected {width} fields, found {len(cells)}")
        for c, cell in enumerate(cells):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise CsvParseError(path, line, f"non-numeric value {cell!r} in column {c + 1}") from None
    if not np.all(np.isfinite(values)):
        line = rows[int(np.argwhere(~np.isfinite(values))[0][0])][0]
        raise CsvParseError(path, line, "non-finite value")
    return values, header


def save_csv(path, X, header: Optional[list] = None):
    """Write with 17 significant digits so values reload bit-identically."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    with open(path, "w", newline="") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in X:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")


@dataclass
class PreprocessSpec:
    column_min_subtract: bool = False
    column_std_divide: bool = False
    column_mean_center_first: bool = False
    std_ddof: int = 0

    @classmethod
    def parse(cls, text: str, std_ddof: int = 0) -> "PreprocessSpec":
        """From a comma list such as ``"minsub,stddiv,meancenter"`` (``""``/``"none"`` for nothing)."""
        names = {"minsub": "column_min_subtract", "stddiv": "column_std_divide",
                 "meancenter": "column_mean_center_first"}
        flags = {}
        for tok in (t.strip() for t in text.split(",")):
            if tok in ("", "none"):
                continue
            if tok not in names:
                raise ValueError(f"unknown preprocessing step {tok!r}; expected {sorted(names)}")
            flags[names[tok]] = True
        return cls(std_ddof=std_ddof, **flags)


def preprocess(A, spec: PreprocessSpec) -> np.ndarray:
    """Column-wise mean-centering, then min-subtraction, then std scaling."""
    X = np.array(A, dtype=np.float64)
    if spec.column_mean_center_first:
        X -= X.mean(axis=0)
    if spec.column_min_subtract:
        X -= X.min(axis=0)
    if spec.column_std_divide:
        sd = X.std(axis=0, ddof=spec.std_ddof) if X.shape[0] > spec.std_ddof else np.zeros(X.shape[1])
        nz = sd > 0
        X[:, nz] /= sd[nz]
    return X
