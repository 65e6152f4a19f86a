"""Matrix Market text I/O with bit-exact round-tripping.

Reading accepts ``array`` and ``coordinate`` layouts with ``real``,
``integer`` or ``complex`` fields and ``general``, ``symmetric``,
``hermitian`` or ``skew-symmetric`` symmetry.  Numbers may be plain
decimals or C99 hexadecimal floats; writing uses hexadecimal floats so a
write/read cycle reproduces every double exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

__all__ = ["read_matrix", "write_matrix"]

_SYMMETRIES = ("general", "symmetric", "hermitian", "skew-symmetric")


def _parse_number(tok: str) -> float:
    if "x" in tok or "X" in tok:
        return float.fromhex(tok)
    return float(tok)


def read_matrix(path) -> np.ndarray:
    """Read one matrix from a Matrix Market file as complex128."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split()
        if len(header) < 5 or header[0] != "%%MatrixMarket" or header[1] != "matrix":
            raise ValueError(f"{path}: not a Matrix Market matrix file")
        layout, field, symmetry = header[2].lower(), header[3].lower(), header[4].lower()
        if layout not in ("array", "coordinate"):
            raise ValueError(f"{path}: unsupported layout {layout!r}")
        if field not in ("real", "integer", "complex"):
            raise ValueError(f"{path}: unsupported field {field!r}")
        if symmetry not in _SYMMETRIES:
            raise ValueError(f"{path}: unsupported symmetry {symmetry!r}")
        line = fh.readline()
        while line.startswith("%") or not line.strip():
            line = fh.readline()
        sizes = line.split()
        rows, cols = int(sizes[0]), int(sizes[1])
        M = np.zeros((rows, cols), dtype=np.complex128)
        if layout == "array":
            if symmetry != "general" and rows != cols:
                raise DimensionError(f"{path}: symmetric array must be square")
            entries = []
            for line in fh:
                line = line.strip()
                if not line or line.startswith("%"):
                    continue
                toks = line.split()
                if field == "complex":
                    entries.append(complex(_parse_number(toks[0]),
                                           _parse_number(toks[1])))
                else:
                    entries.append(complex(_parse_number(toks[0])))
            it = iter(entries)
            for j in range(cols):
                i0 = j if symmetry != "general" else 0
                for i in range(i0, rows):
                    _store(M, i, j, next(it), symmetry)
        else:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("%"):
                    continue
                toks = line.split()
                i, j = int(toks[0]) - 1, int(toks[1]) - 1
                if field == "complex":
                    v = complex(_parse_number(toks[2]), _parse_number(toks[3]))
                else:
                    v = complex(_parse_number(toks[2]))
                _store(M, i, j, v, symmetry)
    return M


def _store(M, i, j, v, symmetry):
    M[i, j] = v
    if i != j:
        if symmetry == "symmetric":
            M[j, i] = v
        elif symmetry == "hermitian":
            M[j, i] = v.conjugate()
        elif symmetry == "skew-symmetric":
            M[j, i] = -v


def _format_number(x: float, hexfloat: bool) -> str:
    return float(x).hex() if hexfloat else repr(float(x))


def write_matrix(path, M, hexfloat: bool = True) -> None:
    """Write a dense matrix in array layout; complex field, general symmetry."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise DimensionError("write_matrix expects a 2-d matrix")
    rows, cols = M.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("%%MatrixMarket matrix array complex general\n")
        fh.write(f"{rows} {cols}\n")
        for j in range(cols):
            for i in range(rows):
                v = M[i, j]
                fh.write(f"{_format_number(v.real, hexfloat)} "
                         f"{_format_number(v.imag, hexfloat)}\n")
