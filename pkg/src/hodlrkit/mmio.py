"""Matrix Market readers and writers, plus the front-row ordering file.

Coordinate files map to :class:`~hodlrkit.graph.SparsePattern` (general
patterns are symmetrized by union so they can serve as graphs); array files
map to dense ``numpy`` matrices.  Values are rendered with 17 significant
digits so a write/read round trip is exact for float64.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, ParseError
from .graph import SparsePattern

_HEADER = "%%MatrixMarket"


def _tokenize(path):
    """Yield (line_number, tokens) for content lines, comments stripped."""
    with open(path, "r", encoding="ascii") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            yield lineno, line.split()


def read_matrix_market(path):
    """Read a Matrix Market file: coordinate -> SparsePattern, array -> ndarray."""
    with open(path, "r", encoding="ascii") as handle:
        first = handle.readline().rstrip("\n")
    parts = first.split()
    if len(parts) != 5 or parts[0] != _HEADER or parts[1].lower() != "matrix":
        raise ParseError(f"bad header {first!r}", line=1)
    fmt, field, symmetry = (p.lower() for p in parts[2:5])
    if fmt not in ("coordinate", "array"):
        raise ParseError(f"unsupported format {fmt!r}", line=1)
    if field not in ("real", "integer", "pattern"):
        raise ParseError(f"unsupported field {field!r}", line=1)
    if symmetry not in ("general", "symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", line=1)
    if fmt == "array":
        if field == "pattern":
            raise ParseError("array format cannot be pattern", line=1)
        return _read_array(path, symmetry)
    return _read_coordinate(path, field, symmetry)


def _size_line(lines):
    try:
        return next(lines)
    except StopIteration:
        raise ParseError("missing size line")


def _read_array(path, symmetry):
    lines = _tokenize(path)
    lineno, tokens = _size_line(lines)
    if len(tokens) != 2:
        raise ParseError("array size line must be 'rows cols'", line=lineno)
    try:
        m, n = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ParseError("array dimensions must be integers", line=lineno)
    expected = m * n if symmetry == "general" else None
    if symmetry == "symmetric":
        if m != n:
            raise DimensionMismatchError(f"symmetric array must be square, got {m}x{n}")
        expected = n * (n + 1) // 2
    values = []
    for lineno, tokens in lines:
        for tok in tokens:
            try:
                values.append(float(tok))
            except ValueError:
                raise ParseError(f"bad numeric value {tok!r}", line=lineno)
    if len(values) != expected:
        raise DimensionMismatchError(
            f"array body has {len(values)} values, header {m}x{n} expects {expected}")
    out = np.zeros((m, n))
    if symmetry == "general":
        out[:] = np.asarray(values).reshape((n, m)).T  # column-major body
    else:
        k = 0
        for j in range(n):
            for i in range(j, n):
                out[i, j] = values[k]
                out[j, i] = values[k]
                k += 1
    return out


def _read_coordinate(path, field, symmetry):
    lines = _tokenize(path)
    lineno, tokens = _size_line(lines)
    if len(tokens) != 3:
        raise ParseError("coordinate size line must be 'rows cols nnz'", line=lineno)
    try:
        m, n, nnz = (int(t) for t in tokens)
    except ValueError:
        raise ParseError("coordinate dimensions must be integers", line=lineno)
    if m != n:
        raise ParseError(f"only square coordinate matrices are supported, got {m}x{n}",
                         line=lineno)
    has_values = field != "pattern"
    want = 3 if has_values else 2
    rows, cols, vals = [], [], [] if has_values else None
    seen = set()
    count = 0
    for lineno, tokens in lines:
        if len(tokens) != want:
            raise ParseError(
                f"entry must have {want} fields, got {len(tokens)}", line=lineno)
        try:
            i, j = int(tokens[0]), int(tokens[1])
            v = float(tokens[2]) if has_values else None
        except ValueError:
            raise ParseError(f"malformed entry {' '.join(tokens)!r}", line=lineno)
        if not (1 <= i <= m and 1 <= j <= n):
            raise DimensionMismatchError(
                f"line {lineno}: entry ({i}, {j}) outside {m}x{n} header")
        key = (i, j)
        if key in seen:
            raise ParseError(f"duplicate entry ({i}, {j})", line=lineno)
        seen.add(key)
        rows.append(i - 1)
        cols.append(j - 1)
        if has_values:
            vals.append(v)
        count += 1
    if count != nnz:
        raise ParseError(f"header promised {nnz} entries, file has {count}")
    return SparsePattern.from_edges(n, rows, cols, vals)


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_matrix_market_dense(path, a, comment=None) -> None:
    """Write a dense matrix in array format (column-major body)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("dense matrix must be 2-D")
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"{_HEADER} matrix array real general\n")
        if comment:
            handle.write(f"% {comment}\n")
        handle.write(f"{a.shape[0]} {a.shape[1]}\n")
        for j in range(a.shape[1]):
            for i in range(a.shape[0]):
                handle.write(_fmt(a[i, j]) + "\n")


def write_matrix_market_sparse(path, pattern: SparsePattern, comment=None) -> None:
    """Write a SparsePattern in coordinate format.

    Patterns with values emit ``real symmetric`` (lower triangle plus every
    nonzero diagonal entry); patterns without values emit ``pattern
    symmetric`` with the lower-triangle edges only.
    """
    n = pattern.n
    entries = []
    for v in range(n):
        lo, hi = pattern.indptr[v], pattern.indptr[v + 1]
        for idx in range(lo, hi):
            u = int(pattern.indices[idx])
            if u > v:
                continue  # lower triangle only
            val = pattern.edge_values[idx] if pattern.has_values else None
            entries.append((v + 1, u + 1, val))
    if pattern.has_values and pattern.diagonal is not None:
        for v in range(n):
            if pattern.diagonal[v] != 0.0:
                entries.append((v + 1, v + 1, pattern.diagonal[v]))
    entries.sort(key=lambda e: (e[0], e[1]))
    field = "real" if pattern.has_values else "pattern"
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"{_HEADER} matrix coordinate {field} symmetric\n")
        if comment:
            handle.write(f"% {comment}\n")
        handle.write(f"{n} {n} {len(entries)}\n")
        for i, j, val in entries:
            if val is None:
                handle.write(f"{i} {j}\n")
            else:
                handle.write(f"{i} {j} {_fmt(val)}\n")


def write_ordering(path, ordering) -> None:
    """One original vertex id per front row, as plain text."""
    ordering = np.asarray(ordering, dtype=np.intp)
    with open(path, "w", encoding="ascii") as handle:
        handle.write("% vertex id per front row\n")
        for v in ordering:
            handle.write(f"{int(v)}\n")


def read_ordering(path) -> np.ndarray:
    out = []
    for lineno, tokens in _tokenize(path):
        if len(tokens) != 1:
            raise ParseError("ordering lines carry a single vertex id", line=lineno)
        try:
            out.append(int(tokens[0]))
        except ValueError:
            raise ParseError(f"bad vertex id {tokens[0]!r}", line=lineno)
    return np.asarray(out, dtype=np.intp)
