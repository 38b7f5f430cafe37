"""Matrix files (Matrix Market and dense text) and transcript files.

Matrix Market support is limited to exact data: ``integer`` and
``pattern`` fields, ``general``, ``symmetric`` and ``skew-symmetric``
symmetry, in both ``coordinate`` and ``array`` layouts.  Entries are
parsed as Python integers, so arbitrarily large values survive.

Dense text is a line ``m n`` followed by m rows of n decimal entries.
"""

from __future__ import annotations

import re
import warnings
from pathlib import Path

from .errors import NonIntegerEntry, ParseError
from .linalg.matrices import DenseMatrix, SparseMatrix, as_dense
from .protocol import Transcript

_INT = re.compile(r"[+-]?[0-9]+\Z")
_COUNT = re.compile(r"[0-9]+\Z")
TRANSCRIPT_WARN_BYTES = 100 * 10**6
MAX_DIMENSION = 10**7


def _tokens(line: str):
    """(token, 1-based column) pairs."""
    for m in re.finditer(r"\S+", line):
        yield m.group(), m.start() + 1


def _int_token(tok: str, line: int, col: int) -> int:
    if not _INT.match(tok):
        raise NonIntegerEntry(f"entry {tok!r} is not an integer", line, col)
    return int(tok)


def _count_token(tok: str, line: int, col: int, what: str) -> int:
    if not _COUNT.match(tok):
        raise ParseError(f"{what} {tok!r} is not a non-negative integer", line, col)
    return int(tok)


def parse_matrix_market(text: str):
    lines = text.splitlines()
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise ParseError("missing %%MatrixMarket banner", 1, 1)
    banner = lines[0].split()
    if len(banner) != 5 or banner[1].lower() != "matrix":
        raise ParseError("banner must read '%%MatrixMarket matrix <layout> <field> <symmetry>'", 1)
    layout, fld, symmetry = (b.lower() for b in banner[2:])
    if layout not in ("coordinate", "array"):
        raise ParseError(f"unknown layout {layout!r}", 1)
    if fld in ("real", "complex", "double"):
        raise NonIntegerEntry(f"field {fld!r} is not exact; only integer and pattern are accepted", 1)
    if fld not in ("integer", "pattern"):
        raise ParseError(f"unknown field {fld!r}", 1)
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise ParseError(f"unsupported symmetry {symmetry!r}", 1)
    if fld == "pattern" and layout == "array":
        raise ParseError("pattern matrices must use the coordinate layout", 1)

    body = [(i + 1, ln) for i, ln in enumerate(lines[1:], start=1) if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", len(lines))
    size_no, size_line = body[0]
    size = list(_tokens(size_line))
    want = 3 if layout == "coordinate" else 2
    if len(size) != want:
        raise ParseError(f"size line needs {want} numbers", size_no)
    dims = [_count_token(t, size_no, c, "size") for t, c in size]
    m, n = dims[0], dims[1]
    if not (1 <= m <= MAX_DIMENSION and 1 <= n <= MAX_DIMENSION):
        raise ParseError(f"dimensions must lie in [1, {MAX_DIMENSION}]", size_no)
    if symmetry != "general" and m != n:
        raise ParseError("symmetric storage needs a square matrix", size_no)
    entries = body[1:]

    if layout == "coordinate":
        nnz = dims[2]
        if len(entries) != nnz:
            raise ParseError(f"expected {nnz} entries, found {len(entries)}", entries[-1][0] if entries else size_no)
        acc = {}

        def put(i, j, v, line_no):
            if (i, j) in acc:
                raise ParseError(f"duplicate entry ({i + 1}, {j + 1})", line_no)
            acc[i, j] = v

        for line_no, ln in entries:
            toks = list(_tokens(ln))
            need = 2 if fld == "pattern" else 3
            if len(toks) != need:
                raise ParseError(f"entry line needs {need} fields", line_no)
            i = _count_token(toks[0][0], line_no, toks[0][1], "row index")
            j = _count_token(toks[1][0], line_no, toks[1][1], "column index")
            if not (1 <= i <= m and 1 <= j <= n):
                raise ParseError(f"index ({i}, {j}) outside {m}x{n}", line_no)
            v = 1 if fld == "pattern" else _int_token(toks[2][0], line_no, toks[2][1])
            i, j = i - 1, j - 1
            if symmetry != "general" and j > i:
                raise ParseError("symmetric storage lists the lower triangle only", line_no)
            if symmetry == "skew-symmetric" and i == j:
                if v:
                    raise ParseError("skew-symmetric diagonal must be zero", line_no)
                continue
            put(i, j, v, line_no)
            if symmetry != "general" and i != j:
                put(j, i, -v if symmetry == "skew-symmetric" else v, line_no)
        return SparseMatrix(m, n, [(i, j, v) for (i, j), v in acc.items()])

    # array layout: column-major, lower triangle only when symmetric
    values = []
    for line_no, ln in entries:
        for tok, col in _tokens(ln):
            values.append((_int_token(tok, line_no, col), line_no))
    expected = {"general": m * n, "symmetric": n * (n + 1) // 2, "skew-symmetric": n * (n - 1) // 2}[symmetry]
    if len(values) != expected:
        raise ParseError(f"expected {expected} values, found {len(values)}",
                         entries[-1][0] if entries else size_no)
    if symmetry == "general":
        positions = [(i, j) for j in range(n) for i in range(m)]
    elif symmetry == "symmetric":
        positions = [(i, j) for j in range(n) for i in range(j, m)]
    else:
        positions = [(i, j) for j in range(n) for i in range(j + 1, m)]
    rows = [[0] * n for _ in range(m)]
    for (i, j), (v, _) in zip(positions, values):
        rows[i][j] = v
        if symmetry == "symmetric":
            rows[j][i] = v
        elif symmetry == "skew-symmetric":
            rows[j][i] = -v
    return DenseMatrix(rows)


def parse_dense_text(text: str) -> DenseMatrix:
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise ParseError("empty matrix file", 1)
    head_no, head = lines[0]
    size = list(_tokens(head))
    if len(size) != 2:
        raise ParseError("first line must be 'm n'", head_no)
    m, n = (_count_token(t, head_no, c, "dimension") for t, c in size)
    if not (1 <= m <= MAX_DIMENSION and 1 <= n <= MAX_DIMENSION):
        raise ParseError(f"dimensions must lie in [1, {MAX_DIMENSION}]", head_no)
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"expected {m} rows, found {len(body)}", body[-1][0] if body else head_no)
    rows = []
    for line_no, ln in body:
        toks = list(_tokens(ln))
        if len(toks) != n:
            raise ParseError(f"expected {n} entries, found {len(toks)}", line_no)
        rows.append([_int_token(t, line_no, c) for t, c in toks])
    return DenseMatrix(rows)


def detect_format(text: str) -> str:
    first = next((ln for ln in text.splitlines() if ln.strip()), "")
    return "matrix-market" if first.lstrip().lower().startswith("%%matrixmarket") else "dense-text"


def parse_matrix(text: str, format: str = "auto"):
    fmt = detect_format(text) if format == "auto" else format
    if fmt == "matrix-market":
        return parse_matrix_market(text)
    if fmt == "dense-text":
        return parse_dense_text(text)
    raise ValueError(f"unknown matrix format {format!r}")


def load_matrix(path, format: str = "auto"):
    """DenseMatrix or SparseMatrix from a file; raises ParseError or OSError."""
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not a text file") from exc
    return parse_matrix(text, format)


def format_matrix_market(M) -> str:
    if isinstance(M, SparseMatrix):
        out = ["%%MatrixMarket matrix coordinate integer general", f"{M.nrows} {M.ncols} {M.nnz()}"]
        out.extend(f"{i + 1} {j + 1} {v}" for i, j, v in M.entries)
    else:
        D = as_dense(M)
        m, n = D.shape
        out = ["%%MatrixMarket matrix array integer general", f"{m} {n}"]
        out.extend(str(D.rows[i][j]) for j in range(n) for i in range(m))
    return "\n".join(out) + "\n"


def format_dense_text(M) -> str:
    D = as_dense(M)
    m, n = D.shape
    return f"{m} {n}\n" + "".join(" ".join(map(str, r)) + "\n" for r in D.rows)


def write_matrix(M, path, format: str = "matrix-market") -> None:
    text = format_matrix_market(M) if format == "matrix-market" else format_dense_text(M)
    Path(path).write_text(text)


def transcript_size_estimate(n: int, entry_digits: int = 12) -> int:
    """Rough bytes of a transcript carrying a few n x n residue matrices."""
    return 3 * n * n * (entry_digits + 3)


def save_transcript(t: Transcript, path) -> None:
    text = t.to_json(indent=1)
    if len(text) > TRANSCRIPT_WARN_BYTES:
        warnings.warn(f"transcript is {len(text) / 1e6:.0f} MB", stacklevel=2)
    Path(path).write_text(text)


def load_transcript(path) -> Transcript:
    """Raises OSError when unreadable, SchemaViolation when malformed."""
    return Transcript.from_json(Path(path).read_text())
