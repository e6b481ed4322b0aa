"""Matrix Market exchange-format reader.

Parsing validates a file and reports its shape; the experiments transmit
the file bytes themselves, so ``MatrixInfo.payload`` is the input verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

FORMATS = ("coordinate", "array")
FIELDS = ("real", "integer", "pattern")
SYMMETRIES = ("general", "symmetric", "skew-symmetric")


class MatrixMarketError(ValueError):
    pass


class NotMatrixMarket(MatrixMarketError):
    pass


class Unsupported(MatrixMarketError):
    def __init__(self, what: str):
        super().__init__(f"unsupported: {what}")
        self.what = what


class Malformed(MatrixMarketError):
    def __init__(self, msg: str, line_no: int | None = None):
        super().__init__(f"line {line_no}: {msg}" if line_no else msg)
        self.line_no = line_no


@dataclass(frozen=True)
class MatrixInfo:
    path: str | None
    format: str
    field: str
    symmetry: str
    rows: int
    cols: int
    nnz: int  # entries as stored
    payload: bytes = field(repr=False)
    diagonal: int = 0  # stored entries on the diagonal

    @property
    def logical_nnz(self) -> int:
        """Nonzeros of the full matrix once symmetric halves are mirrored."""
        if self.symmetry == "general":
            return self.nnz
        return 2 * self.nnz - self.diagonal


def _parse_int(tok: str, line_no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise Malformed(f"expected integer, got {tok!r}", line_no) from None


def _check_value(tok: str, kind: str, line_no: int):
    try:
        int(tok) if kind == "integer" else float(tok)
    except ValueError:
        raise Malformed(f"non-numeric entry {tok!r}", line_no) from None


def parse_matrix_market(text: bytes, path: str | None = None) -> MatrixInfo:
    raw = bytes(text)
    try:
        lines = raw.decode("ascii").splitlines()
    except UnicodeDecodeError:
        raise NotMatrixMarket("not ASCII text") from None
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise NotMatrixMarket("missing %%MatrixMarket banner")
    banner = lines[0].split()
    if len(banner) != 5:
        raise Malformed("banner needs object, format, field and symmetry", 1)
    obj, fmt, fld, sym = (t.lower() for t in banner[1:])
    if obj != "matrix":
        raise Unsupported(obj)
    if fmt not in FORMATS:
        raise Unsupported(fmt)
    if fld not in FIELDS:
        raise Unsupported(fld)
    if sym not in SYMMETRIES:
        raise Unsupported(sym)

    body = [(i + 1, ln) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise Malformed("missing size line")
    size_no, size_line = body[0]
    dims = [_parse_int(t, size_no) for t in size_line.split()]
    entries = body[1:]

    if fmt == "coordinate":
        if len(dims) != 3:
            raise Malformed("coordinate size line needs rows cols nnz", size_no)
        rows, cols, nnz = dims
        if rows < 1 or cols < 1 or nnz < 0:
            raise Malformed("dimensions must be positive", size_no)
        if len(entries) != nnz:
            raise Malformed(f"size line declares {nnz} entries, found {len(entries)}",
                            size_no)
        width = 2 if fld == "pattern" else 3
        diagonal = 0
        for no, ln in entries:
            toks = ln.split()
            if len(toks) != width:
                raise Malformed(f"expected {width} fields", no)
            i, j = _parse_int(toks[0], no), _parse_int(toks[1], no)
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise Malformed(f"index ({i}, {j}) outside {rows}x{cols}", no)
            if sym != "general" and j > i:
                raise Malformed("symmetric storage must be lower triangular", no)
            if width == 3:
                _check_value(toks[2], fld, no)
            diagonal += i == j
        return MatrixInfo(path, fmt, fld, sym, rows, cols, nnz, raw, diagonal)

    if fld == "pattern":
        raise Unsupported("pattern array")
    if len(dims) != 2:
        raise Malformed("array size line needs rows cols", size_no)
    rows, cols = dims
    if rows < 1 or cols < 1:
        raise Malformed("dimensions must be positive", size_no)
    if sym == "general":
        expected = rows * cols
    elif sym == "symmetric":
        expected = rows * (rows + 1) // 2
    else:
        expected = rows * (rows - 1) // 2
    if sym != "general" and rows != cols:
        raise Malformed("symmetric matrix must be square", size_no)
    values = []
    for no, ln in entries:
        for tok in ln.split():
            _check_value(tok, fld, no)
            values.append(tok)
    if len(values) != expected:
        raise Malformed(f"expected {expected} values, found {len(values)}", size_no)
    diagonal = min(rows, cols) if sym == "symmetric" else 0
    return MatrixInfo(path, fmt, fld, sym, rows, cols, len(values), raw, diagonal)


def read_matrix_market(path) -> MatrixInfo:
    path = Path(path)
    return parse_matrix_market(path.read_bytes(), str(path))


def fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"


def fixture_paths() -> list[Path]:
    return sorted(fixture_dir().glob("*.mtx"))
