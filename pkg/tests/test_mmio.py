import shutil
import subprocess

import pytest
from hypothesis import given, strategies as st

from layercast.compressor import CompressionConfig, compress
from layercast.mmio import (
    Malformed, NotMatrixMarket, Unsupported, fixture_paths, parse_matrix_market,
    read_matrix_market,
)

TWO_BY_TWO = b"""%%MatrixMarket matrix coordinate real general
% tiny
2 2 2
1 1 1.5
2 2 -3e2
"""


def test_two_by_two():
    info = parse_matrix_market(TWO_BY_TWO)
    assert (info.format, info.field, info.symmetry) == ("coordinate", "real", "general")
    assert (info.rows, info.cols, info.nnz) == (2, 2, 2)
    assert info.payload == TWO_BY_TWO


def test_complex_unsupported():
    with pytest.raises(Unsupported) as exc:
        parse_matrix_market(TWO_BY_TWO.replace(b"real", b"complex"))
    assert exc.value.what == "complex"


def test_missing_banner():
    with pytest.raises(NotMatrixMarket):
        parse_matrix_market(b"2 2 1\n1 1 1\n")
    with pytest.raises(NotMatrixMarket):
        parse_matrix_market(b"")


def test_entry_count_mismatch():
    with pytest.raises(Malformed):
        parse_matrix_market(TWO_BY_TWO.replace(b"2 2 2", b"2 2 3"))


def test_non_numeric_entry_reports_line():
    with pytest.raises(Malformed) as exc:
        parse_matrix_market(TWO_BY_TWO.replace(b"-3e2", b"abc"))
    assert exc.value.line_no == 5


@pytest.mark.parametrize("text", [
    b"%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
    b"%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n",
    b"%%MatrixMarket matrix coordinate real general\n2 2\n",
    b"%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1 5\n",
    b"%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n",
    b"%%MatrixMarket matrix array real symmetric\n2 3\n1\n2\n3\n",
    b"%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 1.5\n",
    b"%%MatrixMarket matrix coordinate\n",
    b"%%MatrixMarket matrix coordinate real general\n% only comments\n",
])
def test_malformed_inputs(text):
    with pytest.raises(Malformed):
        parse_matrix_market(text)


def test_array_forms():
    sym = b"%%MatrixMarket matrix array integer symmetric\n2 2\n1\n2\n3\n"
    info = parse_matrix_market(sym)
    assert (info.rows, info.cols, info.nnz, info.logical_nnz) == (2, 2, 3, 4)
    skew = b"%%MatrixMarket matrix array real skew-symmetric\n3 3\n1\n2\n3\n"
    assert parse_matrix_market(skew).nnz == 3


def test_symmetric_logical_nnz():
    text = (b"%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n"
            b"1 1 1\n2 1 1\n3 2 1\n3 3 1\n")
    info = parse_matrix_market(text)
    assert info.nnz == 4 and info.logical_nnz == 6


@given(st.lists(st.tuples(st.integers(1, 9), st.integers(1, 9),
                          st.floats(allow_nan=False, allow_infinity=False)),
                max_size=30),
       st.sampled_from(["\n", "\r\n"]))
def test_payload_round_trip(entries, eol):
    lines = ["%%MatrixMarket matrix coordinate real general", "% generated",
             f"9 9 {len(entries)}"]
    lines += [f"{i} {j} {v!r}" for i, j, v in entries]
    text = (eol.join(lines) + eol).encode()
    info = parse_matrix_market(text)
    assert info.payload == text and info.nnz == len(entries)


def test_fixture_corpus_shape():
    paths = fixture_paths()
    assert len(paths) >= 10
    infos = [read_matrix_market(p) for p in paths]
    assert {"coordinate", "array"} <= {i.format for i in infos}
    assert {"real", "integer", "pattern"} <= {i.field for i in infos}
    for p, info in zip(paths, infos):
        assert info.payload == p.read_bytes()


@pytest.mark.skipif(shutil.which("awk") is None, reason="needs awk")
def test_fixtures_against_awk():
    # size line is the first non-comment line; entries are the rest
    prog = ('!/^%/ && NF { if (!seen) { size = $0; seen = 1 } else { n += NF; lines++ } }'
            ' END { print size; print lines; print n }')
    for p in fixture_paths():
        out = subprocess.run(["awk", prog, str(p)], capture_output=True, text=True,
                             check=True).stdout.split("\n")
        dims = [int(x) for x in out[0].split()]
        lines, tokens = int(out[1]), int(out[2])
        info = read_matrix_market(p)
        assert [info.rows, info.cols] == dims[:2]
        if info.format == "coordinate":
            assert info.nnz == dims[2] == lines
        else:
            assert info.nnz == tokens


def test_level9_beats_level1_on_fixtures():
    for p in fixture_paths():
        data = p.read_bytes()
        nine, _ = compress(data, CompressionConfig(True, 9))
        one, _ = compress(data, CompressionConfig(True, 1))
        assert len(nine) <= len(one) + 64
