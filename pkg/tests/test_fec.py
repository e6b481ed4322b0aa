import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layercast import fec
from test_gf256 import clmul_reduce


def brute_inv(a):
    return next(b for b in range(1, 256) if clmul_reduce(a, b) == 1)


def reference_parity(symbols, n):
    """Parity by the textbook formula: entry (i, j) = 1 / (x_i + y_j)."""
    k = len(symbols)
    size = len(symbols[0])
    out = []
    for i in range(n - k):
        row = bytearray(size)
        for j in range(k):
            c = brute_inv((k + i) ^ j)
            for t in range(size):
                row[t] ^= clmul_reduce(c, symbols[j][t])
        out.append(bytes(row))
    return out


def block(k, size=8, seed=0, object_id=0):
    rng = random.Random(seed)
    return fec.SourceBlock(object_id, 0, k, size, tuple(rng.randbytes(size) for _ in range(k)))


# -- partition ----------------------------------------------------------------

def test_partition_ten_bytes():
    blocks = fec.partition(bytes(range(10)), symbol_size=4, max_k=2)
    assert [b.k for b in blocks] == [2, 1]
    assert blocks[0].symbols == (bytes([0, 1, 2, 3]), bytes([4, 5, 6, 7]))
    assert blocks[1].symbols == (bytes([8, 9, 0, 0]),)
    assert [b.pad_len for b in blocks] == [0, 2]


def test_partition_empty():
    assert fec.partition(b"", 4, 2) == []


def test_partition_one_mib():
    # ceil(1048576 / 1024) = 1024 symbols; 1024 / 64 = 16 blocks.
    blocks = fec.partition(bytes(1 << 20), 1024, 64)
    assert len(blocks) == 16
    assert all(b.k == 64 and b.pad_len == 0 for b in blocks)


@given(st.binary(max_size=3000), st.integers(1, 300), st.integers(1, 128))
def test_partition_reassembles(payload, size, max_k):
    blocks = fec.partition(payload, size, max_k)
    assert fec.reassemble(blocks) == payload
    assert all(b.k <= max_k for b in blocks)
    assert all(b.pad_len == 0 for b in blocks[:-1])


def test_partition_rejects_bad_args():
    with pytest.raises(fec.FecError):
        fec.partition(b"x", 0, 4)
    with pytest.raises(fec.FecError):
        fec.partition(b"x", 4, 129)


# -- encode ---------------------------------------------------------------------

def test_encode_two_hundred_percent():
    b = block(4)
    enc = fec.encode(b, 2.0)
    assert enc.n == 12
    assert [s for _, s in enc.symbols[:4]] == list(b.symbols)


def test_encode_zero_expansion_is_identity():
    b = block(4)
    enc = fec.encode(b, 0.0)
    assert enc.n == 4
    assert tuple(s for _, s in enc.symbols) == b.symbols


def test_zero_block_has_zero_parity():
    b = fec.SourceBlock(0, 0, 3, 16, (bytes(16),) * 3)
    enc = fec.encode(b, 1.0)
    assert enc.n == 6
    assert all(s == bytes(16) for _, s in enc.symbols)


@pytest.mark.parametrize("k,exp", [(1, 2.0), (3, 1.0), (5, 1.4), (7, 0.5)])
def test_parity_matches_reference(k, exp):
    b = block(k, size=6, seed=k)
    enc = fec.encode(b, exp)
    parity = [s for sid, s in enc.symbols if sid >= k]
    assert parity == reference_parity(list(b.symbols), enc.n)


def test_code_too_wide():
    b = block(100)
    with pytest.raises(fec.CodeTooWide):
        fec.encode(b, 2.0)
    assert fec.encode(block(85), 2.0).n == 255


def test_total_symbols_exact():
    assert fec.total_symbols(3, Fraction(1, 3)) == 4
    assert fec.total_symbols(64, 2.0) == 192
    assert fec.total_symbols(10, 0.25) == 13


def test_encode_deterministic():
    b = block(6, seed=9)
    assert fec.encode(b, 1.5) == fec.encode(b, 1.5)


# -- decode ---------------------------------------------------------------------

def test_decode_identity_from_sources():
    b = block(4)
    enc = fec.encode(b, 2.0)
    assert fec.decode(4, 12, dict(enc.symbols[:4])).symbols == b.symbols


def test_decode_all_parity_every_pattern():
    # Oracle: every one of the C(12, 4) = 495 erasure patterns on random blocks.
    for seed in range(5):
        b = block(4, seed=seed)
        enc = fec.encode(b, 2.0)
        table = dict(enc.symbols)
        assert fec.decode(4, 12, {i: table[i] for i in (4, 5, 6, 7)}).symbols == b.symbols
        for sub in itertools.combinations(range(12), 4):
            assert fec.decode(4, 12, {i: table[i] for i in sub}).symbols == b.symbols


def test_decode_not_enough():
    enc = fec.encode(block(4), 2.0)
    with pytest.raises(fec.NotEnoughSymbols) as info:
        fec.decode(4, 12, dict(enc.symbols[5:8]))
    assert (info.value.have, info.value.need) == (3, 4)


def test_decode_malformed():
    enc = fec.encode(block(4), 2.0)
    syms = dict(enc.symbols[:4])
    syms[3] = syms[3][:-1]
    with pytest.raises(fec.MalformedSymbol):
        fec.decode(4, 12, syms)
    with pytest.raises(fec.MalformedSymbol):
        fec.decode(4, 12, [(0, b"a" * 8), (0, b"a" * 8), (1, b"b" * 8), (2, b"c" * 8)])
    with pytest.raises(fec.MalformedSymbol):
        fec.decode(4, 12, {12: b"a" * 8})


def test_decode_keeps_pad_and_ids():
    b = fec.partition(b"hello world", 4, 8, object_id=7)[0]
    enc = fec.encode(b, 1.0)
    got = fec.decode(b.k, enc.n, dict(enc.symbols[b.k:]), object_id=7, pad_len=b.pad_len)
    assert got == b
    assert got.data() == b"hello world"


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.sampled_from([0.5, 1.0, 2.0]), st.randoms(use_true_random=False),
       st.integers(1, 64))
def test_any_k_of_n(k, exp, rnd, size):
    b = fec.SourceBlock(0, 0, k, size, tuple(rnd.randbytes(size) for _ in range(k)))
    enc = fec.encode(b, exp)
    assert tuple(s for _, s in enc.symbols[:k]) == b.symbols
    picks = rnd.sample(range(enc.n), k)
    table = dict(enc.symbols)
    assert fec.decode(k, enc.n, {i: table[i] for i in picks}).symbols == b.symbols
