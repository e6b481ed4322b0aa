import random
import shutil
import struct
import subprocess
import zlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layercast.compressor import (CompressionConfig, DecodeError, LengthMismatch,
                                  compress, decompress)

GZIP = shutil.which("gzip")


def adler32(data: bytes) -> int:
    a, b = 1, 0
    for byte in data:
        a = (a + byte) % 65521
        b = (b + a) % 65521
    return b << 16 | a


def gunzip_raw_deflate(stream: bytes, original: bytes) -> bytes:
    """Inflate the DEFLATE body with the system gzip, a separate implementation."""
    body = stream[2:-4]
    container = (b"\x1f\x8b\x08\x00" + bytes(4) + b"\x00\xff" + body
                 + struct.pack("<II", zlib.crc32(original), len(original) & 0xFFFFFFFF))
    out = subprocess.run([GZIP, "-dc"], input=container, capture_output=True, check=True)
    return out.stdout


def corpus():
    rng = random.Random(11)
    return [b"", b"a", b"abc" * 1000, rng.randbytes(5000),
            b"%%MatrixMarket matrix coordinate real general\n" + b"1 1 2.5\n" * 400,
            bytes(range(256)) * 64]


@pytest.mark.parametrize("level", [0, 1, 6, 9])
def test_wrapper_header_and_checksum(level):
    for x in corpus():
        out, stats = compress(x, CompressionConfig(True, level))
        cmf, flg = out[0], out[1]
        assert cmf == 0x78  # deflate, 32K window
        assert (cmf << 8 | flg) % 31 == 0
        assert not flg & 0x20  # no preset dictionary
        assert struct.unpack(">I", out[-4:])[0] == adler32(x)
        assert stats.original_len == len(x) and stats.compressed_len == len(out)


@pytest.mark.skipif(GZIP is None, reason="gzip binary not available")
def test_independent_inflater_agrees():
    for x in corpus():
        out, _ = compress(x)
        assert gunzip_raw_deflate(out, x) == x


def test_empty_roundtrip():
    out, stats = compress(b"")
    assert decompress(out, 0) == b""
    assert stats.ratio == 0.0


def test_zero_fill_fifty_mib():
    out, stats = compress(bytes(50 << 20), CompressionConfig(True, 9))
    assert len(out) <= 100 * 1024
    assert decompress(out, 50 << 20) == bytes(50 << 20)


def test_random_is_incompressible():
    data = random.Random(3).randbytes(1 << 20)
    out, stats = compress(data, CompressionConfig(True, 9))
    assert stats.ratio <= 0.01
    assert stats.ratio < 0  # stored blocks add a little
    assert decompress(out, len(data)) == data


def test_truncated_stream():
    out, _ = compress(b"hello world" * 100)
    for cut in (0, 1, 5, len(out) - 1):
        with pytest.raises(DecodeError):
            decompress(out[:cut], 1100)


def test_length_mismatch():
    out, _ = compress(b"x" * 100)
    with pytest.raises(LengthMismatch):
        decompress(out, 99)
    with pytest.raises(LengthMismatch):
        decompress(out, 101)


def test_trailing_garbage():
    out, _ = compress(b"x" * 100)
    with pytest.raises(DecodeError):
        decompress(out + b"\0", 100)


def test_bit_flips_never_corrupt_silently():
    rng = random.Random(99)
    data = b"".join(f"{i} {i * 7 % 13} {rng.random():.6e}\n".encode() for i in range(500))
    out, _ = compress(data)
    for _ in range(3000):
        pos = rng.randrange(len(out))
        bad = bytearray(out)
        bad[pos] ^= 1 << rng.randrange(8)
        try:
            got = decompress(bytes(bad), len(data))
        except (DecodeError, LengthMismatch):
            continue
        assert got == data


def test_level_bounds():
    with pytest.raises(ValueError):
        CompressionConfig(True, 10)


@settings(max_examples=300)
@given(st.binary(max_size=4096), st.integers(0, 9))
def test_roundtrip_property(x, level):
    out, _ = compress(x, CompressionConfig(True, level))
    assert decompress(out, len(x)) == x
