"""Whole-object compression stage (zlib-wrapped DEFLATE)."""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass


class CompressionError(ValueError):
    pass


class DecodeError(CompressionError):
    pass


class LengthMismatch(CompressionError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"expected {expected} bytes, stream holds {actual}")
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class CompressionConfig:
    enabled: bool = True
    level: int = 9

    def __post_init__(self):
        if not 0 <= self.level <= 9:
            raise ValueError(f"compression level {self.level} outside 0..9")


@dataclass(frozen=True)
class CompressionStats:
    original_len: int
    compressed_len: int
    wall_time: float = 0.0

    @property
    def ratio(self) -> float:
        """Fraction of bytes saved; negative when the stream outgrew its input."""
        if self.original_len == 0:
            return 0.0
        return 1.0 - self.compressed_len / self.original_len


def compress(payload: bytes, config: CompressionConfig = CompressionConfig()
             ) -> tuple[bytes, CompressionStats]:
    t0 = time.perf_counter()
    out = zlib.compress(bytes(payload), config.level)
    return out, CompressionStats(len(payload), len(out), time.perf_counter() - t0)


def decompress(stream: bytes, expected_len: int) -> bytes:
    d = zlib.decompressobj()
    try:
        # One byte past the expected size is enough to detect an overlong stream.
        out = d.decompress(stream, expected_len + 1)
    except zlib.error as exc:
        raise DecodeError(str(exc)) from None
    if len(out) > expected_len:
        raise LengthMismatch(expected_len, len(out))
    if not d.eof:
        raise DecodeError("truncated stream")
    if d.unused_data:
        raise DecodeError(f"{len(d.unused_data)} trailing bytes after stream end")
    if len(out) != expected_len:
        raise LengthMismatch(expected_len, len(out))
    return out
