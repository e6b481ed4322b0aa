"""Systematic erasure code over GF(256).

An object is cut into source blocks of at most ``max_k`` symbols. Each block
is expanded to ``n`` symbols: the first ``k`` are the source symbols
unchanged, the remaining ``n - k`` are parity rows of a Cauchy matrix. Every
square submatrix of a Cauchy matrix is invertible, so any ``k`` of the ``n``
symbols recover the block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import gf256

MAX_N = 255
MAX_K = 128
DEFAULT_MAX_K = 64
DEFAULT_SYMBOL_SIZE = 1024


class FecError(ValueError):
    pass


class CodeTooWide(FecError):
    pass


class MalformedSymbol(FecError):
    pass


class NotEnoughSymbols(FecError):
    def __init__(self, have: int, need: int):
        super().__init__(f"have {have} symbols, need {need}")
        self.have = have
        self.need = need


@dataclass(frozen=True)
class SourceBlock:
    object_id: int
    block_no: int
    k: int
    symbol_size: int
    symbols: tuple[bytes, ...]
    pad_len: int = 0

    def __post_init__(self):
        if not 1 <= self.k <= MAX_K:
            raise FecError(f"k={self.k} outside 1..{MAX_K}")
        if len(self.symbols) != self.k:
            raise FecError("symbol count does not match k")
        if set(map(len, self.symbols)) - {self.symbol_size}:
            raise MalformedSymbol("source symbols must all be symbol_size bytes")
        if not 0 <= self.pad_len < self.symbol_size:
            raise FecError("pad_len must be in [0, symbol_size)")

    def data(self) -> bytes:
        """Block contents with trailing pad removed."""
        raw = b"".join(self.symbols)
        return raw[: len(raw) - self.pad_len]


@dataclass(frozen=True)
class EncodedBlock:
    block_no: int
    k: int
    n: int
    symbols: tuple[tuple[int, bytes], ...] = field(repr=False)

    @property
    def symbol_size(self) -> int:
        return len(self.symbols[0][1]) if self.symbols else 0


def expansion_fraction(expansion) -> Fraction:
    """Expansion as an exact ratio with a denominator that fits one byte."""
    frac = Fraction(expansion).limit_denominator(255)
    if frac < 0:
        raise FecError("expansion must be non-negative")
    return frac


def total_symbols(k: int, expansion) -> int:
    frac = expansion_fraction(expansion)
    return -(-k * (frac.denominator + frac.numerator) // frac.denominator)


def partition(payload: bytes, symbol_size: int = DEFAULT_SYMBOL_SIZE,
              max_k: int = DEFAULT_MAX_K, object_id: int = 0) -> list[SourceBlock]:
    if symbol_size < 1:
        raise FecError("symbol_size must be >= 1")
    if not 1 <= max_k <= MAX_K:
        raise FecError(f"max_k must be in 1..{MAX_K}")
    payload = bytes(payload)
    if not payload:
        return []
    n_sym = math.ceil(len(payload) / symbol_size)
    pad = n_sym * symbol_size - len(payload)
    padded = payload + bytes(pad)
    syms = [padded[i * symbol_size:(i + 1) * symbol_size] for i in range(n_sym)]
    blocks = []
    for b, start in enumerate(range(0, n_sym, max_k)):
        chunk = tuple(syms[start:start + max_k])
        last = start + max_k >= n_sym
        blocks.append(SourceBlock(object_id, b, len(chunk), symbol_size, chunk,
                                  pad if last else 0))
    return blocks


@lru_cache(maxsize=None)
def cauchy_rows(k: int, n: int) -> np.ndarray:
    """Parity coefficients, shape (n - k, k); row i encodes symbol id k + i."""
    rows = np.zeros((n - k, k), dtype=np.uint8)
    for i in range(n - k):
        x = k + i
        for j in range(k):
            rows[i, j] = gf256.inv(x ^ j)
    rows.setflags(write=False)
    return rows


def generator_matrix(k: int, n: int) -> np.ndarray:
    """Full (n, k) systematic generator: identity on top of the Cauchy rows."""
    return np.concatenate([np.eye(k, dtype=np.uint8), cauchy_rows(k, n)])


def encode(block: SourceBlock, expansion=2.0) -> EncodedBlock:
    k = block.k
    n = total_symbols(k, expansion)
    if n > MAX_N:
        raise CodeTooWide(f"k={k} with expansion {expansion} needs n={n} > {MAX_N}")
    out = [(i, s) for i, s in enumerate(block.symbols)]
    if n > k:
        src = np.frombuffer(b"".join(block.symbols), dtype=np.uint8).reshape(k, -1)
        parity = gf256.combine(cauchy_rows(k, n), src)
        out.extend((k + i, parity[i].tobytes()) for i in range(n - k))
    return EncodedBlock(block.block_no, k, n, tuple(out))


@lru_cache(maxsize=16384)
def recovery_matrix(k: int, n: int, chosen: tuple) -> np.ndarray:
    """Rows mapping the ``k`` chosen symbols onto the missing source symbols.

    ``chosen`` lists the received source ids followed by the parity ids used.
    With ``M`` the missing source ids, ``P`` the parity ids and ``K`` the known
    source ids, the missing symbols are ``A^-1 (p + B s_K)`` where ``A`` and
    ``B`` are the Cauchy rows of ``P`` restricted to ``M`` and ``K``.
    """
    parity = [c - k for c in chosen if c >= k]
    known = [c for c in chosen if c < k]
    missing = [j for j in range(k) if j not in set(known)]
    rows = cauchy_rows(k, n)[parity]
    a_inv = gf256.invert_matrix(rows[:, missing])
    out = np.concatenate([gf256.combine(a_inv, rows[:, known]), a_inv], axis=1)
    out.setflags(write=False)
    return out


def decode(k: int, n: int, received, *, object_id: int = 0, block_no: int = 0,
           pad_len: int = 0) -> SourceBlock:
    """Recover a source block from any ``k`` distinct symbols.

    ``received`` is a mapping ``symbol_id -> data`` or an iterable of
    ``(symbol_id, data)`` pairs. Surplus symbols beyond ``k`` are ignored;
    source symbols are preferred, then the lowest parity ids.
    """
    if not 1 <= k <= n <= MAX_N:
        raise FecError(f"invalid code parameters k={k} n={n}")
    items = getattr(received, "items", None)
    pairs = items() if items is not None else received
    got: dict[int, bytes] = {}
    size = None
    for sid, data in pairs:
        if not 0 <= sid < n:
            raise MalformedSymbol(f"symbol id {sid} outside 0..{n - 1}")
        if sid in got:
            raise MalformedSymbol(f"duplicate symbol id {sid}")
        if size is None:
            size = len(data)
        elif len(data) != size:
            raise MalformedSymbol("inconsistent symbol lengths")
        got[sid] = data
    if len(got) < k:
        raise NotEnoughSymbols(len(got), k)

    known = [j for j in range(k) if j in got]
    if len(known) < k:
        parity = sorted(p for p in got if p >= k)[: k - len(known)]
        chosen = tuple(known + parity)
        stacked = np.frombuffer(b"".join([got[c] for c in chosen]), dtype=np.uint8)
        solved = gf256.combine(recovery_matrix(k, n, chosen), stacked.reshape(k, size))
        row = 0
        for j in range(k):
            if j not in got:
                got[j] = solved[row].tobytes()
                row += 1
    return SourceBlock(object_id, block_no, k, size,
                       tuple([bytes(got[j]) for j in range(k)]), pad_len)


def reassemble(blocks: Iterable[SourceBlock]) -> bytes:
    return b"".join(b.data() for b in sorted(blocks, key=lambda b: b.block_no))
