"""Datagram layout for one encoding symbol plus object transmission info.

All integers are big-endian. The fixed part is 66 bytes::

    off  size  field
      0     2  magic            0xA1C7
      2     1  version          1
      3     1  flags            bit0 = parity symbol, other bits zero
      4     4  session_id
      8     1  channel_id
      9     1  symbol_id
     10     1  k
     11     1  n
     12     4  object_id
     16     4  block_no
     20     2  payload_len      oti.symbol_size, or 0 for an empty object
     22     2  reserved         zero
     24     8  send_time_us     sender clock at emission
     32     4  seq              per-channel emission counter
     36     8  transfer_len     original object bytes
     44     8  compressed_len   bytes after compression (== transfer_len if off)
     52     2  symbol_size
     54     1  max_k
     55     1  expansion_num
     56     1  expansion_den    >= 1
     57     1  compressed       0 or 1
     58     4  block_count
     62     4  checksum         CRC-32 of the original object
     66     -  payload

A random datagram passes the magic and version checks with probability
2**-24; the reserved, flag, length and consistency checks reject nearly all
of the rest.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

MAGIC = 0xA1C7
VERSION = 1
FLAG_PARITY = 0x01

_HEADER = struct.Struct(">HBBIBBBBIIHHQI")
_OTI = struct.Struct(">QQHBBBBII")
HEADER_LEN = _HEADER.size
OTI_LEN = _OTI.size
FIXED_LEN = HEADER_LEN + OTI_LEN
assert FIXED_LEN == 66


class WireError(ValueError):
    pass


class EncodeError(WireError):
    pass


class NotOurs(WireError):
    pass


class Truncated(WireError):
    pass


class Malformed(WireError):
    pass


class UnsupportedVersion(WireError):
    pass


def block_count_for(compressed_len: int, symbol_size: int, max_k: int) -> int:
    return math.ceil(math.ceil(compressed_len / symbol_size) / max_k)


@dataclass(frozen=True)
class ObjectTransmissionInfo:
    transfer_len: int
    compressed_len: int
    symbol_size: int
    max_k: int
    expansion_num: int
    expansion_den: int
    block_count: int
    compressed: bool
    checksum: int

    @property
    def expansion(self) -> float:
        return self.expansion_num / self.expansion_den

    @property
    def source_symbols(self) -> int:
        return math.ceil(self.compressed_len / self.symbol_size)

    @property
    def pad_len(self) -> int:
        return self.source_symbols * self.symbol_size - self.compressed_len

    def block_k(self, block_no: int) -> int:
        return min(self.max_k, self.source_symbols - block_no * self.max_k)

    def problems(self) -> list[str]:
        out = []
        if self.expansion_den < 1:
            out.append("expansion_den must be >= 1")
        if self.symbol_size < 1:
            out.append("symbol_size must be >= 1")
        if not 1 <= self.max_k <= 128:
            out.append("max_k must be in 1..128")
        if not self.compressed and self.compressed_len != self.transfer_len:
            out.append("uncompressed object with compressed_len != transfer_len")
        if (self.symbol_size >= 1 and 1 <= self.max_k
                and self.block_count != block_count_for(
                    self.compressed_len, self.symbol_size, self.max_k)):
            out.append("block_count inconsistent with lengths")
        return out


@dataclass(frozen=True)
class LctPacket:
    session_id: int
    channel_id: int
    object_id: int
    block_no: int
    symbol_id: int
    k: int
    n: int
    oti: ObjectTransmissionInfo
    payload: bytes
    send_time_us: int = 0
    seq: int = 0
    magic: int = MAGIC
    version: int = VERSION

    @property
    def flags(self) -> int:
        return FLAG_PARITY if self.is_parity else 0

    @property
    def is_parity(self) -> bool:
        return self.n > 0 and self.symbol_id >= self.k

    @property
    def payload_len(self) -> int:
        return len(self.payload)

    @property
    def wire_len(self) -> int:
        return FIXED_LEN + len(self.payload)


def _check(pkt: LctPacket) -> list[str]:
    out = pkt.oti.problems()
    if pkt.magic != MAGIC:
        out.append("bad magic")
    if pkt.version != VERSION:
        out.append("unsupported version")
    if pkt.oti.block_count == 0:
        # Announcement of an empty object: no symbol, all indices zero.
        if pkt.payload or pkt.k or pkt.n or pkt.symbol_id or pkt.block_no:
            out.append("empty-object packet must carry no symbol")
        return out
    if len(pkt.payload) != pkt.oti.symbol_size:
        out.append("payload_len != symbol_size")
    if not 1 <= pkt.k <= pkt.n:
        out.append("need 1 <= k <= n")
    if pkt.symbol_id >= pkt.n:
        out.append("symbol_id >= n")
    if pkt.block_no >= pkt.oti.block_count:
        out.append("block_no beyond block_count")
    return out


def encode_packet(pkt: LctPacket) -> bytes:
    problems = _check(pkt)
    if problems:
        raise EncodeError("; ".join(problems))
    o = pkt.oti
    try:
        head = _HEADER.pack(pkt.magic, pkt.version, pkt.flags, pkt.session_id,
                            pkt.channel_id, pkt.symbol_id, pkt.k, pkt.n,
                            pkt.object_id, pkt.block_no, len(pkt.payload), 0,
                            pkt.send_time_us, pkt.seq)
        oti = _OTI.pack(o.transfer_len, o.compressed_len, o.symbol_size, o.max_k,
                        o.expansion_num, o.expansion_den, int(o.compressed),
                        o.block_count, o.checksum)
    except struct.error as exc:
        raise EncodeError(str(exc)) from None
    return head + oti + bytes(pkt.payload)


def decode_packet(datagram: bytes) -> LctPacket:
    size = len(datagram)
    if size < 2:
        raise Truncated(f"{size} bytes")
    if datagram[0] != MAGIC >> 8 or datagram[1] != MAGIC & 0xFF:
        raise NotOurs("bad magic")
    if size < 3:
        raise Truncated(f"{size} bytes")
    if datagram[2] != VERSION:
        raise UnsupportedVersion(f"version {datagram[2]}")
    if size < FIXED_LEN:
        raise Truncated(f"{size} bytes, header needs {FIXED_LEN}")
    (_, _, flags, session_id, channel_id, symbol_id, k, n, object_id, block_no,
     payload_len, reserved, send_time_us, seq) = _HEADER.unpack_from(datagram, 0)
    (transfer_len, compressed_len, symbol_size, max_k, exp_num, exp_den, compressed,
     block_count, checksum) = _OTI.unpack_from(datagram, HEADER_LEN)
    if size < FIXED_LEN + payload_len:
        raise Truncated(f"{size} bytes, packet needs {FIXED_LEN + payload_len}")
    if size > FIXED_LEN + payload_len:
        raise Malformed(f"{size - FIXED_LEN - payload_len} trailing bytes")
    if reserved != 0:
        raise Malformed("reserved field not zero")
    if compressed > 1:
        raise Malformed("compressed flag not 0/1")
    if flags & ~FLAG_PARITY:
        raise Malformed("unknown flag bits")
    oti = ObjectTransmissionInfo(transfer_len, compressed_len, symbol_size, max_k,
                                 exp_num, exp_den, block_count, bool(compressed),
                                 checksum)
    pkt = LctPacket(session_id, channel_id, object_id, block_no, symbol_id, k, n,
                    oti, bytes(datagram[FIXED_LEN:]), send_time_us, seq)
    problems = _check(pkt)
    if problems:
        raise Malformed("; ".join(problems))
    if bool(flags & FLAG_PARITY) != pkt.is_parity:
        raise Malformed("parity flag disagrees with symbol_id and k")
    return pkt


def peek_object_id(datagram: bytes) -> int:
    """Object id of a datagram without validating the rest."""
    return int.from_bytes(datagram[12:16], "big")
