"""Sending side: encode pipeline, layered carousel channels and the sender log."""

from __future__ import annotations

import hashlib
import struct
import zlib
from collections import deque
from dataclasses import dataclass, field

from . import fec
from .compressor import CompressionConfig, CompressionStats, compress
from .wire import FIXED_LEN, LctPacket, ObjectTransmissionInfo, block_count_for

US_PER_S = 1_000_000


class SessionClosed(RuntimeError):
    pass


class NotLogged(KeyError):
    pass


@dataclass(frozen=True)
class SessionConfig:
    session_id: int = 1
    channel_count: int = 5
    base_rate: int = 125_000
    layering_factor: float = 2
    expansion: float = 2.0
    symbol_size: int = fec.DEFAULT_SYMBOL_SIZE
    max_k: int = fec.DEFAULT_MAX_K
    staging_buffer_len: int = 65536
    compression: CompressionConfig = CompressionConfig(enabled=False)
    # Full walks of the symbol sequence each channel makes per object.
    carousel_cycles: int = 1
    tick_us: int = 1000

    def __post_init__(self):
        if not 1 <= self.channel_count <= 16:
            raise ValueError("channel_count must be in 1..16")
        if self.layering_factor < 1:
            raise ValueError("layering_factor must be >= 1")
        for name in ("base_rate", "symbol_size", "max_k", "staging_buffer_len",
                     "carousel_cycles", "tick_us"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.symbol_size > 0xFFFF:
            raise ValueError("symbol_size must fit 16 bits")
        if self.max_k > fec.MAX_K:
            raise ValueError(f"max_k must be <= {fec.MAX_K}")
        if fec.total_symbols(self.max_k, self.expansion) > fec.MAX_N:
            raise fec.CodeTooWide("max_k with this expansion exceeds 255 symbols")

    def channel_rate(self, channel: int) -> int:
        """Bytes per second of a channel; geometric in the channel index."""
        return int(round(self.base_rate * self.layering_factor ** channel))

    @property
    def packet_len(self) -> int:
        return FIXED_LEN + self.symbol_size


@dataclass
class StagingStats:
    chunks: int = 0
    peak_bytes: int = 0
    chunk_sizes: list = field(default_factory=list)


@dataclass
class PreparedObject:
    object_id: int
    oti: ObjectTransmissionInfo
    # (block_no, symbol_id, k, n, data) in carousel order, block-major.
    symbols: list
    stats: CompressionStats
    staging: StagingStats

    @property
    def n_total(self) -> int:
        return len(self.symbols)


@dataclass
class ChannelSchedule:
    channel_id: int
    rate: int
    tokens: int = 0  # bytes * 1e6, i.e. rate * microseconds
    cursor: int = 0
    offset: int = 0
    emitted: int = 0  # packets of the active object
    seq: int = 0
    bytes_sent: int = 0
    packets_sent: int = 0


class SenderLog:
    """Originals of every submitted object, kept until evicted."""

    def __init__(self):
        self._entries: dict[int, tuple[bytes, ObjectTransmissionInfo]] = {}

    def write(self, object_id, payload: bytes, oti=None):
        self._entries[object_id] = (bytes(payload), oti)

    def set_oti(self, object_id, oti):
        self._entries[object_id] = (self._entries[object_id][0], oti)

    def get(self, object_id) -> bytes:
        try:
            return self._entries[object_id][0]
        except KeyError:
            raise NotLogged(object_id) from None

    def oti(self, object_id) -> ObjectTransmissionInfo:
        try:
            return self._entries[object_id][1]
        except KeyError:
            raise NotLogged(object_id) from None

    def evict(self, object_id):
        self._entries.pop(object_id, None)

    def __contains__(self, object_id):
        return object_id in self._entries

    def __len__(self):
        return len(self._entries)


class AlcSender:
    def __init__(self, config: SessionConfig = SessionConfig(), start_us: int = 0):
        self.config = config
        self.log = SenderLog()
        self.channels = [ChannelSchedule(c, config.channel_rate(c))
                         for c in range(config.channel_count)]
        self.queue: deque[PreparedObject] = deque()
        self.active: PreparedObject | None = None
        self.closed = False
        self.now = start_us
        self._last_tick = start_us
        self._next_id = 1
        # ("log", t, object_id) and ("emit", t, channel, object, block, symbol)
        self.events: list[tuple] = []
        self.object_start_us: dict[int, int] = {}
        self.object_end_us: dict[int, int] = {}

    # -- pipeline -----------------------------------------------------------

    def submit_object(self, payload) -> int:
        if self.closed:
            raise SessionClosed("session is closed")
        cfg = self.config
        object_id = self._next_id
        self._next_id += 1
        original = bytes(payload)
        # Logged before anything else so no packet can precede the log write.
        self.log.write(object_id, original)
        self.events.append(("log", self.now, object_id))

        if cfg.compression.enabled:
            body, stats = compress(original, cfg.compression)
        else:
            body, stats = original, CompressionStats(len(original), len(original))
        frac = fec.expansion_fraction(cfg.expansion)
        oti = ObjectTransmissionInfo(
            transfer_len=len(original), compressed_len=len(body),
            symbol_size=cfg.symbol_size, max_k=cfg.max_k,
            expansion_num=frac.numerator, expansion_den=frac.denominator,
            block_count=block_count_for(len(body), cfg.symbol_size, cfg.max_k),
            compressed=cfg.compression.enabled,
            checksum=zlib.crc32(original))
        self.log.set_oti(object_id, oti)
        symbols, staging = self._stage_and_encode(object_id, body)
        self.queue.append(PreparedObject(object_id, oti, symbols, stats, staging))
        return object_id

    def _stage_and_encode(self, object_id, body: bytes):
        """Move ``body`` through the staging segment one chunk at a time.

        Chunks are whole symbols and at most ``staging_buffer_len`` bytes. A
        block is encoded and enqueued as soon as its last source symbol has
        been staged, so at most one block of source symbols is pending.
        """
        cfg = self.config
        size = cfg.symbol_size
        chunk_len = max(size, cfg.staging_buffer_len // size * size)
        staging = StagingStats()
        if not body:
            # An empty object is carried by a single symbol-less announcement.
            return [(0, 0, 0, 0, b"")], staging
        symbols = []
        pending: list[bytes] = []
        n_src = -(-len(body) // size)
        pad = n_src * size - len(body)
        block_no = 0
        for start in range(0, len(body), chunk_len):
            segment = body[start:start + chunk_len]
            staging.chunks += 1
            staging.chunk_sizes.append(len(segment))
            staging.peak_bytes = max(staging.peak_bytes, len(segment))
            for off in range(0, len(segment), size):
                sym = segment[off:off + size]
                pending.append(sym + bytes(size - len(sym)))
                done = start + off + size >= len(body)
                if len(pending) == cfg.max_k or done:
                    block = fec.SourceBlock(object_id, block_no, len(pending), size,
                                            tuple(pending), pad if done else 0)
                    enc = fec.encode(block, cfg.expansion)
                    symbols.extend((block_no, sid, enc.k, enc.n, data)
                                   for sid, data in enc.symbols)
                    pending = []
                    block_no += 1
        return symbols, staging

    # -- carousel -------------------------------------------------------------

    def has_work(self) -> bool:
        return self.active is not None or bool(self.queue)

    def _activate_next(self):
        if not self.queue:
            self.active = None
            return
        obj = self.active = self.queue.popleft()
        c = len(self.channels)
        for ch in self.channels:
            ch.offset = ch.channel_id * obj.n_total // c
            ch.cursor = ch.offset
            ch.emitted = 0

    def tick(self, now: int) -> list[tuple[int, LctPacket]]:
        if now < self._last_tick:
            raise ValueError("tick times must be non-decreasing")
        cfg = self.config
        dt = now - self._last_tick
        self._last_tick = now
        self.now = now
        cost = cfg.packet_len * US_PER_S
        for ch in self.channels:
            ch.tokens += ch.rate * dt
            if self.active is None:
                ch.tokens = min(ch.tokens, max(cost, ch.rate * cfg.tick_us))
        if self.active is None:
            self._activate_next()
        out = []
        obj = self.active
        budget = cfg.carousel_cycles * obj.n_total if obj else 0
        for ch in self.channels:
            if obj is None or ch.emitted >= budget:
                # An idle channel may bank at most one tick (or one packet).
                ch.tokens = min(ch.tokens, max(cost, ch.rate * cfg.tick_us))
                continue
            while ch.emitted < budget:
                block_no, sid, k, n, data = obj.symbols[ch.cursor]
                need = (FIXED_LEN + len(data)) * US_PER_S
                if ch.tokens < need:
                    break
                ch.tokens -= need
                pkt = LctPacket(cfg.session_id, ch.channel_id, obj.object_id, block_no,
                                sid, k, n, obj.oti, data, now, ch.seq)
                out.append((ch.channel_id, pkt))
                self.events.append(("emit", now, ch.channel_id, obj.object_id,
                                    block_no, sid))
                self.object_start_us.setdefault(obj.object_id, now)
                ch.cursor = (ch.cursor + 1) % obj.n_total
                ch.emitted += 1
                ch.seq = (ch.seq + 1) & 0xFFFFFFFF
                ch.bytes_sent += FIXED_LEN + len(data)
                ch.packets_sent += 1
        if obj is not None and all(ch.emitted >= budget for ch in self.channels):
            self.object_end_us[obj.object_id] = now
            self.active = None
            self._activate_next()
        return out

    def cycle_us(self, object_id: int) -> int:
        """Time for channel 0 to walk an object's full symbol sequence once."""
        n_total = self.n_total(object_id)
        return -(-n_total * self.config.packet_len * US_PER_S // self.channels[0].rate)

    def n_total(self, object_id: int) -> int:
        oti = self.log.oti(object_id)
        if oti.block_count == 0:
            return 1
        total = 0
        for b in range(oti.block_count):
            total += fec.total_symbols(oti.block_k(b), self.config.expansion)
        return total

    # -- recovery -------------------------------------------------------------

    def handle_unicast_request(self, object_id: int, requester=None) -> bytes:
        return self.log.get(object_id)

    def evict(self, object_id: int):
        self.log.evict(object_id)

    def close(self):
        self.closed = True

    # -- accounting -----------------------------------------------------------

    @property
    def bytes_sent(self) -> int:
        return sum(ch.bytes_sent for ch in self.channels)

    def emission_trace(self) -> list[tuple]:
        return [e[1:] for e in self.events if e[0] == "emit"]

    def emission_digest(self) -> str:
        h = hashlib.sha256()
        for t, ch, obj, block, sym in self.emission_trace():
            h.update(struct.pack(">QBIIB", t, ch, obj, block, sym))
        return h.hexdigest()


EMPTY_DIGEST = hashlib.sha256().hexdigest()


def emission_digest(sender: AlcSender) -> str:
    return sender.emission_digest()
