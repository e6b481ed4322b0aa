"""Receiving side: symbol accumulation, eager block decode and reassembly."""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field

from . import fec
from .compressor import decompress
from .sender import NotLogged
from .wire import LctPacket, ObjectTransmissionInfo


class ReceiverError(RuntimeError):
    pass


class MustSubscribeOne(ValueError):
    pass


class IntegrityFailure(ReceiverError):
    pass


class ReplayFailed(ReceiverError):
    pass


@dataclass(frozen=True)
class Progress:
    object_id: int
    new_symbol: bool


@dataclass(frozen=True)
class ObjectComplete:
    object_id: int
    data: bytes = field(repr=False)


@dataclass
class ReceiverStats:
    seen: int = 0
    duplicate: int = 0
    used: int = 0
    surplus: int = 0  # symbols for blocks or objects already decoded
    ignored: int = 0  # other sessions, unsubscribed channels, replaying objects
    oti_conflicts: int = 0


@dataclass
class ObjectTiming:
    first_packet_us: int | None = None
    complete_us: int | None = None
    decode_s: float = 0.0
    decompress_s: float = 0.0
    via_replay: bool = False


class AlcReceiver:
    def __init__(self, session_id: int | None = None):
        self.session_id = session_id
        self.subscribed: set[int] = set()
        # Object ids this receiver has seen packets for; survives restart.
        self.journal: set[int] = set()
        self._reset()

    def _reset(self):
        self.oti: dict[int, ObjectTransmissionInfo] = {}
        self.stores: dict[tuple[int, int], dict[int, bytes]] = {}
        self.decoded: dict[int, dict[int, fec.SourceBlock]] = {}
        self.completed: dict[int, bytes] = {}
        self.timing: dict[int, ObjectTiming] = {}
        self.replaying: set[int] = set()
        self.stats = ReceiverStats()

    def subscribe(self, channels, network=None, node=None, group_of=None):
        channels = set(channels)
        if not channels:
            raise MustSubscribeOne("subscribe to at least one channel")
        self.subscribed |= channels
        if network is not None:
            for ch in sorted(channels):
                network.join(group_of(ch) if group_of else ch, node)

    def restart(self):
        """Drop all reception state; the journal and subscriptions persist."""
        self._reset()
        self.replaying = set(self.journal)

    def on_packet(self, pkt: LctPacket, now: int = 0):
        self.stats.seen += 1
        oid = pkt.object_id
        if ((self.session_id is not None and pkt.session_id != self.session_id)
                or (self.subscribed and pkt.channel_id not in self.subscribed)
                or oid in self.replaying):
            self.stats.ignored += 1
            return Progress(oid, False)
        if oid in self.completed:
            self.stats.surplus += 1
            return Progress(oid, False)
        oti = self.oti.get(oid)
        if oti is None:
            self.oti[oid] = oti = pkt.oti
            self.decoded[oid] = {}
            self.journal.add(oid)
            self.timing[oid] = ObjectTiming(first_packet_us=now)
        elif oti != pkt.oti:
            self.stats.oti_conflicts += 1
            return Progress(oid, False)
        if oti.block_count == 0:
            return self._finish(oid, now)
        done = self.decoded[oid]
        if pkt.block_no in done:
            self.stats.surplus += 1
            return Progress(oid, False)
        key = (oid, pkt.block_no)
        store = self.stores.setdefault(key, {})
        if pkt.symbol_id in store:
            self.stats.duplicate += 1
            return Progress(oid, False)
        store[pkt.symbol_id] = pkt.payload
        self.stats.used += 1
        if len(store) < pkt.k:
            return Progress(oid, True)

        t0 = time.perf_counter()
        last = pkt.block_no == oti.block_count - 1
        done[pkt.block_no] = fec.decode(pkt.k, pkt.n, store, object_id=oid,
                                        block_no=pkt.block_no,
                                        pad_len=oti.pad_len if last else 0)
        self.timing[oid].decode_s += time.perf_counter() - t0
        del self.stores[key]
        if len(done) < oti.block_count:
            return Progress(oid, True)
        return self._finish(oid, now)

    def _finish(self, oid: int, now: int) -> ObjectComplete:
        oti = self.oti[oid]
        body = fec.reassemble(self.decoded.pop(oid, {}).values())
        timing = self.timing[oid]
        if oti.compressed:
            t0 = time.perf_counter()
            try:
                body = decompress(body, oti.transfer_len)
            except ValueError as exc:
                raise IntegrityFailure(f"object {oid}: {exc}") from exc
            timing.decompress_s = time.perf_counter() - t0
        if len(body) != oti.transfer_len or zlib.crc32(body) != oti.checksum:
            raise IntegrityFailure(f"object {oid}: checksum mismatch after decode")
        timing.complete_us = now
        self.completed[oid] = body
        return ObjectComplete(oid, body)

    def request_replay(self, object_id: int, via) -> bytes:
        """Fetch an object's original bytes point-to-point from its sender.

        ``via`` is the sender (anything with ``handle_unicast_request``) or a
        callable taking the object id.
        """
        fetch = getattr(via, "handle_unicast_request", via)
        try:
            data = fetch(object_id)
        except NotLogged as exc:
            raise ReplayFailed(f"object {object_id} not in sender log") from exc
        return self.accept_replay(object_id, data)

    def accept_replay(self, object_id: int, data: bytes, now: int = 0) -> bytes:
        data = bytes(data)
        if object_id in self.completed and self.completed[object_id] != data:
            raise IntegrityFailure(f"replayed object {object_id} differs from delivery")
        self.replaying.add(object_id)
        self.journal.add(object_id)
        for key in [k for k in self.stores if k[0] == object_id]:
            del self.stores[key]
        self.decoded.pop(object_id, None)
        self.completed[object_id] = data
        timing = self.timing.setdefault(object_id, ObjectTiming())
        timing.complete_us = now
        timing.via_replay = True
        return data

    def retained_symbol_bytes(self, object_id: int | None = None) -> int:
        return sum(len(d) for key, store in self.stores.items()
                   if object_id is None or key[0] == object_id
                   for d in store.values())
