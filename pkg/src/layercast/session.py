"""Wiring of a sender and its receivers onto a simulated network."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .netsim import LinkParams, Network
from .receiver import AlcReceiver, ReplayFailed
from .sender import AlcSender, NotLogged, SessionConfig
from .wire import WireError, decode_packet, encode_packet, peek_object_id

SENDER = "sender"

# Replay frames ride the reliable unicast class, never a multicast group.
_REQ = struct.Struct(">2sI")
_RESP = struct.Struct(">2sIB")
REPLAY_OK, REPLAY_NOT_LOGGED = 0, 1


def channel_group(session_id: int, channel: int) -> str:
    return f"s{session_id}/c{channel}"


class SenderApp:
    def __init__(self, sender: AlcSender, node=SENDER):
        self.sender = sender
        self.node = node
        self.cfg = sender.config
        self._ticking = False
        self.replays_served = 0

    def submit(self, net: Network, payload) -> int:
        oid = self.sender.submit_object(payload)
        if not self._ticking:
            self._ticking = True
            net.schedule(net.now, self._tick, net)
        return oid

    def _tick(self, net: Network):
        sid = self.cfg.session_id
        for channel, pkt in self.sender.tick(net.now):
            net.send_datagram(self.node, channel_group(sid, channel), encode_packet(pkt))
        if self.sender.has_work():
            net.schedule(net.now + self.cfg.tick_us, self._tick, net)
        else:
            self._ticking = False

    def on_datagram(self, net, src, dest, payload, now):
        if payload[:2] != b"RQ" or len(payload) != _REQ.size:
            return
        _, oid = _REQ.unpack(payload)
        try:
            data = self.sender.handle_unicast_request(oid, src)
            frame = _RESP.pack(b"RP", oid, REPLAY_OK) + data
        except NotLogged:
            frame = _RESP.pack(b"RP", oid, REPLAY_NOT_LOGGED)
        self.replays_served += 1
        net.send_datagram(self.node, src, frame, reliable=True,
                          rate=self.sender.channels[0].rate)


@dataclass
class ReceiverApp:
    receiver: AlcReceiver
    node: object
    sender_node: object = SENDER
    completions: dict = field(default_factory=dict)
    restarts: int = 0
    malformed: int = 0

    def on_datagram(self, net, src, dest, payload, now):
        rx = self.receiver
        if payload[:2] == b"RP":
            _, oid, status = _RESP.unpack_from(payload)
            if status != REPLAY_OK:
                raise ReplayFailed(f"object {oid} not in sender log")
            rx.accept_replay(oid, payload[_RESP.size:], now)
            self.completions[oid] = now
            return
        oid = peek_object_id(payload)
        # Cheap drop for objects already held, before full parsing.
        if oid in rx.completed or oid in rx.replaying:
            rx.stats.seen += 1
            rx.stats.surplus += 1
            return
        try:
            pkt = decode_packet(payload)
        except WireError:
            self.malformed += 1
            return
        result = rx.on_packet(pkt, now)
        if getattr(result, "data", None) is not None:
            self.completions[oid] = now

    def on_restart(self, net, now):
        self.restarts += 1
        self.receiver.restart()
        for oid in sorted(self.receiver.journal):
            net.send_datagram(self.node, self.sender_node, _REQ.pack(b"RQ", oid),
                              reliable=True)

    @property
    def delivered(self) -> dict:
        return self.receiver.completed


class MulticastSession:
    """One sender, ``n_receivers`` receivers, one group per channel."""

    def __init__(self, config: SessionConfig = SessionConfig(), n_receivers: int = 1,
                 seed: int = 0, link: LinkParams = LinkParams(), subscriptions=None):
        self.config = config
        self.net = Network(seed=seed, default_link=link)
        self.sender = AlcSender(config)
        self.sender_app = SenderApp(self.sender)
        self.net.add_node(SENDER, self.sender_app)
        sid = config.session_id
        for c in range(config.channel_count):
            self.net.add_group(channel_group(sid, c))
        self.receivers: list[ReceiverApp] = []
        for i in range(n_receivers):
            node = f"r{i:04d}"
            app = ReceiverApp(AlcReceiver(sid), node)
            self.net.add_node(node, app)
            chans = (subscriptions(i) if callable(subscriptions)
                     else subscriptions if subscriptions is not None
                     else range(config.channel_count))
            app.receiver.subscribe(chans, self.net, node,
                                   lambda c: channel_group(sid, c))
            self.receivers.append(app)

    def submit(self, payload) -> int:
        return self.sender_app.submit(self.net, payload)

    def run(self):
        return self.net.run_to_completion()

    def restart(self, index: int, at: int):
        self.net.restart_node(self.receivers[index].node, at)

    def transfer_us(self, receiver: int, object_id: int) -> int | None:
        """Time from the object's first emission to its delivery at a receiver."""
        done = self.receivers[receiver].completions.get(object_id)
        start = self.sender.object_start_us.get(object_id)
        if done is None or start is None:
            return None
        return done - start


def layered_subscription(channel_count: int):
    """Receiver ``i`` joins channels ``0..i mod C``, the cumulative layer scheme."""
    return lambda i: range(i % channel_count + 1)
