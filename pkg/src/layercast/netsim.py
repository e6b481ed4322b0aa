"""Deterministic discrete-event datagram network.

Time is integer microseconds. Every link draws its losses from its own
random stream derived from the network seed and the link's endpoints, so a
link's loss realization does not depend on traffic elsewhere.
"""

from __future__ import annotations

import copy
import hashlib
import heapq
import json
import math
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

DEFAULT_MTU = 1472  # 1500-byte Ethernet frame minus IPv4 and UDP headers
_DRAW_BATCH = 4096


class SimError(RuntimeError):
    pass


class RoutingError(SimError):
    pass


class Livelock(SimError):
    pass


@dataclass(frozen=True)
class LinkParams:
    loss_p: float = 0.0
    delay_us: int = 0
    mtu: int = DEFAULT_MTU
    rate: int | None = None  # bytes/s; None is unlimited
    # "fragment": each MTU fragment is lost independently.
    # "datagram": one draw per datagram regardless of size.
    loss_mode: str = "fragment"

    def __post_init__(self):
        if not 0.0 <= self.loss_p <= 1.0:
            raise ValueError("loss_p must be in [0, 1]")
        if self.mtu < 64:
            raise ValueError("mtu must be >= 64")
        if self.delay_us < 0:
            raise ValueError("delay must be >= 0")
        if self.loss_mode not in ("fragment", "datagram"):
            raise ValueError(f"unknown loss mode {self.loss_mode!r}")

    def fragments(self, size: int) -> int:
        return max(1, math.ceil(size / self.mtu))


@dataclass
class LinkStats:
    datagrams_sent: int = 0
    datagrams_delivered: int = 0
    datagrams_lost: int = 0
    fragments_sent: int = 0
    fragments_lost: int = 0
    bytes_offered: int = 0
    bytes_delivered: int = 0


@dataclass
class NodeStats:
    unicast_datagrams_sent: int = 0
    unicast_bytes_sent: int = 0
    multicast_datagrams_sent: int = 0
    multicast_bytes_sent: int = 0
    datagrams_received: int = 0
    bytes_received: int = 0


@dataclass
class SimMetrics:
    links: dict = field(default_factory=dict)
    nodes: dict = field(default_factory=dict)
    elapsed_us: int = 0
    events: int = 0

    def link(self, src, dst) -> LinkStats:
        return self.links.get((src, dst), LinkStats())

    def node(self, name) -> NodeStats:
        return self.nodes.get(name, NodeStats())

    @property
    def network_bytes(self) -> int:
        return sum(s.bytes_offered for s in self.links.values())

    def as_dict(self) -> dict:
        return {
            "links": {f"{a}->{b}": asdict(s) for (a, b), s in sorted(
                self.links.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))},
            "nodes": {str(n): asdict(s) for n, s in sorted(
                self.nodes.items(), key=lambda kv: str(kv[0]))},
            "elapsed_us": self.elapsed_us,
            "events": self.events,
        }

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


class _LossStream:
    def __init__(self, seed: int, src, dst):
        key = zlib.crc32(repr((src, dst)).encode())
        self._gen = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(entropy=seed, spawn_key=(key,))))
        self._buf: list[float] = []
        self._pos = 0

    def draw(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(_DRAW_BATCH).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


class Network:
    """Nodes, multicast groups and links driven by a single event queue.

    Apps attached to nodes receive ``on_datagram(net, src, dest, payload, now)``
    and, on restart, ``on_restart(net, now)``.
    """

    def __init__(self, seed: int = 0, default_link: LinkParams = LinkParams(),
                 event_budget: int = 200_000_000):
        self.seed = seed
        self.default_link = default_link
        self.event_budget = event_budget
        self.now = 0
        self.nodes: dict = {}
        self.groups: dict = {}
        self.links: dict = {}
        self.metrics = SimMetrics()
        self._queue: list = []
        self._seq = 0
        self._streams: dict = {}
        self._busy: dict = {}

    # -- topology -------------------------------------------------------------

    def add_node(self, name, app=None, egress_rate: int | None = None):
        if name in self.groups:
            raise RoutingError(f"{name!r} already names a group")
        self.nodes[name] = {"app": app, "egress_rate": egress_rate}
        self.metrics.nodes.setdefault(name, NodeStats())

    def attach(self, name, app):
        self.nodes[name]["app"] = app

    def add_group(self, group):
        if group in self.nodes:
            raise RoutingError(f"{group!r} already names a node")
        self.groups.setdefault(group, [])

    def join(self, group, node):
        if node not in self.nodes:
            raise RoutingError(f"unknown node {node!r}")
        self.add_group(group)
        members = self.groups[group]
        if node not in members:
            members.append(node)
            members.sort(key=str)

    def leave(self, group, node):
        if group in self.groups and node in self.groups[group]:
            self.groups[group].remove(node)

    def set_link(self, src, dst, params: LinkParams):
        self.links[(src, dst)] = params

    def link_params(self, src, dst) -> LinkParams:
        return self.links.get((src, dst), self.default_link)

    # -- events ---------------------------------------------------------------

    def schedule(self, at: int, fn, *args):
        if at < self.now:
            raise SimError(f"cannot schedule in the past ({at} < {self.now})")
        self._seq += 1
        heapq.heappush(self._queue, (at, self._seq, fn, args))

    def pending(self) -> int:
        return len(self._queue)

    def _step(self):
        at, _, fn, args = heapq.heappop(self._queue)
        self.now = at
        self.metrics.events += 1
        if self.metrics.events > self.event_budget:
            raise Livelock(f"event budget {self.event_budget} exhausted at t={at}us")
        fn(*args)

    def run_until(self, t: int) -> SimMetrics:
        while self._queue and self._queue[0][0] <= t:
            self._step()
        self.now = max(self.now, t)
        self.metrics.elapsed_us = self.now
        return self.snapshot()

    def run_to_completion(self, done=None) -> SimMetrics:
        """Run until the queue drains or ``done()`` turns true."""
        while self._queue:
            if done is not None and done():
                break
            self._step()
        self.metrics.elapsed_us = self.now
        return self.snapshot()

    def snapshot(self) -> SimMetrics:
        return copy.deepcopy(self.metrics)

    # -- traffic --------------------------------------------------------------

    def _stream(self, src, dst) -> _LossStream:
        s = self._streams.get((src, dst))
        if s is None:
            s = self._streams[(src, dst)] = _LossStream(self.seed, src, dst)
        return s

    def _survives(self, src, dst, params: LinkParams, size: int, stats: LinkStats):
        f = params.fragments(size)
        stats.fragments_sent += f
        if params.loss_p <= 0.0:
            return True
        stream = self._stream(src, dst)
        if params.loss_mode == "datagram":
            ok = stream.draw() >= params.loss_p
            if not ok:
                stats.fragments_lost += f
            return ok
        if f == 1:
            if stream.draw() < params.loss_p:
                stats.fragments_lost += 1
                return False
            return True
        lost = 0
        for _ in range(f):
            if stream.draw() < params.loss_p:
                lost += 1
        stats.fragments_lost += lost
        return lost == 0

    def _tx_end(self, key, rate, size, start):
        if rate is None:
            return start
        begin = max(start, self._busy.get(key, 0))
        end = begin + -(-size * 1_000_000 // rate)
        self._busy[key] = end
        return end

    def send_datagram(self, src, dest, payload: bytes, reliable: bool = False,
                      rate: int | None = None) -> int:
        """Send ``payload`` from ``src`` to a node or group.

        ``reliable`` selects the lossless unicast class; ``rate`` then paces
        it. Returns the time the sender's interface finishes transmitting.
        """
        if src not in self.nodes:
            raise RoutingError(f"unknown source node {src!r}")
        size = len(payload)
        node_stats = self.metrics.nodes[src]
        egress = self.nodes[src]["egress_rate"]
        start = self._tx_end(("egress", src), egress, size, self.now)

        if dest in self.nodes:
            members = [dest]
            node_stats.unicast_datagrams_sent += 1
            node_stats.unicast_bytes_sent += size
        elif dest in self.groups:
            members = self.groups[dest]
            node_stats.multicast_datagrams_sent += 1
            node_stats.multicast_bytes_sent += size
        else:
            raise RoutingError(f"unknown destination {dest!r}")

        arrivals: dict[int, list] = {}
        for dst in members:
            if dst == src:
                continue
            params = self.link_params(src, dst)
            stats = self.metrics.links.get((src, dst))
            if stats is None:
                stats = self.metrics.links[(src, dst)] = LinkStats()
            stats.datagrams_sent += 1
            stats.bytes_offered += size
            if reliable:
                ok = True
                stats.fragments_sent += params.fragments(size)
                end = self._tx_end(("reliable", src, dst), rate, size, start)
            else:
                ok = self._survives(src, dst, params, size, stats)
                end = self._tx_end(("link", src, dst), params.rate, size, start)
            if ok:
                stats.datagrams_delivered += 1
                stats.bytes_delivered += size
                arrivals.setdefault(end + params.delay_us, []).append(dst)
            else:
                stats.datagrams_lost += 1
        for at in sorted(arrivals):
            self.schedule(at, self._deliver, src, dest, arrivals[at], payload)
        return start

    def _deliver(self, src, dest, members, payload):
        for dst in members:
            stats = self.metrics.nodes[dst]
            stats.datagrams_received += 1
            stats.bytes_received += len(payload)
            app = self.nodes[dst]["app"]
            if app is not None:
                app.on_datagram(self, src, dest, payload, self.now)

    def restart_node(self, node, at: int):
        if node not in self.nodes:
            raise RoutingError(f"unknown node {node!r}")
        self.schedule(at, self._restart, node)

    def _restart(self, node):
        app = self.nodes[node]["app"]
        if app is not None and hasattr(app, "on_restart"):
            app.on_restart(self, self.now)


def datagram_loss(p: float, fragments: int) -> float:
    """Closed-form datagram loss when any lost fragment kills the datagram."""
    return 1.0 - (1.0 - p) ** fragments
