"""Binomial-tree unicast broadcast and the bandwidth cost models."""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import fec
from .compressor import CompressionStats
from .wire import FIXED_LEN


class EmptyWorld(ValueError):
    pass


@dataclass(frozen=True)
class BroadcastPlan:
    N: int
    root: int
    rounds: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def messages(self) -> list[tuple[int, int]]:
        return [pair for rnd in self.rounds for pair in rnd]

    def children(self, node: int) -> list[int]:
        """Receivers of ``node`` in the order it sends to them."""
        return [dst for src, dst in self.messages if src == node]

    def parent(self, node: int) -> int | None:
        for src, dst in self.messages:
            if dst == node:
                return src
        return None


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


def binomial_tree_plan(N: int, root: int = 0) -> BroadcastPlan:
    """Binomial broadcast: distances halve each round, as MPICH does.

    With ``R = ceil(log2 N)`` rounds, in round ``i`` every rank that already
    holds the data sends to the rank ``2**(R-1-i)`` above it (relative to
    the root), when that rank exists.
    """
    if N < 1:
        raise EmptyWorld("broadcast needs at least one node")
    if not 0 <= root < N:
        raise ValueError("root outside 0..N-1")
    n_rounds = ceil_log2(N)
    have = [0]
    rounds = []
    for i in range(n_rounds):
        dist = 1 << (n_rounds - 1 - i)
        pairs = []
        for rel in sorted(have):
            if rel + dist < N:
                pairs.append(((rel + root) % N, (rel + dist + root) % N))
        have.extend(rel + dist for rel in list(have) if rel + dist < N)
        rounds.append(tuple(pairs))
    return BroadcastPlan(N, root, tuple(rounds))


@dataclass(frozen=True)
class CostModel:
    N: int
    m: int
    C: int = 5
    expansion: float = 2.0
    ratio: float = 0.0  # compression ratio; 0 means compression off
    symbol_size: int = fec.DEFAULT_SYMBOL_SIZE
    max_k: int = fec.DEFAULT_MAX_K
    header: int = FIXED_LEN

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if self.ratio > 1:
            raise ValueError("compression ratio must be <= 1")


@dataclass(frozen=True)
class UnicastCost:
    literal: int  # N * m
    exact: int  # (N - 1) * m, one copy per tree edge


@dataclass(frozen=True)
class MulticastCost:
    literal: float  # m + 2m * C, the quoted formula as written
    predicted: int  # C * n_total * (symbol_size + header)
    payload_per_walk: int  # n_total * symbol_size
    n_total: int
    compressed_len: int


def unicast_cost(model: CostModel) -> UnicastCost:
    return UnicastCost(model.N * model.m, max(model.N - 1, 0) * model.m)


def encoded_symbol_count(length: int, expansion, symbol_size: int, max_k: int) -> int:
    """Symbols the sender carries for an object of ``length`` bytes after compression."""
    n_src = math.ceil(length / symbol_size)
    full, rest = divmod(n_src, max_k)
    total = full * fec.total_symbols(max_k, expansion)
    if rest:
        total += fec.total_symbols(rest, expansion)
    return total


def multicast_cost(model: CostModel, compressed_len: int | None = None) -> MulticastCost:
    """Bandwidth of one carousel cycle on every channel.

    ``compressed_len`` overrides the estimate ``round(m * (1 - ratio))`` when
    the real compressed size is known, which makes the prediction exact.
    """
    if compressed_len is None:
        compressed_len = int(round(model.m * (1 - model.ratio)))
    n_total = encoded_symbol_count(compressed_len, model.expansion,
                                   model.symbol_size, model.max_k)
    return MulticastCost(
        literal=model.m + 2 * model.m * model.C,
        predicted=model.C * n_total * (model.symbol_size + model.header),
        payload_per_walk=n_total * model.symbol_size,
        n_total=n_total,
        compressed_len=compressed_len)


# -- simulated comparison ------------------------------------------------------

class _TreeNode:
    def __init__(self, rank, plan, reached, delivered):
        self.rank = rank
        self.plan = plan
        self.reached = reached
        self.delivered = delivered

    def start(self, net, payload):
        self.reached[self.rank] = net.now
        for child in self.plan.children(self.rank):
            net.send_datagram(self.rank, child, payload, reliable=True)

    def on_datagram(self, net, src, dest, payload, now):
        self.delivered[self.rank] = payload
        self.start(net, payload)


@dataclass(frozen=True)
class TreeRun:
    completion_us: dict  # receiver rank -> arrival time
    sender_bytes: int
    network_bytes: int
    rounds: int
    delivered: dict


def simulate_tree(n_receivers: int, payload: bytes, rate: int, delay_us: int = 0,
                  seed: int = 0) -> TreeRun:
    """Binomial broadcast from rank 0 to ``n_receivers`` ranks over reliable links.

    Each rank transmits one message at a time at ``rate`` bytes/s, like a
    blocking point-to-point send.
    """
    from .netsim import LinkParams, Network

    world = n_receivers + 1
    plan = binomial_tree_plan(world, 0)
    net = Network(seed=seed, default_link=LinkParams(delay_us=delay_us))
    reached: dict[int, int] = {}
    delivered: dict[int, bytes] = {}
    for rank in range(world):
        net.add_node(rank, _TreeNode(rank, plan, reached, delivered), egress_rate=rate)
    net.schedule(0, net.nodes[0]["app"].start, net, payload)
    metrics = net.run_to_completion()
    reached.pop(0, None)
    return TreeRun(reached, metrics.node(0).unicast_bytes_sent, metrics.network_bytes,
                   len(plan.rounds), delivered)


CSV_FIELDS = ["scenario_id", "strategy", "N", "m", "C", "loss_p", "compression_level",
              "sender_bytes", "network_bytes", "mean_completion_us", "throughput_model"]


@dataclass
class ComparisonResult:
    rows: list  # dicts keyed by CSV_FIELDS plus extras
    codec_wall_s: dict  # strategy -> host seconds spent in compress/encode/decode


def run_comparison(scenario_id: str, payload: bytes, n_receivers: int, config,
                   loss_p: float = 0.0, seed: int = 0, strategies=("tree", "multicast"),
                   delay_us: int = 0, mtu: int | None = None, loss_mode: str = "fragment",
                   unicast_rate: int = 12_500_000, subscriptions=None) -> ComparisonResult:
    """Run both broadcast strategies for one payload and receiver count.

    ``throughput_model`` is original bytes over mean completion sim-time in
    bytes/s; host codec time is reported apart because it is not
    reproducible.
    """
    import time as _time

    from .netsim import DEFAULT_MTU, LinkParams
    from .session import MulticastSession

    m = len(payload)
    level = config.compression.level if config.compression.enabled else -1
    rows, wall = [], {}
    base = {"scenario_id": scenario_id, "N": n_receivers, "m": m,
            "C": config.channel_count, "loss_p": loss_p, "compression_level": level}
    tree_bytes = None
    if "tree" in strategies:
        run = simulate_tree(n_receivers, payload, unicast_rate, delay_us, seed)
        times = list(run.completion_us.values())
        mean = sum(times) / len(times)
        tree_bytes = run.network_bytes
        rows.append({**base, "strategy": "tree", "compression_level": -1,
                     "sender_bytes": run.sender_bytes, "network_bytes": run.network_bytes,
                     "mean_completion_us": mean,
                     "throughput_model": m / (mean / 1e6) if mean else 0.0,
                     "max_completion_us": max(times), "tree_rounds": run.rounds,
                     "delivered_ok": all(d == payload for d in run.delivered.values())
                     and len(run.delivered) == n_receivers,
                     "original_len": m, "compressed_len": m, "ratio": 0.0,
                     "n_total": 0})
        wall["tree"] = 0.0
    if "multicast" in strategies:
        link = LinkParams(loss_p=loss_p, delay_us=delay_us, mtu=mtu or DEFAULT_MTU,
                          loss_mode=loss_mode)
        session = MulticastSession(config, n_receivers, seed=seed, link=link,
                                   subscriptions=subscriptions)
        t0 = _time.perf_counter()
        oid = session.submit(payload)
        encode_s = _time.perf_counter() - t0
        metrics = session.run()
        obj = session.sender.log.oti(oid)
        times = [session.transfer_us(i, oid) for i in range(n_receivers)]
        ok = all(t is not None for t in times) and all(
            r.delivered.get(oid) == payload for r in session.receivers)
        done = [t for t in times if t is not None]
        mean = sum(done) / len(done) if done else 0.0
        n_total = session.sender.n_total(oid)
        sender_bytes = metrics.node("sender").multicast_bytes_sent
        stats = CompressionStats(m, obj.compressed_len)
        rows.append({**base, "strategy": "multicast", "sender_bytes": sender_bytes,
                     "network_bytes": metrics.network_bytes, "mean_completion_us": mean,
                     "throughput_model": m / (mean / 1e6) if mean else 0.0,
                     "max_completion_us": max(done) if done else 0, "tree_rounds": 0,
                     "delivered_ok": ok, "original_len": m,
                     "compressed_len": stats.compressed_len, "ratio": stats.ratio,
                     "n_total": n_total})
        decode_s = sum(t.decode_s + t.decompress_s for r in session.receivers
                       for t in r.receiver.timing.values())
        wall["multicast"] = encode_s + decode_s / max(n_receivers, 1)
    if tree_bytes is not None:
        mc = [r for r in rows if r["strategy"] == "multicast"]
        for r in rows:
            r["preferred"] = ("unicast" if mc and mc[0]["sender_bytes"] > tree_bytes
                              else "multicast" if mc else "")
    return ComparisonResult(rows, wall)

