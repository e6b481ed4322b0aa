"""Experiment harness: scenario files, sweeps, CSV output and gnuplot scripts.

A scenario file is flat ``key = value`` text; ``#`` starts a comment. List
values are comma separated and swept as a cartesian product::

    name = loss_sweep
    seed = 7
    nodes = 32
    loss = 0.01, 0.04, 0.07, 0.10
    payload = fixtures
    compress_level = 9
    strategy = multicast
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .bcast import CSV_FIELDS, run_comparison
from .compressor import CompressionConfig
from .mmio import fixture_paths, read_matrix_market
from .netsim import DEFAULT_MTU, Livelock
from .sender import SessionConfig
from .session import layered_subscription

EXTRA_FIELDS = ["rep", "seed", "payload", "original_len", "compressed_len", "ratio",
                "n_total", "tree_rounds", "max_completion_us", "delivered_ok", "preferred"]
ALL_FIELDS = CSV_FIELDS + EXTRA_FIELDS


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    name: str = "scenario"
    seed: int = 1
    nodes: list = field(default_factory=lambda: [8])
    loss: list = field(default_factory=lambda: [0.0])
    mtu: int = DEFAULT_MTU
    delay_us: int = 100
    loss_mode: str = "fragment"
    channels: int = 5
    base_rate: int = 125_000
    layering_factor: float = 2.0
    expansion: float = 2.0
    symbol_size: int = 1024
    max_k: int = 64
    staging_buffer_len: int = 65536
    carousel_cycles: int = 1
    compress_level: int | None = 9  # None turns compression off
    payload: list = field(default_factory=lambda: ["random:65536"])
    strategy: str = "both"
    repetitions: int = 1
    subscription: str = "all"  # all | layered | base
    unicast_rate: int = 12_500_000

    def __post_init__(self):
        if self.repetitions < 1:
            raise ScenarioError("repetitions must be >= 1")
        if any(n < 1 for n in self.nodes):
            raise ScenarioError("node counts must be >= 1")
        if self.strategy not in ("tree", "multicast", "both"):
            raise ScenarioError(f"unknown strategy {self.strategy!r}")
        if self.subscription not in ("all", "layered", "base"):
            raise ScenarioError(f"unknown subscription {self.subscription!r}")

    def session_config(self) -> SessionConfig:
        comp = (CompressionConfig(False) if self.compress_level is None
                else CompressionConfig(True, self.compress_level))
        return SessionConfig(channel_count=self.channels, base_rate=self.base_rate,
                             layering_factor=self.layering_factor,
                             expansion=self.expansion, symbol_size=self.symbol_size,
                             max_k=self.max_k, staging_buffer_len=self.staging_buffer_len,
                             compression=comp, carousel_cycles=self.carousel_cycles)

    def subscriptions(self):
        if self.subscription == "layered":
            return layered_subscription(self.channels)
        if self.subscription == "base":
            return lambda i: [0]
        return None

    @property
    def strategies(self) -> tuple:
        return ("tree", "multicast") if self.strategy == "both" else (self.strategy,)


_LIST_KEYS = {"nodes": int, "loss": float, "payload": str}
# CLI flag spellings that differ from field names.
_ALIASES = {"compress-level": "compress_level", "out-dir": "out_dir"}


def _convert(key: str, value: str):
    kinds = {f.name: f.type for f in fields(Scenario)}
    if key not in kinds:
        raise ScenarioError(f"unknown scenario key {key!r}")
    value = value.strip()
    if key in _LIST_KEYS:
        conv = _LIST_KEYS[key]
        items = [v.strip() for v in value.split(",") if v.strip()]
        try:
            return [conv(v) for v in items]
        except ValueError:
            raise ScenarioError(f"bad value for {key}: {value!r}") from None
    if key == "compress_level":
        return None if value.lower() in ("off", "none", "-1") else int(value)
    kind = kinds[key]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
    except ValueError:
        raise ScenarioError(f"bad value for {key}: {value!r}") from None
    return value


def parse_scenario(text: str, overrides: dict | None = None) -> Scenario:
    values = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {no}: expected key = value")
        key, value = line.split("=", 1)
        key = _ALIASES.get(key.strip(), key.strip())
        values[key] = _convert(key, value)
    for key, value in (overrides or {}).items():
        values[key] = _convert(key, value) if isinstance(value, str) else value
    return Scenario(**values)


def load_scenario(path, overrides: dict | None = None) -> Scenario:
    return parse_scenario(Path(path).read_text(), overrides)


# -- payloads -----------------------------------------------------------------

def synthetic_matrix_text(size: int, seed: int) -> bytes:
    """Coordinate Matrix Market text of about ``size`` bytes with random entries."""
    rng = np.random.default_rng(seed)
    n = max(2, int((size / 28) ** 0.5) * 4)
    line_len = 28  # "%6d%6d  % .6e\n" is fixed width for |v| < 10 and n < 10**6
    count = max(1, -(-size // line_len))
    ij = rng.integers(1, n + 1, size=(count, 2))
    vals = rng.uniform(-10, 10, size=count)
    body = "".join(f"{i:6d}{j:6d}  {v: .6e}\n" for (i, j), v in zip(ij.tolist(),
                                                                  vals.tolist()))
    head = f"%%MatrixMarket matrix coordinate real general\n{n} {n} {count}\n"
    return (head + body).encode()


def resolve_payloads(spec: list, seed: int) -> list[tuple[str, bytes]]:
    """Expand payload items into ``(label, bytes)`` pairs.

    Items: ``zero:N``, ``random:N``, ``mtx:N`` (synthetic matrix text),
    ``file:PATH`` (a Matrix Market file) and ``fixtures`` (every bundled file).
    """
    out = []
    for item in spec:
        kind, _, arg = item.partition(":")
        if kind == "fixtures":
            for p in fixture_paths():
                out.append((p.stem, read_matrix_market(p).payload))
        elif kind == "file":
            out.append((Path(arg).stem, read_matrix_market(arg).payload))
        elif kind in ("zero", "random", "mtx"):
            try:
                size = int(arg)
            except ValueError:
                raise ScenarioError(f"bad payload size in {item!r}") from None
            if kind == "zero":
                data = bytes(size)
            elif kind == "random":
                data = np.random.default_rng([seed, size]).bytes(size)
            else:
                data = synthetic_matrix_text(size, seed + size)
            out.append((f"{kind}{size}", data))
        else:
            raise ScenarioError(f"unknown payload kind {item!r}")
    return out


def derive_seed(seed: int, *parts) -> int:
    return int(np.random.SeedSequence([seed, *parts]).generate_state(1)[0])


# -- running ------------------------------------------------------------------

@dataclass
class ScenarioResult:
    rows: list
    timings: list  # non-deterministic host codec seconds, one per row group


def run_scenario(s: Scenario) -> ScenarioResult:
    config = s.session_config()
    rows, timings = [], []
    payloads = resolve_payloads(s.payload, s.seed)
    for (label, data), n, loss, rep in itertools.product(
            payloads, s.nodes, s.loss, range(s.repetitions)):
        seed = derive_seed(s.seed, rep)
        sid = f"{s.name}-{label}-n{n}-p{loss:g}-r{rep}"
        try:
            result = run_comparison(sid, data, n, config, loss, seed, s.strategies,
                                    delay_us=s.delay_us, mtu=s.mtu,
                                    loss_mode=s.loss_mode, unicast_rate=s.unicast_rate,
                                    subscriptions=s.subscriptions())
        except Livelock as exc:
            raise Livelock(f"{sid}: {exc}") from exc
        for row in result.rows:
            row.update(rep=rep, seed=seed, payload=label)
            rows.append(row)
        timings.append({"scenario_id": sid, **result.codec_wall_s})
    return ScenarioResult(rows, timings)


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ALL_FIELDS)
    for row in rows:
        w.writerow([_fmt(row.get(k, "")) for k in ALL_FIELDS])
    return buf.getvalue()


# -- plots --------------------------------------------------------------------

_COL = {name: i + 1 for i, name in enumerate(ALL_FIELDS)}


def _read_rows(csv_text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(csv_text)))


def _script(title, xlabel, ylabel, csv_name, series, logx=True):
    lines = ["set datafile separator ','", f"set title '{title}'",
             f"set xlabel '{xlabel}'", f"set ylabel '{ylabel}'", "set key outside right",
             "set terminal pngcairo size 900,600",
             f"set output '{Path(csv_name).stem}_{title.split()[0].lower()}.png'"]
    if logx:
        lines.append("set logscale x")
    if not series:
        lines += ["set xrange [1:10]", "set yrange [0:1]", "plot NaN notitle"]
    else:
        clauses = [f"'{csv_name}' every ::1 using {x}:({cond} ? {y} : 1/0) "
                   f"with linespoints title '{label}'" for label, cond, x, y in series]
        lines.append("plot " + ", \\\n     ".join(clauses))
    return "\n".join(lines) + "\n"


def emit_plots(csv_text: str, out_dir, csv_name: str = "results.csv") -> list[Path]:
    """Write one gnuplot script per figure analogue next to the CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _read_rows(csv_text)
    c = _COL
    m, thr = c["m"], f"${c['throughput_model']}"

    def distinct(key, pred=lambda r: True):
        return sorted({float(r[key]) for r in rows if pred(r)})

    def strat(name):
        return f'strcol({c["strategy"]}) eq "{name}"'

    tree_n = distinct("N", lambda r: r["strategy"] == "tree")
    mc_off = lambda r: r["strategy"] == "multicast" and r["compression_level"] == "-1"
    mc_on = lambda r: r["strategy"] == "multicast" and r["compression_level"] != "-1"
    scripts = {
        "fig05_tree_throughput.gp": _script(
            "Tree broadcast throughput vs size", "m (bytes)", "throughput (B/s)",
            csv_name, [(f"N={n:g}", f"{strat('tree')} && ${c['N']}=={n:g}", m, thr)
                       for n in tree_n]),
        "fig07_multicast_throughput.gp": _script(
            "Multicast throughput vs size", "m (bytes)", "throughput (B/s)", csv_name,
            [(f"N={n:g}", f"{strat('multicast')} && ${c['compression_level']}==-1 && "
              f"${c['N']}=={n:g}", m, thr) for n in distinct("N", mc_off)]),
        "fig09_compression_ratio.gp": _script(
            "Compression ratio vs size", "m (bytes)", "ratio", csv_name,
            [("ratio", f"{strat('multicast')} && ${c['compression_level']}>=0",
              m, f"${c['ratio']}")] if any(mc_on(r) for r in rows) else []),
        "fig10_compressed_multicast.gp": _script(
            "Compressed multicast throughput vs size", "m (bytes)", "throughput (B/s)",
            csv_name,
            [(f"N={n:g}", f"{strat('multicast')} && ${c['compression_level']}>=0 && "
              f"${c['N']}=={n:g}", m, thr) for n in distinct("N", mc_on)]),
        "fig12_loss_sweep.gp": _script(
            "Loss sweep throughput vs size", "m (bytes)", "throughput (B/s)", csv_name,
            [(f"p={p:g}", f"{strat('multicast')} && abs(${c['loss_p']}-{p:g})<1e-9", m, thr)
             for p in distinct("loss_p", lambda r: r["strategy"] == "multicast")]),
    }
    paths = []
    for name, text in scripts.items():
        path = out_dir / name
        path.write_text(text)
        paths.append(path)
    return paths


# -- CLI ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="layercast-bench",
                                description="Run multicast vs binomial-tree scenarios.")
    p.add_argument("--scenario", help="key=value scenario file")
    p.add_argument("--seed", type=int)
    p.add_argument("--nodes", help="receiver count(s), comma separated")
    p.add_argument("--loss", help="loss probabilities, comma separated")
    p.add_argument("--channels", type=int)
    p.add_argument("--expansion", type=float)
    p.add_argument("--compress-level", help="0-9, or 'off'")
    p.add_argument("--payload", help="payload items, comma separated")
    p.add_argument("--strategy", choices=["tree", "multicast", "both"])
    p.add_argument("--loss-mode", choices=["fragment", "datagram"])
    p.add_argument("--out-dir", default="bench-out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for key in ("seed", "nodes", "loss", "channels", "expansion", "compress_level",
                "payload", "strategy", "loss_mode"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value if isinstance(value, str) else str(value)
    try:
        if args.scenario:
            scenario = load_scenario(args.scenario, overrides)
        else:
            scenario = parse_scenario("", overrides)
        result = run_scenario(scenario)
    except (ScenarioError, Livelock) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = rows_to_csv(result.rows)
    (out / "results.csv").write_text(text)
    timing = io.StringIO()
    w = csv.DictWriter(timing, ["scenario_id", "tree", "multicast"], lineterminator="\n")
    w.writeheader()
    w.writerows(result.timings)
    (out / "codec_timings.csv").write_text(timing.getvalue())
    emit_plots(text, out)
    print(f"{len(result.rows)} rows -> {out / 'results.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
