import csv
import io

import pytest

from layercast.bench import (
    ALL_FIELDS, Scenario, ScenarioError, emit_plots, load_scenario, main, parse_scenario,
    resolve_payloads, rows_to_csv, run_scenario, synthetic_matrix_text,
)
from layercast.bcast import CSV_FIELDS
from layercast.mmio import parse_matrix_market

SWEEP = """
# loss sweep at expansion 2
name = sweep
seed = 11
nodes = 4
loss = 0.01, 0.04, 0.07, 0.10
payload = mtx:40000
expansion = 2.0
compress_level = 9
strategy = multicast
"""


def test_parse_scenario():
    s = parse_scenario(SWEEP)
    assert s.name == "sweep" and s.seed == 11 and s.nodes == [4]
    assert s.loss == [0.01, 0.04, 0.07, 0.10]
    assert s.compress_level == 9 and s.strategies == ("multicast",)
    s2 = parse_scenario(SWEEP, {"nodes": "2,8", "compress_level": "off", "seed": "3"})
    assert s2.nodes == [2, 8] and s2.compress_level is None and s2.seed == 3
    assert not s2.session_config().compression.enabled


@pytest.mark.parametrize("text", [
    "bogus = 1", "nodes = x", "just words", "strategy = flood", "repetitions = 0",
    "nodes = 0", "seed = 1.5",
])
def test_bad_scenarios(text):
    with pytest.raises(ScenarioError):
        parse_scenario(text)


def test_load_scenario(tmp_path):
    p = tmp_path / "s.scn"
    p.write_text(SWEEP)
    assert load_scenario(p) == parse_scenario(SWEEP)


def test_payload_kinds(tmp_path):
    mtx = tmp_path / "m.mtx"
    mtx.write_bytes(b"%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 2\n")
    out = resolve_payloads(["zero:10", "random:16", "mtx:5000", f"file:{mtx}"], 1)
    assert [label for label, _ in out] == ["zero10", "random16", "mtx5000", "m"]
    assert out[0][1] == bytes(10) and len(out[1][1]) == 16
    assert parse_matrix_market(out[2][1]).rows >= 2
    assert resolve_payloads(["random:16"], 1) == resolve_payloads(["random:16"], 1)
    assert len(resolve_payloads(["fixtures"], 1)) >= 10
    with pytest.raises(ScenarioError):
        resolve_payloads(["wav:3"], 1)
    with pytest.raises(ScenarioError):
        resolve_payloads(["zero:lots"], 1)


def test_synthetic_matrix_text_is_valid():
    text = synthetic_matrix_text(100_000, 4)
    assert len(text) >= 100_000
    assert parse_matrix_market(text).nnz > 1000


def test_loss_sweep_all_delivered():
    res = run_scenario(parse_scenario(SWEEP))
    assert len(res.rows) == 4
    assert all(r["delivered_ok"] for r in res.rows)
    assert sorted(r["loss_p"] for r in res.rows) == [0.01, 0.04, 0.07, 0.10]


def test_same_scenario_same_csv():
    s = parse_scenario(SWEEP, {"nodes": "2,3", "loss": "0.05", "strategy": "both",
                               "repetitions": 2})
    a = rows_to_csv(run_scenario(s).rows)
    b = rows_to_csv(run_scenario(s).rows)
    assert a == b
    header = next(csv.reader(io.StringIO(a)))
    assert header[:len(CSV_FIELDS)] == CSV_FIELDS and header == ALL_FIELDS
    assert len(a.splitlines()) == 1 + 2 * 2 * 2


def test_zero_fill_50mib_compresses():
    s = Scenario(name="zeros", nodes=[2], payload=[f"zero:{50 * 1024 * 1024}"],
                 compress_level=9, strategy="multicast")
    (row,) = run_scenario(s).rows
    assert row["original_len"] == 50 * 1024 * 1024
    assert row["compressed_len"] <= 100 * 1024
    assert row["delivered_ok"]


def test_plots(tmp_path):
    s = parse_scenario(SWEEP, {"payload": "mtx:20000,mtx:80000", "strategy": "both",
                               "loss": "0.0,0.05"})
    text = rows_to_csv(run_scenario(s).rows)
    paths = emit_plots(text, tmp_path)
    names = sorted(p.name for p in paths)
    assert names == ["fig05_tree_throughput.gp", "fig07_multicast_throughput.gp",
                     "fig09_compression_ratio.gp", "fig10_compressed_multicast.gp",
                     "fig12_loss_sweep.gp"]
    for p in paths:
        body = p.read_text()
        assert "set logscale x" in body and "plot " in body
    loss = (tmp_path / "fig12_loss_sweep.gp").read_text()
    assert "title 'p=0'" in loss and "title 'p=0.05'" in loss


def test_plots_from_empty_csv(tmp_path):
    paths = emit_plots(rows_to_csv([]), tmp_path)
    for p in paths:
        assert "plot NaN" in p.read_text()


def test_cli(tmp_path, capsys):
    scn = tmp_path / "s.scn"
    scn.write_text(SWEEP)
    out = tmp_path / "out"
    code = main(["--scenario", str(scn), "--nodes", "2", "--loss", "0.02",
                 "--out-dir", str(out)])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO((out / "results.csv").read_text())))
    assert len(rows) == 1 and rows[0]["N"] == "2" and rows[0]["delivered_ok"] == "1"
    assert (out / "codec_timings.csv").exists()
    assert (out / "fig12_loss_sweep.gp").exists()
    assert "1 rows" in capsys.readouterr().out


def test_cli_rejects_bad_scenario(tmp_path, capsys):
    scn = tmp_path / "bad.scn"
    scn.write_text("unknown_key = 1\n")
    assert main(["--scenario", str(scn), "--out-dir", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err
