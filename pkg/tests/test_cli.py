import io
import json
import subprocess
import sys

import numpy as np
import pytest

from blocktc.cli import SCHEMA, main
from blocktc.generators import gnp, rmat, write_raw
from blocktc.graph import canonicalize, load_edge_list

from conftest import complete


def write_edges(path, edges):
    path.write_text("".join(f"{u} {v}\n" for u, v in edges))
    return str(path)


def call(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    text = out.getvalue()
    return code, text


def call_json(argv):
    code, text = call(argv)
    return code, json.loads(text)


@pytest.fixture
def k5(tmp_path):
    return write_edges(tmp_path / "k5.txt", complete(5))


@pytest.fixture
def g150(tmp_path):
    path = tmp_path / "g150.txt"
    write_raw(gnp(150, 0.08, seed=3), path)
    return str(path)


def test_count_k5(k5):
    code, out = call_json(["count", "--input", k5, "--p", "2", "--hosts", "1"])
    assert code == 0
    assert out["schema"] == SCHEMA
    assert out["tau"] == 10
    assert out["report"]["partition"]["p"] == 2
    assert out["spec"]["p"] == 2


def test_count_matches_verify_brute(g150):
    _, counted = call_json(["count", "--input", g150, "--p", "1", "--hosts", "1", "--devices", "0"])
    code, verified = call_json(["verify", "--input", g150])
    assert code == 0 and verified["ok"]
    assert counted["tau"] == verified["counts"]["brute"]


def test_verify_grid_g150(g150):
    code, out = call_json(["verify", "--input", g150, "--hosts", "3", "--devices", "1"])
    assert code == 0
    names = set(out["counts"])
    assert {f"bbtc:p={p}" for p in (1, 2, 4, 8, 16)} <= names
    assert {"latapy:0", "latapy:2", "latapy:32", "latapy:inf"} <= names
    assert len(set(out["counts"].values())) == 1


def test_verify_k3(tmp_path):
    path = write_edges(tmp_path / "k3.txt", complete(3))
    code, out = call_json(["verify", "--input", path])
    assert code == 0
    assert set(out["counts"].values()) == {1}
    assert "bbtc:p=4" not in out["counts"]


def test_verify_empty(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("# nothing\n")
    code, out = call_json(["verify", "--input", str(path)])
    assert code == 0
    assert set(out["counts"].values()) == {0}


def test_verify_rejects_large(tmp_path):
    path = write_edges(tmp_path / "big.txt", [(0, 600)])
    code, _ = call(["verify", "--input", path])
    assert code == 2


def test_baseline_agrees(k5):
    for base in ("list", "hash", "latapy:3", "brute"):
        code, out = call_json(["count", "--input", k5, "--baseline", base, "--hosts", "2", "--devices", "1"])
        assert code == 0
        assert out["baseline"]["tau"] == out["tau"] == 10


def test_bench_cutoff_grid(g150):
    code, out = call_json(["bench", "--input", g150, "--p", "6", "--hosts", "2", "--transfer", "simulated:1e8,1e-6"])
    assert code == 0
    sweep = out["cutoff_sweep"]
    assert len(sweep) == 9
    n = out["estimators"]["n_tasks"]
    assert [row["cutoff"] for row in sweep] == [s * n // 8 for s in range(9)]
    assert len({row["tau"] for row in sweep + out["worker_scaling"]}) == 1
    assert out["tau_consistent"]
    assert sweep[-1]["host_tasks"] == 0


def test_bench_estimator_table_reproducible(g150):
    _, a = call_json(["bench", "--input", g150, "--p", "5", "--hosts", "1"])
    _, b = call_json(["bench", "--input", g150, "--p", "5", "--hosts", "1"])
    assert a["estimators"] == b["estimators"]
    assert set(a["estimators"]["estimators"]) == {"bbtc", "nnz", "density", "degree"}


def test_gen_gnp_empty(tmp_path):
    out = tmp_path / "e.txt"
    assert main(["gen", "gnp", "--n", "0", "--out", str(out)]) == 0
    assert out.read_text() == ""


def test_gen_seed_reproducible(tmp_path):
    a, b, c = (tmp_path / f"{x}.txt" for x in "abc")
    main(["gen", "rmat", "--scale", "8", "--seed", "5", "--out", str(a)])
    main(["gen", "rmat", "--scale", "8", "--seed", "5", "--out", str(b)])
    main(["gen", "rmat", "--scale", "8", "--seed", "6", "--out", str(c)])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_gen_rmat_bounds(tmp_path):
    out = tmp_path / "r.txt"
    main(["gen", "rmat", "--scale", "10", "--edge-factor", "8", "--out", str(out)])
    raw = load_edge_list(str(out))
    assert 0 < len(raw.edges) <= 8 * 1024
    assert raw.edges.max() < 1024 and raw.edges.min() >= 0
    assert np.all(raw.edges[:, 0] != raw.edges[:, 1])


def test_gen_stdout():
    code, text = call(["gen", "gnp", "--n", "20", "--q", "0.5", "--seed", "1"])
    assert code == 0
    assert len(text.splitlines()) == len(gnp(20, 0.5, 1).edges)


def test_rmat_skew():
    raw = rmat(10, 8, seed=0)
    g = canonicalize(raw)
    deg = g.full_degrees()
    assert deg.max() > 8 * np.mean(deg)


def test_gnp_validation():
    with pytest.raises(ValueError):
        gnp(-1, 0.1)
    with pytest.raises(ValueError):
        rmat(4, 8, (0.5, 0.5, 0.5, 0.5))


def test_partition_json(g150):
    code, out = call_json(["partition", "--input", g150, "--p", "4"])
    assert code == 0
    assert out["p"] == 4 and out["cuts"][0] == 0 and out["cuts"][-1] == 150
    assert out["stats"]["lambda"] >= 1.0


def test_partition_p_larger_than_n(tmp_path):
    path = write_edges(tmp_path / "k3.txt", complete(3))
    code, out = call_json(["partition", "--input", path, "--p", "10"])
    assert code == 0
    assert out["p"] == 3 and out["warnings"]


def test_tasks_json_and_csv(g150, tmp_path):
    code, out = call_json(["tasks", "--input", g150, "--p", "4"])
    assert code == 0 and len(out["tasks"]) == 20
    weights = [t["weight"] for t in out["tasks"]]
    assert weights == sorted(weights, reverse=True)
    code, text = call(["tasks", "--input", g150, "--p", "4", "--csv"])
    lines = text.strip().splitlines()
    assert lines[0].startswith("position,i,j,k,weight") and len(lines) == 21
    csv_path = tmp_path / "t.csv"
    call(["tasks", "--input", g150, "--p", "4", "--out", str(csv_path)])
    assert csv_path.read_text().strip().splitlines() == lines


def test_out_file(k5, tmp_path):
    dest = tmp_path / "r.json"
    code, text = call(["count", "--input", k5, "--out", str(dest)])
    assert code == 0 and text == ""
    assert json.loads(dest.read_text())["tau"] == 10


def test_matrix_market(tmp_path):
    path = tmp_path / "k4.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate pattern symmetric\n4 4 6\n"
        + "".join(f"{v + 1} {u + 1}\n" for u, v in complete(4))
    )
    code, out = call_json(["count", "--input", str(path), "--hosts", "1"])
    assert code == 0 and out["tau"] == 4
    assert out["spec"]["format"] == "matrix-market"


def test_threads_env_caps_hosts(k5, monkeypatch):
    monkeypatch.setenv("BBTC_THREADS", "1")
    _, out = call_json(["count", "--input", k5])
    assert out["spec"]["hosts"] == 1
    _, out = call_json(["count", "--input", k5, "--hosts", "8"])
    assert out["spec"]["hosts"] == 1
    monkeypatch.setenv("BBTC_THREADS", "many")
    assert call(["count", "--input", k5])[0] == 2


@pytest.mark.parametrize("argv", [
    ["count", "--input", "/no/such/file"],
    ["count", "--input", "{bad}", "--cutoff", "99999"],
    ["count", "--input", "{bad}", "--baseline", "quantum"],
    ["count", "--input", "{bad}", "--transfer", "pcie"],
    ["count", "--input", "{bad}", "--devices", "0", "--hosts", "0"],
])
def test_error_exit_codes(argv, k5):
    argv = [a.replace("{bad}", k5) for a in argv]
    code, _ = call(argv)
    assert code == 2


def test_malformed_input(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 1\n1 x\n")
    code, _ = call(["count", "--input", str(path)])
    assert code == 2


def test_bad_p_rejected_by_parser(k5):
    with pytest.raises(SystemExit):
        main(["count", "--input", k5, "--p", "0"])


def test_module_entry_point(k5):
    proc = subprocess.run(
        [sys.executable, "-m", "blocktc", "count", "--input", k5, "--p", "2", "--hosts", "1"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["tau"] == 10
