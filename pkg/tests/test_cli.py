import json
import subprocess
import sys

import numpy as np
import pytest

from persmode import formats
from persmode.cli import parse_n_list, run_cli
from persmode.grid import CellField, build_grid
from persmode.persistence import superlevel_diagram


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_n_list_parsing():
    assert parse_n_list("1024,...,8192") == [1024, 2048, 4096, 8192]
    assert parse_n_list("1024,…,4096") == [1024, 2048, 4096]
    assert parse_n_list("10, 20,30") == [10, 20, 30]


def test_sample_csv_roundtrip(workdir):
    assert run_cli(["sample", "--density", "example2_1", "--n", "50", "--seed", "3", "--out", "s.csv"]) == 0
    x = formats.read_samples("s.csv")
    assert x.shape == (50, 2)
    formats.write_samples("t.csv", x)
    assert (workdir / "s.csv").read_bytes() == (workdir / "t.csv").read_bytes()
    assert "," in (workdir / "s.csv").read_text().splitlines()[0]


def test_diagram_csv_roundtrip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    field = CellField(build_grid(2, 7), rng.random(49) / 3)
    d = superlevel_diagram(field)
    path = tmp_path / "d.csv"
    formats.write_diagram_csv(path, d)
    back = formats.read_diagram_csv(path)
    assert back.points == d.points and back.grid == d.grid
    header = path.read_text().splitlines()[1]
    assert header == "birth,death,essential,birth_cell,center_0,center_1"


def test_estimate_json_and_bottleneck_identity(workdir, capsys):
    run_cli(["sample", "--density", "example1", "--n", "800", "--seed", "1", "--out", "s.csv"])
    args = ["--in", "s.csv", "--alpha", "0.5", "--mu", "1", "--h-const", "0.25"]
    assert run_cli(["estimate", *args, "--out", "e.json"]) == 0
    doc = json.loads((workdir / "e.json").read_text())
    assert doc["schema_version"] == formats.SCHEMA_VERSION
    assert doc["adaptive"] is True and doc["k_hat"] == len(doc["modes"])
    assert run_cli(["estimate", *args, "--l", "0.5", "--out", "k.json"]) == 0
    assert json.loads((workdir / "k.json").read_text())["adaptive"] is False
    assert run_cli(["diagram", *args, "--out", "d.csv"]) == 0
    capsys.readouterr()
    assert run_cli(["bottleneck", "--a", "d.csv", "--b", "d.csv"]) == 0
    assert float(capsys.readouterr().out) == 0.0
    # the JSON carries the same diagram as the CSV
    assert run_cli(["bottleneck", "--a", "d.csv", "--b", "e.json"]) == 0
    assert float(capsys.readouterr().out) == 0.0


def test_estimate_from_density_example(workdir):
    argv = ["estimate", "--density", "example2_2", "--n", "30000", "--seed", "7",
            "--alpha", "0.5", "--mu", "0.5", "--h-const", "0.25", "--out", "e.json"]
    assert run_cli(argv) == 0
    doc = json.loads((workdir / "e.json").read_text())
    assert doc["k_hat"] == 2 and doc["cells_per_axis"] == 57


def test_oracle_and_plot(workdir):
    assert run_cli(["oracle", "--density", "example2_2", "--fine-m", "128", "--out", "o.json"]) == 0
    doc = json.loads((workdir / "o.json").read_text())
    assert doc["kind"] == "oracle" and len(doc["modes"]) == 2
    run_cli(["sample", "--density", "example2_2", "--n", "3000", "--seed", "2", "--out", "s.csv"])
    run_cli(["diagram", "--in", "s.csv", "--alpha", "0.5", "--mu", "0.5", "--out", "d.csv"])
    assert run_cli(["plot", "--in", "o.json", "d.csv", "--out", "p.svg"]) == 0
    assert run_cli(["plot", "--in", "o.json", "d.csv", "--out", "q.svg"]) == 0
    svg = (workdir / "p.svg").read_bytes()
    assert svg.startswith(b"<?xml") and svg == (workdir / "q.svg").read_bytes()


def test_sweep_outputs(workdir, capsys):
    argv = ["sweep", "--density", "example1", "--n-list", "512,1024", "--trials", "2", "--seed", "4", "--out", "r.csv"]
    assert run_cli(argv) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["n"] == [512, 1024] and len(summary["median_bottleneck_error"]) == 2
    rows = formats.read_results_csv("r.csv")
    assert len(rows) == 4 and "wall_time" not in rows[0]
    assert (workdir / "r.csv.timing.csv").exists()
    assert json.loads((workdir / "r.csv.summary.json").read_text()) == summary


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["sample", "--density", "example1", "--n", "10"],
    ["sample", "--density", "nope", "--n", "10", "--seed", "1", "--out", "x.csv"],
    ["estimate", "--density", "example1", "--out", "x.json"],
    ["estimate", "--h", "0.1", "--h-const", "1", "--density", "example1", "--n", "9", "--out", "x.json"],
    ["sweep", "--density", "example1", "--n-list", "abc", "--trials", "2", "--out", "x.csv"],
])
def test_usage_errors_exit_1(workdir, argv):
    assert run_cli(argv) == 1


def test_runtime_errors_exit_2(workdir):
    assert run_cli(["estimate", "--in", "missing.csv", "--alpha", "0.5", "--mu", "1", "--out", "x.json"]) == 2
    (workdir / "bad.csv").write_text("0.1,abc\n")
    assert run_cli(["diagram", "--in", "bad.csv", "--alpha", "0.5", "--mu", "1", "--out", "x.csv"]) == 2
    (workdir / "bad.json").write_text("{}")
    assert run_cli(["bottleneck", "--a", "bad.json", "--b", "bad.json"]) == 2
    assert run_cli(["estimate", "--density", "example1", "--n", "100", "--mu", "3", "--out", "x.json"]) == 2


def test_module_entry_point(workdir):
    out = subprocess.run([sys.executable, "-m", "persmode", "sample", "--density", "example1",
                          "--n", "5", "--seed", "0", "--out", "m.csv"], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert len((workdir / "m.csv").read_text().splitlines()) == 5
    bad = subprocess.run([sys.executable, "-m", "persmode", "sample"], capture_output=True, text=True)
    assert bad.returncode == 1 and "error" in bad.stderr
