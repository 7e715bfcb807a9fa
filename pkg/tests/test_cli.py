import csv
import io
import json
import subprocess
import sys

import pytest

from boundtree.cli import generate_graph, main
from boundtree.graph import complete_graph, write_edge_list


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_count_k4(capsys, tmp_path):
    path = tmp_path / "k4.edges"
    write_edge_list(complete_graph(4), path)
    code, rep = run_json(capsys, "count", "--graph", str(path), "--k", "2")
    assert code == 0
    assert rep["schema"] == "boundtree.report/1" and rep["version"]
    assert rep["result"]["c"] == "16" and rep["result"]["c_k"] == "12"
    assert rep["config"]["seed"] == 0 and "wall_time_s" not in rep


def test_count_star_has_no_bounded_tree(capsys):
    code, rep = run_json(capsys, "count", "--gen", "star:leaves=4", "--k", "2")
    assert code == 0 and rep["result"]["c_k"] == "0" and rep["result"]["c"] == "1"


def test_missing_file_and_bad_config(capsys, tmp_path):
    code, rep = run_json(capsys, "count", "--graph", str(tmp_path / "nope.edges"))
    assert code == 2 and "file not found" in rep["result"]["error"]
    code, _ = run_json(capsys, "estimate", "--gen", "complete:n=5", "--k", "3", "--trials", "0")
    assert code == 2
    code, _ = run_json(capsys, "count", "--gen", "regular:n=5,r=3")
    assert code == 2
    code, _ = run_json(capsys, "construct", "--variant", "bipartite", "--k", "2", "--n", "9")
    assert code == 2
    code, _ = run_json(capsys, "count", "--gen", "bogus:n=3")
    assert code == 2


def test_rejections_exit_1(capsys):
    code, rep = run_json(capsys, "constants", "--k", "3", "--n", "100", "--r", "24")
    assert code == 1 and "r >= n/(k+1)" in rep["result"]["error"]
    code, _ = run_json(capsys, "nibble", "--gen", "path:n=6", "--k", "4")
    assert code == 1
    code, _ = run_json(capsys, "estimate", "--gen", "cycle:n=9", "--k", "2", "--components")
    assert code == 1


def test_constants_csv(capsys):
    code, out = run(capsys, "constants", "--k", "5..11", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["k"]) for r in rows] == list(range(5, 12))
    assert float(rows[0]["z_k"]) == pytest.approx(0.843148, abs=1e-6)


def test_text_format(capsys):
    code, out = run(capsys, "constants", "--k", "5", "--format", "text")
    assert code == 0 and "rows[0].z_k: 0.8431" in out


def test_construct_and_certify(capsys, tmp_path):
    out = tmp_path / "tight.edges"
    code, rep = run_json(capsys, "construct", "--k", "3", "--t", "7", "--out", str(out))
    assert code == 0 and rep["result"]["certificate_vertex"] == 0
    code, rep = run_json(capsys, "generate", "--graph", str(out), "--k", "3", "--trials", "20", "--certify", "--threads", "1")
    assert code == 0 and rep["result"]["trees"] == 0 and rep["result"]["certificate_vertex"] == 0


def test_generate_trees_out(capsys, tmp_path):
    code, rep = run_json(capsys, "generate", "--gen", "complete:n=4", "--k", "3", "--s", "4", "--ell", "4",
                         "--trials", "30", "--threads", "1", "--trees-out", str(tmp_path / "trees"))
    assert code == 0 and rep["result"]["trees"] > 0
    files = list((tmp_path / "trees").iterdir())
    assert len(files) == rep["result"]["distinct"]


def test_estimate_exact(capsys):
    code, rep = run_json(capsys, "estimate", "--gen", "complete:n=4", "--k", "3", "--s", "4", "--ell", "4",
                         "--trials", "2000", "--exact", "--threads", "1")
    assert code == 0 and rep["result"]["exact"] == pytest.approx(69 / 81)


def test_nibble_command(capsys):
    code, rep = run_json(capsys, "nibble", "--gen", "regular:n=60,r=20,seed=1", "--k", "5", "--trials", "2")
    assert code == 0 and rep["result"]["runs"] == 2 and len(rep["result"]["reports"]) == 2


def test_generators():
    assert generate_graph("regular:n=20,r=4,seed=2").regular_degree == 4
    assert generate_graph("bipartite:a=2,b=3").m == 6
    assert generate_graph("counterexample:n=8,k=3").min_degree == 2
    assert generate_graph("tight:k=3,t=7").n == 28


@pytest.mark.parametrize(
    "argv",
    [
        ["estimate", "--gen", "regular:n=24,r=6,seed=3", "--k", "3", "--trials", "10000"],
        ["generate", "--gen", "regular:n=30,r=8,seed=0", "--k", "4", "--trials", "24"],
        ["estimate", "--gen", "regular:n=40,r=10,seed=3", "--k", "4", "--components", "--trials", "9000"],
    ],
)
def test_byte_identical_across_threads(capsys, argv):
    _, one = run(capsys, *argv, "--threads", "1")
    _, again = run(capsys, *argv, "--threads", "1")
    _, three = run(capsys, *argv, "--threads", "3")
    assert one == again == three


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "boundtree.cli", "constants", "--k", "6"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["rows"][0]["k"] == 6
