import csv
import json

import numpy as np
import pytest

from losrnet.cli import SCHEMA, main, read_matrix, write_matrix
from losrnet.graphs import grid_graph, path_graph
from losrnet.network import ghz_state


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 else None), out, err


@pytest.fixture(scope="module")
def table_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("table") / "table.csv"
    assert main(["reproduce-table", "--out", str(path), "--no-timing"]) == 0
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_report_envelope(capsys):
    code, rep, _, _ = run(capsys, "bounds", "--N", "3", "--d", "2")
    assert code == 0
    assert rep["schema"] == SCHEMA
    assert rep["seed"] == 0
    assert rep["command"] == ["losrnet", "bounds", "--N", "3", "--d", "2"]
    assert rep["duration_s"] >= 0


def test_reproduce_table_rows(table_csv):
    assert [int(r["d_in"]) for r in table_csv] == list(range(2, 11))
    assert abs(float(table_csv[0]["fidelity"]) - 0.51704017) < 1e-5
    assert abs(float(table_csv[-1]["fidelity"]) - 0.54804739) < 1e-5
    assert len(table_csv[-1]["coefficients"].split()) == 10


def test_reproduce_table_deterministic(capsys, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"t{k}.csv"
        code, _, out, _ = run(capsys, "reproduce-table", "--restarts", "3", "--seed", "5",
                              "--out", str(path), "--no-timing")
        assert code == 0
        outs.append((out.replace(str(path), ""), path.read_bytes()))
    assert outs[0] == outs[1]


@pytest.mark.parametrize("argv,lower,upper", [
    (["--N", "3", "--d", "2"], 0.548, 0.618),
    (["--N", "4", "--d", "2"], 0.5, 0.5),
    (["--N", "3", "--d", "9"], None, 1 / 3),
])
def test_bounds(capsys, argv, lower, upper):
    code, rep, _, _ = run(capsys, "bounds", *argv)
    assert code == 0
    if lower is not None:
        assert rep["results"]["lower"] == lower
    assert abs(rep["results"]["upper"] - upper) < 1e-15


def test_bounds_cluster_and_derive(capsys):
    code, rep, _, _ = run(capsys, "bounds", "--cluster", "3", "9")
    assert rep["results"]["upper"] == 2.0**-4.5
    code, rep, _, _ = run(capsys, "bounds", "--derive")
    assert code == 0
    assert abs(rep["results"]["derivation"]["sextic_largest_root"] - 0.6172) < 1e-4


def test_bounds_usage_errors(capsys):
    assert run(capsys, "bounds", "--N", "2")[0] == 2
    assert run(capsys, "bounds", "--derive", "--step", "0.5")[0] == 2


def test_extract_path(capsys, tmp_path):
    graph = tmp_path / "p3.txt"
    graph.write_text(path_graph(3).to_text())
    cert = tmp_path / "cert.txt"
    code, rep, _, _ = run(capsys, "extract", str(graph), "0", "1", "2", "--out", str(cert))
    assert code == 0
    res = rep["results"]
    assert res["ops"] == 1 and res["graph_replay"]
    assert abs(res["statevector_fidelity"] - 1) < 1e-9
    assert cert.read_text() == res["certificate"]


def test_extract_cluster_corners(capsys, tmp_path):
    graph = tmp_path / "c33.txt"
    graph.write_text(grid_graph(3, 3).to_text())
    code, rep, _, _ = run(capsys, "extract", str(graph), "0", "2", "8")
    assert code == 0 and rep["results"]["graph_replay"]
    assert abs(rep["results"]["statevector_fidelity"] - 1) < 1e-9


def test_extract_disconnected(capsys, tmp_path):
    graph = tmp_path / "two.txt"
    graph.write_text("4\n0 1\n2 3\n")
    code, _, _, err = run(capsys, "extract", str(graph), "0", "1", "2")
    assert code == 3 and "connected" in err


def test_assemble_d10(capsys, tmp_path):
    lam = "0.78544,0.54407,0.25136,0.13286,0.06782,0.03492,0.01789,0.00908,0.00442,0.00180"
    out = tmp_path / "rho.txt"
    code, rep, _, _ = run(capsys, "assemble", "--d-in", "10", "--d-out", "2", "--lambda", lam, "--out", str(out))
    assert code == 0
    rho = read_matrix(out.read_text())
    assert abs(rho[0, 0] - 0.6858) < 1e-3 and abs(rho[0, 7] - 0.1805) < 1e-3
    assert abs(rep["results"]["ghz_fidelity"] - 0.54804739) < 1e-5


def test_assemble_product_and_odd(capsys, tmp_path):
    out = tmp_path / "rho.txt"
    code, _, _, _ = run(capsys, "assemble", "--d-in", "2", "--d-out", "2", "--lambda", "1,0", "--out", str(out))
    target = np.zeros((8, 8))
    target[0, 0] = 1
    assert code == 0 and np.allclose(read_matrix(out.read_text()), target)
    code, rep, _, _ = run(capsys, "assemble", "--d-in", "3", "--d-out", "3", "--lambda", "1,1,1")
    assert abs(rep["results"]["ghz_fidelity"] - 4 / 9) < 1e-12


def test_assemble_unsupported(capsys):
    code, _, _, err = run(capsys, "assemble", "--d-in", "4", "--d-out", "3", "--lambda", "1,1,1,1")
    assert code == 2 and "supported" in err
    code, _, _, _ = run(capsys, "assemble", "--d-in", "3", "--d-out", "2", "--lambda", "1,1")
    assert code == 2


def test_optimize(capsys):
    code, rep, _, _ = run(capsys, "optimize", "--family", "two", "--d-in", "2")
    assert code == 0 and abs(rep["results"]["value"] - 0.51704017) < 1e-8
    code, rep, _, _ = run(capsys, "optimize", "--family", "odd", "--d-in", "3", "--restarts", "4")
    assert abs(rep["results"]["value"] - 4 / 9) < 1e-9


def test_optimize_byte_identical(capsys):
    argv = ["optimize", "--d-in", "4", "--restarts", "5", "--seed", "3", "--no-timing"]
    first = run(capsys, *argv)[2]
    second = run(capsys, *argv)[2]
    assert first == second and '"duration_s": null' in first


def test_check_inequalities(capsys, tmp_path):
    code, rep, _, _ = run(capsys, "check-inequalities", "rho-opt")
    res = rep["results"]
    assert code == 0 and res["satisfied"]
    assert abs(res["ghz_fidelity"] - 0.618) < 1e-3
    code, rep, _, _ = run(capsys, "check-inequalities", "ghz")
    assert not rep["results"]["satisfied"] and rep["results"]["finner_slack"] < 0
    path = tmp_path / "ghz.txt"
    path.write_text(write_matrix(ghz_state(3, 2).density()))
    code, rep, _, _ = run(capsys, "check-inequalities", str(path))
    assert rep["results"]["gisin_positive_slack"] == pytest.approx(-6)


def test_matrix_round_trip():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(read_matrix(write_matrix(m)), m)


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
