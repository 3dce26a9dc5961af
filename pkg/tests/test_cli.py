import json
import subprocess
import sys
from fractions import Fraction

import pytest

from fraquad import report as rp
from fraquad.cli import main
from fraquad.fractal import builtin, spec_to_dict

F = Fraction
TWO_EXTRA = "list::0,:1,:2,0:1,0:2"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate(capsys, tmp_path):
    code, out, _ = run(capsys, "validate", "--spec", "builtin:sg3")
    assert code == 0 and json.loads(out)["data"]["ok"] is True
    d = spec_to_dict(builtin("sg"))
    d["r"] = ["1/2"] * 3
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "validate", "--spec", str(p))
    assert code == 1 and json.loads(out)["data"]["errors"]


def test_disc_report(capsys):
    code, out, _ = run(capsys, "disc", "--set", TWO_EXTRA)
    data = rp.loads(out)["data"]
    assert code == 0
    assert data["delta0_sq"] == F(1, 54)
    assert data["delta_Ew_coeff"] == F(14, 45)
    assert data["delta1"]["lower"] == F(1, 30)
    assert data["delta0"]["square"] == "1/54"


def test_disc_csv(capsys):
    _, out, _ = run(capsys, "disc", "--set", "level:0", "--format", "csv")
    rows = {r["quantity"]: r["value"] for r in rp.read_table_csv(out)}
    assert rows["delta0_sq"] == F(1, 18) and rows["delta1_upper"] == F(1, 15)


def test_sg3_weights_from_eta(capsys):
    _, out, _ = run(capsys, "weights", "--spec", "builtin:sg3", "--set", "level:1")
    w = rp.loads(out)["data"]["weights"]
    assert w[":0"] == F(1, 18) and w["3:2"] == F(3, 18) and w["0:1"] == F(2, 18)


def test_weights_energy_measure_file(capsys, tmp_path):
    p = tmp_path / "nu.json"
    p.write_text(json.dumps({"pair": {"h": [1, 0, 0], "H": [1, 0, 0]}, "normalize": True}))
    _, out, _ = run(capsys, "weights", "--measure", f"energy:{p}")
    w = rp.loads(out)["data"]["weights"]
    assert [w[":0"], w[":1"], w[":2"]] == [F(1, 2), F(1, 4), F(1, 4)]
    _, out, _ = run(capsys, "weights", "--measure", "kusuoka")
    assert set(rp.loads(out)["data"]["weights"].values()) == {F(1, 3)}


def test_tables(capsys):
    _, out, _ = run(capsys, "tables", "--spec", "builtin:st", "--emit", "i,g1", "--g1", "f1k")
    data = rp.loads(out)["data"]
    assert data["product_integrals"][0][:2] == [F(7, 80), F(13, 240)]
    assert set(data["g1"].values()) == {0, F(1, 24)}


def test_green(capsys):
    _, out, _ = run(capsys, "green", "--depth", "1", "--format", "csv")
    rows = rp.read_table_csv(out)
    assert sorted(r["value"] for r in rows) == [0, 0, 0, F(1, 15), F(1, 15), F(1, 15)]
    _, out, _ = run(capsys, "green", "--set", "level:1")
    assert set(rp.loads(out)["data"]["values"].values()) == {0}


def test_energy_tables(capsys):
    _, out, _ = run(capsys, "energy-tables", "--spec", "builtin:interval")
    data = rp.loads(out)["data"]
    assert data["cell_matrices"] == {"0": [[F(1, 2)]], "1": [[F(1, 2)]]}
    assert data["basic_integrals"] == [[F(-1, 2)], [F(-1, 2)]]


def test_integrate_with_budget(capsys, tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("vertex,value\n:0,0\n:1,0\n:2,0\n0:1,1/15\n0:2,1/15\n1:2,1/15\n")
    _, out, _ = run(capsys, "integrate", "--set", "level:1", "--values", str(p), "--budget",
                    "--energy", "1/18", "--laplacian-l1", "1")
    data = rp.loads(out)["data"]
    assert data["estimate"] == F(2, 45)
    assert data["budget"]["bounds"]["natural_energy"]["value"] == pytest.approx((1 / 90) ** 0.5 * (1 / 18) ** 0.5)
    _, out, _ = run(capsys, "integrate", "--set", "level:1", "--values", str(p), "--weights", "uniform")
    assert rp.loads(out)["data"]["estimate"] == F(1, 30)


def test_integrate_missing_sample(capsys, tmp_path):
    p = tmp_path / "v.csv"
    p.write_text(":0,1\n")
    code, _, err = run(capsys, "integrate", "--set", "level:1", "--values", str(p))
    assert code == 2 and "no sample" in err


def test_bad_node_set(capsys):
    code, _, err = run(capsys, "disc", "--set", "list::0,:1")
    assert code == 2 and "boundary" in err


def test_plot(capsys, tmp_path):
    out = tmp_path / "g.svg"
    assert main(["plot", "--green", "--depth", "1", "--out", str(out)]) == 0
    assert "1/15" in out.read_text()
    assert main(["plot", "--spec", "builtin:sg3", "--harmonic", "0", "--out", str(tmp_path / "h.svg")]) == 0
    assert "8/15" in (tmp_path / "h.svg").read_text()


def test_verify_scope_sg(capsys, tmp_path):
    code, out, _ = run(capsys, "verify-paper", "--scope", "SG")
    assert code == 0
    assert "summary: match=64, mismatch=0, paper-internal-conflict=5, conjecture=3" in out
    path = tmp_path / "v.json"
    code, _, _ = run(capsys, "verify-paper", "--scope", "interval", "--out", str(path))
    rep = rp.loads(path.read_text())
    assert rep["kind"] == "verify" and rep["data"]["ok"] is True


@pytest.mark.parametrize("argv", [
    ["disc", "--set", TWO_EXTRA],
    ["tables", "--spec", "builtin:sg3"],
    ["energy-tables", "--spec", "builtin:st", "--format", "csv"],
    ["weights", "--spec", "builtin:sg3", "--set", "level:2"],
    ["plot", "--spec", "builtin:st", "--green", "--depth", "2"],
])
def test_byte_identical_runs(argv):
    cmd = [sys.executable, "-m", "fraquad", *argv]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first and first == second
