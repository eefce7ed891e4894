import csv
import io
import json
from pathlib import Path

import pytest

from maxlinperc.cli import main, parse_grid

ROOT = Path(__file__).resolve().parents[1]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_depend_example(capsys):
    code, out, _ = run(capsys, "depend", "--window", "2", "--i", "0,1", "--j", "1,0", "--p", "0.5",
                       "--trials", "100000", "--seed", "7")
    assert code == 0
    (r,) = rows(out)
    assert abs(float(r["estimate"]) - 0.25) < 4 * float(r["stderr"])


def test_oracle_example(capsys):
    code, out, _ = run(capsys, "oracle", "--window", "2", "--event", "dependent", "--i", "0,1", "--j", "1,0")
    assert code == 0 and rows(out)[0]["polynomial"] == "p^2"
    code, out, _ = run(capsys, "oracle", "--window", "2", "--event", "sigma", "--i", "0,1", "--j", "1,0",
                       "--p", "0.5")
    r = rows(out)[0]
    assert r["polynomial"] == "2p^2 - p^4" and float(r["value"]) == pytest.approx(0.4375)


def test_maxlin_matrix_pattern(capsys):
    code, out, _ = run(capsys, "maxlin", "--dag", str(ROOT / "cookbook" / "h2.json"), "--matrix", "--symbolic")
    assert code == 0
    got = {(r["j"], r["i"]): r["product"] for r in rows(out)}
    assert got == {
        ("1", "1"): "c[1,1]", ("1", "3"): "c[1,1]*c[1,3]",
        ("2", "2"): "c[2,2]", ("2", "3"): "c[2,2]*c[2,3]",
        ("3", "3"): "c[3,3]",
    }


def test_maxlin_other_actions(capsys):
    chain = str(ROOT / "cookbook" / "chain.json")
    _, out, _ = run(capsys, "maxlin", "--dag", chain, "--scale", "2,0")
    assert float(rows(out)[0]["scale"]) == pytest.approx(10.0)
    _, out, _ = run(capsys, "maxlin", "--dag", chain, "--cdf", "1", "--targets", "0,0")
    assert float(rows(out)[0]["cdf"]) == pytest.approx(0.36787944117144233)
    _, out, _ = run(capsys, "maxlin", "--dag", chain, "--realize", "--trials", "3", "--seed", "1")
    assert len(rows(out)) == 9
    _, out, _ = run(capsys, "maxlin", "--extend", "12", "--seed", "4", "--format", "json")
    doc = json.loads(out)
    assert len(doc["nodes"]) == 15
    _, out, _ = run(capsys, "maxlin", "--dag", chain, "--check")
    assert rows(out)[0]["ok"] == "True"


def test_percolate_critical_enlarge_smoke(capsys):
    code, out, _ = run(capsys, "percolate", "--window", "11", "--p-grid", "0:1:0.5", "--trials", "100",
                       "--doubling", "2")
    assert code == 0 and len(rows(out)) == 6
    code, out, _ = run(capsys, "percolate", "--window", "9", "--p", "0.5", "--cluster-sizes", "--trials", "50")
    assert code == 0 and float(rows(out)[0]["mean_size"]) >= 1
    code, out, _ = run(capsys, "critical", "--window", "11", "--trials", "100", "--tolerance", "0.1")
    assert code == 0 and [r["estimator"] for r in rows(out)] == ["theta", "oriented_theta"]
    code, out, err = run(capsys, "enlarge", "--i=-1,0", "--j", "1,0", "--p-grid", "0.5,0.9",
                         "--window-grid", "5,9", "--trials", "200")
    assert code == 0 and len(rows(out)) == 4 and "finite" in err


def test_depend_modes(capsys):
    code, out, _ = run(capsys, "depend", "--window", "21", "--p-grid", "0.4,0.7", "--distance-grid", "2:6:2",
                       "--trials", "200", "--margin", "5")
    assert code == 0 and len(rows(out)) == 6
    code, out, _ = run(capsys, "depend", "--window", "8", "--i", "2,5", "--j", "5,2", "--p", "0.6",
                       "--sigma-bound", "--trials", "500")
    assert code == 0 and rows(out)[0]["passed"] == "True"
    code, out, _ = run(capsys, "depend", "--window", "1", "--box-stats", "--distance", "2", "--p", "1",
                       "--n-grid", "3", "--trials", "1")
    assert code == 0 and rows(out)[0]["convention"] == "exclude"


def test_byte_identical_across_threads(tmp_path, capsys):
    paths = []
    for threads in ("1", "3"):
        out = tmp_path / f"run{threads}.csv"
        code = main(["depend", "--window", "31", "--p-grid", "0.5,0.7", "--distance-grid", "2,4,8",
                     "--trials", "9000", "--seed", "5", "--threads", threads, "--out", str(out)])
        assert code == 0
        paths.append(out.read_bytes())
    assert paths[0] == paths[1]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"window": 2, "i": [0, 1], "j": "1,0", "p": 0.5, "trials": 100, "seed": 3}))
    _, a, _ = run(capsys, "depend", "--config", str(cfg))
    assert rows(a)[0]["trials"] == "100"
    _, b, _ = run(capsys, "depend", "--config", str(cfg), "--trials", "300")
    assert rows(b)[0]["trials"] == "300"
    code, _, _ = run(capsys, "depend", "--config", str(ROOT / "cookbook" / "depend_2x2.json"), "--trials", "10")
    assert code == 0


@pytest.mark.parametrize("argv, code, needle", [
    (["depend", "--window", "2", "--i", "0,1", "--j", "1,0", "--p", "1.5"], 3, "--p"),
    (["depend", "--window", "2", "--i", "0,1", "--j", "1,0", "--p", "0.5", "--trials", "0"], 3, "--trials"),
    (["maxlin", "--dag", "x.json", "--alpha", "-1"], 3, "--alpha"),
    (["depend", "--window", "2", "--i", "0,1", "--j", "9,9", "--p", "0.5"], 3, "outside"),
    (["percolate", "--window", "5", "--p-grid", "0.2,1.2"], 3, "--p-grid"),
    (["depend", "--bogus"], 2, ""),
    (["depend", "--window", "two"], 2, "--window"),
    (["frobnicate"], 2, ""),
])
def test_exit_codes(capsys, argv, code, needle):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert needle in err


def test_help_documents_schema(capsys):
    assert main(["depend", "--help"]) == 0
    out = capsys.readouterr().out
    assert "i,j,p,window,trials,estimate,stderr,seed" in out


def test_parse_grid():
    assert parse_grid("0.4:0.7:0.1") == [0.4, 0.5, 0.6, 0.7]
    assert parse_grid("2:18:4", int) == [2, 6, 10, 14, 18]
    assert parse_grid("0.2,0.5") == [0.2, 0.5]
