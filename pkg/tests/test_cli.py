import json

import pytest

from isomartin import cli


def run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    text = out.read_text() if out.exists() else ""
    return code, text


def meta(text):
    return dict(line[2:].split(": ", 1) for line in text.splitlines() if line.startswith("# "))


def test_graph_csv_and_metadata(tmp_path):
    code, text = run(tmp_path, "graph", "--extent", "3")
    assert code == cli.EXIT_OK
    lines = text.splitlines()
    assert lines[0] == "vertex,lift,x,y,primal,interior"
    m = meta(text)
    assert {"config_hash", "numpy", "scipy", "mpmath", "numba", "isomartin"} <= set(m)


def test_determinism(tmp_path):
    a = run(tmp_path, "green", "--k", "0.4", "--max-distance", "3", name="a.csv")
    b = run(tmp_path, "green", "--k", "0.4", "--max-distance", "3", name="b.csv")
    assert a == b and a[0] == cli.EXIT_OK
    assert meta(a[1])["status"] == "pass"


def test_config_file_equivalent_to_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"builder": "triangular", "k_list": [0.3, 0.7]}))
    a = run(tmp_path, "params", "--config", str(cfg), name="a.csv")
    b = run(tmp_path, "params", "--builder", "triangular", "--k-list", "0.3", "0.7", name="b.csv")
    assert a == b and a[0] == cli.EXIT_OK


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert cli.main(["graph", "--config", str(cfg)]) == cli.EXIT_INPUT
    assert "unknown config keys" in capsys.readouterr().err


@pytest.mark.parametrize("cmd", ["green", "martin", "boundary"])
def test_massless_refused(tmp_path, capsys, cmd):
    code, text = run(tmp_path, cmd, "--k", "0")
    assert code == cli.EXIT_INPUT and text == ""
    assert "massless" in capsys.readouterr().err


def test_out_of_range_inputs(tmp_path):
    assert run(tmp_path, "green", "--k", "1.2")[0] == cli.EXIT_INPUT
    assert run(tmp_path, "amoeba", "--k-list", "0.3", "0")[0] == cli.EXIT_INPUT
    assert run(tmp_path, "boundary", "--builder", "waves")[0] == cli.EXIT_INPUT
    assert run(tmp_path, "params", "--q1", "0.7", "--t", "2")[0] == cli.EXIT_INPUT
    assert run(tmp_path, "series", "--order", "4")[0] == cli.EXIT_INPUT


def test_waves_has_no_limit(tmp_path):
    code, text = run(tmp_path, "martin", "--builder", "waves", "--n-blocks", "5",
                     "--radii", "6", "10", "14", "--directions", "4")
    assert code == cli.EXIT_NO_LIMIT
    assert meta(text)["status"] == "no-limit"


def test_martin_periodic_loose_tolerance(tmp_path):
    code, text = run(tmp_path, "martin", "--radii", "10", "14", "20", "28", "--directions", "2", "--tol", "0.05")
    assert code == cli.EXIT_OK
    assert float(meta(text)["worst_final_error"]) < 0.05


def test_martin_strict_tolerance_reports_failure(tmp_path):
    code, _ = run(tmp_path, "martin", "--radii", "10", "14", "20", "--directions", "2", "--tol", "1e-6")
    assert code == cli.EXIT_FAIL


def test_boundary_amoeba_params(tmp_path):
    assert run(tmp_path, "boundary", "--samples", "36", name="b.csv")[0] == cli.EXIT_OK
    code, text = run(tmp_path, "amoeba", "--k-list", "0.6", "0.2", "--samples", "36", name="a.csv")
    assert code == cli.EXIT_OK
    rows = [r for r in text.splitlines()[1:] if not r.startswith("#")]
    assert [float(r.split(",")[0]) for r in rows] == [0.2, 0.6]
    assert run(tmp_path, "params", "--samples", "5", name="p.csv")[0] == cli.EXIT_OK


def test_series_report(tmp_path, capsys):
    code, text = run(tmp_path, "series", "--order", "20")
    assert code == cli.EXIT_OK
    assert "ALL CHECKS PASS" in capsys.readouterr().out
    assert text.splitlines()[2].startswith("2,3/32,")


def test_stdout_output(capsys):
    assert cli.main(["params", "--builder", "triangular", "--k-list", "0.5"]) == cli.EXIT_OK
    assert capsys.readouterr().out.startswith("k,s,t,")
