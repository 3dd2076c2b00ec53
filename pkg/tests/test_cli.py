import json

import pytest

from toruslab.cli import ConfigError, main, parse_poly_coeffs, parse_schedule, split_factors


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_torus_build(capsys):
    code, out, _ = run(["torus", "build", "--factors", "(x-1)(x-2),(x^2-2)"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["torus"]["N"] == 4 and data["factorization"]["l0"] == 2 and data["factorization"]["a0"] == 1


def test_invalid_inputs_exit_2(capsys):
    assert run(["torus", "build", "--factors", "(x-1)^2"], capsys)[0] == 2
    assert run(["count", "run", "--poly", "1,0,-2"], capsys)[0] == 2
    assert run(["equidist", "run", "--samples", "10"], capsys)[0] == 2  # seed is mandatory
    assert run(["nosuch"], capsys)[0] == 2


def test_count_run_csv(tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["count", "run", "--poly", "1,-3,2", "--radii", "16,32,...,256", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "R,count,normalized,doubling_log_ratio"
    assert lines[1].startswith("16.0,218,")
    assert len(lines) == 6


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["polytope", "volume", "--method", "montecarlo", "--samples", "20000", "--seed", "9"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    argv = ["equidist", "run", "--indices", "100", "--samples", "30", "--seed", "4"]
    assert main(argv + ["--out", str(c)]) == 0
    assert main(["--seed", "4", "equidist", "run", "--indices", "100", "--samples", "30", "--out", str(d)]) == 0
    assert c.read_bytes() == d.read_bytes()


def test_config_toml_and_json_mirror(tmp_path):
    toml = tmp_path / "c.toml"
    toml.write_text('poly = "1,0,-2"\nradii = [8, 16, 32]\n')
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"poly": "1,0,-2", "radii": [8, 16, 32]}))
    o1, o2 = tmp_path / "1.csv", tmp_path / "2.csv"
    assert main(["count", "run", "--config", str(toml), "--out", str(o1)]) == 0
    assert main(["count", "run", "--config", str(js), "--out", str(o2)]) == 0
    assert o1.read_bytes() == o2.read_bytes()
    # explicit flags win over the file
    o3 = tmp_path / "3.csv"
    assert main(["count", "run", "--config", str(toml), "--poly", "1,-3,2", "--out", str(o3)]) == 0
    assert o3.read_text() != o1.read_text()


def test_config_errors_name_the_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"poly": "1,0,-2", "radii": "8,16", "oops": 1}')
    code, _, err = run(["count", "run", "--config", str(bad)], capsys)
    assert code == 2 and "bad.json" in err and "oops" in err


def test_gate_failures_exit_4(capsys):
    code, out, err = run(["polytope", "ratio", "--indices", "1000,10000", "--check"], capsys)
    assert code == 4 and "final ratio" in err
    assert out.splitlines()[0] == "i,volume,volume_shrunk,ratio,inscribed_radius"
    code, _, _ = run(["graph", "analyze", "--n", "3", "--edges", "1-2", "--check"], capsys)
    assert code == 4


def test_graph_and_examples(capsys):
    code, out, _ = run(["graph", "analyze", "--family", "sl3-u", "--check"], capsys)
    assert code == 0 and json.loads(out)["weights"] == ["1", "0", "-1"]
    code, out, _ = run(["examples", "verify", "ex3", "--imax", "1e6", "--check"], capsys)
    data = json.loads(out)
    assert code == 0 and data["commutation_residual"] == 0


def test_resscalars_check(capsys):
    code, out, _ = run(["resscalars", "check", "--field", "x^2-3", "--cases", "10", "--margin-cases", "20", "--seed", "2", "--check"], capsys)
    data = json.loads(out)
    assert code == 0 and data["equivariance_failures"] == 0 and data["margin_violations"] == 0


def test_numeric_failure_exit_3(capsys):
    # eps above every weight norm leaves an empty polytope
    code, _, err = run(["polytope", "volume", "--split", "3", "--eps", "5"], capsys)
    assert code == 3 and "numerical" in err


@pytest.mark.parametrize(
    "text,expected",
    [
        ("1,2,4", [1.0, 2.0, 4.0]),
        ("128,256,...,1024", [128.0, 256.0, 512.0, 1024.0]),
        ("geom:1e3:1e5:10", [1e3, 1e4, 1e5]),
        ([3, 5], [3.0, 5.0]),
    ],
)
def test_parse_schedule(text, expected):
    assert parse_schedule(text) == expected


def test_parse_schedule_errors():
    with pytest.raises(ConfigError):
        parse_schedule("1,2,...")
    with pytest.raises(ConfigError):
        parse_schedule("geom:1:10:3")


def test_poly_and_factor_parsing():
    assert parse_poly_coeffs("1,-3,2").coeffs == (2, -3, 1)
    assert parse_poly_coeffs("x^2-2").coeffs == (-2, 0, 1)
    assert split_factors("(x-1)(x-2),(x^2-2)") == ["(x-1)(x-2)", "(x^2-2)"]
