"""Command-line surface: exit codes, canonical JSON, config precedence."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfmass import cli
from halfmass.errors import DomainError


def run(argv, capsys):
    rc = cli.main(argv)
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_families_lists_catalog(capsys):
    rc, out, err = run(["families"], capsys)
    assert rc == 0
    for name in ("conformal", "flat", "schwarzschild", "synthetic-momentum"):
        assert name in out


def test_check_dec_flat_passes(tmp_path, capsys):
    path = tmp_path / "dec.json"
    rc, out, err = run(["check-dec", "--family", "flat",
                        "--json", str(path)], capsys)
    assert rc == 0
    rep = json.loads(path.read_text())
    assert rep["family"] == "flat"
    assert not rep["violations"]
    assert set(rep) >= {"interior", "boundary", "worst_margin",
                        "worst_point", "theta", "sign", "config"}
    assert rep["config"]["command"] == "check-dec"


def test_check_dec_momentum_family_fails(capsys):
    rc, out, err = run(["check-dec", "--family", "synthetic-momentum"],
                       capsys)
    assert rc == 1
    assert "FAIL" in err


def test_unknown_family_is_usage_error(capsys):
    rc, out, err = run(["check-dec", "--family", "torus"], capsys)
    assert rc == 2
    assert "error" in err.lower()


def test_verify_sl_rejects_misaligned_spacing(capsys):
    rc, out, err = run(["verify-sl", "--family", "flat", "--h", "0.07"],
                       capsys)
    assert rc == 2


def test_adm_csv_schema(tmp_path, capsys):
    csv_path = tmp_path / "adm.csv"
    rc, out, err = run(["adm", "--family", "schwarzschild", "--m", "1.0",
                        "--csv", str(csv_path)], capsys)
    assert rc == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "r,E,P1,P2,P3"
    assert len(lines) == 5  # four default radii
    r, e = (float(v) for v in lines[1].split(",")[:2])
    assert abs(e - 8.0 * math.pi * (1.0 + 0.5 / r) ** 3) < 1e-9


def test_adm_json_report(tmp_path, capsys):
    path = tmp_path / "adm.json"
    rc, out, err = run(["adm", "--family", "synthetic-momentum",
                        "--json", str(path)], capsys)
    assert rc == 0
    rep = json.loads(path.read_text())
    target = 2.0 * math.pi * 0.2
    assert abs(rep["report"]["momentum"][0]["value"] - target) < 1e-10


def test_repeated_runs_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        rc, out, err = run(["mots", "--family", "flat", "--surface", "cap",
                            "--json", str(path)], capsys)
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().endswith(b"\n")


def test_config_file_supplies_defaults(tmp_path, capsys):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"family": "flat", "theta": 10.0}))
    path = tmp_path / "rep.json"
    rc, out, err = run(["check-dec", "--config", str(conf),
                        "--json", str(path)], capsys)
    assert rc == 0
    rep = json.loads(path.read_text())
    assert rep["config"]["theta"] == 10.0

    # explicit flags win over the file
    rc, out, err = run(["check-dec", "--config", str(conf), "--theta", "25",
                        "--json", str(path)], capsys)
    assert rc == 0
    rep = json.loads(path.read_text())
    assert rep["config"]["theta"] == 25.0


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"family": "flat", "fuel": 3}))
    rc, out, err = run(["check-dec", "--config", str(conf)], capsys)
    assert rc == 2


def test_toml_config(tmp_path, capsys):
    conf = tmp_path / "conf.toml"
    conf.write_text('family = "flat"\ntheta = 15.0\n')
    path = tmp_path / "rep.json"
    rc, out, err = run(["check-dec", "--config", str(conf),
                        "--json", str(path)], capsys)
    assert rc == 0
    assert json.loads(path.read_text())["config"]["theta"] == 15.0


def test_threads_env_guard(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HALFMASS_THREADS", "zero")
    rc, out, err = run(["families"], capsys)
    assert rc == 2
    monkeypatch.setenv("HALFMASS_THREADS", "2")
    rc, out, err = run(["families"], capsys)
    assert rc == 0


def test_invariance_command(capsys):
    rc, out, err = run(["invariance", "--family", "synthetic-momentum",
                        "--rotations", "2", "--radii", "8,16,32"], capsys)
    assert rc == 0


def test_witten_flux_command(tmp_path, capsys):
    path = tmp_path / "flux.json"
    rc, out, err = run(["witten-flux", "--family", "synthetic-momentum",
                        "--theta", "20", "--json", str(path)], capsys)
    assert rc == 0
    rep = json.loads(path.read_text())
    assert rep["report"]["relative_mismatch"] < 1e-8


def test_mots_command_tilted(tmp_path, capsys):
    path = tmp_path / "mots.json"
    rc, out, err = run(["mots", "--family", "flat", "--surface", "tilted",
                        "--json", str(path)], capsys)
    assert rc == 0
    rep = json.loads(path.read_text())
    assert rep["null_expansion"]["is_mots"]
    assert abs(rep["null_expansion"]["max"]) < 1e-12
    assert set(rep) >= {"gamma_degrees", "trace_identity", "z_term",
                        "stability", "surface"}


def test_canonical_json_is_sorted_and_strict():
    blob = cli.dumps_canonical({"b": 1, "a": np.float64(0.5),
                                "c": np.arange(3)})
    assert blob == '{"a":0.5,"b":1,"c":[0,1,2]}'
    with pytest.raises(DomainError):
        cli.dumps_canonical({"x": float("nan")})
    with pytest.raises(DomainError):
        cli.dumps_canonical({"x": float("inf")})


@settings(max_examples=80, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(value):
    assert float(cli._format_float(value)) == value
