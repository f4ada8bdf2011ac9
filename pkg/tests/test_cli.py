"""Report pipeline and command-line interface."""

import csv
import json

import numpy as np
import pytest

from dichoseq.cli import main
from dichoseq.errors import SpecParseError
from dichoseq.reports import analyze


DIAG_SPEC = {
    "kind": "autonomous",
    "domain": "Z",
    "coefficients": {"kind": "dense", "matrix": [[0.5, 0.0], [0.0, 2.0]]},
}


@pytest.fixture
def diag_spec(tmp_path):
    p = tmp_path / "diag.json"
    p.write_text(json.dumps(DIAG_SPEC))
    return p


def test_analyze_diag_report(diag_spec, tmp_path):
    rep = analyze(str(diag_spec),
                  {"tests": ["perron", "dichotomy"],
                   "emit": str(tmp_path / "out")})
    j = rep.to_json()
    d = j["verdicts"]["dichotomy"]
    assert d["verdict"] == "dichotomy"
    assert abs(d["K"] - 1.0) < 1e-6
    assert abs(d["alpha"] - np.log(2.0)) < 1e-6
    assert j["verdicts"]["perron"]["predicts_dichotomy"]
    assert j["config"]["tolerances"]["eps_p"] == 1e-10


def test_envelope_csv_rows_bounded(diag_spec, tmp_path):
    rep = analyze(str(diag_spec),
                  {"tests": ["dichotomy"], "emit": str(tmp_path / "out")})
    path = rep.csv_paths[0]
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["m", "n", "norm", "bound"]
    assert len(rows) > 1
    for m, n, norm, bound in rows[1:]:
        assert float(norm) <= float(bound) + 1e-12


def test_report_deterministic_modulo_timestamp(diag_spec):
    cfg = {"tests": ["perron", "dichotomy"]}
    j1 = analyze(str(diag_spec), cfg).to_json()
    j2 = analyze(str(diag_spec), cfg).to_json()
    for k in ("timestamp", "runtime_seconds"):
        j1.pop(k), j2.pop(k)
    assert json.dumps(j1, sort_keys=True) == json.dumps(j2, sort_keys=True)


def test_malformed_spec_raises(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": oops}')
    with pytest.raises(SpecParseError) as exc:
        analyze(str(p), {})
    assert ":1:" in str(exc.value)


def test_cli_exit_codes(diag_spec, tmp_path):
    out = tmp_path / "rep.json"
    assert main(["dichotomy", "--system", str(diag_spec),
                 "--emit", str(out)]) == 0
    j = json.loads(out.read_text())
    assert j["verdicts"]["dichotomy"]["verdict"] == "dichotomy"
    assert main(["perron", "--system", str(tmp_path / "missing.json")]) == 2


def test_cli_domain_override(diag_spec, tmp_path, capsys):
    assert main(["perron", "--system", str(diag_spec),
                 "--domain", "Z+"]) == 0
    j = json.loads(capsys.readouterr().out)
    assert j["verdicts"]["perron"]["domain"] == "Z+"


def test_cli_gallery(tmp_path):
    out = tmp_path / "gal.json"
    assert main(["gallery", "shift", "--lambda", "3/2", "--depth", "64",
                 "--emit", str(out)]) == 0
    j = json.loads(out.read_text())
    assert j["growth"]["ok"] and j["obstruction"]["ok"]
    assert j["tconv1"]["triangular_ed"] and not j["tconv1"]["diagonal_ed"]


def test_cli_random_roundtrip(tmp_path):
    out = tmp_path / "sys.json"
    assert main(["random", "--seed", "3", "--dim", "2", "--horizon", "20",
                 "--emit", str(out)]) == 0
    assert main(["dichotomy", "--system", str(out), "--horizon", "20",
                 "--emit", str(tmp_path / "rep.json")]) == 0
    j = json.loads((tmp_path / "rep.json").read_text())
    assert j["verdicts"]["dichotomy"]["verdict"] == "dichotomy"


def test_cli_dualize(diag_spec, tmp_path):
    out = tmp_path / "dual.json"
    assert main(["dualize", "--system", str(diag_spec),
                 "--emit", str(out)]) == 0
    j = json.loads(out.read_text())
    assert j["coefficients"]["matrix"] == [[0.5, 0.0], [0.0, 2.0]]


def test_cli_triangular_needs_block_spec(diag_spec):
    assert main(["triangular", "--system", str(diag_spec)]) == 2
