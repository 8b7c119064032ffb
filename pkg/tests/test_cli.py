import csv
import io
import json
import math
import subprocess
import sys

import pytest
from click.testing import CliRunner

from qpsl.cli import cli, dumps

PI = math.pi

INVOCATIONS = {
    "spectrum": ["spectrum", "--potential", "mathieu:1", "--t-pi-frac", "1/2", "--k", "4",
                 "--method", "both"],
    "discriminant": ["discriminant", "--potential", "two-mode:0.5,0.25", "--lambda", "3",
                     "--lambda", "40.5"],
    "rayleigh": ["rayleigh", "--potential", "shifted:3,mathieu:1", "--t", "0.3"],
    "verify-asymptotics": ["verify-asymptotics", "--potential", "mathieu:1", "--t", "0.3"],
    "check-ambarzumyan": ["check-ambarzumyan", "--potential", "mathieu:1", "--t", "1.5708"],
    "bands": ["bands", "--potential", "mathieu:1", "--t-count", "9", "--k", "3"],
}


def run(args, ok=True):
    res = CliRunner().invoke(cli, args)
    if ok:
        assert res.exit_code == 0, res.output + str(res.exception)
    return res


def as_json(args):
    return json.loads(run(args).stdout)


def test_spectrum_both_free():
    out = as_json(["spectrum", "--potential", "zero", "--t", "1.5708", "--k", "3",
                   "--method", "both"])
    t = 1.5708
    expected = [t ** 2, (2 * PI - t) ** 2, (2 * PI + t) ** 2]
    for m in ("galerkin", "shooting"):
        vals = out["spectra"][m]["values"]
        assert len(vals) == 3
        assert max(abs(a - b) for a, b in zip(vals, expected)) <= 1e-6
        # [(pi/2)^2, (3 pi/2)^2, (5 pi/2)^2] up to the rounding of 1.5708
        assert vals == pytest.approx([(PI / 2) ** 2, (3 * PI / 2) ** 2, (5 * PI / 2) ** 2],
                                     abs=1e-3)
    assert len(out["agreement"]) == 3


def test_agreement_not_below_claimed_tolerance():
    out = as_json(["spectrum", "--potential", "zero", "--t", "0.3", "--k", "5",
                   "--method", "both"])
    g = out["spectra"]["galerkin"]["values"]
    for a, v in zip(out["agreement"], g):
        assert a >= 1e-10 * (1 + abs(v))


def test_check_ambarzumyan_free():
    out = as_json(["check-ambarzumyan", "--potential", "zero", "--t", "2.0", "--variant", "minus",
                   "--n-max", "8"])
    assert out["report"]["verdict"] == "ConsistentWithZeroPotential"
    assert out["failing_n"] == []


def test_check_ambarzumyan_mathieu():
    out = as_json(["check-ambarzumyan", "--potential", "mathieu:1.0", "--t", "1.5708",
                   "--variant", "minus", "--n-max", "8"])
    assert out["report"]["verdict"] == "HypothesesViolated"
    assert out["failing_n"] == [1]
    assert out["cos_moment"] == 1.0


def test_report_field_names():
    out = as_json(INVOCATIONS["check-ambarzumyan"])
    assert list(out["report"]) == ["t", "variant", "first_eigenvalue_ok", "margin",
                                   "containment_ok", "containment_evidence", "q0_estimate",
                                   "verdict", "tol", "note"]
    assert list(out["report"]["containment_evidence"][0]) == ["n", "target", "nearest_computed",
                                                              "gap"]


def test_bands_schema():
    out = as_json(["bands", "--potential", "mathieu:1", "--t-count", "33", "--k", "3"])
    assert list(out) == ["t_grid", "bands", "gaps"]
    assert [b["m"] for b in out["bands"]] == [0, 1, 2]
    assert all(len(b["values"]) == 33 for b in out["bands"])
    assert out["gaps"] and list(out["gaps"][0]) == ["lo", "hi"]


def test_bands_workers_identical():
    base = run(INVOCATIONS["bands"]).stdout
    assert run(INVOCATIONS["bands"] + ["--workers", "3"]).stdout == base


@pytest.mark.parametrize("name", sorted(INVOCATIONS))
@pytest.mark.parametrize("output", ["json", "csv"])
def test_byte_identical_repeats(name, output):
    args = INVOCATIONS[name] + ["--output", output]
    assert run(args).stdout_bytes == run(args).stdout_bytes


def test_byte_identical_across_processes():
    cmd = [sys.executable, "-m", "qpsl"] + INVOCATIONS["spectrum"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


def test_floats_round_trip():
    out = run(["spectrum", "--potential", "mathieu:1", "--t", "0.3", "--k", "3"]).stdout
    for v in json.loads(out)["spectrum"]["values"]:
        assert format(v, ".17g") in out


def test_dumps_formatting():
    assert dumps({"b": 0.1, "a": [1, True, None, math.nan]}) == \
        '{"b":0.10000000000000001,"a":[1,true,null,null]}'


def test_spectrum_csv():
    text = run(["spectrum", "--potential", "zero", "--t", "1", "--k", "3", "--method", "both",
                "--output", "csv"]).stdout
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["index", "label", "value", "method", "residual", "agreement"]
    assert len(rows) == 6
    assert [r["label"] for r in rows[::2]] == ["0", "-1", "1"]


def test_verify_asymptotics_csv_residuals():
    text = run(INVOCATIONS["verify-asymptotics"] + ["--output", "csv"]).stdout
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 25
    assert all(r["residual"] for r in rows)


def test_verify_asymptotics_json():
    out = as_json(["verify-asymptotics", "--potential", "shifted:3,mathieu:1", "--t", "0.3",
                   "--method", "both"])
    assert len(out["analyses"]) == 2
    for a in out["analyses"]:
        assert abs(a["q0_estimate"] - 3) <= 0.05
        assert a["decay"]["decay_ok"]


def test_rayleigh_values():
    out = as_json(["rayleigh", "--potential", "zero", "--t", "1", "--which", "plus"])
    assert out["rows"] == [{"which": "plus", "value": 1.0, "closed_form": 1.0}]


def test_discriminant_free():
    out = as_json(["discriminant", "--potential", "zero", "--lambda", str(PI ** 2)])
    row = out["rows"][0]
    assert row["discriminant"] == pytest.approx(-2, abs=1e-8)
    assert row["wronskian"] == pytest.approx(1, abs=1e-9)


def test_t_pi_frac_exact():
    out = as_json(["rayleigh", "--potential", "zero", "--t-pi-frac", "1", "--which", "plus"])
    assert out["t"] == PI
    out = as_json(["rayleigh", "--potential", "zero", "--t-pi-frac", "3/2", "--which", "plus"])
    assert out["t"] == PI * 3 / 2


def test_potential_file(tmp_path):
    f = tmp_path / "q.json"
    f.write_text(json.dumps({"kind": "fourier", "coeffs": [{"n": 1, "re": 1.0, "im": 0.0}]}))
    from_file = as_json(["spectrum", "--potential", str(f), "--t", "0.3", "--k", "4"])
    builtin = as_json(["spectrum", "--potential", "mathieu:1", "--t", "0.3", "--k", "4"])
    assert from_file["spectrum"]["values"] == builtin["spectrum"]["values"]


def test_out_file(tmp_path):
    target = tmp_path / "out.json"
    res = run(INVOCATIONS["rayleigh"] + ["--out", str(target)])
    assert res.stdout == ""
    assert json.loads(target.read_text())["command"] == "rayleigh"


@pytest.mark.parametrize("args", [
    ["spectrum", "--potential", "zero", "--k", "3"],                                   # no t
    ["spectrum", "--potential", "zero", "--t", "1", "--t-pi-frac", "1/2"],             # both
    ["spectrum", "--potential", "nonsense:1", "--t", "1"],
    ["spectrum", "--potential", "missing.json", "--t", "1"],
    ["spectrum", "--potential", "zero", "--t", "1", "--k", "0"],
    ["spectrum", "--potential", "zero", "--t", "1", "--k", "9", "--N", "3"],
    ["spectrum", "--potential", "zero", "--t", "nan"],
    ["spectrum", "--potential", "zero", "--t-pi-frac", "1/0"],
    ["bands", "--potential", "zero", "--t-count", "2"],
    ["check-ambarzumyan", "--potential", "zero", "--t", "1", "--tol", "-1"],
    ["discriminant", "--potential", "zero"],
])
def test_usage_errors_exit_2(args):
    assert run(args, ok=False).exit_code == 2


def test_numerical_failure_exit_3():
    res = run(["spectrum", "--potential", "mathieu:200", "--t", "0.3", "--N", "3", "--k", "3"],
              ok=False)
    assert res.exit_code == 3
    err = json.loads(res.stderr)
    assert err["error"] == "NotConverged"
    assert err["message"]


def test_integration_drift_exit_3():
    res = run(["discriminant", "--potential", "zero", "--lambda", "900", "--ode-tol", "1e-2"],
              ok=False)
    assert res.exit_code == 3
    assert json.loads(res.stderr)["error"] == "IntegrationDrift"


def test_violated_verdict_is_not_an_error():
    assert run(INVOCATIONS["check-ambarzumyan"]).exit_code == 0
