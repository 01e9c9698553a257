import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from tube_geodesics.cli import main
from tube_geodesics.documents import serialize
from tube_geodesics.domain import HalfPlaneProduct, StaircaseDomain, canonical_staircase
from tube_geodesics.geodesic import canonical_staircase_spec, geodesic_map, squared_pole_spec
from tube_geodesics.solver import SolveProblem


@pytest.fixture
def files(tmp_path):
    def put(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else serialize(obj))
        return str(path)

    D = canonical_staircase()
    phi = geodesic_map(canonical_staircase_spec(), D)
    return {
        "dom": put("dom.json", D),
        "spec": put("spec.json", canonical_staircase_spec()),
        "pole": put("pole.json", squared_pole_spec()),
        "h1": put("h1.json", HalfPlaneProduct(1)),
        "h2": put("h2.json", HalfPlaneProduct(2)),
        "bad": put("bad.json", StaircaseDomain([[1, 0], [1, -1], [0, 1]], [[0, -2], [0, -1], [-1, 0], [-2, 0]])),
        "empty": put("empty.json", ""),
        "prob": put("prob.json", SolveProblem(D, [-1.5, -1.5], phi(0.4))),
        "same": put("same.json", SolveProblem(D, [-1.5, -1.5], [-1.5, -1.5])),
        "outside": put("outside.json", SolveProblem(D, [-1.5, -1.5], [-0.2, -0.2])),
        "hp": put("hp.json", SolveProblem(HalfPlaneProduct(2), [-1 + 0.3j, -2.0], [-0.5 - 1j, -1.5 + 0.2j])),
        "dir": tmp_path,
    }


def test_validate(files, capsys):
    assert main(["validate", files["dom"]]) == 0
    assert main(["validate", files["bad"]]) == 2
    out = capsys.readouterr().out
    assert "determinant at (1, 2)" in out
    assert main(["validate", files["empty"]]) == 1
    assert main(["validate", str(files["dir"] / "missing.json")]) == 1


def test_trace(files):
    out = files["dir"] / "tr.csv"
    assert main(["trace", files["spec"], files["dom"], "--samples", "360", "--radius", "0.999", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["t", "re_phi1", "im_phi1", "re_phi2", "im_phi2"]
    assert len(rows) == 361
    D = canonical_staircase()
    x = np.array([[float(r[1]), float(r[3])] for r in rows[1:]])
    # inside the base, up to 1e-2 near the boundary
    assert np.all(np.max(D.facet_values(x), axis=1) < 1e-2)
    assert (files["dir"] / "tr.boundary.csv").exists()


def test_trace_at_centre(files, capsys):
    assert main(["trace", files["spec"], files["dom"], "--radius", "0", "--samples", "9"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[1:] == ["0,-1.5,0,-1.5,0"]


def test_trace_rejects_zero_samples(files):
    assert main(["trace", files["spec"], files["dom"], "--samples", "0"]) == 2


def test_verify(files):
    out = files["dir"] / "rep.json"
    assert main(["verify", files["spec"], files["dom"], "--level", "all", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["status"] == "pass"
    assert main(["verify", files["pole"], files["h1"], "--out", str(out)]) == 3
    rep = json.loads(out.read_text())
    ii = next(c for c in rep["conditions"] if c["name"] == "radial_ii")
    assert ii["witness"]["lam"] == [0.5, 0.0]
    assert ii["witness"]["value"] == pytest.approx(2 / 3, abs=1e-9)
    assert main(["verify", files["spec"], files["h1"]]) == 2


def test_verify_without_certificate_is_inconclusive(files):
    from tube_geodesics.geodesic import MeasureSpec
    from tube_geodesics.measure import CircleMeasure
    path = files["dir"] / "nocert.json"
    path.write_text(serialize(MeasureSpec(CircleMeasure.dirac(0.0, [-6.0]), [0.0])))
    assert main(["verify", str(path), files["h1"], "--out", str(files["dir"] / "r.json")]) == 4


def test_solve(files):
    out = files["dir"] / "sol.json"
    assert main(["solve", files["prob"], "--out", str(out)]) == 0
    rep = json.loads((files["dir"] / "sol.report.json").read_text())
    assert rep["metadata"]["residual"] < 1e-8
    assert rep["metadata"]["sigma"] == pytest.approx(0.4, abs=1e-9)
    assert json.loads(out.read_text())["type"] == "staircase_ii"
    assert main(["solve", files["same"]]) == 2
    assert main(["solve", files["outside"]]) == 2
    assert main(["solve", files["hp"], "--out", str(files["dir"] / "hp_sol.json")]) == 0


def test_solve_budget_exit_code(files):
    doc = json.loads(open(files["prob"]).read())
    doc["options"]["cases"] = ["atoms_none"]
    doc["options"]["multistart"] = 1
    path = files["dir"] / "hard.json"
    path.write_text(json.dumps(doc))
    assert main(["solve", str(path), "--out", str(files["dir"] / "x.json")]) == 5
    rep = json.loads((files["dir"] / "x.report.json").read_text())
    assert "atoms_none" in rep["metadata"]["best_residual_per_case"]


def test_reinhardt(files):
    out = files["dir"] / "r.json"
    assert main(["reinhardt", "--p", "1", "--q", "1", "--alpha", "0.3678794", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["v"]) == 3 and doc["p"][1][1] == pytest.approx(math.log(0.3678794))
    assert main(["reinhardt", "--p", "1", "--q", "2", "--alpha", str(math.exp(-2)),
                 "--p", "2", "--q", "1", "--alpha", str(math.exp(-2)), "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["v"]) == 4
    assert main(["reinhardt", "--p", "1", "--q", "1", "--alpha", "1.5"]) == 2


def test_bad_flags_exit_invalid():
    assert main(["trace"]) == 2


def test_module_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "tube_geodesics", "validate", files["dom"]],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "ok" in res.stdout
