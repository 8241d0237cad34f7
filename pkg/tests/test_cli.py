from __future__ import annotations

import json

import numpy as np
import pytest

from sdpexact import cli, gallery
from sdpexact.model import eval_constraints, problem_to_dict


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_member_on_the_variety(capsys):
    code, out, _ = run(capsys, "member", "four-points", "--u", "0", "0")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "Exact"
    assert np.allclose(data["minimizer"], [0, 0], atol=1e-8)


def test_member_text_format(capsys):
    code, out, _ = run(capsys, "member", "four-points", "--u", "1", "1", "--format", "text")
    assert code == 0 and out.strip() == "NotExact"


def test_degrees_table(capsys):
    code, out, _ = run(capsys, "degrees", "--table", "ed")
    assert code == 0 and "Boundary degrees" in out
    row = next(line for line in out.splitlines()[out.splitlines().index("Boundary degrees beta_ED(m,n)"):] if line.startswith("2 "))
    assert row.split()[1:3] == ["8", "24"]


def test_degrees_annotates_discrepancy(capsys):
    code, out, _ = run(capsys, "degrees", "--table", "sdp")
    assert code == 0 and "66*" in out and "56" in out


def test_degrees_formula(capsys):
    assert run(capsys, "degrees", "--formula", "beta_ed", "2", "3")[1].strip() == "24"
    code, _, err = run(capsys, "degrees", "--formula", "beta_ed", "5", "3")
    assert code == 2 and json.loads(err)["path"] == "--formula"


def test_exact_from_problem_file(tmp_path, capsys):
    qp = gallery.get("four-points").qp.ed([2.5, 2.1])
    f = tmp_path / "p.json"
    f.write_text(json.dumps(problem_to_dict(qp)))
    code, out, _ = run(capsys, "exact", str(f))
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "Exact" and np.allclose(d["minimizer"], [2, 2], atol=1e-8)
    # ED values include the dropped |u|^2
    assert d["objective_value"] == pytest.approx(0.26, abs=1e-7)


def test_exact_point_route(capsys):
    code, out, _ = run(capsys, "exact", "five-points", "--x", "0", "0", "0")
    d = json.loads(out)
    assert code == 0 and d["route"] == "PointRoute" and d["verdict"] == "Exact"


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", "maxcut-3")
    d = json.loads(out)
    assert code == 0 and d["status"] == "Optimal" and d["rank_X"] == 1
    assert d["primal_value"] == pytest.approx(-4, abs=1e-7)


def test_schema_error_reports_path(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps({"n": 2, "constraints": [{"A": [[1, 0], [0, 1]], "a": [0], "alpha": 1}]}))
    code, _, err = run(capsys, "exact", str(f))
    assert code == 2 and json.loads(err)["path"] == "$.constraints[0].a"


def test_invalid_json_and_unknown_example(tmp_path, capsys):
    f = tmp_path / "bad.json"
    f.write_text("{")
    assert run(capsys, "exact", str(f))[0] == 2
    assert run(capsys, "verify", "no-such-example")[0] == 2
    code, _, err = run(capsys, "member", "four-points", "--u", "1")
    assert code == 2 and json.loads(err)["path"] == "--u"


def test_region_sample_then_implicitize(tmp_path, capsys):
    csv_path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "region-sample", "twisted-cubic", "--count", "400", "--seed", "2", "--out", str(csv_path))
    assert code == 0
    code, out, _ = run(capsys, "implicitize", str(csv_path), "--max-degree", "9")
    d = json.loads(out)
    assert code == 0 and d["degree"] == 8


def test_outputs_are_deterministic(capsys):
    a = run(capsys, "region-sample", "eight-points", "--count", "20", "--seed", "4")[1]
    b = run(capsys, "region-sample", "eight-points", "--count", "20", "--seed", "4")[1]
    assert a == b and a.count("\n") == 21


def test_verify_twisted_cubic(capsys):
    code, out, _ = run(capsys, "verify", "twisted-cubic")
    assert code == 0 and out.startswith("twisted-cubic: PASS")


def test_emit_plot_csv(capsys):
    code, out, _ = run(capsys, "emit-plot", "maxcut-3", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "cloud,label,coords" and len(lines) == 401


def test_list(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0 and all(name in out for name in gallery.examples())


def test_gallery_variety_data_is_on_the_variety():
    for ex in gallery.examples().values():
        if ex.points is not None:
            for x in ex.points:
                assert np.abs(eval_constraints(ex.qp, x)).max() <= 1e-10
        if ex.parametrization is not None:
            for t in np.linspace(ex.parametrization.lower[0], ex.parametrization.upper[0], 7):
                assert np.abs(eval_constraints(ex.qp, ex.parametrization.func(np.array([t])))).max() <= 1e-10


def test_gallery_aliases():
    assert gallery.get("four-points") is gallery.get("voronoi-four-points")
    with pytest.raises(KeyError):
        gallery.get("nope")


@pytest.mark.parametrize("name", ["voronoi-four-points", "maxcut-3", "eight-points", "five-points", "six-points", "two-hyperboloids", "hyperbola-cutlocus"])
def test_gallery_verification_passes(name):
    ex = gallery.get(name)
    report = ex.verify(ex, 0)
    assert report.passed, report.render()
