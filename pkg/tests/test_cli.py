"""Command-line workbench: exit codes, determinism, serialized artifacts."""

import json
import math

import numpy as np
import pytest

from multicone import (MulticoneCertificate, ParseError, SingularMatrix,
                       certify_strong_invariance, load_config)
from multicone.cli import main
from multicone.config import validate
from multicone.semigroup import MatrixTuple


def write_job(tmp_path, payload, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


PAIR = {"matrices": [[2, 1, 1, 1], [2, 1, 1, 2]],
        "enum_depth": 8, "cylinder_depth": 4}


class TestConfig:
    def test_row_major_and_nested_forms_agree(self, tmp_path):
        a = load_config(write_job(tmp_path, PAIR, "a.json"))
        nested = dict(PAIR, matrices=[[[2, 1], [1, 1]], [[2, 1], [1, 2]]])
        b = load_config(write_job(tmp_path, nested, "b.json"))
        assert a.matrices == b.matrices

    def test_singular_matrix_reports_index(self, tmp_path):
        path = write_job(tmp_path, {"matrices": [[1, 2, 2, 4]]})
        with pytest.raises(SingularMatrix) as exc:
            load_config(path)
        assert exc.value.index == 0

    def test_negative_s_rejected(self):
        with pytest.raises(ParseError) as exc:
            validate({"matrices": [[2, 1, 1, 1]], "s": -1.0})
        assert "s must be > 0" in str(exc.value)

    def test_unknown_field_rejected(self):
        with pytest.raises(ParseError):
            validate({"matrices": [[2, 1, 1, 1]], "depht": 4})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_config(str(tmp_path / "absent.json"))


class TestExitCodes:
    def test_classify_success(self, tmp_path, capsys):
        path = write_job(tmp_path, PAIR)
        assert main(["classify", "--config", path, "--quiet"]) == 0

    def test_parse_failures_exit_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("not json")
        assert main(["classify", "--config", str(bad), "--quiet"]) == 3
        sing = write_job(tmp_path, {"matrices": [[1, 2, 2, 4]]}, "sing.json")
        assert main(["classify", "--config", sing, "--quiet"]) == 3
        neg = write_job(tmp_path, dict(PAIR, s=-2.0), "neg.json")
        assert main(["classify", "--config", neg, "--quiet"]) == 3

    def test_cap_exceeded_exit_4(self, tmp_path, capsys):
        path = write_job(tmp_path, dict(PAIR, enum_depth=40))
        assert main(["classify", "--config", path, "--quiet"]) == 4
        over = write_job(tmp_path, PAIR, "over.json")
        assert main(["classify", "--config", over, "--quiet",
                     "--cylinder-depth", "30"]) == 4

    def test_inconclusive_exit_2(self, tmp_path, capsys):
        theta = 0.6435
        c, s = math.cos(theta), math.sin(theta)
        job = {"matrices": [[2.0, 0.0, 0.0, 0.5],
                            [2 * c, -0.5 * s, 2 * s, 0.5 * c]],
               "enum_depth": 8, "cylinder_depth": 4}
        path = write_job(tmp_path, job)
        assert main(["multicone", "--config", path, "--quiet"]) == 2
        assert main(["classify", "--config", path, "--quiet"]) == 2


class TestDeterminism:
    def test_json_and_csv_byte_identical(self, tmp_path, capsys):
        path = write_job(tmp_path, dict(PAIR, seed=7))
        outs = []
        for tag in ("x", "y"):
            j = tmp_path / f"{tag}.json"
            c = tmp_path / f"{tag}.csv"
            assert main(["classify", "--config", path, "--quiet",
                         "--json", str(j), "--csv", str(c)]) == 0
            outs.append((j.read_bytes(), c.read_bytes()))
        assert outs[0] == outs[1]

    def test_runtimes_stay_out_of_json(self, tmp_path, capsys):
        path = write_job(tmp_path, PAIR)
        j = tmp_path / "r.json"
        main(["pressure", "--config", path, "--quiet", "--json", str(j)])
        assert "runtime" not in j.read_text()


class TestArtifacts:
    def test_pressure_csv_schema(self, tmp_path, capsys):
        path = write_job(tmp_path, PAIR)
        c = tmp_path / "p.csv"
        assert main(["pressure", "--config", path, "--quiet", "--depth", "6",
                     "--csv", str(c)]) == 0
        lines = c.read_text().strip().splitlines()
        assert lines[0] == "depth,value,bound_type"
        assert len(lines) == 1 + 2 * 6
        kinds = {ln.split(",")[2] for ln in lines[1:]}
        assert kinds == {"upper", "lower_certified"}

    def test_ratio_csv_schema(self, tmp_path, capsys):
        path = write_job(tmp_path, PAIR)
        c = tmp_path / "b.csv"
        assert main(["equilibrium", "--config", path, "--quiet",
                     "--csv", str(c)]) == 0
        lines = c.read_text().strip().splitlines()
        assert lines[0] == "depth,band_min,band_max"
        assert len(lines) >= 4

    def test_multicone_certificate_roundtrip(self, tmp_path, capsys):
        path = write_job(tmp_path, PAIR)
        j = tmp_path / "m.json"
        assert main(["multicone", "--config", path, "--quiet",
                     "--json", str(j)]) == 0
        data = json.loads(j.read_text())
        cert = MulticoneCertificate.from_dict(data["domination"]["certificate"])
        t = MatrixTuple([np.array(m, float).reshape(2, 2)
                         for m in PAIR["matrices"]])
        re, bad, _wit = certify_strong_invariance(t, cert.cone)
        assert bad is None
        assert re.margin == pytest.approx(cert.margin, rel=1e-12)

    def test_classify_json_schema(self, tmp_path, capsys):
        path = write_job(tmp_path, PAIR)
        j = tmp_path / "c.json"
        main(["classify", "--config", path, "--quiet", "--json", str(j)])
        d = json.loads(j.read_text())
        assert d["kind"] == "classify"
        assert d["classification"]["class"] == "HolderGibbs"
        assert d["classification"]["irreducible"] is True
        assert d["config"]["matrices"] == [[2, 1, 1, 1], [2, 1, 1, 2]]
        # measure masses are keyed by words over "1".."9"
        for key in d["measure"]["masses"]:
            assert key == "" or set(key) <= set("123456789")

    def test_plot_directory(self, tmp_path, capsys):
        path = write_job(tmp_path, PAIR)
        figs = tmp_path / "figs"
        assert main(["classify", "--config", path, "--quiet",
                     "--plot", str(figs)]) == 0
        names = sorted(p.name for p in figs.iterdir())
        assert names == ["bands.png", "cone.png", "kappa.png", "pressure.png"]
        for p in figs.iterdir():
            assert p.stat().st_size > 1000


class TestExample1:
    def test_example1_reports_and_exit(self, tmp_path, capsys):
        j = tmp_path / "e.json"
        assert main(["example1", "--quiet", "--json", str(j)]) == 0
        d = json.loads(j.read_text())
        assert d["ok"] is True
        assert [c["got"] for c in d["cases"]] == \
            ["HolderGibbs", "QuasiBernoulli", "GibbsTypeOnly"]
        assert [c["expected"] for c in d["cases"]] == \
            ["HolderGibbs", "QuasiBernoulli", "GibbsTypeOnly"]

    def test_example1_text_mentions_verdicts(self, capsys):
        assert main(["example1"]) == 0
        out = capsys.readouterr().out
        assert "example1: ok" in out
        for name in ("HolderGibbs", "QuasiBernoulli", "GibbsTypeOnly"):
            assert name in out
