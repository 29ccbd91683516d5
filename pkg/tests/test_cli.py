"""End-to-end checks of the command line layer: configs, runs, artifacts."""

import json

import pytest

from cmclab.cli import main
from cmclab.config import build_domain, config_from_dict, load_config
from cmclab.errors import ConfigError


def write_cfg(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


class TestConfigValidation:
    def test_missing_seed(self):
        with pytest.raises(ConfigError, match="seed"):
            config_from_dict({"scenario": "barrier-identities"})

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError, match=r"\$\.scenario"):
            config_from_dict({"scenario": "mystery", "seed": 1})

    def test_extra_top_level_key(self):
        with pytest.raises(ConfigError):
            config_from_dict(
                {"scenario": "barrier-identities", "seed": 1, "surprise": 2}
            )

    def test_tau_must_exceed_one(self):
        with pytest.raises(ConfigError, match=r"\$\.tau"):
            config_from_dict({"scenario": "bounded-data", "seed": 1, "tau": 0.5})

    def test_nested_detector_error_names_path(self):
        with pytest.raises(ConfigError, match=r"\$\.detector\.fit_tol"):
            config_from_dict(
                {
                    "scenario": "spruck-ramp",
                    "seed": 1,
                    "detector": {"fit_tol": -1.0},
                }
            )

    def test_lens_requires_arc_radius(self):
        with pytest.raises(ConfigError, match=r"\$\.domain\.arc_radius"):
            build_domain({"kind": "lens", "half_gap": 0.6})

    def test_lens_west_radius_must_clear_gap(self):
        with pytest.raises(ConfigError, match=r"\$\.domain"):
            build_domain(
                {
                    "kind": "lens",
                    "half_gap": 0.6,
                    "arc_radius": 1.0,
                    "arc_radius_west": 0.5,
                }
            )

    def test_defaults_fill_in(self):
        cfg = config_from_dict({"scenario": "unduloid-sequence", "seed": 3})
        assert cfg.get("tau") == 10.0
        assert cfg.get("h") == pytest.approx(1 / 256)
        assert cfg.get("t_factors") == [0.8, 0.9, 0.95, 0.99]

    def test_override_merges_with_defaults(self):
        cfg = config_from_dict(
            {"scenario": "spruck-ramp", "seed": 3, "tau": 150.0}
        )
        assert cfg.get("tau") == 150.0
        assert cfg.get("n_list") == [1, 2, 4, 8, 16, 32]
        assert cfg.get("data")["support"] == [0.15, 0.85]

    def test_nested_override_keeps_siblings(self):
        cfg = config_from_dict(
            {"scenario": "spruck-ramp", "seed": 3, "data": {"shift": 4.0}}
        )
        assert cfg.get("data")["shift"] == 4.0
        assert cfg.get("data")["support"] == [0.15, 0.85]

    def test_echo_is_json_serializable(self):
        cfg = config_from_dict({"scenario": "bounded-data", "seed": 9})
        echo = cfg.echo()
        assert echo["scenario"] == "bounded-data"
        assert echo["seed"] == 9
        json.dumps(echo)

    def test_load_config_rejects_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_load_config_rejects_non_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="root"):
            load_config(path)


class TestValidateCommand:
    def test_valid_config(self, tmp_path, capsys):
        path = write_cfg(tmp_path, {"scenario": "barrier-identities", "seed": 1})
        assert main(["validate", str(path)]) == 0
        assert "configuration valid" in capsys.readouterr().out

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        path = write_cfg(tmp_path, {"scenario": "barrier-identities"})
        assert main(["validate", str(path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert main(["validate", str(tmp_path / "absent.json")]) == 2
        assert "error" in capsys.readouterr().err


class TestRunCommand:
    def test_barrier_run_passes(self, tmp_path, capsys):
        path = write_cfg(tmp_path, {"scenario": "barrier-identities", "seed": 1})
        out_dir = tmp_path / "out"
        assert main(["run", str(path), "--out", str(out_dir)]) == 0
        stdout = capsys.readouterr().out
        assert "overall pass" in stdout
        assert "PASS" in stdout and "FAIL" not in stdout
        report = json.loads((out_dir / "report.json").read_text())
        assert report["pass"] is True
        assert report["config"]["scenario"] == "barrier-identities"
        assert (out_dir / "plots" / "overview.svg").exists()

    def test_output_dir_from_config(self, tmp_path, capsys):
        out_dir = tmp_path / "from_cfg"
        path = write_cfg(
            tmp_path,
            {
                "scenario": "barrier-identities",
                "seed": 1,
                "output_dir": str(out_dir),
            },
        )
        assert main(["run", str(path)]) == 0
        assert (out_dir / "report.json").exists()

    def test_failed_check_exits_1(self, tmp_path, capsys):
        path = write_cfg(
            tmp_path,
            {
                "scenario": "bounded-data",
                "seed": 1,
                "n_list": [1, 2, 4],
                "tau": 3.0,
            },
        )
        out_dir = tmp_path / "out"
        assert main(["run", str(path), "--out", str(out_dir)]) == 1
        stdout = capsys.readouterr().out
        assert "overall FAIL" in stdout
        report = json.loads((out_dir / "report.json").read_text())
        assert report["pass"] is False

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        path = write_cfg(tmp_path, {"scenario": "barrier-identities", "seed": "x"})
        assert main(["run", str(path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_checks_echoed_one_line_each(self, tmp_path, capsys):
        path = write_cfg(tmp_path, {"scenario": "barrier-identities", "seed": 1})
        out_dir = tmp_path / "out"
        main(["run", str(path), "--out", str(out_dir)])
        stdout = capsys.readouterr().out
        report = json.loads((out_dir / "report.json").read_text())
        status_lines = [
            ln for ln in stdout.splitlines() if ln.startswith(("PASS", "FAIL"))
        ]
        assert len(status_lines) == len(report["checks"])


class TestDeterminism:
    def test_repeat_runs_agree(self, tmp_path, capsys):
        path = write_cfg(tmp_path, {"scenario": "barrier-identities", "seed": 1})
        dirs = [tmp_path / "a", tmp_path / "b"]
        for d in dirs:
            assert main(["run", str(path), "--out", str(d)]) == 0
        reports = []
        for d in dirs:
            rep = json.loads((d / "report.json").read_text())
            rep.pop("timings", None)
            reports.append(rep)
        assert reports[0] == reports[1]
        svgs = [(d / "plots" / "overview.svg").read_bytes() for d in dirs]
        assert svgs[0] == svgs[1]


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("rerender")
    path = write_cfg(tmp, {"scenario": "unduloid-sequence", "seed": 2, "h": 1 / 64})
    out_dir = tmp / "out"
    code = main(["run", str(path), "--out", str(out_dir)])
    assert code in (0, 1)
    return out_dir


class TestReportCommand:
    def test_rerender_is_byte_identical(self, run_dir, capsys):
        svg_path = run_dir / "plots" / "overview.svg"
        original = svg_path.read_bytes()
        svg_path.unlink()
        assert main(["report", str(run_dir)]) == 0
        assert "rendered" in capsys.readouterr().out
        assert svg_path.read_bytes() == original

    def test_heat_layer_present(self, run_dir):
        svg = (run_dir / "plots" / "overview.svg").read_text()
        assert "<svg" in svg and "rect" in svg

    def test_report_without_artifacts_exits_2(self, tmp_path, capsys):
        assert main(["report", str(tmp_path)]) == 2
        assert "no report found" in capsys.readouterr().err
