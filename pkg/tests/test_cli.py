import json

import jsonschema
import numpy as np
import pytest

from eurqsi.cli import main
from eurqsi.linalg import tensor
from eurqsi.serialize import save_scenario
from eurqsi.states import (
    DensityOperator,
    KET_PLUS_Y,
    ket_bra,
    maximally_mixed,
    pauli_pvm,
)

EXAMPLES_SCHEMA = {
    "type": "object",
    "required": ["command", "cases", "all_ok", "checks"],
    "properties": {
        "command": {"const": "examples"},
        "cases": {"type": "integer", "minimum": 4, "maximum": 4},
        "all_ok": {"type": "boolean"},
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["case", "check", "residual", "tolerance", "ok"],
                "properties": {
                    "case": {"type": "string"},
                    "check": {"type": "string"},
                    "residual": {"type": "number", "minimum": 0},
                    "tolerance": {"type": "number", "exclusiveMinimum": 0},
                    "ok": {"type": "boolean"},
                },
            },
        },
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "relation_id", "H_XB", "H_ZB", "H_ZE", "H_AB", "c", "f", "lhs",
        "rhs_original", "rhs_refined", "slack_original", "slack_refined",
        "entropy_tolerance", "fidelity_tolerance",
    ],
}


@pytest.fixture
def max_uncertainty_scenario(tmp_path):
    rho = DensityOperator(
        tensor(ket_bra(KET_PLUS_Y), maximally_mixed(2)), (2, 2), ("A", "B")
    )
    path = tmp_path / "scenario.json"
    save_scenario(path, rho, pauli_pvm("X"), pauli_pvm("Z"))
    return str(path)


class TestExamplesCommand:
    def test_passes_and_validates_schema(self, capsys):
        assert main(["examples"]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload, EXAMPLES_SCHEMA)
        assert payload["all_ok"] is True

    def test_tolerance_override_fails(self, capsys):
        assert main(["examples", "--tolerance", "1e-15"]) == 1
        payload = json.loads(capsys.readouterr().out)
        assert payload["all_ok"] is False

    def test_table_format(self, capsys):
        assert main(["examples", "--format", "table"]) == 0
        out = capsys.readouterr().out
        assert "max_uncertainty" in out and "all_ok: True" in out

    def test_replay_is_byte_identical(self, capsys):
        main(["examples"])
        first = capsys.readouterr().out
        main(["examples"])
        assert capsys.readouterr().out == first


class TestCheckCommand:
    def test_max_uncertainty_scenario(self, capsys, max_uncertainty_scenario):
        assert main(["check", "--scenario", max_uncertainty_scenario]) == 0
        payload = json.loads(capsys.readouterr().out)
        jsonschema.validate(payload["report"], REPORT_SCHEMA)
        assert abs(payload["report"]["slack_refined"]) < 1e-6
        assert abs(payload["report"]["f"] - 0.5) < 1e-6

    def test_malformed_json_exit_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"dims": [2, 2], "state": [[')
        assert main(["check", "--scenario", str(path)]) == 2
        err = capsys.readouterr().err
        assert "line" in err and "column" in err

    def test_missing_file_exit_2(self):
        assert main(["check", "--scenario", "/nonexistent/s.json"]) == 2

    def test_non_projective_pvm_exit_3(self, tmp_path, capsys,
                                        max_uncertainty_scenario):
        data = json.loads(open(max_uncertainty_scenario).read())
        data["x_pvm"][0][0][0] = [0.9, 0.0]
        path = tmp_path / "nonproj.json"
        path.write_text(json.dumps(data))
        assert main(["check", "--scenario", str(path)]) == 3
        assert "idempotent" in capsys.readouterr().err

    def test_csv_projection(self, capsys, max_uncertainty_scenario):
        assert main(["check", "--scenario", max_uncertainty_scenario,
                     "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "key,value"
        assert any(line.startswith("slack_refined,") for line in lines)


class TestFuzzCommand:
    def test_small_run_passes(self, capsys):
        assert main(["fuzz", "--trials", "5", "--dim", "2", "--seed", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["min_slack"] >= -1e-6
        assert payload["seed"] == 1  # replayable

    def test_replay_byte_identical(self, capsys):
        args = ["fuzz", "--trials", "3", "--dim", "2", "--seed", "4"]
        main(args)
        first = capsys.readouterr().out
        main(args)
        assert capsys.readouterr().out == first

    def test_dim3_random_pvms(self, capsys):
        assert main(["fuzz", "--trials", "2", "--dim", "3", "--seed", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["pvm_mode"] == "random"


class TestExperimentCommand:
    def test_bloch_within_4_sigma(self, capsys):
        assert main(["experiment", "1", "--shots", "8192", "--seed", "6"]) == 0
        payload = json.loads(capsys.readouterr().out)
        se = float(np.sqrt(0.25 / 8192))
        got = payload["bloch_estimate"]
        for g, want in zip(got, (1.0, 0.0, 0.0)):
            assert abs(g - want) <= 8 * se
        assert payload["seed"] == 6

    def test_experiment_6_zz_table(self, capsys):
        assert main(["experiment", "6", "--shots", "8192", "--seed", "3"]) == 0
        payload = json.loads(capsys.readouterr().out)
        rows = {r["outcome"]: r for r in payload["tables"]["ZZ"]["outcomes"]}
        se = float(np.sqrt(0.25 / 8192))
        assert abs(rows["00"]["frequency"] - 0.5) <= 4 * se
        assert abs(rows["11"]["frequency"] - 0.5) <= 4 * se
        assert rows["01"]["count"] == 0 and rows["10"]["count"] == 0

    def test_csv_columns(self, capsys):
        assert main(["experiment", "2", "--shots", "64", "--seed", "1",
                     "--format", "csv"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "table,outcome,count,frequency,stderr"
        assert len(lines) == 1 + 3 * 2  # three bases, two outcomes each

    def test_noise_flag_parsing(self, capsys):
        assert main(["experiment", "1", "--shots", "64", "--seed", "1",
                     "--noise", "depolarizing=0.05,readout=0.01"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["noise"]["depolarizing_p"] == 0.05
        assert payload["noise"]["readout_flip"] == 0.01
        assert main(["experiment", "1", "--noise", "bogus"]) == 2

    def test_outdir_env_writes_file(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("EURQSI_OUTDIR", str(tmp_path / "out"))
        assert main(["experiment", "1", "--shots", "64", "--seed", "9"]) == 0
        stdout = capsys.readouterr().out
        written = (tmp_path / "out" / "experiment_1.json").read_text()
        assert written == stdout

    def test_replay_byte_identical(self, capsys):
        args = ["experiment", "5", "--shots", "256", "--seed", "12"]
        main(args)
        first = capsys.readouterr().out
        main(args)
        assert capsys.readouterr().out == first
