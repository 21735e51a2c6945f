"""CLI grammar, exit codes, format discipline, and run-to-run determinism."""

import csv
import io
import json

import pytest

from qcap import channels as qch
from qcap import cli, serialize


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_info_json(capsys):
    code, out, _ = run_cli(capsys, "info", "--channel", "builtin:phase_flip:0.25",
                           "--seed", "1")
    assert code == 0
    record = json.loads(out)
    assert record["config"]["master_seed"] == 1
    assert record["report"]["is_unital"] is True
    assert record["report"]["coherent_information"] == pytest.approx(0.188722, abs=1e-6)


def test_info_from_file(tmp_path, capsys):
    path = tmp_path / "chan.json"
    serialize.save_channel(qch.identity_channel(2), path)
    code, out, _ = run_cli(capsys, "info", "--channel", str(path), "--seed", "0")
    assert code == 0
    assert json.loads(out)["report"]["length"] == 1


def test_bound_identity(capsys):
    code, out, _ = run_cli(capsys, "bound", "--channel", "builtin:identity:4",
                           "--code-dim", "2", "--samples", "3", "--seed", "11")
    assert code == 0
    reports = json.loads(out)["reports"]
    assert len(reports) == 3
    for rep in reports:
        assert rep["bound_kraus"] == pytest.approx(1.0, abs=1e-10)
        assert rep["bound_states"] == pytest.approx(1.0, abs=1e-10)


def test_ensemble_passes_and_embeds_config(capsys):
    code, out, _ = run_cli(capsys, "ensemble", "--channel", "builtin:phase_flip:0.25",
                           "--code-dim", "2", "--samples", "500", "--seed", "5")
    assert code == 0
    record = json.loads(out)
    assert record["deviation_sq"]["pass"] is True
    assert record["fidelity_bound"]["pass"] is True
    assert record["config"]["samples"] == 500


def test_moments_csv_round_trip(capsys):
    code, out, _ = run_cli(capsys, "moments", "--channel", "builtin:identity:2",
                           "--samples", "2000", "--seed", "3", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["name", "estimate", "std_error", "target", "passed"]
    assert len(rows) == 4
    for row in rows[1:]:
        estimate = float(row[1])            # 17-digit cells parse back exactly
        assert 0.0 <= estimate <= 1.0
        assert row[4] == "true"


def test_typicality_reports(capsys):
    code, out, _ = run_cli(capsys, "typicality", "--channel", "builtin:phase_flip:0.1",
                           "--epsilon", "0.1", "--n-min", "2", "--n-max", "8",
                           "--seed", "2")
    assert code == 0
    record = json.loads(out)
    assert record["counts_within_bounds"] is True
    assert record["norms_within_bounds"] is True
    assert len(record["sequence_reports"]) == 7
    assert record["kraus_weights"] == pytest.approx([0.9, 0.1])


def test_rate_demo_csv_columns(capsys):
    code, out, _ = run_cli(capsys, "rate-demo", "--channel", "builtin:phase_flip:0.25",
                           "--rate", "0.1", "--epsilon", "0.2", "--n-min", "2",
                           "--n-max", "6", "--seed", "2", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "K_n", "reduced_length", "transmission", "penalty", "bound"]
    assert [r[0] for r in rows[1:]] == ["2", "3", "4", "5", "6"]


def test_rate_demo_includes_unital_curve(capsys):
    code, out, _ = run_cli(capsys, "rate-demo", "--channel", "builtin:phase_flip:0.25",
                           "--rate", "0.1", "--epsilon", "0.01", "--n-min", "2",
                           "--n-max", "5", "--seed", "2")
    record = json.loads(out)
    assert code == 0
    assert record["geometric_decay_expected"] is True
    assert "unital_curve" in record
    majorants = [row["penalty_majorant"] for row in record["rows"]]
    assert all(b < a for a, b in zip(majorants, majorants[1:]))


# ---------------------------------------------------------------- exit codes

def test_exit_2_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{broken")
    code, _, err = run_cli(capsys, "info", "--channel", str(path), "--seed", "0")
    assert code == 2 and "error" in err


def test_exit_3_non_cp_channel(tmp_path, capsys):
    data = serialize.channel_to_dict(qch.identity_channel(2))
    data["kraus"].append(data["kraus"][0])
    path = tmp_path / "noncp.json"
    path.write_text(json.dumps(data))
    code, _, err = run_cli(capsys, "info", "--channel", str(path), "--seed", "0")
    assert code == 3 and "error" in err


def test_exit_2_missing_required_option(capsys):
    code, _, err = run_cli(capsys, "bound", "--channel", "builtin:identity:2",
                           "--seed", "0")
    assert code == 2 and "--code-dim" in err


def test_exit_2_bad_builtin_params(capsys):
    code, _, err = run_cli(capsys, "info", "--channel", "builtin:phase_flip:oops",
                           "--seed", "0")
    assert code == 2
    code, _, err = run_cli(capsys, "info", "--channel", "builtin:wormhole:1", "--seed", "0")
    assert code == 2


def test_exit_3_invalid_probability(capsys):
    code, _, err = run_cli(capsys, "info", "--channel", "builtin:phase_flip:1.5",
                           "--seed", "0")
    assert code == 2        # parameter validation is an input error


def test_exit_4_cap_exceeded(capsys):
    code, _, err = run_cli(capsys, "typicality", "--channel", "builtin:phase_flip:0.25",
                           "--epsilon", "1.5", "--n-min", "20", "--n-max", "20",
                           "--seed", "0")
    assert code == 4 and "error" in err


def test_seed_is_required(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["info", "--channel", "builtin:identity:2"])
    assert exc.value.code == 2


# ---------------------------------------------------------------- determinism

def test_repeat_runs_byte_identical(capsys):
    argv = ["ensemble", "--channel", "builtin:haar_random:2,2,2", "--code-dim", "2",
            "--samples", "64", "--seed", "123"]
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second


def test_thread_count_does_not_change_bytes(capsys):
    base = ["ensemble", "--channel", "builtin:phase_flip:0.25", "--code-dim", "2",
            "--samples", "96", "--seed", "7"]
    _, serial, _ = run_cli(capsys, *base, "--threads", "1")
    _, threaded, _ = run_cli(capsys, *base, "--threads", "8")
    assert serial == threaded


def test_out_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "info", "--channel", "builtin:identity:2",
                           "--seed", "0", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["report"]["length"] == 1
