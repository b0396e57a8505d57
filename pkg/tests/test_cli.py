import json
import os

import numpy as np
import pytest

import ppsim as pp
from ppsim.cli import canonical_json, main, matrix_from_json, matrix_to_json


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_state(tmp_path, rho, name="state.json"):
    path = tmp_path / name
    path.write_text(canonical_json({"matrix": matrix_to_json(rho)}))
    return str(path)


@pytest.fixture()
def chloroform_state(tmp_path):
    rho, _ = pp.prepare_pseudo_pure(pp.get_preset("chloroform"), 1)
    return write_state(tmp_path, rho)


# ---------------------------------------------------------------------------
# serialization helpers

def test_canonical_json_is_stable():
    payload = {"b": [1.0, 0.5], "a": {"x": True, "y": None}, "c": "text"}
    assert canonical_json(payload) == '{"a":{"x":true,"y":null},"b":[1,0.5],"c":"text"}'
    assert canonical_json(-0.0) == "0"
    assert canonical_json(1 / 3) == "0.3333333333"


def test_matrix_round_trip():
    rng = np.random.default_rng(1)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    np.testing.assert_allclose(matrix_from_json(matrix_to_json(m)), m)
    with pytest.raises(pp.InputError):
        matrix_from_json([[1.0, 2.0]])


# ---------------------------------------------------------------------------
# subcommands

def test_solve_outputs_known_root(capsys):
    code, out, _ = run_cli(capsys, "solve", "--system", "homonuclear-2", "--target", "00")
    assert code == 0
    data = json.loads(out)
    assert data["target_level"] == 1
    assert data["steps"] == [[3, 4, 2], [4, 2, 1]]
    assert any(
        max(abs(v - 77.40784245541707) for v in root) < 1e-6 for root in data["roots_deg"]
    )
    assert data["starts_tried"] == len(data["converged"])


def test_prepare_matches_golden_diagonal(capsys):
    code, out, _ = run_cli(capsys, "prepare", "--system", "chloroform", "--target", "00")
    assert code == 0
    data = json.loads(out)
    diag = [row[i][0] for i, row in enumerate(data["matrix"])]
    np.testing.assert_allclose(diag, [6.9905, -2.3303, -2.3303, -2.3303], atol=1e-3)
    assert data["pure_part"]["pure_coeff"] == pytest.approx(9.3208, abs=1e-3)
    assert data["pure_part"]["target"] == 1


def test_prepare_with_explicit_angles(capsys):
    code, out, _ = run_cli(
        capsys,
        "prepare", "--system", "chloroform", "--target", "00",
        "--angles", "127.13,186.01",
    )
    assert code == 0
    data = json.loads(out)
    assert data["angles_deg"] == [127.13, 186.01]


def test_run_program_end_to_end(capsys, tmp_path):
    program = tmp_path / "prep.pp"
    program.write_text("block { sel 3 4 x 127.13 ; sel 2 4 x 186.01 }\ncrush\n")
    code, out, _ = run_cli(
        capsys, "run", "--system", "chloroform", "--program", str(program)
    )
    assert code == 0
    data = json.loads(out)
    assert data["events"] == 2
    diag = [row[i][0] for i, row in enumerate(data["matrix"])]
    np.testing.assert_allclose(diag, [6.9905, -2.3303, -2.3303, -2.3303], atol=1e-3)


def test_run_with_basis_state_initial(capsys, tmp_path):
    program = tmp_path / "flip.pp"
    program.write_text("hard all x 180\n")
    code, out, _ = run_cli(
        capsys,
        "run", "--system", "homonuclear-2", "--program", str(program),
        "--initial", "00",
    )
    assert code == 0
    data = json.loads(out)
    diag = [row[i][0] for i, row in enumerate(data["matrix"])]
    np.testing.assert_allclose(diag, [0, 0, 0, 1], atol=1e-12)


def test_spectrum_csv(capsys, chloroform_state):
    code, out, _ = run_cli(
        capsys,
        "spectrum", "--system", "chloroform", "--state", chloroform_state, "--spin", "2",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "freq_hz,re,im,transition"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[3] for r in rows] == ["1-2", "3-4"]
    assert float(rows[0][0]) == pytest.approx(214.95 / 2)
    assert abs(float(rows[0][2])) == pytest.approx(9.3207, abs=1e-3)
    assert abs(complex(float(rows[1][1]), float(rows[1][2]))) < 1e-9


def test_tomo_reports_error_and_seed(capsys, chloroform_state):
    code, out, _ = run_cli(
        capsys,
        "tomo", "--system", "chloroform", "--state", chloroform_state,
        "--noise", "0.01", "--seed", "5",
    )
    assert code == 0
    data = json.loads(out)
    assert data["seed"] == 5
    assert 0.0 < data["max_rel_error"] < 0.2
    assert data["settings_used"] == 9


def test_tomo_seed_from_environment(capsys, chloroform_state, monkeypatch):
    monkeypatch.setenv("PPSIM_SEED", "12")
    _, out_env, _ = run_cli(
        capsys,
        "tomo", "--system", "chloroform", "--state", chloroform_state, "--noise", "0.01",
    )
    monkeypatch.delenv("PPSIM_SEED")
    _, out_explicit, _ = run_cli(
        capsys,
        "tomo", "--system", "chloroform", "--state", chloroform_state,
        "--noise", "0.01", "--seed", "12",
    )
    assert out_env == out_explicit
    monkeypatch.setenv("PPSIM_SEED", "notanumber")
    code, _, err = run_cli(
        capsys,
        "tomo", "--system", "chloroform", "--state", chloroform_state, "--noise", "0.01",
    )
    assert code == 1 and "PPSIM_SEED" in err


def test_repeated_runs_are_byte_identical(capsys, chloroform_state):
    argv = (
        "tomo", "--system", "chloroform", "--state", chloroform_state,
        "--noise", "0.02", "--seed", "99",
    )
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second
    _, p1, _ = run_cli(capsys, "prepare", "--system", "chloroform", "--target", "00")
    _, p2, _ = run_cli(capsys, "prepare", "--system", "chloroform", "--target", "00")
    assert p1 == p2


def test_hogg_subcommand(capsys, chloroform_state):
    code, out, _ = run_cli(
        capsys,
        "hogg", "--system", "chloroform", "--formula", "!V1&V2",
        "--state", chloroform_state,
    )
    assert code == 0
    data = json.loads(out)
    assert data["solution"] == "01"
    assert data["probabilities"]["01"] == pytest.approx(1.0, abs=1e-10)
    assert sum(data["probabilities"].values()) == pytest.approx(1.0, abs=1e-9)


def test_hogg_prepares_when_no_state_given(capsys):
    code, out, _ = run_cli(capsys, "hogg", "--system", "chloroform", "--formula", "V1&V2")
    assert code == 0
    assert json.loads(out)["probabilities"]["11"] == pytest.approx(1.0, abs=1e-10)


def test_plot_emits_svg(capsys, chloroform_state, tmp_path):
    out_file = tmp_path / "sticks.svg"
    code, out, _ = run_cli(
        capsys,
        "plot", "--system", "chloroform", "--state", chloroform_state,
        "--out", str(out_file),
    )
    assert code == 0 and out == ""
    text = out_file.read_text()
    assert text.startswith("<svg") and "</svg>" in text


def test_system_loading_from_file(capsys, tmp_path):
    path = tmp_path / "sys.json"
    path.write_text(json.dumps(pp.get_preset("chloroform").to_dict()))
    code, out, _ = run_cli(capsys, "solve", "--system", str(path), "--target", "00")
    assert code == 0
    assert any(
        max(abs(a - b) for a, b in zip(root, (127.13, 186.01))) < 0.5
        for root in json.loads(out)["roots_deg"]
    )


# ---------------------------------------------------------------------------
# failure modes

def error_payload(err):
    payload = json.loads(err.strip())
    assert set(payload) == {"code", "message", "context"}
    return payload


def test_exit_code_for_bad_inputs(capsys, tmp_path):
    cases = [
        ("run", "--system", "chloroform", "--program", str(tmp_path / "missing.pp")),
        ("solve", "--system", "chloroform", "--target", "001"),
        ("solve", "--system", "chloroform", "--target", "0x"),
        ("solve", "--system", "no-such-preset", "--target", "00"),
        ("prepare", "--system", "chloroform", "--target", "00", "--angles", "1,bad"),
        ("solve", "--system", "chloroform"),
    ]
    for argv in cases:
        code, _, err = run_cli(capsys, *argv)
        assert code == 1, argv
        assert error_payload(err)["code"] == 1


def test_exit_code_for_parse_errors(capsys, tmp_path):
    bad = tmp_path / "bad.pp"
    bad.write_text("sel 3 3 x 10\n")
    code, _, err = run_cli(capsys, "run", "--system", "chloroform", "--program", str(bad))
    assert code == 1
    assert "degenerate transition" in error_payload(err)["message"]


def test_exit_code_for_malformed_state(capsys, tmp_path):
    path = tmp_path / "state.json"
    path.write_text('{"matrix": [[1, 2], [3, 4]]}')
    code, _, err = run_cli(
        capsys, "spectrum", "--system", "chloroform", "--state", str(path), "--spin", "1"
    )
    assert code == 1


def test_exit_code_for_no_solution(capsys):
    code, _, err = run_cli(
        capsys, "solve", "--system", "homonuclear-2", "--target", "00", "--tol", "0"
    )
    assert code == 2
    assert error_payload(err)["code"] == 2


def test_exit_code_for_contract_violations(capsys, tmp_path):
    thermal = write_state(tmp_path, pp.thermal_deviation(pp.get_preset("chloroform")))
    code, _, err = run_cli(
        capsys, "hogg", "--system", "chloroform", "--formula", "V1&V2", "--state", thermal
    )
    assert code == 3
    payload = error_payload(err)
    assert payload["code"] == 3 and payload["context"]["command"] == "hogg"
