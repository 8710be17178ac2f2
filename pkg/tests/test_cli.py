import csv
import json
import math
import numpy as np
import pytest
import scipy.linalg as spl
from conftest import pauli_hamiltonian
from sincheb.cli.problem import parse_problem, pauli_matrix, problem_from_dict, two_qubit_gates, write_problem
from sincheb.cli.sincheb import plan_columns, run_cli, run_columns, version
from sincheb.common.core import InvalidArgumentError, NormalizationError, ProblemParseError, e_success, e_validation
from sincheb.pipeline.estimator import exact_amplitude

commuting_problem = {
    "qubits": 2,
    "stages": [{"H": [[0.3, "ZI"], [0.4, "ZZ"], [0.2, "IZ"]], "T": 3.0}],
    "psi1": [0.5, 0.5, 0.5, 0.5],
    "psi2": [0.5, 0.5, 0.5, 0.5],
}


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "commuting.json"
    path.write_text(json.dumps(commuting_problem))
    return path


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestProblemFile:
    def test_single_qubit_phase(self):
        problem = problem_from_dict({"qubits": 1, "stages": [{"H": [{"coeff": 0.5, "pauli": "Z"}], "T": math.pi}], "psi1": "0", "psi2": "|0>"})
        assert exact_amplitude(problem) == pytest.approx(1j, abs=1e-12)

    def test_term_norms(self):
        problem = problem_from_dict({"qubits": 2, "stages": [{"H": [[0.4, "XX"], [0.3, "ZI"], [0.3, "IZ"]], "T": 1.0}], "psi1": 0, "psi2": "00"})
        assert problem.stages[0].hamiltonian.norms == pytest.approx((0.4, 0.3, 0.3))
        assert np.allclose(problem.stages[0].v, np.eye(4))

    def test_norm_sum_above_one(self):
        data = {"qubits": 1, "stages": [{"H": [[0.6, "X"], [0.6, "Z"]], "T": 2.0}], "psi1": "0", "psi2": "1"}
        with pytest.raises(NormalizationError):
            problem_from_dict(data)
        problem = problem_from_dict(data, auto_normalize=True)
        assert problem.stages[0].t == pytest.approx(2.4)
        h = 0.6 * pauli_matrix("X") + 0.6 * pauli_matrix("Z")
        expected = (spl.expm(2j * h) @ np.array([0, 1]))[0]
        assert exact_amplitude(problem) == pytest.approx(expected, abs=1e-12)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "qubits": 1,\n  "stages": ,\n  "psi1": "0"\n}\n')
        with pytest.raises(ProblemParseError) as err:
            parse_problem(path)
        assert err.value.line == 3
        assert "line 3" in str(err.value)

    def test_missing_state(self):
        with pytest.raises(ProblemParseError) as err:
            problem_from_dict({"qubits": 1, "stages": [{"H": [[0.5, "Z"]], "T": 1.0}], "psi2": "0"})
        assert err.value.field == "psi1"

    def test_missing_time(self):
        with pytest.raises(ProblemParseError) as err:
            problem_from_dict({"qubits": 1, "stages": [{"H": [[0.5, "Z"]]}], "psi1": "0", "psi2": "0"})
        assert err.value.field == "stages[0].T"

    @pytest.mark.parametrize("pauli", ["XQ", "X", "XXX"])
    def test_bad_pauli_string(self, pauli):
        with pytest.raises(ProblemParseError):
            problem_from_dict({"qubits": 2, "stages": [{"H": [[0.5, pauli]], "T": 1.0}], "psi1": "00", "psi2": "00"})

    def test_named_gates(self):
        def stage_v(v):
            data = {"qubits": 2, "stages": [{"H": [[0.5, "ZZ"]], "T": 1.0, "V": v}], "psi1": "00", "psi2": "00"}
            return problem_from_dict(data).stages[0].v

        assert np.allclose(stage_v("CNOT 0 1"), two_qubit_gates["CNOT"])
        assert np.allclose(stage_v("X 1"), np.kron(np.eye(2), pauli_matrix("X")))
        assert np.allclose(stage_v(["X 0", "Z 0"]), np.kron(pauli_matrix("X") @ pauli_matrix("Z"), np.eye(2)))

    def test_unknown_gate(self):
        with pytest.raises(ProblemParseError):
            problem_from_dict({"qubits": 2, "stages": [{"H": [[0.5, "ZZ"]], "T": 1.0, "V": "TOFFOLI 0 1"}], "psi1": "00", "psi2": "00"})

    def test_non_unitary_v_rejected(self):
        with pytest.raises(InvalidArgumentError):
            problem_from_dict({"dim": 2, "stages": [{"H": [{"matrix": [[0.5, 0], [0, -0.5]]}], "T": 1.0, "V": [[1, 0], [0, 2]]}], "psi1": 0, "psi2": 0})

    def test_write_then_parse(self, tmp_path):
        data = {
            "qubits": 2,
            "stages": [
                {"H": [[0.5, "XX"], [-0.25, "ZI"]], "T": 1.5},
                {"H": [[0.3, "YZ"], [0.6, "ZZ"]], "T": 0.7, "V": ["H 0", "CNOT 0 1"]},
            ],
            "psi1": [[0.5, 0.5], 0.5, [0.0, 0.5], 0.0],
            "psi2": "|10>",
        }
        problem = problem_from_dict(data)
        path = tmp_path / "explicit.json"
        write_problem(problem, path)
        again = parse_problem(path)
        assert again.dim == 4
        assert np.max(np.abs(again.psi1 - problem.psi1)) <= 1e-15
        assert np.max(np.abs(again.psi2 - problem.psi2)) <= 1e-15
        for a, b in zip(again.stages, problem.stages):
            assert a.t == b.t
            assert np.max(np.abs(a.v - b.v)) <= 1e-15
            for x, y in zip(a.hamiltonian.terms, b.hamiltonian.terms):
                assert np.max(np.abs(x - y)) <= 1e-15

    def test_pauli_helper_matches_fixture(self):
        h = pauli_hamiltonian([(0.5, "XX"), (0.5, "ZI")])
        assert np.allclose(h.terms[1], 0.5 * np.kron(pauli_matrix("Z"), np.eye(2)))


class TestCommands:
    def test_run_writes_row(self, problem_file, tmp_path):
        out = tmp_path / "run.csv"
        assert run_cli(["run", str(problem_file), "--eps", "1e-4", "--out", str(out)]) == e_success
        rows = read_rows(out)
        assert list(rows[0].keys()) == run_columns
        assert len(rows) == 1
        assert float(rows[0]["abs_error"]) <= 1e-4
        assert rows[0]["converged"] == ""

    def test_run_is_reproducible(self, problem_file, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["run", str(problem_file), "--out", str(first)])
        run_cli(["run", str(problem_file), "--out", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_jsonl_output(self, problem_file, tmp_path):
        out = tmp_path / "run.jsonl"
        run_cli(["run", str(problem_file), "--format", "jsonl", "--out", str(out)])
        row = json.loads(out.read_text().splitlines()[0])
        assert list(row.keys()) == run_columns
        assert row["converged"] is None

    def test_overrides(self, problem_file, tmp_path):
        out = tmp_path / "plan.csv"
        run_cli(["show-plan", str(problem_file), "--override-n", "6", "--q-override", "9", "--out", str(out)])
        row = read_rows(out)[0]
        assert (row["n"], row["q"]) == ("6", "9")

    def test_show_plan_columns(self, problem_file, tmp_path):
        out = tmp_path / "plan.csv"
        assert run_cli(["show-plan", str(problem_file), "--out", str(out)]) == e_success
        rows = read_rows(out)
        assert list(rows[0].keys()) == plan_columns
        assert rows[0]["fallback_g"] == "true"

    def test_sweep_rows(self, problem_file, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run_cli(["sweep", str(problem_file), "--axis", "n", "--values", "4,8", "--out", str(out)]) == e_success
        rows = read_rows(out)
        assert [r["n"] for r in rows] == ["4", "8"]
        assert all(r["axis"] == "n" for r in rows)

    def test_noise_without_noise(self, problem_file, tmp_path):
        out = tmp_path / "noise.csv"
        assert run_cli(["noise", str(problem_file), "--sigma-noise", "0", "--trials", "100", "--out", str(out)]) == e_success
        row = read_rows(out)[0]
        assert float(row["empirical_variance"]) == 0.0
        assert row["pass"] == "true"

    def test_missing_file(self, tmp_path, capsys):
        assert run_cli(["run", str(tmp_path / "absent.json")]) == e_validation
        assert "Error" in capsys.readouterr().err

    def test_invalid_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"qubits": 1, "stages": []}')
        assert run_cli(["run", str(path)]) == e_validation

    def test_non_convergence_exit_code(self, problem_file, tmp_path):
        out = tmp_path / "run.csv"
        code = run_cli(["run", str(problem_file), "--adaptive", "--override-n", "64", "--out", str(out)])
        assert code == 2
        assert read_rows(out)[0]["converged"] == "false"

    @pytest.mark.parametrize("action", ["version", "v"])
    def test_version(self, action, capsys):
        assert run_cli([action]) == e_success
        assert capsys.readouterr().out.strip() == version

    def test_noise_bound_columns(self, problem_file, tmp_path):
        out = tmp_path / "noise.csv"
        run_cli(["noise", str(problem_file), "--sigma-noise", "0.01", "--trials", "200", "--out", str(out)])
        row = read_rows(out)[0]
        q = int(row["q"])
        assert float(row["linf_node_bound"]) == pytest.approx(0.01 * (3 + 2 / math.pi * math.log(2 * q)), rel=1e-12)
        assert float(row["variance_node_bound"]) == pytest.approx(1e-4 * (3 + 4 / math.pi ** 2), rel=1e-12)
        assert 0 < float(row["std_bound"]) <= float(row["std_bound_w_min"])

    def test_sweep_time_needs_non_zero_times(self, tmp_path, capsys):
        path = tmp_path / "still.json"
        path.write_text(json.dumps({"qubits": 1, "stages": [{"H": [[0.5, "Z"]], "T": 0.0}], "psi1": "0", "psi2": "0"}))
        assert run_cli(["run", str(path), "--out", str(tmp_path / "run.csv")]) == e_success
        assert run_cli(["sweep", str(path), "--axis", "T", "--values", "1,2"]) == e_validation
        assert "every T_j is 0" in capsys.readouterr().err

    @pytest.mark.parametrize("axis", ["q", "n"])
    def test_sweep_rejects_fractional_counts(self, problem_file, tmp_path, axis):
        out = tmp_path / "sweep.csv"
        assert run_cli(["sweep", str(problem_file), "--axis", axis, "--values", "4,4.5", "--out", str(out)]) == e_validation
        assert not out.exists()
