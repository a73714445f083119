import json

import numpy as np
import pytest

from railqubo.cli import main
from railqubo.constraints import ConstraintSet, VariableIndex
from railqubo.io import (
    DocumentError,
    dump_instance,
    instance_from_document,
    instance_to_document,
    ising_to_text,
    load_instance,
    qubo_to_text,
    read_ising_text,
    read_qubo_text,
)
from railqubo.qubo import assemble, build_qubo, to_ising

from test_qubo import SIMPLE_Q

FIXTURES = ["simple", "line216", "line191-reconstructed"]


class TestInstanceDocuments:
    def test_line216(self, line216):
        assert len(line216.trains) == 3 and len(line216.blocks) == 5
        assert build_qubo(line216).n == 48

    def test_line191(self, line191):
        assert len(line191.trains) == 6 and len(line191.blocks) == 10
        assert build_qubo(line191).n == 198

    def test_line191_is_labelled(self):
        from importlib import resources

        doc = json.loads(resources.files("railqubo.fixtures").joinpath("line191_reconstructed.json").read_text())
        assert "reconstructed" in doc["note"].lower()

    @pytest.mark.parametrize("name", FIXTURES)
    def test_round_trip(self, name, tmp_path):
        inst = load_instance(name)
        path = tmp_path / "x.json"
        dump_instance(inst, path)
        again = load_instance(path)
        assert instance_to_document(again) == instance_to_document(inst)
        assert again.unavoidable_delays == inst.unavoidable_delays

    def test_empty_trains(self, line216):
        doc = instance_to_document(line216)
        doc["trains"] = []
        with pytest.raises(DocumentError, match="trains"):
            instance_from_document(doc)

    def test_field_located(self, line216):
        doc = instance_to_document(line216)
        doc["timetable"][3]["in"] = "25h"
        with pytest.raises(DocumentError) as exc:
            instance_from_document(doc)
        assert exc.value.where == "timetable[3].in"

    def test_json_syntax_error_has_position(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"schema_version": 1,\n "blocks": [}')
        with pytest.raises(DocumentError, match="line 2"):
            load_instance(p)

    def test_unknown_version(self, line216):
        doc = instance_to_document(line216)
        doc["schema_version"] = 9
        with pytest.raises(DocumentError, match="version"):
            instance_from_document(doc)


class TestCoordinateFiles:
    def test_simple_matrix_recovered(self, qubo_simple):
        Q, head = read_qubo_text(qubo_to_text(qubo_simple))
        assert np.array_equal(Q, SIMPLE_Q)
        assert float(head["L"]) == 3.5 and float(head["p_sum"]) == 1.75

    def test_diagonal_only_without_constraints(self, simple):
        q = assemble(ConstraintSet(VariableIndex(simple), []), np.array([0.0, 0.5, 0.0, 1.0]), 2.0, 2.0)
        body = [ln for ln in qubo_to_text(q).splitlines() if not ln.startswith("#")]
        assert body == ["1 1 0.5", "3 3 1"]

    def test_round_trip_energies(self, qubo216):
        Q, _ = read_qubo_text(qubo_to_text(qubo216))
        rng = np.random.default_rng(5)
        for x in rng.integers(0, 2, size=(100, qubo216.n)):
            assert x @ Q @ x == qubo216.energy(x)

    def test_ising_round_trip(self, qubo216):
        ising = to_ising(qubo216.Q)
        J, h, offset = read_ising_text(ising_to_text(ising))
        assert np.array_equal(J, ising.J) and np.array_equal(h, ising.h) and offset == ising.offset

    def test_export_is_deterministic(self, line191):
        assert qubo_to_text(build_qubo(line191)) == qubo_to_text(build_qubo(line191))

    def test_headers_versioned(self, qubo_simple):
        assert qubo_to_text(qubo_simple).startswith("# format qubo version 1\n")
        assert ising_to_text(qubo_simple.to_ising()).startswith("# format ising version 1\n")


class TestCli:
    def test_enumerate(self, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["solve", "--instance", "line216", "--method", "enumerate", "--p-sum", "1.75", "--p-pair", "1.75",
                     "--out", str(out)])
        assert code == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["energy"]["total"] == pytest.approx(-9.286, abs=5e-4)
        assert rep["degeneracy"] == 4 and rep["ground_equivalent"] is True
        for f in ("schedule.csv", "spectrum.csv", "diagram.csv", "diagram.svg", "conflicts.csv"):
            assert (out / f).read_text().startswith("<svg" if f.endswith("svg") else "# format")
        assert "degeneracy 4" in capsys.readouterr().err

    def test_amcc(self, tmp_path):
        out = tmp_path / "amcc"
        assert main(["solve", "--instance", "line216", "--method", "amcc", "--out", str(out)]) == 0
        assert json.loads((out / "report.json").read_text())["max_secondary_delay"] == 4

    def test_bogus_method(self, capsys):
        assert main(["solve", "--instance", "line216", "--method", "bogus"]) == 1
        err = capsys.readouterr()
        assert "bogus" in err.err and err.out == ""

    def test_missing_argument(self):
        assert main(["export", "--instance", "simple"]) == 1

    def test_infeasible_exit(self, capsys):
        assert main(["solve", "--instance", "line216", "--method", "order", "--d-max", "3"]) == 2
        assert "infeasible" in capsys.readouterr().err

    def test_heuristic_beyond_bound_exit(self):
        assert main(["solve", "--instance", "line216", "--method", "fcfs", "--d-max", "3"]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["solve", "--instance", str(tmp_path / "none.json"), "--method", "order"]) == 2

    def test_sa(self, tmp_path):
        out = tmp_path / "sa"
        assert main(["solve", "--instance", "simple", "--method", "sa", "--sweeps", "100", "--restarts", "4",
                     "--out", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["energy"]["total"] == -3.0 and rep["ground_equivalent"] is True

    def test_export_stdout(self, capsys):
        assert main(["export", "--instance", "simple", "--format", "qubo"]) == 0
        Q, _ = read_qubo_text(capsys.readouterr().out)
        assert np.array_equal(Q, SIMPLE_Q)

    def test_export_files_identical(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for p in (a, b):
            assert main(["export", "--instance", "line216", "--format", "ising", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_diagram_from_report(self, tmp_path):
        run = tmp_path / "run"
        main(["solve", "--instance", "line216", "--method", "order", "--out", str(run)])
        assert main(["diagram", "--instance", "line216", "--report", str(run / "report.json"),
                     "--out", str(tmp_path / "d")]) == 0
        assert (tmp_path / "d" / "conflicts.csv").read_text().count("\n") == 2  # header lines only

    def test_diagram_mismatch(self, tmp_path, capsys):
        run = tmp_path / "run"
        main(["solve", "--instance", "simple", "--method", "order", "--out", str(run)])
        code = main(["diagram", "--instance", "line216", "--report", str(run / "report.json"),
                     "--out", str(tmp_path / "d")])
        assert code == 2 and "does not match" in capsys.readouterr().err

    def test_diagram_disturbed(self, tmp_path, capsys):
        assert main(["diagram", "--instance", "line216", "--disturbed", "--out", str(tmp_path)]) == 0
        assert "conflict at block 4" in capsys.readouterr().err

    def test_info(self, capsys):
        assert main(["info", "--instance", "line216"]) == 0
        err = capsys.readouterr().err
        assert "48 variables" in err and "single_block: 55" in err

    def test_module_entry_point(self):
        import subprocess
        import sys

        proc = subprocess.run([sys.executable, "-m", "railqubo", "solve", "--instance", "line216", "--method", "flfs"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and "max secondary delay 4" in proc.stderr
