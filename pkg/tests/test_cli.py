"""CLI contract: subcommands, exit codes, output files, reproducibility."""

import json
import subprocess
import sys

import pytest

from veriphoton import cli, hamiltonian as hml, i1dc, selftest
from veriphoton import qubit_protocol as qp

SINGLET_WITNESS = [[0.0, 0.0], [2**-0.5, 0.0], [-(2**-0.5), 0.0], [0.0, 0.0]]


def singlet_doc(**overrides):
    doc = {
        "protocol": "p1",
        "instance": {
            "n": 2,
            "terms": [{"i": 0, "j": 1, "p": 1.0, "c": 1}],
            "a": 0.0,
            "b": 0.1,
            "f": 10.0,
            "witness": SINGLET_WITNESS,
        },
        "trials": 400,
        "seed": 7,
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path, doc, name="exp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestRun:
    def test_honest_p1_matches_the_exact_oracle(self, tmp_path, capsys):
        doc = singlet_doc(output={"directory": str(tmp_path / "out")})
        code = cli.main(["run", "--config", str(write_config(tmp_path, doc))])
        assert code == 0
        summary = (tmp_path / "out" / "summary.csv").read_text().splitlines()
        header = summary[0].split(",")
        row = dict(zip(header, summary[1].split(",")))
        assert row["adversary"] == "Honest"
        assert float(row["estimate"]) == pytest.approx(1.0)  # exact oracle value
        assert row["bound_check"] == "pass"

    def test_estimate_equals_the_library_monte_carlo(self, tmp_path):
        doc = singlet_doc(output={"directory": str(tmp_path / "out")},
                          adversary={"variant": "RandomOutcomes"})
        path = write_config(tmp_path, doc)
        assert cli.main(["run", "--config", str(path)]) == 0
        row = (tmp_path / "out" / "summary.csv").read_text().splitlines()[1].split(",")
        accepts = int(row[4])
        inst = hml.instance_from_dict(doc["instance"])
        mc = qp.monte_carlo_pacc(inst, qp.random_outcome_povm(2), doc["trials"], doc["seed"])
        assert accepts == mc.accepts

    def test_identical_bytes_on_rerun(self, tmp_path):
        doc = singlet_doc()
        path = write_config(tmp_path, doc)
        for name in ("a", "b"):
            assert cli.main(["run", "--config", str(path), "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()
        assert (tmp_path / "a" / "transcripts.jsonl").read_bytes() == (tmp_path / "b" / "transcripts.jsonl").read_bytes()

    def test_worker_count_does_not_change_the_bytes(self, tmp_path, monkeypatch):
        doc = singlet_doc(protocol="p2", trials=1000)
        path = write_config(tmp_path, doc)
        outputs = {}
        for workers in ("1", "3"):
            monkeypatch.setenv("VERIPHOTON_THREADS", workers)
            out = tmp_path / f"w{workers}"
            assert cli.main(["run", "--config", str(path), "--out", str(out)]) == 0
            outputs[workers] = (
                (out / "summary.csv").read_bytes(),
                (out / "transcripts.jsonl").read_bytes(),
            )
        assert outputs["1"] == outputs["3"]

    def test_transcript_lines_follow_the_record_schema(self, tmp_path):
        doc = singlet_doc(output={"directory": str(tmp_path / "out"), "max_transcripts": 5})
        assert cli.main(["run", "--config", str(write_config(tmp_path, doc))]) == 0
        lines = (tmp_path / "out" / "transcripts.jsonl").read_text().splitlines()
        assert len(lines) == 5
        record = json.loads(lines[0])
        assert set(record) == {"trial", "h", "s", "w", "z", "pair", "branch", "accepted"}

    def test_p2_transcripts_carry_pulse_records(self, tmp_path):
        doc = singlet_doc(protocol="p2", trials=1000,
                          output={"directory": str(tmp_path / "out"), "max_transcripts": 2})
        assert cli.main(["run", "--config", str(write_config(tmp_path, doc))]) == 0
        record = json.loads((tmp_path / "out" / "transcripts.jsonl").read_text().splitlines()[0])
        rep = record["reps"][0]
        assert {"k", "angle", "n"} == set(rep["pulses"][0])
        assert rep["pulses"][0]["angle"] in range(4)
        assert {"o", "phi", "L"} == set(rep["i1dc"])

    def test_invalid_alpha_names_the_violated_invariant(self, tmp_path, capsys):
        doc = singlet_doc(protocol="p2", trials=1000, m=75, alpha=1.5)
        code = cli.main(["run", "--config", str(write_config(tmp_path, doc))])
        assert code == 2
        assert "alpha" in capsys.readouterr().err

    def test_unknown_keys_are_rejected(self, tmp_path, capsys):
        doc = singlet_doc(typo_key=1)
        assert cli.main(["run", "--config", str(write_config(tmp_path, doc))]) == 2

    def test_weight_sum_violation_is_rejected(self, tmp_path, capsys):
        doc = singlet_doc()
        doc["instance"]["terms"][0]["p"] = 0.9
        assert cli.main(["run", "--config", str(write_config(tmp_path, doc))]) == 2
        assert "sum" in capsys.readouterr().err

    def test_missing_config_is_an_io_error(self, tmp_path):
        assert cli.main(["run", "--config", str(tmp_path / "nope.json")]) == 3

    def test_instance_by_path(self, tmp_path):
        inst = hml.synth_instance(2, 3, 0.2)
        hml.save_instance(inst, tmp_path / "inst.json")
        doc = singlet_doc(instance="inst.json", output={"directory": str(tmp_path / "out")})
        assert cli.main(["run", "--config", str(write_config(tmp_path, doc))]) == 0

    def test_p1_channel_adversary_uses_the_induced_povm(self, tmp_path):
        doc = singlet_doc(
            adversary={"variant": "SinglePhotonChannel", "strength": 0.5},
            trials=300,
            output={"directory": str(tmp_path / "out")},
        )
        assert cli.main(["run", "--config", str(write_config(tmp_path, doc))]) == 0
        row = (tmp_path / "out" / "summary.csv").read_text().splitlines()[1].split(",")
        assert row[9] == "pass"  # bound_check against the depolarized witness energy

    def test_p1_rejects_the_count_forging_adversary(self, tmp_path, capsys):
        doc = singlet_doc(adversary={"variant": "VacuumForge"})
        assert cli.main(["run", "--config", str(write_config(tmp_path, doc))]) == 2
        assert "VacuumForge" in capsys.readouterr().err


class TestBounds:
    def test_reference_row(self, capsys):
        assert cli.main(["bounds", "--n", "2", "--f", "10"]) == 0
        header, row = capsys.readouterr().out.strip().splitlines()
        values = dict(zip(header.split(","), row.split(",")))
        assert int(values["m"]) == 75
        assert float(values["gap_lower_bound"]) == pytest.approx(0.025)

    def test_three_repetitions(self, capsys):
        assert cli.main(["bounds", "--n", "3", "--f", "10"]) == 0
        header, row = capsys.readouterr().out.strip().splitlines()
        values = dict(zip(header.split(","), row.split(",")))
        assert float(values["gap_lower_bound"]) == pytest.approx(1 / 30, abs=1e-10)

    def test_stable_across_runs(self, capsys):
        cli.main(["bounds", "--n", "4", "--f", "25"])
        first = capsys.readouterr().out
        cli.main(["bounds", "--n", "4", "--f", "25"])
        assert capsys.readouterr().out == first

    def test_range_violation(self, capsys):
        assert cli.main(["bounds", "--n", "1", "--f", "10"]) == 2


class TestPhaseRand:
    def test_reference_row(self, capsys):
        assert cli.main(["phaserand", "--m", "75", "--n", "2", "--f", "10"]) == 0
        header, row = capsys.readouterr().out.strip().splitlines()
        values = dict(zip(header.split(","), row.split(",")))
        assert int(values["R"]) == 16
        assert float(values["F_min"]) <= float(values["F_series"])

    def test_jsonl_format(self, capsys):
        assert cli.main(["phaserand", "--m", "75", "--n", "2", "--f", "10", "--format", "jsonl"]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["R"] == 16


class TestSelftest:
    def test_single_check_passes(self, capsys):
        code = cli.main(["selftest", "--check", "i1dc.formula-matches-statevector"])
        assert code == 0
        assert "pass" in capsys.readouterr().out

    def test_unknown_check_is_a_validation_error(self):
        assert cli.main(["selftest", "--check", "no-such-check"]) == 2

    def test_sign_flip_in_the_angle_formula_is_caught(self, monkeypatch, capsys):
        # mutation test: drop the outcome-driven sign and the formula check must go red
        def mutated(angles, outcomes):
            return sum(int(a) for a in angles) % 4

        monkeypatch.setattr(i1dc, "phi_from_outcomes", mutated)
        code = cli.main(["selftest", "--check", "i1dc.formula-matches-statevector"])
        assert code == 1
        assert "i1dc.formula-matches-statevector" in capsys.readouterr().err


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "veriphoton.cli", "bounds", "--n", "2", "--f", "10"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "75" in proc.stdout
