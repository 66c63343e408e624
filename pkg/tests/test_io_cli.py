import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskconf import cli, io
from riskconf.errors import InvalidArgument
from riskconf.seqmodel import CandidateFamily


def run(argv):
    return cli.main([str(a) for a in argv])


class TestVectors:
    def test_parse_error_reports_line(self):
        with pytest.raises(InvalidArgument, match=r"x\.txt:3: cannot parse"):
            io.parse_vector("1.0\n2\nabc\n", "x.txt")

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidArgument, match=":2:"):
            io.parse_vector("1\nnan\n")

    def test_blank_lines_skipped(self):
        assert io.parse_vector("\n1.5\n\n-2\n").tolist() == [1.5, -2.0]

    def test_empty_input(self):
        with pytest.raises(InvalidArgument):
            io.parse_vector("\n\n")

    @settings(max_examples=100)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=30))
    def test_round_trip_is_exact(self, values):
        assert io.parse_vector(io.format_vector(values)).tolist() == [float(v) for v in values]

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidArgument, match="cannot read"):
            io.read_vector(tmp_path / "none.txt")


class TestFamilies:
    def test_round_trip(self, tmp_path):
        fam = CandidateFamily.explicit(5, [[1, 3], [], [2, 4, 5]])
        p = tmp_path / "f.json"
        p.write_text(json.dumps(io.family_to_dict(fam)))
        assert io.read_family(p).members() == fam.members()

    def test_nested_family_serialized_as_prefixes(self):
        assert io.family_to_dict(CandidateFamily.nested(2)) == {"n": 2, "sets": [[], [1], [1, 2]]}

    def test_malformed(self, tmp_path):
        p = tmp_path / "f.json"
        p.write_text('{"n": 3}')
        with pytest.raises(InvalidArgument, match="malformed"):
            io.read_family(p)
        p.write_text("{not json")
        with pytest.raises(InvalidArgument, match="invalid JSON"):
            io.read_family(p)


class TestCommandLine:
    def test_critical_values_needs_out(self):
        assert run(["critical-values", "--n", 8]) == cli.EXIT_USAGE

    def test_bad_alpha_is_usage_error(self):
        assert run(["critical-values", "--n", 8, "--alpha", "1.5"]) == cli.EXIT_USAGE

    def test_bad_m_is_usage_error(self):
        assert run(["critical-values", "--n", 8, "--m", "0"]) == cli.EXIT_USAGE

    def test_resource_cap(self, tmp_path):
        assert run(["critical-values", "--n", 4000, "--reps", 1000, "--out", tmp_path / "t.json"]) == cli.EXIT_RESOURCE

    def test_bad_input_line(self, tmp_path, capsys):
        p = tmp_path / "bad.txt"
        p.write_text("1.0\noops\n")
        assert run(["confset-nested", "--in", p]) == cli.EXIT_USAGE
        assert "bad.txt:2: cannot parse" in capsys.readouterr().err

    def test_family_index_out_of_range(self, tmp_path):
        x, f = tmp_path / "x.txt", tmp_path / "f.json"
        io.write_vector(x, [1.0, 2.0, 3.0])
        f.write_text('{"n": 3, "sets": [[1], [4]]}')
        assert run(["confset-general", "--in", x, "--family", f]) == cli.EXIT_USAGE

    def test_family_dimension_mismatch(self, tmp_path):
        x, f = tmp_path / "x.txt", tmp_path / "f.json"
        io.write_vector(x, [1.0, 2.0])
        f.write_text('{"n": 3, "sets": [[1], [2]]}')
        assert run(["confset-general", "--in", x, "--family", f]) == cli.EXIT_USAGE

    def test_zero_observations_keep_empty_model(self, tmp_path):
        x, out, table = tmp_path / "x.txt", tmp_path / "r.json", tmp_path / "t.json"
        io.write_vector(x, np.zeros(16))
        assert run(["confset-nested", "--in", x, "--table", table, "--kappa-reps", 1000, "--out", out]) == 0
        assert 0 in json.loads(out.read_text())["retained"]
        assert table.exists()
        # second run loads the cached table and gives the same document
        out2 = tmp_path / "r2.json"
        assert run(["confset-nested", "--in", x, "--table", table, "--out", out2]) == 0
        assert out.read_bytes() == out2.read_bytes()

    def test_general_region_document(self, tmp_path):
        x, f, out = tmp_path / "x.txt", tmp_path / "f.json", tmp_path / "r.json"
        io.write_vector(x, [4.0, 0.1, -0.2])
        f.write_text('{"n": 3, "sets": [[], [1], [1, 2, 3]]}')
        assert run(["confset-general", "--in", x, "--family", f, "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert [1] in doc["retained"] and [] not in doc["retained"]
        assert run(["confset-general", "--in", x, "--family", f, "--m", 30, "--out", out]) == 0

    def test_simulate_requires_experiment(self):
        assert run(["simulate"]) == cli.EXIT_USAGE

    @pytest.mark.parametrize("experiment,header", [
        ("coverage-nested", "rep,covered,region_size"),
        ("oracle-nested", "rep,max_risk,min_risk,ratio"),
        ("coverage-general", "rep,covered,region_size"),
        ("coupling-order", "signal,samples,pairs_checked,violations"),
    ])
    def test_experiment_headers(self, tmp_path, experiment, header):
        out = tmp_path / "o.csv"
        code = run(["simulate", "--experiment", experiment, "--n", 8, "--reps", 5, "--kappa-reps", 1000,
                    "--seed", 1, "--out", out])
        assert code == 0
        assert out.read_text().splitlines()[0] == header

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "t.json"
        proc = subprocess.run([sys.executable, "-m", "riskconf.cli", "critical-values", "--n", "6",
                               "--reps", "1000", "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0 and json.loads(out.read_text())["n"] == 6


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.mark.parametrize("argv", [
    ["critical-values", "--n", 24, "--m", 40, "--reps", 1000, "--alpha", "0.05,0.1"],
    ["simulate", "--experiment", "coverage-nested", "--n", 16, "--reps", 40, "--kappa-reps", 1000],
    ["simulate", "--experiment", "coverage-general", "--n", 12, "--reps", 30, "--m", 25],
    ["simulate", "--experiment", "coupling-order", "--n", 12, "--reps", 50, "--m", 20],
    ["simulate", "--experiment", "toy-rates", "--n", 129, "--reps", 10, "--kappa-reps", 1000],
])
def test_thread_count_does_not_change_output(tmp_path, argv):
    digests = []
    for threads in (1, 8):
        out = tmp_path / f"o{threads}"
        assert run(argv + ["--seed", 9, "--threads", threads, "--out", out]) == 0
        digests.append(_digest(out))
    assert digests[0] == digests[1]


def test_coupling_violation_sets_exit_code(monkeypatch, tmp_path):
    fake = [{"signal": "zero", "samples": 1, "pairs_checked": 3, "violations": 1}]
    monkeypatch.setattr(cli.experiments, "coupling_order", lambda *a, **k: fake)
    assert run(["simulate", "--experiment", "coupling-order", "--out", tmp_path / "o.csv"]) == cli.EXIT_VIOLATION
