import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dmopt.cli import main
from dmopt.harness import ExperimentConfig, run_framework
from dmopt.reporting import (
    generate_report,
    load_all_runs,
    load_run_csv,
    run_stem,
    write_run_csv,
    write_summary_json,
)

TINY = dict(problem="DF0", optimizer="nsga2", n_t=10, tau_t=5, num_changes=3,
            runs=1, pop_size=20, seed=5, svm_scale=0.2)


class TestRunCsv:
    def test_round_trip(self, tmp_path):
        rec = run_framework(ExperimentConfig(variant="isvm", **TINY), 0)
        path = write_run_csv(rec, tmp_path)
        assert path.name == "DF0_nsga2_isvm_nt10_tt5_run000.csv"
        loaded = load_run_csv(path)
        assert loaded.variant == "isvm"
        assert loaded.n_t == 10 and loaded.tau_t == 5
        assert loaded.trace.igd_values == pytest.approx(rec.trace.igd_values, abs=0)
        assert loaded.trace.hv_values == pytest.approx(rec.trace.hv_values, abs=0)

    def test_byte_identical_across_invocations(self, tmp_path):
        cfg = ExperimentConfig(variant="isvm", **TINY)
        a = write_run_csv(run_framework(cfg, 0), tmp_path / "a")
        b = write_run_csv(run_framework(cfg, 0), tmp_path / "b")
        assert a.read_bytes() == b.read_bytes()

    def test_header_row(self, tmp_path):
        rec = run_framework(ExperimentConfig(variant="da", **TINY), 0)
        path = write_run_csv(rec, tmp_path)
        first = path.read_text().splitlines()[0]
        assert first == "change_index,t,igd,hv,wall_ms"

    def test_generation_trace_file(self, tmp_path):
        cfg = ExperimentConfig(variant="da", trace_every_generation=True, **TINY)
        rec = run_framework(cfg, 0)
        write_run_csv(rec, tmp_path)
        gen = tmp_path / f"{run_stem(rec)}_gen.csv"
        assert gen.exists()
        lines = gen.read_text().splitlines()
        assert lines[0] == "tau,t,igd"
        assert len(lines) == 1 + 5 * 4  # tau_t generations x (changes + 1)


class TestSummaryAndReport:
    def build_runs(self, tmp_path):
        records = []
        for variant in ("da", "isvm"):
            cfg = ExperimentConfig(variant=variant, **{**TINY, "runs": 2})
            for idx in range(2):
                rec = run_framework(cfg, idx)
                write_run_csv(rec, tmp_path)
                records.append(rec)
        return records

    def test_summary_json(self, tmp_path):
        records = self.build_runs(tmp_path)
        cfg = ExperimentConfig(variant="isvm", **TINY)
        path = write_summary_json(records, cfg.snapshot(), tmp_path)
        payload = json.loads(path.read_text())
        assert payload["reference_variant"] == "da"
        variants = {c["variant"] for c in payload["cells"]}
        assert variants == {"da", "isvm"}
        isvm_cell = next(c for c in payload["cells"] if c["variant"] == "isvm")
        assert isvm_cell["migd_ranksum_p"] is not None
        assert isvm_cell["runs"] == 2

    def test_report_outputs(self, tmp_path):
        self.build_runs(tmp_path)
        paths = generate_report(tmp_path)
        assert paths.comparison.exists()
        assert paths.long_csv.exists()
        for fig in paths.figures:
            assert fig.exists() and fig.stat().st_size > 0
        lines = paths.long_csv.read_text().splitlines()
        assert lines[0] == "variant,change_index,mean_igd"
        assert len(lines) == 1 + 2 * 3  # two variants x three changes

    def test_report_requires_runs(self, tmp_path):
        from dmopt.core import ConfigurationError

        with pytest.raises(ConfigurationError):
            generate_report(tmp_path)

    def test_load_all_runs_ignores_other_csvs(self, tmp_path):
        self.build_runs(tmp_path)
        (tmp_path / "notes.csv").write_text("a,b\n1,2\n")
        records = load_all_runs(tmp_path)
        assert len(records) == 4


class TestCli:
    def run_cli(self, *argv):
        return main(list(argv))

    def test_run_and_report(self, tmp_path):
        out = tmp_path / "results"
        code = self.run_cli(
            "run", "--problem", "DF0", "--optimizer", "nsga2",
            "--variant", "da,isvm", "--nt", "10", "--taut", "5",
            "--changes", "3", "--runs", "1", "--pop-size", "20",
            "--seed", "5", "--svm-scale", "0.2", "--out", str(out),
        )
        assert code == 0
        assert len(list(out.glob("*_run000.csv"))) == 2
        assert len(list(out.glob("summary_*.json"))) == 1
        assert self.run_cli("report", "--out", str(out)) == 0
        assert (out / "comparison.csv").exists()
        assert (out / "igd_evolution.csv").exists()
        assert (out / "igd_evolution.png").exists()

    def test_unknown_problem_exit_code(self, tmp_path):
        code = self.run_cli("run", "--problem", "DF99", "--out", str(tmp_path))
        assert code == 2

    def test_unimplemented_problem_exit_code(self, tmp_path):
        code = self.run_cli("run", "--problem", "DF9", "--runs", "1",
                            "--changes", "1", "--out", str(tmp_path))
        assert code == 2

    def test_bad_variant_exit_code(self, tmp_path):
        code = self.run_cli("run", "--variant", "magic", "--out", str(tmp_path))
        assert code == 2

    def test_report_without_runs_exit_code(self, tmp_path):
        assert self.run_cli("report", "--out", str(tmp_path)) == 2

    def test_console_entry_point(self, tmp_path):
        result = subprocess.run(
            [sys.executable, "-m", "dmopt.cli", "run", "--problem", "DF0",
             "--variant", "da", "--taut", "2", "--changes", "1", "--runs", "1",
             "--pop-size", "8", "--out", str(tmp_path)],
            capture_output=True, text=True,
        )
        assert result.returncode == 0, result.stderr
        assert "wrote" in result.stdout

    def test_cli_reproducibility_byte_identical(self, tmp_path):
        args = ["run", "--problem", "DF0", "--variant", "isvm", "--nt", "10",
                "--taut", "5", "--changes", "2", "--runs", "1", "--pop-size", "16",
                "--seed", "9", "--svm-scale", "0.2"]
        out1, out2 = tmp_path / "one", tmp_path / "two"
        assert self.run_cli(*args, "--out", str(out1)) == 0
        assert self.run_cli(*args, "--out", str(out2)) == 0
        name = "DF0_nsga2_isvm_nt10_tt5_run000.csv"
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
