import json
import os

import numpy as np
import pytest

from corex.cli import main
from corex.graph import read_truth_labels


def run(args):
    return main(args)


def read_bytes_map(directory):
    out = {}
    for name in sorted(os.listdir(directory)):
        with open(os.path.join(directory, name), "rb") as fh:
            out[name] = fh.read()
    return out


GEN_FLAGS = ["generate", "--graphon", "1", "--n-core", "30", "--n-periphery", "30",
             "--periphery", "er", "--density", "0.05", "--ratio", "2", "--seed", "3"]


class TestGenerate:
    def test_writes_expected_files(self, tmp_path):
        out = tmp_path / "gen"
        assert run(GEN_FLAGS + ["--out-dir", str(out)]) == 0
        for name in ("run.json", "edges.tsv", "truth.csv", "meta.json"):
            assert (out / name).exists()
        truth = read_truth_labels(out / "truth.csv")
        assert truth.sum() == 30 and truth.size == 60
        meta = json.loads((out / "meta.json").read_text())
        assert meta["graphon"] == "table1_g1"
        assert abs(meta["realized_density"] - 0.05) < 1e-9

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(GEN_FLAGS + ["--out-dir", str(a)])
        run(GEN_FLAGS + ["--out-dir", str(b)])
        files_a, files_b = read_bytes_map(a), read_bytes_map(b)
        assert set(files_a) == set(files_b)
        for name in files_a:
            if name == "run.json":
                continue  # echoes the differing --out-dir flag
            assert files_a[name] == files_b[name], name

    def test_thread_flag_does_not_change_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(GEN_FLAGS + ["--out-dir", str(a), "--threads", "1"])
        run(GEN_FLAGS + ["--out-dir", str(b), "--threads", "4"])
        assert (a / "edges.tsv").read_bytes() == (b / "edges.tsv").read_bytes()
        assert (a / "meta.json").read_bytes() == (b / "meta.json").read_bytes()

    def test_pure_core_network(self, tmp_path):
        out = tmp_path / "pure"
        code = run(["generate", "--graphon", "2", "--n-core", "25",
                    "--n-periphery", "0", "--density", "0.1", "--seed", "1",
                    "--out-dir", str(out)])
        assert code == 0
        assert read_truth_labels(out / "truth.csv").all()


@pytest.fixture()
def generated(tmp_path):
    out = tmp_path / "data"
    run(GEN_FLAGS + ["--out-dir", str(out)])
    return out


class TestIdentify:
    def test_topk_outputs(self, generated, tmp_path):
        out = tmp_path / "id"
        code = run(["identify", "--input", str(generated / "edges.tsv"),
                    "--model", "er", "--rank", "3", "--select", "topk:30",
                    "--seed", "0", "--out-dir", str(out)])
        assert code == 0
        scores = (out / "scores.csv").read_text().strip().splitlines()
        assert scores[0] == "node_id,score" and len(scores) == 61
        partition = (out / "partition.csv").read_text().strip().splitlines()
        assert partition[0] == "node_id,is_core,score"
        n_core = sum(int(line.split(",")[1]) for line in partition[1:])
        assert n_core == 30
        info = json.loads((out / "identify.json").read_text())
        assert info["rank_used"] == 3 and info["cutoff"] is None

    def test_threshold_and_kmeans(self, generated, tmp_path):
        for select in ("threshold", "kmeans"):
            out = tmp_path / select
            code = run(["identify", "--input", str(generated / "edges.tsv"),
                        "--model", "er", "--rank", "3", "--select", select,
                        "--out-dir", str(out)])
            assert code == 0
            info = json.loads((out / "identify.json").read_text())
            assert info["cutoff"] is not None

    def test_config_model(self, generated, tmp_path):
        out = tmp_path / "cfg"
        code = run(["identify", "--input", str(generated / "edges.tsv"),
                    "--model", "config", "--rank", "3", "--select", "kmeans",
                    "--out-dir", str(out)])
        assert code == 0
        info = json.loads((out / "identify.json").read_text())
        assert "excluded_nodes" in info

    def test_rank_auto_records_selection(self, generated, tmp_path):
        out = tmp_path / "auto"
        code = run(["identify", "--input", str(generated / "edges.tsv"),
                    "--model", "er", "--rank", "auto", "--select", "kmeans",
                    "--out-dir", str(out)])
        assert code == 0
        info = json.loads((out / "identify.json").read_text())
        assert info["rank_selection"]["chosen_r"] == info["rank_used"]

    def test_missing_input_is_data_error(self, tmp_path):
        code = run(["identify", "--input", str(tmp_path / "nope.tsv"),
                    "--out-dir", str(tmp_path / "o")])
        assert code == 3

    def test_reruns_byte_identical(self, generated, tmp_path):
        a, b = tmp_path / "ra", tmp_path / "rb"
        flags = ["identify", "--input", str(generated / "edges.tsv"),
                 "--model", "er", "--rank", "4", "--select", "threshold"]
        run(flags + ["--out-dir", str(a)])
        run(flags + ["--out-dir", str(b)])
        assert (a / "scores.csv").read_bytes() == (b / "scores.csv").read_bytes()
        assert (a / "partition.csv").read_bytes() == (b / "partition.csv").read_bytes()


class TestBench:
    def test_small_explicit_bench(self, tmp_path):
        out = tmp_path / "bench"
        code = run(["bench", "--graphon", "1", "--periphery", "er",
                    "--n-core", "30", "--n-periphery", "30", "--ratios", "2",
                    "--methods", "proposed_er,degree", "--replicates", "2",
                    "--rank", "3", "--density", "0.08", "--seed", "5",
                    "--out-dir", str(out)])
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert len(summary["settings"]) == 1
        aucs = summary["settings"][0]["auc"]
        assert set(aucs) == {"proposed_er", "degree"}
        assert (out / "roc_ratio2_proposed_er.csv").exists()
        assert (out / "roc_ratio2_degree.csv").exists()

    def test_rerun_identical_summary(self, tmp_path):
        flags = ["bench", "--graphon", "2", "--periphery", "config",
                 "--n-core", "25", "--n-periphery", "25", "--ratios", "1.5",
                 "--methods", "degree,kcore", "--replicates", "2",
                 "--density", "0.1", "--seed", "6"]
        a, b = tmp_path / "a", tmp_path / "b"
        run(flags + ["--out-dir", str(a)])
        run(flags + ["--out-dir", str(b)])
        assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()


class TestDiagnose:
    def test_truth_mode(self, generated, tmp_path):
        out = tmp_path / "diag"
        code = run(["diagnose", "--truth-p", str(generated / "meta.json"),
                    "--rank", "3", "--out-dir", str(out)])
        assert code == 0
        report = json.loads((out / "diagnostics.json").read_text())
        assert set(report) == {"p_star", "h_n", "h_prime_n", "eigenvalues", "gap_r"}
        assert report["h_n"] is not None
        assert len(report["eigenvalues"]) == 60

    def test_empirical_mode(self, generated, tmp_path):
        out = tmp_path / "emp"
        code = run(["diagnose", "--input", str(generated / "edges.tsv"),
                    "--rank", "4", "--out-dir", str(out)])
        assert code == 0
        report = json.loads((out / "diagnostics.json").read_text())
        assert report["p_star"] is None and report["h_n"] is None
        assert report["p_hat"] > 0

    def test_eigengap_sweep(self, generated, tmp_path):
        out = tmp_path / "sweep"
        code = run(["diagnose", "--truth-p", str(generated / "meta.json"),
                    "--rank", "3", "--sweep", "0,20,40",
                    "--periphery-level", "0.05", "--out-dir", str(out)])
        assert code == 0
        lines = (out / "eigengap_sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "n_periphery,lambda_1,gap_3_4,normalized_gap"
        assert len(lines) == 4

    def test_malformed_path_no_partial_files(self, tmp_path):
        out = tmp_path / "nothing"
        code = run(["diagnose", "--truth-p", str(tmp_path / "missing.json"),
                    "--out-dir", str(out)])
        assert code == 3
        assert not out.exists()

    def test_mutually_exclusive_inputs(self, generated, tmp_path):
        code = run(["diagnose", "--truth-p", str(generated / "meta.json"),
                    "--input", str(generated / "edges.tsv"),
                    "--out-dir", str(tmp_path / "x")])
        assert code == 3


class TestExitCodes:
    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["generate"])  # missing required --graphon
        assert exc.value.code == 2

    def test_data_error_on_self_loop(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("1 1\n")
        code = run(["identify", "--input", str(bad),
                    "--out-dir", str(tmp_path / "o")])
        assert code == 3

    def test_infeasible_is_solver_error(self, tmp_path):
        code = run(["generate", "--graphon", "1", "--n-core", "20",
                    "--n-periphery", "20", "--ratio", "0.01",
                    "--density", "0.02", "--out-dir", str(tmp_path / "o")])
        assert code == 4
