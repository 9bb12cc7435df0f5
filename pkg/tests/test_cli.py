import json

import numpy as np
import pytest

from analytic_vb import read_logreg_csv, read_sessions, sessions
from analytic_vb.checkpoint import load_checkpoint
from analytic_vb.cli import main, parse_config_file
from analytic_vb.simulate import manifest_path_for


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulateCommand:
    def test_logreg_default_shape(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        code, stdout, _ = run(capsys, "simulate", "--kind", "logreg", "--out", str(out), "--seed", "42")
        assert code == 0
        data = read_logreg_csv(out)
        assert data.n == 900 and data.dim == 50
        manifest = json.loads(manifest_path_for(out).read_text())
        assert manifest == {"N": 900, "D": 50, "seed": 42}
        assert "900" in stdout

    def test_sessions_default_shape(self, tmp_path, capsys):
        out = tmp_path / "sess.jsonl"
        code, _, _ = run(
            capsys, "simulate", "--kind", "sessions", "--out", str(out),
            "--u", "300", "--u-test", "50", "--seed", "0",
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 300
        manifest = json.loads(manifest_path_for(out).read_text())
        assert manifest["P"] == 1000 and manifest["U"] == 300
        test = read_sessions(tmp_path / "sess.test.jsonl")
        assert test.n_sessions == 50

    def test_rerun_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run(capsys, "simulate", "--kind", "logreg", "--out", str(out),
                       "--n", "30", "--d", "3", "--seed", "7")[0] == 0
        assert a.read_bytes() == b.read_bytes()


class TestTrainCommand:
    def _sim_logreg(self, capsys, tmp_path, n=60, d=3, seed=1):
        path = tmp_path / "train.csv"
        assert run(capsys, "simulate", "--kind", "logreg", "--out", str(path),
                   "--n", str(n), "--d", str(d), "--seed", str(seed))[0] == 0
        return path

    def _sim_sessions(self, capsys, tmp_path, **kw):
        path = tmp_path / "sess.jsonl"
        args = ["simulate", "--kind", "sessions", "--out", str(path), "--u", "25",
                "--u-test", "10", "--p", "30", "--k-true", "2", "--seed", "3"]
        assert run(capsys, *args)[0] == 0
        return path

    @pytest.mark.parametrize("model", ["jj", "vbem", "lrt"])
    def test_logreg_models_produce_checkpoint(self, tmp_path, capsys, model):
        data = self._sim_logreg(capsys, tmp_path)
        ckpt = tmp_path / "model.json"
        code, stdout, _ = run(
            capsys, "train", "--model", model, "--data", str(data),
            "--checkpoint-out", str(ckpt), "--epochs", "5", "--seed", "0",
        )
        assert code == 0
        assert "final bound:" in stdout
        kind, q, meta = load_checkpoint(ckpt)
        assert kind == "jj_logreg"
        assert q.mu_q.shape == (3,)

    def test_trace_schema_and_determinism(self, tmp_path, capsys):
        data = self._sim_logreg(capsys, tmp_path)
        traces = []
        for name in ("t1.csv", "t2.csv"):
            trace = tmp_path / name
            code, _, _ = run(
                capsys, "train", "--model", "jj", "--data", str(data),
                "--checkpoint-out", str(tmp_path / "c.json"), "--trace-out", str(trace),
                "--epochs", "4", "--seed", "5",
            )
            assert code == 0
            traces.append(trace.read_bytes())
        assert traces[0] == traces[1]
        header = traces[0].decode().splitlines()[0]
        assert header == "epoch,bound,kl_term,lik_term"
        assert len(traces[0].decode().splitlines()) == 5

    def test_checkpoint_round_trip_bit_exact(self, tmp_path, capsys):
        data = self._sim_logreg(capsys, tmp_path)
        ckpt = tmp_path / "c.json"
        run(capsys, "train", "--model", "vbem", "--data", str(data),
            "--checkpoint-out", str(ckpt), "--epochs", "10")
        _, q, _ = load_checkpoint(ckpt)
        from analytic_vb.checkpoint import save_logreg_checkpoint
        again = tmp_path / "c2.json"
        save_logreg_checkpoint(again, q, 0, {})
        _, q2, _ = load_checkpoint(again)
        assert np.array_equal(q.mu_q, q2.mu_q)
        assert np.array_equal(q.cov_q.factor, q2.cov_q.factor)

    def test_lvm_training_and_eval(self, tmp_path, capsys):
        data = self._sim_sessions(capsys, tmp_path)
        ckpt = tmp_path / "lvm.json"
        code, _, _ = run(
            capsys, "train", "--model", "lvm", "--data", str(data),
            "--checkpoint-out", str(ckpt), "--k", "3", "--epochs", "3", "--seed", "0",
        )
        assert code == 0
        kind, params, _ = load_checkpoint(ckpt)
        assert kind == "bouchard_lvm"
        assert params.psi.shape == (30, 3)
        code, stdout, _ = run(
            capsys, "eval", "--checkpoint", str(ckpt),
            "--test-data", str(tmp_path / "sess.test.jsonl"), "--k", "5",
        )
        assert code == 0
        report = json.loads(stdout)
        assert 0.0 <= report["recall_at_5"] <= 1.0
        assert report["events"] + report["skipped"] == 10

    def test_lvm_negatives_zero_matches_full(self, tmp_path, capsys):
        data = self._sim_sessions(capsys, tmp_path)
        traces = []
        for negatives, name in ((0, "a"), (30, "b")):
            trace = tmp_path / f"{name}.csv"
            code, _, _ = run(
                capsys, "train", "--model", "lvm", "--data", str(data),
                "--checkpoint-out", str(tmp_path / f"{name}.json"), "--trace-out", str(trace),
                "--k", "2", "--epochs", "2", "--seed", "1", "--negatives", str(negatives),
            )
            assert code == 0
            traces.append(trace.read_bytes())
        # requesting every item as a negative short-circuits to the full
        # partition function, so the two runs are identical
        assert traces[0] == traces[1]

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        data = self._sim_logreg(capsys, tmp_path)
        cfg = tmp_path / "train.cfg"
        cfg.write_text("epochs = 3  # short run\nlearning_rate = 0.2\noptimizer = adagrad\n")
        ckpt = tmp_path / "c.json"
        code, _, _ = run(
            capsys, "train", "--model", "jj", "--data", str(data), "--config", str(cfg),
            "--checkpoint-out", str(ckpt), "--epochs", "6",
        )
        assert code == 0
        _, _, meta = load_checkpoint(ckpt)
        assert meta["config"]["epochs"] == 6  # flag wins
        assert meta["config"]["learning_rate"] == 0.2

    def test_unknown_config_key_is_validation_error(self, tmp_path, capsys):
        data = self._sim_logreg(capsys, tmp_path)
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("learningrate = 0.2\n")
        code, _, err = run(
            capsys, "train", "--model", "jj", "--data", str(data), "--config", str(cfg),
            "--checkpoint-out", str(tmp_path / "c.json"),
        )
        assert code == 1
        assert "learningrate" in err


class TestEvalBaselines:
    def test_pop_and_itemknn(self, tmp_path, capsys):
        train = tmp_path / "sess.jsonl"
        run(capsys, "simulate", "--kind", "sessions", "--out", str(train), "--u", "40",
            "--u-test", "15", "--p", "25", "--k-true", "2", "--seed", "9")
        for baseline in ("pop", "itemknn"):
            code, stdout, _ = run(
                capsys, "eval", "--baseline", baseline, "--train-data", str(train),
                "--test-data", str(tmp_path / "sess.test.jsonl"),
            )
            assert code == 0
            report = json.loads(stdout)
            assert 0.0 <= report["recall_at_5"] <= 1.0

    def test_baseline_without_train_data(self, tmp_path, capsys):
        train = tmp_path / "sess.jsonl"
        run(capsys, "simulate", "--kind", "sessions", "--out", str(train), "--u", "5",
            "--p", "10", "--k-true", "1", "--seed", "0")
        code, _, err = run(capsys, "eval", "--baseline", "pop", "--test-data", str(train))
        assert code == 1
        assert "train-data" in err

    def test_catalog_mismatch(self, tmp_path, capsys):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run(capsys, "simulate", "--kind", "sessions", "--out", str(a), "--u", "5",
            "--p", "10", "--k-true", "1", "--seed", "0")
        run(capsys, "simulate", "--kind", "sessions", "--out", str(b), "--u", "5",
            "--p", "12", "--k-true", "1", "--seed", "0")
        code, _, err = run(capsys, "eval", "--baseline", "pop", "--train-data", str(a),
                           "--test-data", str(b))
        assert code == 1
        assert "mismatch" in err


class TestVerifyCommand:
    def test_bounds_suite_passes(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code, stdout, _ = run(capsys, "verify", "--suite", "bounds", "--out", str(out))
        assert code == 0
        report = json.loads(out.read_text())
        assert all(check["pass"] for suite in report.values() for check in suite.values())

    def test_unbiasedness_suite_passes(self, capsys):
        code, stdout, _ = run(capsys, "verify", "--suite", "unbiasedness")
        assert code == 0
        report = json.loads(stdout)
        assert all(check["pass"] for suite in report.values() for check in suite.values())


class TestErrorCodes:
    def test_missing_data_file_is_io_error(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "train", "--model", "jj", "--data", str(tmp_path / "nope.csv"),
            "--checkpoint-out", str(tmp_path / "c.json"),
        )
        assert code == 3
        assert "io error" in err

    def test_malformed_csv_is_io_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("y,x0\n1,not_a_number\n")
        code, _, err = run(
            capsys, "train", "--model", "jj", "--data", str(bad),
            "--checkpoint-out", str(tmp_path / "c.json"),
        )
        assert code == 3
        assert "line 2" in err

    def test_bad_flag_value_is_validation_error(self, tmp_path, capsys):
        code, _, _ = run(capsys, "simulate", "--kind", "nonsense", "--out", str(tmp_path / "x"))
        assert code == 1

    def test_negative_epochs_is_validation_error(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        run(capsys, "simulate", "--kind", "logreg", "--out", str(data), "--n", "10", "--d", "2")
        code, _, _ = run(
            capsys, "train", "--model", "jj", "--data", str(data),
            "--checkpoint-out", str(tmp_path / "c.json"), "--epochs", "-1",
        )
        assert code == 1


class TestConfigParser:
    def test_comments_and_whitespace(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("# full line comment\n\n  epochs = 9 # trailing\nlearning-rate = 0.5\n")
        assert parse_config_file(cfg) == {"epochs": "9", "learning_rate": "0.5"}

    def test_missing_equals_rejected(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("epochs 9\n")
        with pytest.raises(ValueError, match="line 1"):
            parse_config_file(cfg)
