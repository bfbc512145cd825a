import json
import subprocess
import sys

import pytest

from ityness.cli import main


def run_cli(*argv):
    return subprocess.run(
        [sys.executable, "-m", "ityness.cli", *argv], capture_output=True, text=True
    )


class TestBasics:
    def test_version_prints_digests(self):
        proc = run_cli("--version")
        assert proc.returncode == 0
        info = json.loads(proc.stdout)
        assert info["version"]
        assert "prompts.json" in info["data_digests"]

    def test_no_subcommand_shows_help(self):
        proc = run_cli()
        assert proc.returncode == 1

    def test_unknown_flag_exits_nonzero(self):
        proc = run_cli("count", "--nope")
        assert proc.returncode == 2  # argparse usage error

    def test_input_error_is_exit_1_with_json_stderr(self, tmp_path):
        proc = run_cli("stats", "--lexicon", str(tmp_path / "missing.tsv"),
                       "--out", str(tmp_path / "o.csv"))
        assert proc.returncode == 1
        err = json.loads(proc.stderr.strip().splitlines()[-1])
        assert "error" in err


class TestCountExtract:
    def test_count_and_extract(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("selfish selfishness selfishness available availability\n")
        freq = tmp_path / "f.tsv"
        assert main(["count", "--corpus", str(corpus), "--out", str(freq)]) == 0
        lex = tmp_path / "l.tsv"
        assert main(["extract", "--freq", str(freq), "--out", str(lex)]) == 0
        lines = lex.read_text().strip().splitlines()
        assert lines[0] == "base\tclass\tbase_count\tity_count\tness_count"
        assert len(lines) == 3

    def test_outputs_pipe_between_subcommands(self, tmp_path):
        corpus = tmp_path / "c.txt"
        words = []
        for i, stem in enumerate(
            ("self", "boy", "girl", "fool", "styl", "book", "red", "warm",
             "cold", "damp", "soft", "lout")
        ):
            words += [stem + "ish"] * 2 + [stem + "ishness"] * (i + 1)
        corpus.write_text(" ".join(words))
        freq = tmp_path / "f.tsv"
        lex = tmp_path / "l.tsv"
        model = tmp_path / "m.tsv"
        pred = tmp_path / "p.tsv"
        nonce = tmp_path / "n.tsv"
        assert main(["count", "--corpus", str(corpus), "--out", str(freq)]) == 0
        assert main(["extract", "--freq", str(freq), "--out", str(lex)]) == 0
        assert main(["nonce", "--lexicon", str(lex), "--class=ish", "--count", "4",
                     "--corpus-freq", str(freq), "--seed", "3", "--out", str(nonce)]) == 0
        assert main(["mgl-train", "--lexicon", str(lex), "--mode", "type",
                     "--out", str(model)]) == 0
        assert main(["mgl-predict", "--model", str(model), "--in", str(nonce),
                     "--out", str(pred)]) == 0
        rows = pred.read_text().strip().splitlines()
        assert len(rows) == 5 and all("ness" in r for r in rows[1:])

    def test_config_file_sets_defaults_flags_win(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("one two two\n")
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("format=text\nthreads=1\n")
        out = tmp_path / "f.tsv"
        assert main(["count", "--corpus", str(corpus), "--out", str(out),
                     "--config", str(cfg)]) == 0
        assert "two\t2" in out.read_text()

    def test_bad_config_key_rejected(self, tmp_path):
        corpus = tmp_path / "c.txt"
        corpus.write_text("x\n")
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("bogus_key=1\n")
        code = main(["count", "--corpus", str(corpus),
                     "--out", str(tmp_path / "f.tsv"), "--config", str(cfg)])
        assert code == 1


class TestGcmCli:
    def test_train_and_predict(self, tmp_path):
        lex = tmp_path / "l.tsv"
        lex.write_text(
            "base\tclass\tbase_count\tity_count\tness_count\n"
            "selfish\t-ish\t5\t0\t9\n"
            "boyish\t-ish\t5\t0\t2\n"
            "available\t-able\t5\t7\t0\n"
            "workable\t-able\t5\t3\t0\n"
        )
        model = tmp_path / "g.tsv"
        assert main(["gcm-train", "--lexicon", str(lex), "--mode", "type",
                     "--sensitivity", "1.0", "--out", str(model)]) == 0
        nonce = tmp_path / "n.tsv"
        nonce.write_text("carmish\t-ish\nnotable\t-able\n")
        pred = tmp_path / "p.tsv"
        assert main(["gcm-predict", "--model", str(model), "--in", str(nonce),
                     "--out", str(pred)]) == 0
        rows = [r.split("\t") for r in pred.read_text().strip().splitlines()[1:]]
        got = {r[0]: r[2] for r in rows}
        assert got["carmish"] == "ness" and got["notable"] == "ity"

    def test_fit_flag(self, tmp_path):
        lex = tmp_path / "l.tsv"
        rows = ["base\tclass\tbase_count\tity_count\tness_count"]
        for stem in ("aaa", "aab", "aac", "aad"):
            rows.append(f"{stem}zzish\t-ish\t5\t0\t3")
        for stem in ("bbb", "bbc", "bbd", "bbe"):
            rows.append(f"{stem}qqable\t-able\t5\t4\t0")
        lex.write_text("\n".join(rows) + "\n")
        model = tmp_path / "g.tsv"
        assert main(["gcm-train", "--lexicon", str(lex), "--mode", "type",
                     "--fit", "--out", str(model)]) == 0


def test_parse_command(tmp_path, capsys):
    assert main(["parse", "precancellation", "table"]) == 0
    out = capsys.readouterr().out
    assert "precancellation\tcomplex" in out
    assert "table\tsimplex" in out
