import json

import pytest

from implang import cli
from implang.fixtures import NP_EXAMPLE_EXPECTED, NP_EXAMPLE_SENTENCE, NP_EXAMPLE_TREE

from conftest import write_parallel


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def built(tmp_path):
    (name, files), = write_parallel(tmp_path, 300, seed=4)
    template = str(tmp_path / "src.{lang}")
    out = tmp_path / "corpus"
    assert run("build-corpus", "--sources", f"src={template}", "--langs", "en,de",
               "--test-size", 50, "--seed", 1, "--out-dir", out) == 0
    return out


def test_build_corpus_outputs(built):
    names = sorted(p.name for p in built.iterdir())
    assert names == ["corpus.de.tsv", "corpus.en.tsv", "manifest.json", "stats.tsv"]
    man = json.loads((built / "manifest.json").read_text())
    assert man["seeds"] == {"split": 1}
    assert set(man["outputs"]) == {"corpus.de.tsv", "corpus.en.tsv", "stats.tsv"}


def test_build_corpus_seed_required(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("build-corpus", "--sources", "a=x.{lang}", "--langs", "en", "--test-size", 1,
            "--out-dir", tmp_path)
    assert exc.value.code == 2


def test_unknown_spec_is_usage_error(built, tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run("perturb", "--corpus-dir", built, "--lang", "en", "--spec", "scramble", "--out-dir", tmp_path / "p")
    assert exc.value.code == 2
    assert "shuffle_local" in capsys.readouterr().err


def test_missing_input_is_data_error(tmp_path):
    assert run("train-lm", "--corpus", tmp_path / "nope.tsv", "--out-dir", tmp_path / "m") == 1


def test_lm_pipeline_and_replay(built, tmp_path):
    p = tmp_path / "p"
    assert run("perturb", "--corpus-dir", built, "--lang", "en", "--spec", "reverse_full",
               "--verify-recovery", "--out-dir", p) == 0
    m = tmp_path / "m"
    assert run("train-lm", "--corpus", built / "corpus.en.tsv", "--out-dir", m) == 0
    e = tmp_path / "e"
    assert run("eval-ppl", "--model", m / "model.txt", "--corpus", p / "corpus.en.reverse_full.tsv",
               "--out-dir", e) == 0
    assert (e / "perplexity.tsv").read_text().startswith("#geometric_mean\t")
    scores = (e / "scores.tsv").read_text().splitlines()
    assert len(scores) == 51 and "\treverse_full\t" in scores[1]
    assert run("replay", e / "manifest.json", "--out-dir", tmp_path / "e2") == 0
    for name in ("scores.tsv", "perplexity.tsv"):
        assert (e / name).read_bytes() == (tmp_path / "e2" / name).read_bytes()


def test_replay_refuses_changed_input(built, tmp_path):
    m = tmp_path / "m"
    assert run("train-lm", "--corpus", built / "corpus.en.tsv", "--out-dir", m) == 0
    with open(built / "corpus.en.tsv", "a") as fh:
        fh.write("9999\ten\tsrc\ttrain\textra\n")
    assert run("replay", m / "manifest.json", "--out-dir", tmp_path / "m2") == 1


def test_np_pipeline_to_genscore(tmp_path):
    (tmp_path / "s.en").write_text(f"{NP_EXAMPLE_SENTENCE}\nthe big dog barked .\n")
    trees = tmp_path / "trees.txt"
    trees.write_text(NP_EXAMPLE_TREE + "\n(S (NP (DT the) (JJ big) (NN dog)) (VP (VBD barked)) (. .))\n")
    c = tmp_path / "c"
    assert run("build-corpus", "--sources", f"s={tmp_path}/s.{{lang}}", "--langs", "en",
               "--test-size", 2, "--seed", 0, "--out-dir", c) == 0
    p = tmp_path / "p"
    assert run("perturb", "--corpus-dir", c, "--lang", "en", "--spec", "np:Nnda", "--trees", trees,
               "--category-map", "ptb", "--verify-recovery", "--out-dir", p) == 0
    out = (p / "corpus.en.np:Nnda.tsv").read_text().splitlines()
    assert out[0].split("\t")[-1] == NP_EXAMPLE_EXPECTED["Nnda"]
    assert out[1].split("\t")[-1] == "dog the big barked ."
    pairs = p / "pairs.en.np:Nnda.tsv"
    assert len(pairs.read_text().splitlines()) == 2

    for name, corpus_file in (("att", c / "corpus.en.tsv"), ("unatt", p / "corpus.en.np:Nnda.tsv")):
        assert run("train-lm", "--corpus", corpus_file, "--split", "all", "--unk-threshold", 1,
                   "--out-dir", tmp_path / f"m_{name}") == 0
        assert run("eval-ppl", "--model", tmp_path / f"m_{name}" / "model.txt", "--pairs", pairs,
                   "--unatt-variant", "np:Nnda", "--out-dir", tmp_path / f"s_{name}") == 0
    g = tmp_path / "g"
    assert run("genscore", "--pairs", pairs, "--att-scores", tmp_path / "s_att" / "scores.tsv",
               "--unatt-scores", tmp_path / "s_unatt" / "scores.tsv", "--unatt-variant", "np:Nnda",
               "--out-dir", g) == 0
    rows = dict(line.split("\t") for line in (g / "genscore.tsv").read_text().splitlines())
    # each model has only seen its own order, so each prefers it
    assert rows["genscore_att"] == "1.0" and rows["genscore_unatt"] == "1.0"
    assert rows["delta_genscore"] == "0.0"


def test_np_random_needs_seed(tmp_path):
    (tmp_path / "s.en").write_text("a b\n")
    c = tmp_path / "c"
    run("build-corpus", "--sources", f"s={tmp_path}/s.{{lang}}", "--langs", "en", "--test-size", 0,
        "--seed", 0, "--out-dir", c)
    (tmp_path / "t").write_text("(S (NP (DT a) (NN b)))\n")
    with pytest.raises(SystemExit):
        run("perturb", "--corpus-dir", c, "--lang", "en", "--spec", "np:random", "--trees", tmp_path / "t",
            "--category-map", "ptb", "--out-dir", tmp_path / "p")


def test_tokenize_subcommands(built, tmp_path, capsys):
    t = tmp_path / "t"
    assert run("tokenize", "train", "--corpus", built / "corpus.en.tsv", "--vocab-size", 120, "--out-dir", t) == 0
    assert run("tokenize", "tcw", "--corpus", built / "corpus.en.tsv", "--out-dir", tmp_path / "w") == 0
    assert "tcw\t1.0\n" in (tmp_path / "w" / "tcw.tsv").read_text()
    assert run("tokenize", "encode", "--tokenizer", t / "tokenizer.txt", "--corpus", built / "corpus.en.tsv",
               "--out-dir", tmp_path / "enc") == 0
    enc = (tmp_path / "enc" / "corpus.en.tokens.tsv").read_text().splitlines()
    assert enc[0].split("\t")[-1].startswith("▁")


def test_separability_and_stats(tmp_path, capsys):
    assert run("separability", "--bundled-fixture", "--seed", 0, "--iterations", 5000,
               "--out-dir", tmp_path / "s") == 0
    assert "macro_f1\t1.0000" in capsys.readouterr().out
    table = tmp_path / "tab.tsv"
    table.write_text("#tcw\tppl\n1.2\t30\n1.5\t45\n2.0\t44\n2.2\t80\n")
    assert run("stats", "spearman", "--table", table, "--x", "tcw", "--y", "ppl", "--method", "exact",
               "--out-dir", tmp_path / "sp") == 0
    text = (tmp_path / "sp" / "stats.spearman.tsv").read_text()
    assert "rho\t0.8\n" in text


def test_stats_welch_table(tmp_path):
    from implang.evaluate.separability import TrajectoryMatrix, write_trajectories
    import numpy as np

    cols = tuple(f"ppl@{c}_s{s}" for c in range(100, 1300, 100) for s in (1, 2, 3))
    rng = np.random.default_rng(0)
    feats = np.vstack([rng.normal(50, 1, 36), rng.normal(90, 1, 36), rng.normal(50, 1, 36)])
    data = TrajectoryMatrix(("en",) * 3, ("identity", "reverse_full", "shuffle_local:w=3"),
                            ("attested", "impossible", "impossible"), feats, cols)
    write_trajectories(data, tmp_path / "t.tsv")
    assert run("stats", "welch", "--trajectories", tmp_path / "t.tsv", "--language", "en",
               "--out-dir", tmp_path / "w") == 0
    lines = (tmp_path / "w" / "stats.welch.tsv").read_text().splitlines()
    assert lines[0].split("\t")[1:] == [str(c) for c in range(100, 1300, 100)]
    rev = lines[1].split("\t")
    assert rev[0] == "reverse_full" and all(float(v) < 0.01 for v in rev[1:])
    assert run("report", "--trajectories", tmp_path / "t.tsv", "--language", "en",
               "--out-dir", tmp_path / "r") == 0
    svg = (tmp_path / "r" / "perplexity.en.svg").read_bytes()
    run("report", "--trajectories", tmp_path / "t.tsv", "--language", "en", "--out-dir", tmp_path / "r2")
    assert svg == (tmp_path / "r2" / "perplexity.en.svg").read_bytes()


def test_identity_spec_is_byte_identical(built, tmp_path):
    assert run("perturb", "--corpus-dir", built, "--lang", "en", "--spec", "identity",
               "--out-dir", tmp_path / "p") == 0
    assert (tmp_path / "p" / "corpus.en.identity.tsv").read_bytes() == (built / "corpus.en.tsv").read_bytes()


def test_verify_recovery_on_10k(tmp_path):
    (name, files), = write_parallel(tmp_path, 10_000, langs=("en",), seed=8)
    c = tmp_path / "c"
    assert run("build-corpus", "--sources", f"src={tmp_path}/src.{{lang}}", "--langs", "en",
               "--test-size", 1000, "--seed", 2, "--out-dir", c) == 0
    assert run("perturb", "--corpus-dir", c, "--lang", "en", "--spec", "shuffle_deterministic:s=84:unit=word",
               "--verify-recovery", "--out-dir", tmp_path / "p") == 0


def test_np_dnNa_table_row(tmp_path):
    (tmp_path / "s.en").write_text(NP_EXAMPLE_SENTENCE + "\n")
    (tmp_path / "t").write_text(NP_EXAMPLE_TREE + "\n")
    c = tmp_path / "c"
    run("build-corpus", "--sources", f"s={tmp_path}/s.{{lang}}", "--langs", "en", "--test-size", 1,
        "--seed", 0, "--out-dir", c)
    assert run("perturb", "--corpus-dir", c, "--lang", "en", "--spec", "np:dnNa", "--trees", tmp_path / "t",
               "--category-map", "ptb", "--out-dir", tmp_path / "p") == 0
    text = (tmp_path / "p" / "corpus.en.np:dnNa.tsv").read_text().rstrip("\n").split("\t")[-1]
    assert text == NP_EXAMPLE_EXPECTED["dnNa"]


def test_perplexity_report_has_vocab_size(built, tmp_path):
    run("train-lm", "--corpus", built / "corpus.en.tsv", "--order", 1, "--out-dir", tmp_path / "m")
    run("eval-ppl", "--model", tmp_path / "m" / "model.txt", "--corpus", built / "corpus.en.tsv",
        "--out-dir", tmp_path / "e")
    head = (tmp_path / "e" / "perplexity.tsv").read_text().splitlines()
    assert any(line.startswith("#vocab_size\t") and line.split("\t")[1].isdigit() for line in head)


def test_genscore_zero_overlap_is_data_error(tmp_path):
    (tmp_path / "pairs.tsv").write_text("1\ta b\tb a\n")
    (tmp_path / "s.tsv").write_text("#sentence_id\tvariant\ttotal_logprob_nat\tunit_count\tcheckpoint\tseed\n"
                                    "9\tidentity\t-1.0\t3\t-\t0\n9\tnp:Nnda\t-2.0\t3\t-\t0\n")
    assert run("genscore", "--pairs", tmp_path / "pairs.tsv", "--att-scores", tmp_path / "s.tsv",
               "--unatt-scores", tmp_path / "s.tsv", "--unatt-variant", "np:Nnda", "--out-dir", tmp_path / "g") == 1
