"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (also collected in
the terminal summary) and then asserts.
"""

import filecmp
import itertools
import math
import random
import time
from statistics import mean

import numpy as np
import pytest
from scipy import stats as sps

from implang import cli
from implang import corpus as C
from implang import ngram_lm as L
from implang import nptree as N
from implang import perturb as P
from implang import tokenize as T
from implang.evaluate import minimal_pairs as G
from implang.evaluate import separability as SEP
from implang.evaluate import stats as S
from implang.fixtures import NP_EXAMPLE_EXPECTED, NP_EXAMPLE_TREE, natural_english

from conftest import elapsed, write_parallel
from test_stats import avg_ranks, pearson, t_tail_quad, u_by_pairs

ROUND_TRIP_SPECS = [
    "identity", "reverse_full", "shuffle_even_odd",
    "shuffle_local:w=2", "shuffle_local:w=3", "shuffle_local:w=5", "shuffle_local:w=10",
    "shuffle_deterministic:s=21", "shuffle_deterministic:s=57", "shuffle_deterministic:s=84",
]


@pytest.fixture(scope="module")
def natural():
    return natural_english()


def natural_corpus(sentences, tmp_path, test_size, seed):
    path = tmp_path / "nat.en"
    if not path.exists():
        path.write_text("\n".join(sentences) + "\n", encoding="utf-8")
    return C.make_splits(C.ingest([("nat", [("en", path)])]), test_size, seed)


def test_criterion_01_round_trip(criterion):
    rnd = random.Random(1)
    vocab = [f"w{i}" for i in range(5000)]
    sentences = [[rnd.choice(vocab) for _ in range(rnd.randint(0, 60))] for _ in range(10_000)]
    start = time.perf_counter()
    mismatches = 0
    for text in ROUND_TRIP_SPECS:
        spec = P.parse_spec(text)
        for i, s in enumerate(sentences):
            mismatches += P.recover(spec, P.apply(spec, s, i), i) != s
    took = time.perf_counter() - start
    ok = mismatches == 0 and took < 10.0
    criterion(1, ok, f"{mismatches} mismatches over 10,000 sentences x {len(ROUND_TRIP_SPECS)} specs "
                     f"in {took:.2f} s (limit 10 s)")
    assert ok


def test_criterion_02_np_orders(criterion):
    tree = N.parse_tree(NP_EXAMPLE_TREE)
    cmap = N.CategoryMap.preset("ptb")
    got = {p: " ".join(N.reorder_np(tree, N.NpPattern.parse(p), cmap).leaves()) for p in NP_EXAMPLE_EXPECTED}
    wrong = [p for p in got if got[p] != NP_EXAMPLE_EXPECTED[p]]
    criterion(2, not wrong, f"{len(got) - len(wrong)}/5 patterns bit-exact" + (f", wrong: {wrong}" if wrong else ""))
    assert not wrong


def test_criterion_03_unigram_invariance(criterion, natural, tmp_path):
    sentences, tokens = [], 0
    for s in natural:
        sentences.append(s)
        tokens += len(s.split())
        if tokens >= 50_000:
            break
    corp = natural_corpus(sentences, tmp_path, len(sentences) // 10, seed=0)
    spec = P.parse_spec("shuffle_deterministic:s=21:unit=word")
    shuf = P.perturb_corpus(spec, corp, "en")
    ppl = []
    for c in (corp, shuf):
        model = L.train(c.texts("en", C.TRAIN), order=1)
        ppl.append(L.perplexity(model, c.texts("en", C.TEST)).geometric_mean)
    rel = abs(ppl[0] - ppl[1]) / ppl[0]
    ok = rel <= 1e-9
    criterion(3, ok, f"{tokens} tokens, attested {ppl[0]:.6f} vs shuffled {ppl[1]:.6f}, rel diff {rel:.2e} (<= 1e-9)")
    assert ok


def test_criterion_04_ordering(criterion, natural, tmp_path):
    tokens = sum(len(s.split()) for s in natural)
    variants = ["identity", "shuffle_local:w=3:unit=word", "shuffle_local:w=10:unit=word",
                "shuffle_deterministic:s=21:unit=word"]
    table = {v: [] for v in variants}
    for seed in (0, 1, 2):
        corp = natural_corpus(natural, tmp_path, 1000, seed)
        for v in variants:
            c = P.perturb_corpus(P.parse_spec(v), corp, "en")
            model = L.train(c.texts("en", C.TRAIN), order=3)
            table[v].append(L.perplexity(model, c.texts("en", C.TEST)).geometric_mean)
    means = [mean(table[v]) for v in variants]
    ok = all(a < b for a, b in zip(means, means[1:]))
    observed = " < ".join(f"{v.split(':unit')[0]}={m:.1f}" for v, m in sorted(zip(variants, means), key=lambda t: t[1]))
    criterion(4, ok, f"{tokens} tokens, trigram means over split seeds 0,1,2: {observed}")
    assert ok


def test_criterion_05_genscore_extremes(criterion):
    def pairs(att_model, unatt_model):
        return [G.MinimalPair(i, f"a b {i}", f"b a {i}", att_model, unatt_model) for i in range(5)]

    # tuples are (own-order string, other string) for each model
    prefers_attested = G.genscore(pairs((-1.0, -2.0), (-2.0, -1.0))).delta
    prefers_unattested = G.genscore(pairs((-2.0, -1.0), (-1.0, -2.0))).delta
    matched = G.genscore(pairs((-1.0, -2.0), (-1.0, -2.0))).delta
    ok = (prefers_attested, prefers_unattested, matched) == (1.0, -1.0, 0.0)
    criterion(5, ok, f"delta: attested-preferring {prefers_attested:+}, unattested-preferring "
                     f"{prefers_unattested:+}, matched training {matched:+}")
    assert ok


def test_criterion_06_separability(criterion):
    data = SEP.read_trajectories(SEP.bundled_fixture_path())
    res = SEP.svm_separability(data, folds=10, seed=0)
    control = SEP.svm_separability(SEP.permute_labels(data, 0), folds=10, seed=0)
    ok = data.features.shape == (60, 36) and res.macro_f1_mean == 1.0 and 0.35 <= control.macro_f1_mean <= 0.65
    criterion(6, ok, f"fixture {data.features.shape}, macro-F1 {res.macro_f1_mean:.4f} (sd {res.macro_f1_sd:.4f}); "
                     f"permuted-label control {control.macro_f1_mean:.4f} (in [0.35, 0.65])")
    assert ok


def test_criterion_07_statistics(criterion):
    rnd = random.Random(7)
    worst = {"spearman": 0.0, "welch": 0.0, "mann_whitney": 0.0}
    counts = dict.fromkeys(worst, 0)
    while counts["spearman"] < 20:
        n = rnd.randint(4, 7)
        x = [rnd.randint(0, 5) for _ in range(n)]
        y = [rnd.gauss(0, 1) for _ in range(n)]
        if len(set(x)) == 1:
            continue
        rx, ry = avg_ranks(x), avg_ranks(y)
        rho = pearson(rx, ry)
        null = [abs(pearson(rx, p)) >= abs(rho) - 1e-12 for p in itertools.permutations(ry)]
        worst["spearman"] = max(worst["spearman"], abs(S.spearman(x, y, "exact").p - sum(null) / len(null)))
        if abs(rho) < 1:
            t = rho * math.sqrt((n - 2) / (1 - rho * rho))
            worst["spearman"] = max(worst["spearman"], abs(S.spearman(x, y).p - t_tail_quad(t, n - 2)))
        counts["spearman"] += 1
    for _ in range(20):
        a = [rnd.gauss(0, 1) for _ in range(rnd.randint(3, 15))]
        b = [rnd.gauss(0.7, 3) for _ in range(rnd.randint(3, 15))]
        r = S.welch_t(a, b, comparisons=12)
        worst["welch"] = max(worst["welch"], abs(r.p_raw - t_tail_quad(r.t, r.df)))
        worst["welch"] = max(worst["welch"], abs(r.p_bonferroni - min(1.0, 12 * t_tail_quad(r.t, r.df))))
        counts["welch"] += 1
    for _ in range(20):
        na, nb = rnd.randint(2, 6), rnd.randint(2, 6)
        pool = [rnd.randint(0, 5) for _ in range(na + nb)]
        a, b = pool[:na], pool[na:]
        u, mu = u_by_pairs(a, b), na * nb / 2
        hits = [abs(u_by_pairs([pool[i] for i in idx], [pool[i] for i in range(na + nb) if i not in idx]) - mu)
                >= abs(u - mu) - 1e-9 for idx in itertools.combinations(range(na + nb), na)]
        r = S.mann_whitney(a, b)
        worst["mann_whitney"] = max(worst["mann_whitney"], abs(r.p - sum(hits) / len(hits)))
        counts["mann_whitney"] += 1
    x = [0.3, 2.0, 1.1, 5.0, -1.0]
    mw = S.mann_whitney([1.0, 4.0, 2.0], [3.0, 0.0, 5.0, 6.0])
    anchors = (S.spearman(x, x).rho == 1.0 and S.welch_t([1.0, 2.0, 3.0], [0.0, 2.0, 4.0]).p_raw == 1.0
               and mw.u_a + mw.u_b == 12)
    ok = anchors and all(v < 1e-3 for v in worst.values()) and min(counts.values()) >= 20
    detail = ", ".join(f"{k} max |dp| {v:.1e} over {counts[k]}" for k, v in worst.items())
    criterion(7, ok, f"{detail}; identity anchors {'hold' if anchors else 'broken'}")
    assert ok


def test_criterion_08_tokenizer(criterion, natural):
    train, held = natural[:-1000], natural[-1000:]
    tok = T.train_bpe(train, 1000)
    bad = sum(tok.encode(s).detokenize() != s for s in held)
    ws = T.tcw(T.whitespace_tokenizer(), natural)
    ch = T.tcw(T.character_tokenizer(), natural)
    bpe = T.tcw(tok, natural)
    heur = T.vocab_heuristic_from_types(10)
    ok = bad == 0 and ws == 1 and ch >= bpe >= ws and heur == 4
    criterion(8, ok, f"{bad}/1000 held-out round-trip failures; TCW char {float(ch):.3f} >= bpe "
                     f"{float(bpe):.3f} >= whitespace {ws}; vocab_heuristic(10) = {heur}")
    assert ok


def _aligned(c):
    C.check_alignment(c)
    return all([r.id for r in c.records[lang]] == c.ids for lang in c.languages)


def test_criterion_09_corpus_pipeline(criterion, tmp_path):
    sources = write_parallel(tmp_path, 6000, seed=9, dup_every=4, name="a") \
        + write_parallel(tmp_path, 4000, seed=10, dup_every=9, name="b")
    c = C.ingest(sources)
    checks = [len(c) == 10_000, _aligned(c)]
    d = C.deduplicate(c, "en")
    checks += [_aligned(d), C.deduplicate(d, "en").records == d.records, len(d) < len(c)]
    f = C.filter_records(d, lambda r: len(r.text.split()) > 2)
    checks.append(_aligned(f))
    outs = []
    for run in ("one", "two"):
        s = C.make_splits(C.deduplicate(C.ingest(sources), "en"), 500, seed=42)
        checks.append(_aligned(s))
        C.write_corpus(s, tmp_path / run)
        outs.append(tmp_path / run)
    same = all(filecmp.cmp(outs[0] / n, outs[1] / n, shallow=False) for n in ("corpus.en.tsv", "corpus.de.tsv"))
    ok = all(checks) and same
    criterion(9, ok, f"{len(c)} records -> {len(d)} after dedup; dedup idempotent, alignment total after "
                     f"every op, split files byte-identical across runs: {same}")
    assert ok


def test_criterion_10_manifest_replay(criterion, natural, tmp_path):
    src = tmp_path / "nat.en"
    src.write_text("\n".join(natural[:3000]) + "\n", encoding="utf-8")
    steps = [
        ("build", ["build-corpus", "--sources", f"nat={tmp_path}/nat.{{lang}}", "--langs", "en",
                   "--test-size", 300, "--seed", 11]),
        ("perturb", ["perturb", "--corpus-dir", tmp_path / "build", "--lang", "en",
                     "--spec", "shuffle_local:w=3:unit=word", "--verify-recovery"]),
        ("lm", ["train-lm", "--corpus", tmp_path / "perturb" / "corpus.en.shuffle_local:w=3:unit=word.tsv"]),
        ("eval", ["eval-ppl", "--model", tmp_path / "lm" / "model.txt",
                  "--corpus", tmp_path / "perturb" / "corpus.en.shuffle_local:w=3:unit=word.tsv"]),
    ]
    codes = []
    for name, argv in steps:
        codes.append(cli.main([str(a) for a in argv] + ["--out-dir", str(tmp_path / name)]))
    identical = []
    for name, _ in steps:
        replay_dir = tmp_path / f"{name}.replay"
        codes.append(cli.main(["replay", str(tmp_path / name / "manifest.json"), "--out-dir", str(replay_dir)]))
        files = sorted(p.name for p in (tmp_path / name).iterdir() if p.name != "manifest.json")
        identical.append(all(filecmp.cmp(tmp_path / name / f, replay_dir / f, shallow=False) for f in files))
    so_far = elapsed()
    ok = all(c == 0 for c in codes) and all(identical) and so_far < 300
    criterion(10, ok, f"replayed {len(steps)} stages, outputs bit-exact: {all(identical)}; "
                      f"suite time so far {so_far:.1f} s (< 300 s)")
    assert ok
