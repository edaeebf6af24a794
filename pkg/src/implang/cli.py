"""Command-line entry point: ``impl <subcommand> ...``.

Every subcommand writes into ``--out-dir`` and leaves a ``manifest.json``
there; ``impl replay <manifest>`` re-runs it.
"""

from __future__ import annotations

import argparse
import logging
import shlex
from dataclasses import replace
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import ngram_lm, nptree, perturb, report
from . import tokenize as tok_mod
from .errors import ArgumentError, ImplangError
from .evaluate import minimal_pairs as gs
from .evaluate import separability as sep
from .evaluate import stats as st
from .manifest import MANIFEST_NAME, RunManifest

log = logging.getLogger("implang")


class UsageError(Exception):
    pass


# -- helpers -------------------------------------------------------------

def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_text_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\r\n") for line in fh if line.strip()]


def _corpus_texts(path, split):
    _, recs, splits = corpus_mod.read_language(path)
    return [r for r in recs if split in (None, "all") or splits.get(r.id, corpus_mod.UNASSIGNED) == split]


def _sentences(args) -> list[str]:
    if getattr(args, "corpus", None):
        return [r.text for r in _corpus_texts(args.corpus, args.split)]
    if getattr(args, "text", None):
        return _read_text_lines(args.text)
    raise UsageError("give --corpus or --text")


def _input_paths(args) -> list[str]:
    paths = []
    for name in ("corpus", "text", "tokenizer", "trees", "model", "pairs", "att_scores",
                 "unatt_scores", "trajectories", "table"):
        value = getattr(args, name, None)
        if value and Path(value).is_file():
            paths.append(value)
    if getattr(args, "category_map", None) and Path(args.category_map).is_file():
        paths.append(args.category_map)
    if getattr(args, "corpus_dir", None):
        paths += sorted(str(p) for p in Path(args.corpus_dir).glob("corpus.*.tsv"))
    for spec in getattr(args, "sources", None) or []:
        _, template = _split_source(spec)
        for lang in _langs(args):
            paths.append(template.format(lang=lang))
    return paths


def _langs(args) -> list[str]:
    return [x for x in args.langs.split(",") if x] if getattr(args, "langs", None) else []


def _split_source(spec: str) -> tuple[str, str]:
    name, sep_, template = spec.partition("=")
    if not sep_ or "{lang}" not in template:
        raise UsageError(f"--sources expects NAME=PATH_WITH_{{lang}}, got {spec!r}")
    return name, template


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


# -- build-corpus --------------------------------------------------------

def cmd_build_corpus(args, manifest: RunManifest) -> None:
    langs = _langs(args)
    if not langs:
        raise UsageError("--langs is required")
    sources = []
    for spec in args.sources:
        name, template = _split_source(spec)
        sources.append((name, [(lang, template.format(lang=lang)) for lang in langs]))
    corpus = corpus_mod.ingest(sources)
    dedup = args.dedup_lang or langs[0]
    corpus = corpus_mod.deduplicate(corpus, dedup)
    if args.ascii_filter:
        corpus = corpus_mod.filter_records(corpus, corpus_mod.ascii_filter(dedup, args.ascii_threshold))
    corpus = corpus_mod.make_splits(corpus, args.test_size, args.seed)
    out = _out_dir(args)
    corpus_mod.write_corpus(corpus, out)
    stats = corpus_mod.stats(corpus, args.ref_lang or dedup)
    (out / "stats.tsv").write_text(stats.to_tsv(), encoding="utf-8")
    manifest.seeds["split"] = args.seed
    print(stats.to_tsv(), end="")


# -- tokenize ------------------------------------------------------------

def _load_tokenizer(args) -> tok_mod.Tokenizer:
    if getattr(args, "tokenizer", None):
        return tok_mod.Tokenizer.load(args.tokenizer)
    return tok_mod.Tokenizer(args.kind)


def cmd_tokenize(args, manifest: RunManifest) -> None:
    out = _out_dir(args)
    if args.action == "train":
        tok = tok_mod.train_bpe(_sentences(args), args.vocab_size)
        path = out / (args.name or "tokenizer.txt")
        tok.save(path)
        print(f"{len(tok.merges)} merges, vocab {tok.vocab.size} -> {path}")
    elif args.action == "encode":
        tok = _load_tokenizer(args)
        if args.corpus:
            lang, recs, splits = corpus_mod.read_language(args.corpus)
            texts = {r.id: tok.encode(r.text).to_marked() for r in recs}
            corpus = corpus_mod.ParallelCorpus((lang,), {lang: tuple(recs)}, splits)
            corpus = corpus.replace_texts(lang, texts)
            path = out / corpus_mod.corpus_filename(lang, "tokens")
            corpus_mod.write_language(corpus, lang, path)
        else:
            path = out / "encoded.txt"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for line in _sentences(args):
                    fh.write(tok.encode(line).to_marked() + "\n")
        print(f"encoded -> {path}")
    elif args.action == "tcw":
        tok = _load_tokenizer(args)
        sentences = _sentences(args)
        value = tok_mod.tcw(tok, sentences)
        heuristic = tok_mod.vocab_heuristic(sentences)
        text = (f"tcw\t{float(value)!r}\ntcw_fraction\t{value.numerator}/{value.denominator}\n"
                f"vocab_heuristic\t{heuristic}\n")
        (out / "tcw.tsv").write_text(text, encoding="utf-8")
        print(text, end="")


# -- perturb -------------------------------------------------------------

def cmd_perturb(args, manifest: RunManifest) -> None:
    corpus = corpus_mod.read_corpus_dir(args.corpus_dir)
    lang = args.lang
    out = _out_dir(args)
    spec_text = args.spec.strip()
    if spec_text.startswith("np:") or spec_text in ("np_random",):
        try:
            pattern = nptree.NpPattern.parse(spec_text)
        except ArgumentError as exc:
            raise UsageError(str(exc)) from None
        if not args.trees or not args.category_map:
            raise UsageError("NP patterns need --trees and --category-map")
        if pattern.is_random and args.seed is None:
            raise UsageError("np:random needs an explicit --seed")
        cmap_path = Path(args.category_map)
        cmap = nptree.CategoryMap.load(cmap_path) if cmap_path.is_file() else nptree.CategoryMap.preset(args.category_map)
        trees = nptree.trees_by_id(corpus, lang, nptree.read_trees(args.trees))
        seed = args.seed or 0
        new, skipped = nptree.perturb_np_corpus(corpus, lang, trees, pattern, cmap, seed)
        tag = str(pattern)
        if not pattern.is_random and args.verify_recovery:
            again, _ = nptree.perturb_np_corpus(
                new, lang, {i: t and nptree.reorder_np(t, pattern, cmap) for i, t in trees.items()},
                pattern, cmap, seed)
            if again.texts(lang) != new.texts(lang):
                raise ImplangError("NP pattern is not idempotent on this corpus")
        pairs = nptree.extract_minimal_pairs(corpus, new, lang)
        nptree.write_pairs(pairs, out / f"pairs.{lang}.{tag}.tsv")
        manifest.seeds["np"] = seed
        print(f"{len(pairs)} minimal pairs, {len(skipped)} records skipped")
    else:
        try:
            spec = perturb.parse_spec(spec_text)
        except ArgumentError as exc:
            raise UsageError(str(exc)) from None
        if spec.kind == perturb.SHUFFLE_NONDETERMINISTIC and args.seed is None and "s=" not in spec_text:
            raise UsageError("shuffle_nondeterministic needs s= in the spec or --seed")
        if spec.kind == perturb.SHUFFLE_NONDETERMINISTIC and args.seed is not None and "s=" not in spec_text:
            spec = perturb.PerturbationSpec(spec.kind, None, args.seed, spec.unit)
        tokenizer = _load_tokenizer(args) if args.tokenizer else None
        new = perturb.perturb_corpus(spec, corpus, lang, tokenizer, workers=args.threads)
        tag = perturb.format_spec(spec)
        if args.verify_recovery:
            if not spec.recoverable:
                raise UsageError(f"{spec.kind} cannot be recovered")
            back = perturb.recover_corpus(spec, new, lang)
            expected = corpus
            if spec.unit == perturb.TOKEN_UNIT:
                expected = corpus.replace_texts(
                    lang, {r.id: tokenizer.encode(r.text).detokenize() for r in corpus.records[lang]})
            mismatches = [a.id for a, b in zip(expected.records[lang], back.records[lang]) if a.text != b.text]
            if mismatches:
                raise ImplangError(f"recovery failed for {len(mismatches)} records, e.g. id {mismatches[0]}")
            print(f"recovery verified on {len(new)} records")
        manifest.seeds["perturbation"] = spec.seed
    corpus_mod.write_language(new, lang, out / corpus_mod.corpus_filename(lang, tag))
    print(f"-> {out / corpus_mod.corpus_filename(lang, tag)}")


# -- language model ------------------------------------------------------

def cmd_train_lm(args, manifest: RunManifest) -> None:
    sentences = [r.text for r in _corpus_texts(args.corpus, args.split)]
    model = ngram_lm.train(sentences, args.order, args.smoothing, args.k, args.unk_threshold)
    out = _out_dir(args)
    model.save(out / "model.txt")
    print(f"order {model.order} {model.smoothing} model, |V| = {model.vocab_size} -> {out / 'model.txt'}")


def _variant_from_path(path) -> str:
    name = Path(path).name
    parts = name.split(".")
    # corpus.<lang>.<tag>.tsv
    if len(parts) >= 4 and parts[0] == "corpus":
        return ".".join(parts[2:-1])
    return "identity"


def cmd_eval_ppl(args, manifest: RunManifest) -> None:
    model = ngram_lm.NgramModel.load(args.model)
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else 0
    if args.pairs:
        if not args.unatt_variant:
            raise UsageError("--pairs needs --unatt-variant")
        records = []
        for p in nptree.read_pairs(args.pairs):
            records.append(ngram_lm.score(model, p.s_att, p.id, args.att_variant, args.checkpoint, seed))
            records.append(ngram_lm.score(model, p.s_unatt, p.id, args.unatt_variant, args.checkpoint, seed))
        ngram_lm.write_scores(records, out / "scores.tsv")
        print(f"scored {len(records) // 2} pairs -> {out / 'scores.tsv'}")
        return
    variant = args.variant or _variant_from_path(args.corpus)
    recs = _corpus_texts(args.corpus, args.split)
    if not recs:
        raise ImplangError(f"no {args.split} records in {args.corpus}")
    records = [ngram_lm.score(model, r.text, r.id, variant, args.checkpoint, seed) for r in recs]
    ngram_lm.write_scores(records, out / "scores.tsv")
    rep = ngram_lm.perplexity_from_scores(records, args.checkpoint, seed, args.aggregation)
    rep = replace(rep, vocab_size=model.vocab_size)
    (out / "perplexity.tsv").write_text(rep.to_tsv(), encoding="utf-8")
    print(f"{variant}\tgeometric_mean_perplexity\t{rep.geometric_mean!r}")
    if rep.infinite_ids:
        print(f"warning: {len(rep.infinite_ids)} sentences with zero probability", file=sys.stderr)


def cmd_genscore(args, manifest: RunManifest) -> None:
    pairs = nptree.read_pairs(args.pairs)
    att, _ = ngram_lm.ingest_scores(args.att_scores)
    unatt, _ = ngram_lm.ingest_scores(args.unatt_scores)
    for name, recs in (("--att-scores", att), ("--unatt-scores", unatt)):
        if not recs:
            raise ImplangError(f"{name} file has no score rows")
    scored = gs.attach_scores(pairs, att, unatt, args.att_variant, args.unatt_variant)
    res = gs.genscore(scored)
    out = _out_dir(args)
    (out / "genscore.tsv").write_text(res.to_tsv(), encoding="utf-8")
    print(res.to_tsv(), end="")


def cmd_separability(args, manifest: RunManifest) -> None:
    path = args.trajectories or sep.bundled_fixture_path()
    data = sep.read_trajectories(path)
    if args.permute_labels:
        data = sep.permute_labels(data, args.seed)
    res = sep.svm_separability(data, args.folds, args.lam, args.seed, args.iterations, args.average_seeds)
    out = _out_dir(args)
    (out / "separability.tsv").write_text(res.to_tsv(), encoding="utf-8")
    manifest.seeds["cv"] = args.seed
    print(f"macro_f1\t{res.macro_f1_mean:.4f}\tsd\t{res.macro_f1_sd:.4f}")


# -- stats ---------------------------------------------------------------

def _samples(data: sep.TrajectoryMatrix, language: str, variant: str, checkpoint: int | None):
    rows = [i for i in range(len(data.labels))
            if data.languages[i] == language and data.variants[i] == variant]
    if not rows:
        raise ImplangError(f"no trajectory for {language}/{variant}")
    steps, grid = data.series(rows[0])
    if checkpoint is None:
        return steps, grid
    return steps, grid[steps.index(checkpoint)]


def cmd_stats(args, manifest: RunManifest) -> None:
    out = _out_dir(args)
    lines = []
    if args.test == "welch":
        data = sep.read_trajectories(args.trajectories)
        steps, control = _samples(data, args.language, args.control, None)
        m = args.comparisons or len(steps)
        lines.append("#variant\t" + "\t".join(str(s) for s in steps))
        variants = sorted({v for lang, v in zip(data.languages, data.variants)
                           if lang == args.language and v != args.control})
        for v in variants:
            _, grid = _samples(data, args.language, v, None)
            cells = []
            for j in range(len(steps)):
                try:
                    cells.append(_fmt(st.welch_t(grid[j], control[j], m).p_bonferroni))
                except ImplangError:
                    cells.append("nan")
            lines.append(v + "\t" + "\t".join(cells))
    elif args.test == "mann-whitney":
        data = sep.read_trajectories(args.trajectories)
        _, ga = _samples(data, args.language, args.a, args.checkpoint)
        _, gb = _samples(data, args.language, args.b, args.checkpoint)
        xa = ga.mean(axis=1) if ga.ndim == 2 else ga
        xb = gb.mean(axis=1) if gb.ndim == 2 else gb
        res = st.mann_whitney(xa.tolist(), xb.tolist())
        lines += [f"U_a\t{_fmt(res.u_a)}", f"U_b\t{_fmt(res.u_b)}", f"W_a\t{_fmt(res.w_a)}",
                  f"p\t{_fmt(res.p)}", f"method\t{res.method}"]
    elif args.test == "spearman":
        x, y = _table_columns(args.table, args.x, args.y)
        res = st.spearman(x, y, args.method)
        lines += [f"rho\t{_fmt(res.rho)}", f"p\t{_fmt(res.p)}", f"n\t{res.n}", f"method\t{res.method}"]
    text = "\n".join(lines) + "\n"
    (out / f"stats.{args.test}.tsv").write_text(text, encoding="utf-8")
    print(text, end="")


def _table_columns(path, xcol, ycol):
    rows = [line.split("\t") for line in _read_text_lines(path)]
    header = [h.lstrip("#") for h in rows[0]]
    try:
        ix, iy = header.index(xcol), header.index(ycol)
    except ValueError:
        raise ImplangError(f"columns {xcol!r}/{ycol!r} not in header {header}") from None
    return [float(r[ix]) for r in rows[1:]], [float(r[iy]) for r in rows[1:]]


def cmd_report(args, manifest: RunManifest) -> None:
    data = sep.read_trajectories(args.trajectories)
    out = _out_dir(args)
    name = f"perplexity.{args.language}.svg" if args.language else "perplexity.svg"
    report.plot_trajectories(data, out / name, args.language)
    text = report.summary(data, args.language)
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")


# -- replay --------------------------------------------------------------

def cmd_replay(args) -> int:
    manifest = RunManifest.read(args.manifest)
    manifest.verify_inputs()
    argv = list(manifest.argv)
    if args.out_dir:
        argv = _replace_flag(argv, "--out-dir", args.out_dir)
    return main(argv)


def _replace_flag(argv, flag, value):
    out = []
    skip = False
    for i, a in enumerate(argv):
        if skip:
            skip = False
            continue
        if a == flag:
            out += [flag, value]
            skip = True
        elif a.startswith(flag + "="):
            out.append(f"{flag}={value}")
        else:
            out.append(a)
    return out


# -- parser --------------------------------------------------------------

def _common(p, seed_required=False):
    p.add_argument("--out-dir", required=True, help="directory for outputs and manifest.json")
    p.add_argument("--seed", type=int, required=seed_required, default=None)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-corpus", help="ingest, deduplicate, filter and split aligned sources")
    p.add_argument("--sources", action="append", required=True, metavar="NAME=PATH_{lang}")
    p.add_argument("--langs", required=True, help="comma-separated language codes")
    p.add_argument("--test-size", type=int, required=True)
    p.add_argument("--dedup-lang")
    p.add_argument("--ref-lang", help="language for word counts (default: dedup language)")
    p.add_argument("--ascii-filter", action="store_true", help="drop ASCII-dominated rows in non-key languages")
    p.add_argument("--ascii-threshold", type=float, default=0.9)
    _common(p, seed_required=True)
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("tokenize", help="train a BPE tokenizer, encode text, or measure TCW")
    p.add_argument("action", choices=("train", "encode", "tcw"))
    p.add_argument("--corpus", help="corpus record file")
    p.add_argument("--split", default="train", help="split to read from --corpus (or 'all')")
    p.add_argument("--text", help="plain text, one sentence per line")
    p.add_argument("--vocab-size", type=int)
    p.add_argument("--tokenizer", help="tokenizer file (#vocab / #merges)")
    p.add_argument("--kind", default="whitespace", choices=(tok_mod.WHITESPACE, tok_mod.CHARACTER))
    p.add_argument("--name", help="output tokenizer filename")
    _common(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("perturb", help="apply a sequence or NP perturbation to one language")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--spec", required=True,
                   help=f"one of {', '.join(perturb.KINDS)} with :w=/:s=/:unit= params, or np:<pattern>")
    p.add_argument("--tokenizer")
    p.add_argument("--trees", help="one bracketed parse per line, ascending id order")
    p.add_argument("--category-map", help="category map file or preset (ptb, vit, ctb, cintil)")
    p.add_argument("--verify-recovery", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("train-lm", help="train an n-gram model on a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--smoothing", default=ngram_lm.WITTEN_BELL, choices=ngram_lm.SMOOTHINGS)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--unk-threshold", type=int, default=2)
    _common(p)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("eval-ppl", help="score sentences and compute geometric-mean perplexity")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus")
    p.add_argument("--split", default="test")
    p.add_argument("--variant")
    p.add_argument("--pairs", help="minimal-pair file; scores both strings of each pair")
    p.add_argument("--att-variant", default="identity")
    p.add_argument("--unatt-variant")
    p.add_argument("--checkpoint", default="-")
    p.add_argument("--aggregation", default=ngram_lm.SENTENCE_MEAN,
                   choices=(ngram_lm.SENTENCE_MEAN, ngram_lm.TOKEN_MEAN))
    _common(p)
    p.set_defaults(func=cmd_eval_ppl)

    p = sub.add_parser("genscore", help="ΔGenScore from minimal pairs and two score files")
    p.add_argument("--pairs", required=True)
    p.add_argument("--att-scores", required=True)
    p.add_argument("--unatt-scores", required=True)
    p.add_argument("--att-variant", default="identity")
    p.add_argument("--unatt-variant", required=True)
    _common(p)
    p.set_defaults(func=cmd_genscore)

    p = sub.add_parser("separability", help="linear-SVM probe over perplexity trajectories")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trajectories", help="trajectory TSV")
    src.add_argument("--bundled-fixture", action="store_true", help="use the bundled separable fixture")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--average-seeds", action="store_true")
    p.add_argument("--permute-labels", action="store_true", help="label-permutation control")
    _common(p, seed_required=True)
    p.set_defaults(func=cmd_separability)

    p = sub.add_parser("stats", help="Welch / Mann-Whitney / Spearman tests")
    p.add_argument("test", choices=("welch", "mann-whitney", "spearman"))
    p.add_argument("--trajectories")
    p.add_argument("--language")
    p.add_argument("--control", default="identity")
    p.add_argument("--comparisons", type=int, help="Bonferroni m (default: number of checkpoints)")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--checkpoint", type=int)
    p.add_argument("--table")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--method", default="t", choices=("t", "exact"))
    _common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="plot perplexity vs checkpoint (SVG) and summarize")
    p.add_argument("--trajectories", required=True)
    p.add_argument("--language")
    _common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir")
    p.set_defaults(func=None)
    return parser


def _check_required(args):
    need = {
        ("stats", "welch"): ("trajectories", "language"),
        ("stats", "mann-whitney"): ("trajectories", "language", "a", "b"),
        ("stats", "spearman"): ("table", "x", "y"),
        ("tokenize", "train"): ("vocab_size",),
    }
    key = (args.command, getattr(args, "test", None) or getattr(args, "action", None))
    missing = [n for n in need.get(key, ()) if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{' '.join(key)} needs " + ", ".join("--" + m.replace("_", "-") for m in missing))
    if args.command == "eval-ppl" and not (args.corpus or args.pairs):
        raise UsageError("eval-ppl needs --corpus or --pairs")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "replay":
            return cmd_replay(args)
        _check_required(args)
        manifest = RunManifest(args.command, argv)
        manifest.record_inputs(_input_paths(args))
        args.func(args, manifest)
        out = Path(args.out_dir)
        manifest.record_outputs(out)
        manifest.write(out)
    except UsageError as exc:
        parser.error(str(exc))
    except (ImplangError, OSError, ValueError) as exc:
        print(f"impl {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def format_command(argv) -> str:
    return "impl " + " ".join(shlex.quote(a) for a in argv)


if __name__ == "__main__":
    sys.exit(main())
