"""Parallel corpus construction: ingest, deduplicate, filter, split.

Records are id-aligned across languages: an id is present in every language
or in none. All operations return new corpora and leave their input alone.

Corpus files are tab-separated, one per language, sorted by id::

    id <TAB> lang <TAB> source <TAB> split <TAB> text
"""

from __future__ import annotations

import logging
import os
import unicodedata
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import AlignmentError, ArgumentError, ConfigurationError, FormatError
from .rng import DOMAIN_SPLIT, keyed_permutation

log = logging.getLogger(__name__)

TRAIN = "train"
TEST = "test"
UNASSIGNED = "-"


@dataclass(frozen=True)
class SentenceRecord:
    id: int
    lang: str
    source: str
    text: str

    def __post_init__(self):
        if not self.lang or not self.source:
            raise ArgumentError(f"record {self.id}: lang and source must be non-empty")
        if not self.text.strip():
            raise ArgumentError(f"record {self.id}: empty text")


@dataclass(frozen=True)
class ParallelCorpus:
    languages: tuple[str, ...]
    records: Mapping[str, tuple[SentenceRecord, ...]]
    splits: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        check_alignment(self)

    @property
    def ids(self) -> list[int]:
        if not self.languages:
            return []
        return [r.id for r in self.records[self.languages[0]]]

    def __len__(self) -> int:
        return len(self.ids)

    def split_of(self, id_: int) -> str:
        return self.splits.get(id_, UNASSIGNED)

    def texts(self, lang: str, split: str | None = None) -> list[str]:
        return [r.text for r in self.iter_records(lang, split)]

    def iter_records(self, lang: str, split: str | None = None):
        if lang not in self.records:
            raise ArgumentError(f"language {lang!r} not in corpus {list(self.languages)}")
        for r in self.records[lang]:
            if split is None or self.split_of(r.id) == split:
                yield r

    def keep_ids(self, keep: Iterable[int]) -> "ParallelCorpus":
        keep = set(keep)
        records = {
            lang: tuple(r for r in recs if r.id in keep)
            for lang, recs in self.records.items()
        }
        splits = {i: s for i, s in self.splits.items() if i in keep}
        return ParallelCorpus(self.languages, records, splits)

    def replace_texts(self, lang: str, texts: Mapping[int, str]) -> "ParallelCorpus":
        """New corpus where ``lang`` records take their text from ``texts``."""
        if lang not in self.records:
            raise ArgumentError(f"language {lang!r} not in corpus")
        new = tuple(
            SentenceRecord(r.id, r.lang, r.source, texts.get(r.id, r.text))
            for r in self.records[lang]
        )
        records = dict(self.records)
        records[lang] = new
        return ParallelCorpus(self.languages, records, dict(self.splits))


@dataclass(frozen=True)
class CorpusStats:
    sentences: Mapping[str, int]
    words: Mapping[str, int]

    @property
    def total_sentences(self) -> int:
        return sum(self.sentences.values())

    @property
    def total_words(self) -> int:
        return sum(self.words.values())

    def to_tsv(self) -> str:
        lines = ["#source\tsentences\twords"]
        for src in self.sentences:
            lines.append(f"{src}\t{self.sentences[src]}\t{self.words[src]}")
        lines.append(f"Overall\t{self.total_sentences}\t{self.total_words}")
        return "\n".join(lines) + "\n"


def check_alignment(corpus: ParallelCorpus) -> None:
    if set(corpus.records) != set(corpus.languages):
        raise AlignmentError("records keyed by languages other than corpus.languages")
    reference = None
    for lang in corpus.languages:
        recs = corpus.records[lang]
        ids = [r.id for r in recs]
        if any(a >= b for a, b in zip(ids, ids[1:])):
            raise AlignmentError(f"{lang}: ids not strictly increasing")
        if any(r.lang != lang for r in recs):
            raise AlignmentError(f"{lang}: record with mismatched lang tag")
        key = [(r.id, r.source) for r in recs]
        if reference is None:
            reference = key
        elif key != reference:
            raise AlignmentError(f"{lang}: ids or sources differ from {corpus.languages[0]}")


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [line.rstrip("\r\n").replace("\t", " ") for line in fh]


def ingest(sources: Sequence[tuple[str, Sequence[tuple[str, str | os.PathLike]]]]) -> ParallelCorpus:
    """Merge line-aligned sources into one corpus.

    ``sources`` is an ordered list of ``(source_tag, [(lang, path), ...])``.
    Line ``i`` of every file in a source forms one tuple. Ids are assigned
    consecutively in (source order, line order). Tuples with a blank line
    in any language are dropped.
    """
    languages: tuple[str, ...] | None = None
    records: dict[str, list[SentenceRecord]] = {}
    next_id = 0
    for tag, files in sources:
        langs = [lang for lang, _ in files]
        if len(set(langs)) != len(langs):
            raise ConfigurationError(f"source {tag!r}: duplicate language code in {langs}")
        if languages is None:
            languages = tuple(langs)
            records = {lang: [] for lang in languages}
        elif set(langs) != set(languages):
            raise AlignmentError(
                f"source {tag!r}: languages {sorted(langs)} differ from {sorted(languages)}"
            )
        columns = {lang: _read_lines(path) for lang, path in files}
        counts = {lang: len(lines) for lang, lines in columns.items()}
        if len(set(counts.values())) > 1:
            raise AlignmentError(f"source {tag!r}: line counts differ across languages {counts}")
        n = next(iter(counts.values()), 0)
        dropped = 0
        for i in range(n):
            row = {lang: columns[lang][i] for lang in languages}
            if any(not text.strip() for text in row.values()):
                dropped += 1
                continue
            for lang in languages:
                records[lang].append(SentenceRecord(next_id, lang, tag, row[lang]))
            next_id += 1
        if dropped:
            log.warning("source %s: dropped %d tuples with blank lines", tag, dropped)
    if languages is None:
        languages = ()
    return ParallelCorpus(languages, {k: tuple(v) for k, v in records.items()}, {})


def normalize_text(text: str) -> str:
    """NFC, whitespace runs collapsed to one space, trimmed. Case is kept."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def deduplicate(corpus: ParallelCorpus, key_lang: str) -> ParallelCorpus:
    if key_lang not in corpus.languages:
        raise ArgumentError(f"dedup language {key_lang!r} not in corpus {list(corpus.languages)}")
    seen: set[str] = set()
    keep = []
    for r in corpus.records[key_lang]:
        norm = normalize_text(r.text)
        if norm in seen:
            continue
        seen.add(norm)
        keep.append(r.id)
    if len(keep) == len(corpus):
        return corpus
    log.info("deduplicate: %d -> %d records", len(corpus), len(keep))
    return corpus.keep_ids(keep)


def filter_records(corpus: ParallelCorpus, predicate: Callable[[SentenceRecord], bool]) -> ParallelCorpus:
    """Drop every id whose record fails ``predicate`` in any language."""
    rejected = set()
    for lang in corpus.languages:
        for r in corpus.records[lang]:
            if r.id not in rejected and not predicate(r):
                rejected.add(r.id)
    if not rejected:
        return corpus
    return corpus.keep_ids(i for i in corpus.ids if i not in rejected)


def ascii_letter_ratio(text: str) -> float | None:
    letters = [c for c in text if c.isalpha()]
    if not letters:
        return None
    return sum(1 for c in letters if c.isascii()) / len(letters)


def ascii_filter(key_lang: str, threshold: float = 0.9) -> Callable[[SentenceRecord], bool]:
    """Baseline language-ID predicate.

    Rejects a record outside ``key_lang`` when at least ``threshold`` of its
    letters are ASCII. Only meaningful when the other languages use a
    non-Latin script or heavy diacritics; plug in a real classifier otherwise.
    """

    def accept(record: SentenceRecord) -> bool:
        if record.lang == key_lang:
            return True
        ratio = ascii_letter_ratio(record.text)
        return ratio is None or ratio < threshold

    return accept


def make_splits(corpus: ParallelCorpus, test_size: int, seed: int) -> ParallelCorpus:
    ids = sorted(corpus.ids)
    if not 0 <= test_size <= len(ids):
        raise ArgumentError(f"test_size {test_size} outside [0, {len(ids)}]")
    perm = keyed_permutation(len(ids), DOMAIN_SPLIT, seed, len(ids))
    test = {ids[perm[k]] for k in range(test_size)}
    splits = {i: (TEST if i in test else TRAIN) for i in ids}
    return ParallelCorpus(corpus.languages, corpus.records, splits)


def count_words(text: str) -> int:
    return len(text.split())


def stats(corpus: ParallelCorpus, ref_lang: str) -> CorpusStats:
    sentences: dict[str, int] = {}
    words: dict[str, int] = {}
    if not corpus.languages:
        return CorpusStats(sentences, words)
    for r in corpus.iter_records(ref_lang):
        sentences[r.source] = sentences.get(r.source, 0) + 1
        words[r.source] = words.get(r.source, 0) + count_words(r.text)
    return CorpusStats(sentences, words)


# -- files -------------------------------------------------------------------

def corpus_filename(lang: str, tag: str | None = None) -> str:
    return f"corpus.{lang}.tsv" if tag is None else f"corpus.{lang}.{tag}.tsv"


def write_language(corpus: ParallelCorpus, lang: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in corpus.records[lang]:
            fh.write(f"{r.id}\t{r.lang}\t{r.source}\t{corpus.split_of(r.id)}\t{r.text}\n")


def write_corpus(corpus: ParallelCorpus, out_dir, tag: str | None = None) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for lang in corpus.languages:
        path = out_dir / corpus_filename(lang, tag)
        write_language(corpus, lang, path)
        paths.append(path)
    return paths


def read_language(path) -> tuple[str, list[SentenceRecord], dict[int, str]]:
    recs: list[SentenceRecord] = []
    splits: dict[int, str] = {}
    lang = None
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t", 4)
            if len(parts) != 5:
                raise FormatError("expected 5 tab-separated fields", path, lineno)
            id_s, rlang, source, split, text = parts
            try:
                id_ = int(id_s)
            except ValueError:
                raise FormatError(f"bad id {id_s!r}", path, lineno) from None
            if lang is None:
                lang = rlang
            elif rlang != lang:
                raise FormatError(f"mixed languages {lang!r} and {rlang!r}", path, lineno)
            recs.append(SentenceRecord(id_, rlang, source, text))
            if split != UNASSIGNED:
                splits[id_] = split
    if lang is None:
        raise FormatError("empty corpus file", path)
    return lang, recs, splits


def read_corpus(paths: Iterable) -> ParallelCorpus:
    """Load one or more per-language corpus files into a single corpus."""
    languages = []
    records = {}
    splits: dict[int, str] | None = None
    for path in paths:
        lang, recs, sp = read_language(path)
        if lang in records:
            raise ConfigurationError(f"language {lang!r} loaded twice")
        languages.append(lang)
        records[lang] = tuple(recs)
        if splits is None:
            splits = sp
        elif sp != splits:
            raise AlignmentError(f"{path}: split assignment differs from other languages")
    return ParallelCorpus(tuple(languages), records, splits or {})


def read_corpus_dir(directory, langs: Sequence[str] | None = None, tag: str | None = None) -> ParallelCorpus:
    directory = Path(directory)
    if langs is None:
        suffix = ".tsv" if tag is None else f".{tag}.tsv"
        langs = sorted(
            p.name[len("corpus."):-len(suffix)]
            for p in directory.glob(f"corpus.*{suffix}")
            if "." not in p.name[len("corpus."):-len(suffix)]
        )
    return read_corpus(directory / corpus_filename(lang, tag) for lang in langs)
