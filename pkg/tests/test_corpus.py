import pytest

from implang import corpus as C
from implang.errors import AlignmentError, ArgumentError, FormatError

from conftest import write_parallel


def test_ingest_assigns_consecutive_ids_across_sources(tmp_path):
    a = write_parallel(tmp_path, 5, name="a")
    b = write_parallel(tmp_path, 3, name="b", seed=1)
    c = C.ingest(a + b)
    assert c.ids == list(range(8))
    assert [r.source for r in c.records["en"]] == ["a"] * 5 + ["b"] * 3


def test_ingest_drops_tuple_with_any_blank_line(tmp_path):
    (tmp_path / "x.en").write_text("one\n\nthree\n")
    (tmp_path / "x.de").write_text("eins\nzwei\n \n")
    c = C.ingest([("x", [("en", tmp_path / "x.en"), ("de", tmp_path / "x.de")])])
    assert c.texts("en") == ["one"]
    assert c.texts("de") == ["eins"]


def test_ingest_rejects_misaligned_files(tmp_path):
    (tmp_path / "x.en").write_text("a\nb\n")
    (tmp_path / "x.de").write_text("a\n")
    with pytest.raises(AlignmentError):
        C.ingest([("x", [("en", tmp_path / "x.en"), ("de", tmp_path / "x.de")])])


def test_tabs_become_spaces(tmp_path):
    (tmp_path / "x.en").write_text("a\tb\n")
    c = C.ingest([("x", [("en", tmp_path / "x.en")])])
    assert c.texts("en") == ["a b"]


def test_dedup_keeps_first_and_is_idempotent(tmp_path):
    c = C.ingest(write_parallel(tmp_path, 50, dup_every=5))
    d = C.deduplicate(c, "en")
    assert len(d) < len(c)
    norm = [C.normalize_text(t) for t in d.texts("en")]
    assert len(set(norm)) == len(norm)
    assert C.deduplicate(d, "en") is d
    # first occurrence survives
    assert d.ids[0] == 0


def test_dedup_normalizes_whitespace_not_case(tmp_path):
    (tmp_path / "x.en").write_text("The  cat\nThe cat \nthe cat\n")
    c = C.deduplicate(C.ingest([("x", [("en", tmp_path / "x.en")])]), "en")
    assert c.texts("en") == ["The  cat", "the cat"]


def test_filter_removes_id_in_all_languages(tmp_path):
    (tmp_path / "x.en").write_text("hello\nworld\n")
    (tmp_path / "x.ru").write_text("привет\nworld\n")
    c = C.ingest([("x", [("en", tmp_path / "x.en"), ("ru", tmp_path / "x.ru")])])
    f = C.filter_records(c, C.ascii_filter("en"))
    assert f.ids == [0]
    C.check_alignment(f)


def test_ascii_ratio():
    assert C.ascii_letter_ratio("abc") == 1.0
    assert C.ascii_letter_ratio("12 !") is None
    assert C.ascii_letter_ratio("aб") == 0.5


def test_splits_deterministic_and_sized(small_corpus):
    again = C.make_splits(small_corpus, 40, seed=5)
    assert again.splits == small_corpus.splits
    assert sum(v == C.TEST for v in small_corpus.splits.values()) == 40
    other = C.make_splits(small_corpus, 40, seed=6)
    assert other.splits != small_corpus.splits


def test_split_size_bounds(small_corpus):
    with pytest.raises(ArgumentError):
        C.make_splits(small_corpus, len(small_corpus) + 1, 0)


def test_write_read_round_trip(tmp_path, small_corpus):
    C.write_corpus(small_corpus, tmp_path / "out")
    back = C.read_corpus_dir(tmp_path / "out")
    assert back.languages == tuple(sorted(small_corpus.languages))
    for lang in small_corpus.languages:
        assert back.records[lang] == small_corpus.records[lang]
    assert back.splits == small_corpus.splits


def test_read_language_reports_line(tmp_path):
    p = tmp_path / "corpus.en.tsv"
    p.write_text("0\ten\tx\ttrain\tok\nbad line\n")
    with pytest.raises(FormatError) as exc:
        C.read_language(p)
    assert exc.value.lineno == 2


def test_stats_counts_words_per_source(tmp_path):
    c = C.ingest(write_parallel(tmp_path, 4, name="a") + write_parallel(tmp_path, 2, name="b"))
    s = C.stats(c, "en")
    assert s.sentences == {"a": 4, "b": 2}
    assert s.total_words == sum(len(t.split()) for t in c.texts("en"))
    assert s.to_tsv().splitlines()[-1].startswith("Overall\t6\t")


def test_record_validation():
    with pytest.raises(ArgumentError):
        C.SentenceRecord(0, "en", "x", "")
