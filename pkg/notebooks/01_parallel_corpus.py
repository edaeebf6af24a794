"""
Building an aligned corpus
==========================

Two toy sources in two languages go through ingest, dedup, a filter and a
seeded train/test split. Every step keeps ids aligned across languages.
"""

import tempfile
from pathlib import Path

from implang import corpus as C

work = Path(tempfile.mkdtemp(prefix="implang-corpus-"))

# line i of every file in a source is one tuple
(work / "news.en").write_text("the cat sat .\nthe cat sat .\nrain again\n\nprices rose\n")
(work / "news.fr").write_text("le chat .\nle chat .\nencore\nvide\nles prix\n")
(work / "talks.en").write_text("hello world\nthank you\n")
(work / "talks.fr").write_text("bonjour\nmerci\n")

corpus = C.ingest([
    ("news", [("en", work / "news.en"), ("fr", work / "news.fr")]),
    ("talks", [("en", work / "talks.en"), ("fr", work / "talks.fr")]),
])
print("ingested ids:", corpus.ids)  # the blank English line dropped one tuple

corpus = C.deduplicate(corpus, "en")
print("after dedup:", corpus.texts("en"))

# any predicate works as a filter; one failing language drops the whole id
corpus = C.filter_records(corpus, lambda r: len(r.text.split()) >= 2 or r.lang == "fr")
print("after filter:", corpus.texts("en"))

corpus = C.make_splits(corpus, test_size=1, seed=7)
print("splits:", corpus.splits)

print(C.stats(corpus, "en").to_tsv())
C.write_corpus(corpus, work / "out")
print(sorted(p.name for p in (work / "out").iterdir()))
