import random

import pytest

from implang import corpus as C


def synthetic_sentences(n, seed=0, max_len=60, vocab=200):
    rnd = random.Random(seed)
    words = [f"w{i}" for i in range(vocab)]
    return [" ".join(rnd.choice(words) for _ in range(rnd.randint(0, max_len))) for _ in range(n)]


def write_parallel(tmp_path, n, langs=("en", "de"), seed=0, dup_every=0, name="src"):
    """Aligned plain-text sources, one file per language."""
    rnd = random.Random(seed)
    base = [" ".join(f"t{rnd.randint(0, 500)}" for _ in range(rnd.randint(1, 12))) for _ in range(n)]
    if dup_every:
        base = [base[i - 1] if i and i % dup_every == 0 else s for i, s in enumerate(base)]
    paths = []
    for lang in langs:
        p = tmp_path / f"{name}.{lang}"
        p.write_text("\n".join(f"{lang}_{s}" for s in base) + "\n", encoding="utf-8")
        paths.append((lang, p))
    return [(name, paths)]


@pytest.fixture
def small_corpus(tmp_path):
    sources = write_parallel(tmp_path, 200, dup_every=7)
    return C.make_splits(C.deduplicate(C.ingest(sources), "en"), 40, seed=5)


# -- acceptance reporting ------------------------------------------------

import time

_SESSION = {"start": time.perf_counter(), "lines": []}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Call ``criterion(number, passed, detail)``; the line is printed right away
    and again in the terminal summary.
    """

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _SESSION["lines"].append(line)
        print(line)
        return passed

    return record


def elapsed():
    return time.perf_counter() - _SESSION["start"]


def pytest_terminal_summary(terminalreporter):
    lines = _SESSION["lines"]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
        terminalreporter.write_line(line)
    total = elapsed()
    terminalreporter.write_line(
        f"suite runtime {total:.1f} s ({'PASS' if total < 300 else 'FAIL'} against the 300 s budget)")
