"""Tokenizers (whitespace, character, BPE) and tokenization complexity metrics.

BPE is trained on whitespace-pretokenized words and never merges across a
word boundary, so every encoding carries a word map: ``word_map[i]`` is the
index of the word that unit ``i`` came from.

Token-level text serialization marks word-initial units with ``▁`` (U+2581)
and joins units with single spaces. ``"▁fant astically ▁interesting"``
detokenizes to ``"fantastically interesting"``.
"""

from __future__ import annotations

import heapq
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ArgumentError, FormatError, TrainingError, UndefinedMetricError

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
SPECIALS = (UNK, BOS, EOS)
WORD_MARK = "▁"

WHITESPACE = "whitespace"
CHARACTER = "character"
BPE = "bpe"

WORD = "word"
SUBWORD = "subword"


@dataclass(frozen=True)
class Vocab:
    entries: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise ArgumentError("vocab entries must be unique")
        for s in SPECIALS:
            if s not in self.entries:
                raise ArgumentError(f"vocab is missing special token {s}")

    @property
    def size(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token) -> bool:
        return token in self._index

    @property
    def _index(self) -> dict[str, int]:
        # cached lazily on the frozen instance
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {t: i for i, t in enumerate(self.entries)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def index(self, token: str) -> int:
        return self._index.get(token, self._index[UNK])


@dataclass(frozen=True)
class TokenSequence:
    units: tuple[str, ...]
    kind: str = WORD
    word_map: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        if self.word_map is not None:
            object.__setattr__(self, "word_map", tuple(self.word_map))
            if len(self.word_map) != len(self.units):
                raise ArgumentError("word_map length differs from units")

    def __len__(self) -> int:
        return len(self.units)

    @classmethod
    def from_words(cls, text: str) -> "TokenSequence":
        words = text.split()
        return cls(tuple(words), WORD, tuple(range(len(words))))

    @classmethod
    def from_marked(cls, text: str) -> "TokenSequence":
        """Parse the ``▁``-marked token serialization.

        Word indices are assigned in reading order of word-initial units,
        so for a permuted sequence the map reflects the permuted order.
        """
        units, word_map = [], []
        w = -1
        for u in text.split():
            if u.startswith(WORD_MARK) or w < 0:
                w += 1
            units.append(u)
            word_map.append(w)
        return cls(tuple(units), SUBWORD, tuple(word_map))

    def is_monotone(self) -> bool:
        wm = self.word_map
        if wm is None:
            return True
        return all(a <= b for a, b in zip(wm, wm[1:])) and (
            not wm or (wm[0] == 0 and all(b - a <= 1 for a, b in zip(wm, wm[1:])))
        )

    def marked_units(self) -> list[str]:
        """Units with ``▁`` on every unit that starts a word."""
        if self.kind == WORD or self.word_map is None:
            return list(self.units)
        out = []
        starts = first_units(self.word_map)
        for i, u in enumerate(self.units):
            out.append(WORD_MARK + u if i in starts and not u.startswith(WORD_MARK) else u)
        return out

    def to_marked(self) -> str:
        return " ".join(self.marked_units())

    def detokenize(self) -> str:
        if self.kind == WORD or self.word_map is None:
            return " ".join(self.units)
        if not self.is_monotone():
            raise ArgumentError("cannot detokenize a sequence whose word map is not monotone")
        words: list[str] = []
        for u, w in zip(self.units, self.word_map):
            u = u[len(WORD_MARK):] if u.startswith(WORD_MARK) else u
            if w == len(words):
                words.append(u)
            else:
                words[w] += u
        return " ".join(words)


def first_units(word_map: Sequence[int]) -> set[int]:
    """Positions holding the first unit of each word (by original order)."""
    seen = {}
    for i, w in enumerate(word_map):
        seen.setdefault(w, i)
    return set(seen.values())


def detokenize_marked(text: str) -> str:
    """Glue a ``▁``-marked unit string back into words."""
    return "".join(text.split()).replace(WORD_MARK, " ").strip()


@dataclass
class Tokenizer:
    kind: str
    vocab: Vocab | None = None
    merges: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in (WHITESPACE, CHARACTER, BPE):
            raise ArgumentError(f"unknown tokenizer kind {self.kind!r}")
        if self.kind == BPE and self.vocab is None:
            raise ArgumentError("bpe tokenizer requires a vocab")
        self._ranks = {pair: r for r, pair in enumerate(self.merges)}
        self._cache: dict[str, tuple[str, ...]] = {}

    def encode_word(self, word: str) -> tuple[str, ...]:
        if self.kind == WHITESPACE:
            return (word,)
        if self.kind == CHARACTER:
            return tuple(word)
        cached = self._cache.get(word)
        if cached is None:
            cached = self._bpe(word)
            self._cache[word] = cached
        return cached

    def _bpe(self, word: str) -> tuple[str, ...]:
        vocab = self.vocab
        symbols = [c if c in vocab else UNK for c in word]
        ranks = self._ranks
        while len(symbols) > 1:
            best = None
            best_rank = None
            for i in range(len(symbols) - 1):
                r = ranks.get((symbols[i], symbols[i + 1]))
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = i, r
            if best is None:
                break
            pair = (symbols[best], symbols[best + 1])
            merged = pair[0] + pair[1]
            out = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == pair:
                    out.append(merged)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            symbols = out
        return tuple(symbols)

    def encode(self, sentence: str) -> TokenSequence:
        units: list[str] = []
        word_map: list[int] = []
        for w, word in enumerate(sentence.split()):
            pieces = self.encode_word(word)
            units.extend(pieces)
            word_map.extend([w] * len(pieces))
        kind = WORD if self.kind == WHITESPACE else SUBWORD
        return TokenSequence(tuple(units), kind, tuple(word_map))

    def decode(self, seq: TokenSequence) -> str:
        return seq.detokenize()

    # -- serialization ---------------------------------------------------

    def save(self, path) -> None:
        if self.kind != BPE:
            raise ArgumentError("only bpe tokenizers have a file representation")
        lines = ["#vocab", *self.vocab.entries, "#merges"]
        lines += [f"{a} {b}" for a, b in self.merges]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Tokenizer":
        section = None
        entries: list[str] = []
        merges: list[tuple[str, str]] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if line in ("#vocab", "#merges"):
                    section = line
                    continue
                if section == "#vocab":
                    if not line:
                        raise FormatError("empty vocab entry", path, lineno)
                    entries.append(line)
                elif section == "#merges":
                    if not line:
                        continue
                    parts = line.split(" ")
                    if len(parts) != 2 or not all(parts):
                        raise FormatError(f"bad merge line {line!r}", path, lineno)
                    merges.append((parts[0], parts[1]))
                elif line:
                    raise FormatError("content before #vocab section", path, lineno)
        vocab = Vocab(tuple(entries))
        for a, b in merges:
            if a not in vocab or b not in vocab or a + b not in vocab:
                raise FormatError(f"merge {a} {b} references tokens outside the vocab", path)
        return cls(BPE, vocab, merges)


def whitespace_tokenizer() -> Tokenizer:
    return Tokenizer(WHITESPACE)


def character_tokenizer() -> Tokenizer:
    return Tokenizer(CHARACTER)


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    out = []
    i = 0
    merged = pair[0] + pair[1]
    while i < len(symbols):
        if i < len(symbols) - 1 and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def train_bpe(corpus_text: Iterable[str], vocab_size: int) -> Tokenizer:
    """Train byte-pair merges on whitespace-separated words.

    The most frequent adjacent pair is merged at each step; frequency ties go
    to the lexicographically smallest ``(left, right)`` pair. Training stops
    early if no pair occurs any more.
    """
    word_freq: Counter[str] = Counter()
    for sentence in corpus_text:
        word_freq.update(sentence.split())
    if not word_freq:
        raise TrainingError("cannot train BPE on an empty corpus")
    alphabet = sorted({c for w in word_freq for c in w})
    n_merges = vocab_size - len(alphabet) - len(SPECIALS)
    if n_merges < 0:
        raise ArgumentError(
            f"vocab_size {vocab_size} is smaller than alphabet ({len(alphabet)}) + specials ({len(SPECIALS)})"
        )

    words = [tuple(w) for w in word_freq]
    freqs = list(word_freq.values())
    pair_counts: Counter[tuple[str, str]] = Counter()
    where: dict[tuple[str, str], set[int]] = defaultdict(set)
    for i, syms in enumerate(words):
        for pair in zip(syms, syms[1:]):
            pair_counts[pair] += freqs[i]
            where[pair].add(i)
    # max-heap on count, ties to the smallest pair; stale entries are skipped
    heap = [(-c, p) for p, c in pair_counts.items()]
    heapq.heapify(heap)

    entries = list(SPECIALS) + alphabet
    known = set(entries)
    merges: list[tuple[str, str]] = []
    while len(merges) < n_merges:
        best = None
        while heap:
            neg, pair = heapq.heappop(heap)
            if pair_counts.get(pair, 0) == -neg and -neg > 0:
                best = pair
                break
        if best is None:
            break
        merges.append(best)
        token = best[0] + best[1]
        if token not in known:
            entries.append(token)
            known.add(token)
        touched: set[tuple[str, str]] = set()
        for i in sorted(where.pop(best, ())):
            old = words[i]
            new = _merge_word(old, best)
            if new == old:
                continue
            f = freqs[i]
            for pair in zip(old, old[1:]):
                pair_counts[pair] -= f
                touched.add(pair)
            for pair in zip(new, new[1:]):
                pair_counts[pair] += f
                where[pair].add(i)
                touched.add(pair)
            words[i] = new
        for pair in touched:
            c = pair_counts.get(pair, 0)
            if c > 0:
                heapq.heappush(heap, (-c, pair))
            else:
                pair_counts.pop(pair, None)
    return Tokenizer(BPE, Vocab(tuple(entries)), merges)


def tcw(tok: Tokenizer, corpus_text: Iterable[str]) -> Fraction:
    """Token counts per word: emitted units over whitespace words."""
    tokens = words = 0
    for sentence in corpus_text:
        for word in sentence.split():
            words += 1
            tokens += len(tok.encode_word(word))
    if words == 0:
        raise UndefinedMetricError("TCW is undefined for a corpus without words")
    return Fraction(tokens, words)


def vocab_heuristic(corpus_text: Iterable[str]) -> int:
    """floor(0.4 * number of distinct whitespace word types)."""
    types: set[str] = set()
    for sentence in corpus_text:
        types.update(sentence.split())
    return vocab_heuristic_from_types(len(types))


def vocab_heuristic_from_types(n_types: int) -> int:
    return (2 * n_types) // 5
