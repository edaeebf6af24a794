"""Smoothed n-gram language models, sentence scoring and perplexity.

Each training sentence is padded with ``n-1`` begin markers and one end
marker. The end marker is predicted and counted in every sentence's unit
count; the begin marker only ever appears as context.

Smoothing options:

``mle``
    relative frequency; unseen events get probability zero.
``addk``
    ``(c(h, w) + k) / (c(h) + k |V|)`` at the full order.
``interpolated_wb``
    interpolated Witten-Bell, recursing down to a unigram that is itself
    interpolated with the uniform distribution over the vocabulary.

The vocabulary holds every training unit seen at least ``unk_threshold``
times, plus ``<unk>`` and ``</s>``.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ArgumentError, FormatError, TrainingError
from .tokenize import BOS, EOS, UNK, TokenSequence

log = logging.getLogger(__name__)

MLE = "mle"
ADDK = "addk"
WITTEN_BELL = "interpolated_wb"
SMOOTHINGS = (MLE, ADDK, WITTEN_BELL)

FORMAT_VERSION = "implang-ngram 1"


def _units(seq) -> list[str]:
    if isinstance(seq, TokenSequence):
        return list(seq.units)
    if isinstance(seq, str):
        return seq.split()
    return list(seq)


@dataclass
class NgramModel:
    order: int
    smoothing: str = WITTEN_BELL
    k: float = 1.0
    unk_threshold: int = 2
    vocab: frozenset[str] = frozenset()
    # counts[m][context] -> Counter(next unit) for context length m
    counts: list[dict[tuple[str, ...], Counter]] = field(default_factory=list)

    def __post_init__(self):
        if self.order < 1:
            raise ArgumentError("order must be >= 1")
        if self.smoothing not in SMOOTHINGS:
            raise ArgumentError(f"unknown smoothing {self.smoothing!r}; choose from {SMOOTHINGS}")
        if self.smoothing == ADDK and not self.k > 0:
            raise ArgumentError("addk needs k > 0")
        self._totals: list[dict[tuple[str, ...], int]] = []
        self._types: list[dict[tuple[str, ...], int]] = []
        self._refresh()

    def _refresh(self):
        self._totals = [{h: sum(c.values()) for h, c in level.items()} for level in self.counts]
        self._types = [{h: len(c) for h, c in level.items()} for level in self.counts]

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def map_unit(self, unit: str) -> str:
        return unit if unit in self.vocab else UNK

    def prob(self, unit: str, context: Sequence[str]) -> float:
        """P(unit | context); ``context`` holds the preceding mapped units."""
        unit = self.map_unit(unit) if unit != EOS else EOS
        n = self.order
        ctx = tuple(context[-(n - 1):]) if n > 1 else ()
        if self.smoothing == WITTEN_BELL:
            return self._wb(unit, ctx)
        level = self.counts[len(ctx)]
        c_h = self._totals[len(ctx)].get(ctx, 0)
        c_hw = level[ctx][unit] if ctx in level else 0
        if self.smoothing == MLE:
            return c_hw / c_h if c_h else 0.0
        return (c_hw + self.k) / (c_h + self.k * self.vocab_size)

    def _wb(self, unit: str, ctx: tuple[str, ...]) -> float:
        p = 1.0 / self.vocab_size
        # lower orders first, each interpolating with the one below
        for m in range(0, len(ctx) + 1):
            h = ctx[len(ctx) - m:] if m else ()
            level = self.counts[m]
            if h not in level:
                continue
            c_h = self._totals[m][h]
            t_h = self._types[m][h]
            p = (level[h][unit] + t_h * p) / (c_h + t_h)
        return p

    def distribution(self, context: Sequence[str]) -> dict[str, float]:
        return {w: self.prob(w, context) for w in sorted(self.vocab)}

    # -- serialization ---------------------------------------------------

    def dumps(self) -> str:
        lines = [
            f"#{FORMAT_VERSION}",
            f"#order\t{self.order}",
            f"#smoothing\t{self.smoothing}",
            f"#k\t{self.k!r}",
            f"#unk_threshold\t{self.unk_threshold}",
            "#vocab",
            *sorted(self.vocab),
            "#counts",
        ]
        for level in self.counts:
            for h in sorted(level):
                c = level[h]
                ctx = " ".join(h)
                for w in sorted(c):
                    lines.append(f"{ctx}\t{w}\t{c[w]}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str, source="<string>") -> "NgramModel":
        lines = text.split("\n")
        if not lines or lines[0] != f"#{FORMAT_VERSION}":
            raise FormatError(f"not a {FORMAT_VERSION} model", source, 1)
        header = {}
        i = 1
        while i < len(lines) and lines[i] != "#vocab":
            key, _, value = lines[i][1:].partition("\t")
            header[key] = value
            i += 1
        i += 1
        vocab = []
        while i < len(lines) and lines[i] != "#counts":
            if lines[i]:
                vocab.append(lines[i])
            i += 1
        order = int(header["order"])
        counts: list[dict] = [defaultdict(Counter) for _ in range(order)]
        for lineno in range(i + 1, len(lines)):
            line = lines[lineno]
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError("expected context, unit, count", source, lineno + 1)
            h = tuple(parts[0].split(" ")) if parts[0] else ()
            if len(h) >= order:
                raise FormatError("context longer than model order", source, lineno + 1)
            counts[len(h)][h][parts[1]] = int(parts[2])
        return cls(
            order=order,
            smoothing=header["smoothing"],
            k=float(header["k"]),
            unk_threshold=int(header["unk_threshold"]),
            vocab=frozenset(vocab),
            counts=[dict(level) for level in counts],
        )

    @classmethod
    def load(cls, path) -> "NgramModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"), path)


def train(corpus: Iterable, order: int = 3, smoothing: str = WITTEN_BELL, k: float = 1.0,
          unk_threshold: int = 2) -> NgramModel:
    """Count n-grams of every order up to ``order``.

    ``corpus`` yields TokenSequences, unit lists, or whitespace-split strings.
    """
    if order < 1:
        raise ArgumentError("order must be >= 1")
    sentences = [_units(s) for s in corpus]
    if not sentences:
        raise TrainingError("cannot train on an empty corpus")
    freq = Counter(u for s in sentences for u in s)
    vocab = {u for u, c in freq.items() if c >= unk_threshold}
    vocab.discard(BOS)
    vocab |= {UNK, EOS}
    counts: list[dict] = [defaultdict(Counter) for _ in range(order)]
    pad = [BOS] * (order - 1)
    for s in sentences:
        seq = pad + [u if u in vocab and u != EOS else UNK for u in s] + [EOS]
        for i in range(order - 1, len(seq)):
            w = seq[i]
            for m in range(order):
                counts[m][tuple(seq[i - m:i])][w] += 1
    return NgramModel(order, smoothing, k, unk_threshold, frozenset(vocab),
                      [dict(level) for level in counts])


@dataclass(frozen=True)
class ScoreRecord:
    sentence_id: int
    variant: str
    logprob: float
    unit_count: int
    checkpoint: str = "-"
    seed: int = 0

    def __post_init__(self):
        if self.unit_count < 1:
            raise ArgumentError("unit_count must be >= 1")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.logprob)

    @property
    def perplexity(self) -> float:
        return math.exp(-self.logprob / self.unit_count)


def score(model: NgramModel, seq, sentence_id: int = 0, variant: str = "identity",
          checkpoint: str = "-", seed: int = 0) -> ScoreRecord:
    """Natural-log probability of a sentence including its end marker."""
    units = _units(seq)
    context = [BOS] * (model.order - 1)
    total = 0.0
    for u in units + [EOS]:
        p = model.prob(u, context)
        if p <= 0.0:
            total = -math.inf
        elif total != -math.inf:
            total += math.log(p)
        context.append(model.map_unit(u) if u != EOS else EOS)
    return ScoreRecord(sentence_id, variant, total, len(units) + 1, checkpoint, seed)


SENTENCE_MEAN = "sentence"
TOKEN_MEAN = "token"


@dataclass(frozen=True)
class PerplexityReport:
    per_sentence: Mapping[int, float]
    geometric_mean: float
    checkpoint: str = "-"
    seed: int = 0
    infinite_ids: tuple[int, ...] = ()
    aggregation: str = SENTENCE_MEAN
    vocab_size: int | None = None

    def to_tsv(self) -> str:
        lines = [
            f"#geometric_mean\t{self.geometric_mean!r}",
            f"#aggregation\t{self.aggregation}",
            f"#vocab_size\t{'-' if self.vocab_size is None else self.vocab_size}",
            f"#checkpoint\t{self.checkpoint}",
            f"#seed\t{self.seed}",
            f"#infinite\t{len(self.infinite_ids)}",
            "#sentence_id\tperplexity",
        ]
        lines += [f"{i}\t{p!r}" for i, p in self.per_sentence.items()]
        return "\n".join(lines) + "\n"


def perplexity_from_scores(records: Sequence[ScoreRecord], checkpoint: str = "-", seed: int = 0,
                           aggregation: str = SENTENCE_MEAN) -> PerplexityReport:
    """Aggregate sentence scores.

    ``sentence``: geometric mean of per-sentence perplexities,
    ``exp(mean_i log ppl_i)``. ``token``: ``exp(-sum logP / sum T)``.
    """
    if not records:
        raise ArgumentError("perplexity needs at least one sentence")
    if aggregation not in (SENTENCE_MEAN, TOKEN_MEAN):
        raise ArgumentError(f"unknown aggregation {aggregation!r}")
    per = {}
    bad = []
    for r in records:
        if r.finite:
            per[r.sentence_id] = r.perplexity
        else:
            per[r.sentence_id] = math.inf
            bad.append(r.sentence_id)
    if bad:
        log.warning("%d sentences have zero probability; perplexity is infinite", len(bad))
        value = math.inf
    elif aggregation == SENTENCE_MEAN:
        value = math.exp(sum(-r.logprob / r.unit_count for r in records) / len(records))
    else:
        value = math.exp(-sum(r.logprob for r in records) / sum(r.unit_count for r in records))
    return PerplexityReport(per, value, checkpoint, seed, tuple(bad), aggregation)


def perplexity(model: NgramModel, test: Iterable, ids: Iterable[int] | None = None,
               checkpoint: str = "-", seed: int = 0,
               aggregation: str = SENTENCE_MEAN) -> PerplexityReport:
    test = list(test)
    ids = list(ids) if ids is not None else list(range(len(test)))
    records = [score(model, s, i) for i, s in zip(ids, test)]
    report = perplexity_from_scores(records, checkpoint, seed, aggregation)
    return replace(report, vocab_size=model.vocab_size)


# -- score interchange ---------------------------------------------------

SCORE_HEADER = "#sentence_id\tvariant\ttotal_logprob_nat\tunit_count\tcheckpoint\tseed"


def write_scores(records: Iterable[ScoreRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SCORE_HEADER + "\n")
        for r in records:
            fh.write(f"{r.sentence_id}\t{r.variant}\t{r.logprob!r}\t{r.unit_count}\t{r.checkpoint}\t{r.seed}\n")


def ingest_scores(path) -> tuple[list[ScoreRecord], int]:
    """Read a score file. Returns the records and the number of duplicates.

    A repeated ``(sentence_id, variant)`` keeps the last line.
    """
    found: dict[tuple[int, str], ScoreRecord] = {}
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise FormatError(f"expected 6 tab-separated fields, got {len(parts)}", path, lineno)
            try:
                rec = ScoreRecord(int(parts[0]), parts[1], float(parts[2]), int(parts[3]),
                                  parts[4], int(parts[5]))
            except ValueError as exc:
                raise FormatError(str(exc), path, lineno) from None
            key = (rec.sentence_id, rec.variant)
            if key in found:
                duplicates += 1
                del found[key]
            found[key] = rec
    if duplicates:
        log.warning("%s: %d duplicate (id, variant) rows, last one kept", path, duplicates)
    return list(found.values()), duplicates
