"""GenScore and ΔGenScore over attested/unattested minimal pairs."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace

from ..errors import ArgumentError, DataError
from ..ngram_lm import ScoreRecord

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinimalPair:
    """An attested sentence and its NP-perturbed twin.

    ``logp_att_model`` is ``(log P_att(s_att), log P_att(s_unatt))`` and
    ``logp_unatt_model`` is ``(log P_unatt(s_unatt), log P_unatt(s_att))``,
    natural logs, each model's preferred-order string first.
    """

    id: int
    s_att: str
    s_unatt: str
    logp_att_model: tuple[float, float] | None = None
    logp_unatt_model: tuple[float, float] | None = None

    def __post_init__(self):
        if self.s_att.split() == self.s_unatt.split():
            raise ArgumentError(f"pair {self.id}: attested and perturbed sentences are identical")

    @property
    def scored(self) -> bool:
        return self.logp_att_model is not None and self.logp_unatt_model is not None

    @property
    def finite(self) -> bool:
        return self.scored and all(map(math.isfinite, (*self.logp_att_model, *self.logp_unatt_model)))


@dataclass(frozen=True)
class GenScoreResult:
    genscore_att: float
    genscore_unatt: float
    delta: float
    n: int
    indicators_att: tuple[int, ...]
    indicators_unatt: tuple[int, ...]
    ties_att: int = 0
    ties_unatt: int = 0
    excluded: int = 0

    def to_tsv(self) -> str:
        rows = [
            ("genscore_att", self.genscore_att),
            ("genscore_unatt", self.genscore_unatt),
            ("delta_genscore", self.delta),
            ("n", self.n),
            ("ties_att", self.ties_att),
            ("ties_unatt", self.ties_unatt),
            ("excluded", self.excluded),
        ]
        return "".join(f"{k}\t{v}\n" for k, v in rows)


def genscore(pairs: Sequence[MinimalPair]) -> GenScoreResult:
    """Fraction of pairs where each model prefers its own training order.

    A pair counts for the attested model when ``P_att(s_att) > P_att(s_unatt)``
    and for the unattested model when ``P_unatt(s_unatt) > P_unatt(s_att)``.
    Ties count as failures. Pairs with a non-finite log-probability are
    left out.
    """
    usable = [p for p in pairs if p.finite]
    excluded = len(pairs) - len(usable)
    if excluded:
        log.warning("genscore: excluded %d pairs without finite scores", excluded)
    if not usable:
        raise ArgumentError("genscore needs at least one scored pair")
    ind_att = tuple(int(p.logp_att_model[0] > p.logp_att_model[1]) for p in usable)
    ind_unatt = tuple(int(p.logp_unatt_model[0] > p.logp_unatt_model[1]) for p in usable)
    ties_att = sum(p.logp_att_model[0] == p.logp_att_model[1] for p in usable)
    ties_unatt = sum(p.logp_unatt_model[0] == p.logp_unatt_model[1] for p in usable)
    n = len(usable)
    g_att = sum(ind_att) / n
    g_unatt = sum(ind_unatt) / n
    return GenScoreResult(g_att, g_unatt, g_att - g_unatt, n, ind_att, ind_unatt,
                          ties_att, ties_unatt, excluded)


def attach_scores(pairs: Iterable[MinimalPair], att_scores: Iterable[ScoreRecord],
                  unatt_scores: Iterable[ScoreRecord], att_variant: str,
                  unatt_variant: str) -> list[MinimalPair]:
    """Join pairs with two score files on ``(sentence_id, variant)``.

    Each score file must hold rows for both strings of a pair: the attested
    string under ``att_variant`` and the perturbed one under ``unatt_variant``.
    Pairs missing any of the four scores are dropped.
    """
    att = {(r.sentence_id, r.variant): r.logprob for r in att_scores}
    unatt = {(r.sentence_id, r.variant): r.logprob for r in unatt_scores}
    out = []
    missing = 0
    pairs = list(pairs)
    for p in pairs:
        keys = ((p.id, att_variant), (p.id, unatt_variant))
        if not all(k in att and k in unatt for k in keys):
            missing += 1
            continue
        out.append(replace(
            p,
            logp_att_model=(att[keys[0]], att[keys[1]]),
            logp_unatt_model=(unatt[keys[1]], unatt[keys[0]]),
        ))
    if pairs and not out:
        raise DataError("no minimal pair could be joined with both score files")
    if missing:
        log.warning("attach_scores: %d pairs lack scores and were dropped", missing)
    return out
