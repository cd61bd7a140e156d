"""Scorer contract and per-item scoring composition.

A relevance scorer answers "does this text express value k" with ten
independent probabilities; a stance scorer answers "is the text for or
against value k" with a positive-class probability, queried only for values
that passed the relevance gate.  Both are batch-first so remote
implementations can amortize round trips.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Optional, Protocol, Sequence

from valuelens.values import (
    DEFAULT_GATE,
    SCHWARTZ_VALUES,
    StanceVector,
    ValueVector,
    assert_gate_consistent,
)


class RelevanceScorer(Protocol):
    def relevance_batch(self, texts: Sequence[str]) -> list[ValueVector]:
        ...


class StanceScorer(Protocol):
    def p_pos_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        """Positive-stance probability for each (text, value) pair."""
        ...


@dataclass(frozen=True)
class ScoredItem:
    item_id: str
    community: str
    relevance: ValueVector
    stance: StanceVector


def score_relevance(scorer: RelevanceScorer, text: str) -> ValueVector:
    """Ten independent relevance probabilities for one text."""
    if not text:
        raise ValueError("text must be non-empty")
    return scorer.relevance_batch([text])[0]


def score_stance(
    scorer: StanceScorer,
    text: str,
    relevance: ValueVector,
    gate: float = DEFAULT_GATE,
) -> StanceVector:
    """Stance scores 2*p_pos - 1 for values whose relevance exceeds the gate
    (strict inequality), Null elsewhere."""
    gated = [v for v in SCHWARTZ_VALUES if relevance[v] > gate]
    if not gated:
        return StanceVector.all_null()
    p_pos = scorer.p_pos_batch([(text, v) for v in gated])
    by_value = dict(zip(gated, p_pos))
    return StanceVector.from_sequence(
        tuple(
            (2.0 * by_value[v] - 1.0) if v in by_value else None
            for v in SCHWARTZ_VALUES
        )
    )


def score_item(
    relevance_scorer: RelevanceScorer,
    stance_scorer: StanceScorer,
    item: "HasIdCommunityText",
    gate: float = DEFAULT_GATE,
) -> ScoredItem:
    """Relevance first, then stance for gated values; the output always
    satisfies the gate-consistency invariant."""
    relevance = score_relevance(relevance_scorer, item.text)
    stance = score_stance(stance_scorer, item.text, relevance, gate=gate)
    assert_gate_consistent(relevance, stance, gate)
    return ScoredItem(
        item_id=item.id, community=item.community, relevance=relevance, stance=stance
    )


class HasIdCommunityText(Protocol):
    id: str
    community: str
    text: str


def scored_to_dict(item: ScoredItem) -> dict[str, Any]:
    return {
        "item_id": item.item_id,
        "community": item.community,
        "relevance": item.relevance.as_dict(),
        "stance": item.stance.as_dict(),
    }


def scored_from_dict(
    d: Mapping[str, Any], gate: Optional[float] = DEFAULT_GATE
) -> ScoredItem:
    """Parse a serialized ScoredItem, re-checking the gate invariant unless
    gate is None."""
    item = ScoredItem(
        item_id=str(d["item_id"]),
        community=str(d["community"]),
        relevance=ValueVector.from_mapping(d["relevance"]),
        stance=StanceVector.from_mapping(d["stance"]),
    )
    if gate is not None:
        assert_gate_consistent(item.relevance, item.stance, gate)
    return item
