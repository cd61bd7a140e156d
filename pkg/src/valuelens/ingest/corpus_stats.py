"""Descriptive statistics of a finished corpus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from valuelens.errors import DataError
from valuelens.ingest.records import ContentItem


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    p25: float
    p50: float
    p75: float
    total: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "std": self.std,
            "p25": self.p25,
            "p50": self.p50,
            "p75": self.p75,
            "total": self.total,
        }


@dataclass(frozen=True)
class CorpusStats:
    communities: int
    content_per_community: SummaryStats
    words_per_content: SummaryStats

    def as_dict(self) -> dict[str, Any]:
        return {
            "communities": self.communities,
            "content_per_community": self.content_per_community.as_dict(),
            "words_per_content": self.words_per_content.as_dict(),
        }


def nearest_rank_percentile(sorted_values: Sequence[float], pct: float) -> float:
    """Nearest-rank percentile: the ceil(pct/100 * n)-th smallest value."""
    n = len(sorted_values)
    if n == 0:
        raise DataError("percentile of empty sequence")
    rank = math.ceil(pct / 100.0 * n)
    rank = min(max(rank, 1), n)
    return sorted_values[rank - 1]


def summarize(values: Sequence[float]) -> SummaryStats:
    if not values:
        raise DataError("cannot summarize an empty sequence")
    n = len(values)
    total = math.fsum(values)
    mean = total / n
    if all(v == values[0] for v in values):
        var = 0.0
    else:
        var = math.fsum((v - mean) ** 2 for v in values) / n  # population
    ordered = sorted(values)
    return SummaryStats(
        mean=mean,
        std=math.sqrt(var),
        p25=nearest_rank_percentile(ordered, 25),
        p50=nearest_rank_percentile(ordered, 50),
        p75=nearest_rank_percentile(ordered, 75),
        total=int(total),
    )


def corpus_stats(corpus: Mapping[str, Sequence[ContentItem]]) -> CorpusStats:
    """Content-per-community and words-per-content summaries over the final
    corpus."""
    if not corpus:
        raise DataError("corpus is empty")
    counts = [len(items) for items in corpus.values()]
    words = [item.word_count for items in corpus.values() for item in items]
    if not words:
        raise DataError("corpus has no content items")
    return CorpusStats(
        communities=len(corpus),
        content_per_community=summarize(counts),
        words_per_content=summarize(words),
    )
