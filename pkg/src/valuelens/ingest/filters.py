"""Content-level and community-level filters.

Threshold semantics are inclusive at the boundary: "fewer than ten words"
drops 9 and keeps 10, and the same literal reading applies to upvotes (10),
subscribers (5,000) and content count (250).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional

from valuelens.ingest.records import (
    DELETED_MARKERS,
    CommunityMeta,
    ContentItem,
    RawRecord,
    count_words,
)

MIN_WORDS = 10
MIN_UPVOTES = 10
MIN_SUBSCRIBERS = 5000
MIN_CONTENT = 250


@dataclass
class ContentFilterCounters:
    kept: int = 0
    dropped_deleted: int = 0
    dropped_short: int = 0
    dropped_low_score: int = 0


def filter_content(
    records: Iterable[RawRecord],
    counters: Optional[ContentFilterCounters] = None,
) -> Iterator[ContentItem]:
    """Keep records with at least MIN_WORDS words and MIN_UPVOTES upvotes.

    Deleted/removed placeholder texts are dropped first; drop rules are
    applied in order and each record increments exactly one counter.
    """
    counters = counters if counters is not None else ContentFilterCounters()
    for rec in records:
        if rec.text.strip() in DELETED_MARKERS:
            counters.dropped_deleted += 1
            continue
        wc = count_words(rec.text)
        if wc < MIN_WORDS:
            counters.dropped_short += 1
            continue
        if rec.upvotes < MIN_UPVOTES:
            counters.dropped_low_score += 1
            continue
        counters.kept += 1
        yield ContentItem.from_raw(rec, word_count=wc)


@dataclass
class CommunityFilterResult:
    kept: set[str]
    excluded_nsfw: set[str]
    excluded_small: set[str]
    excluded_few_items: set[str]
    unresolved: set[str]


def filter_communities(
    meta: Iterable[CommunityMeta],
    counts: Mapping[str, int],
) -> CommunityFilterResult:
    """Keep communities that are not NSFW, have >= 5,000 subscribers and
    >= 250 content items (counted after content filtering, before
    downsampling).  Communities with counts but no metadata are recorded
    as unresolved and excluded."""
    by_name = {m.community: m for m in meta}
    result = CommunityFilterResult(set(), set(), set(), set(), set())
    for community, count in counts.items():
        m = by_name.get(community)
        if m is None:
            result.unresolved.add(community)
            continue
        if m.nsfw_flag:
            result.excluded_nsfw.add(community)
        elif m.subscriber_count < MIN_SUBSCRIBERS:
            result.excluded_small.add(community)
        elif count < MIN_CONTENT:
            result.excluded_few_items.add(community)
        else:
            result.kept.add(community)
    return result
