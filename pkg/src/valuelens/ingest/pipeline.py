"""Single-pass ingest pipeline.

Streams dump shards in sorted path order through parse -> content filter ->
per-community seeded reservoirs, then applies community filters, language
filtering and stats on the bounded survivors.  Peak memory is O(cap x
communities) regardless of dump size; nothing retains the full record
stream.

User sets are derived from the final per-community samples (the analysis
dataset), so they share the same memory bound.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Optional, Sequence, Union

from valuelens.errors import DataError
from valuelens.ingest.corpus_stats import CorpusStats, corpus_stats
from valuelens.ingest.dump import ParseCounters, parse_dump
from valuelens.ingest.filters import (
    CommunityFilterResult,
    ContentFilterCounters,
    filter_communities,
    filter_content,
)
from valuelens.ingest.language import (
    LanguageDetector,
    LanguageFilterCounters,
    StopwordLanguageDetector,
    filter_language,
)
from valuelens.ingest.records import CommunityMeta, ContentItem, DumpFieldMap
from valuelens.ingest.sampling import DEFAULT_CAP, ReservoirSampler, substream_seed

log = logging.getLogger(__name__)

BOT_AUTHOR_SUFFIX = "bot"
EXCLUDED_AUTHORS = frozenset({"", "[deleted]", "[removed]", "automoderator"})


def is_bot_author(author: str) -> bool:
    low = author.strip().lower()
    return low in EXCLUDED_AUTHORS or low.endswith(BOT_AUTHOR_SUFFIX)


def read_community_meta(path: Union[str, Path]) -> list[CommunityMeta]:
    """Load community metadata JSONL (community, subscribers, nsfw,
    public_description)."""
    metas = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    metas.append(
                        CommunityMeta(
                            community=str(obj["community"]),
                            subscriber_count=int(obj["subscribers"]),
                            nsfw_flag=bool(obj["nsfw"]),
                            public_description=str(obj.get("public_description", "")),
                        )
                    )
                except (ValueError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad community meta: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read community meta {path}: {exc}") from exc
    return metas


@dataclass
class IngestCounters:
    lines: int = 0
    malformed: int = 0
    dropped_deleted: int = 0
    dropped_short: int = 0
    dropped_low_score: int = 0
    content_kept: int = 0
    dropped_community_excluded: int = 0
    dropped_downsampled: int = 0
    dropped_other_language: int = 0
    dropped_detector_failure: int = 0
    final_kept: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(vars(self))

    def check_conservation(self) -> None:
        """Every parsed line must be accounted for by exactly one counter."""
        parsed = self.lines - self.malformed
        content = (
            self.dropped_deleted + self.dropped_short + self.dropped_low_score
            + self.content_kept
        )
        if parsed != content:
            raise AssertionError(f"content counters do not sum: {parsed} != {content}")
        downstream = (
            self.dropped_community_excluded
            + self.dropped_downsampled
            + self.dropped_other_language
            + self.dropped_detector_failure
            + self.final_kept
        )
        if self.content_kept != downstream:
            raise AssertionError(
                f"community/sample counters do not sum: {self.content_kept} != {downstream}"
            )


@dataclass
class IngestResult:
    corpus: dict[str, list[ContentItem]]
    user_sets: dict[str, list[str]]
    counters: IngestCounters
    community_filter: CommunityFilterResult
    stats: Optional[CorpusStats]
    descriptions: dict[str, str] = field(default_factory=dict)


def run_ingest(
    dump_sources: Sequence[Union[str, Path, BinaryIO]],
    meta: Union[str, Path, Iterable[CommunityMeta]],
    seed: int,
    cap: int = DEFAULT_CAP,
    language: Optional[str] = "en",
    detector: Optional[LanguageDetector] = None,
    field_map: Optional[DumpFieldMap] = None,
) -> IngestResult:
    """Run the full ingest over one or more dump shards.

    Determinism: shards are processed in the given order (sort paths before
    calling for path inputs); reservoirs are seeded per community from the
    run seed, so a fixed dump + seed reproduces the corpus exactly.
    """
    if isinstance(meta, (str, Path)):
        metas = read_community_meta(meta)
    else:
        metas = list(meta)

    counters = IngestCounters()
    parse_counters = ParseCounters()
    content_counters = ContentFilterCounters()
    reservoirs: dict[str, ReservoirSampler] = {}

    for source in dump_sources:
        records = parse_dump(source, field_map=field_map, counters=parse_counters)
        for item in filter_content(records, counters=content_counters):
            sampler = reservoirs.get(item.community)
            if sampler is None:
                sampler = ReservoirSampler(
                    cap, substream_seed(seed, "downsample", item.community)
                )
                reservoirs[item.community] = sampler
            sampler.add(item)

    counters.lines = parse_counters.lines
    counters.malformed = parse_counters.malformed
    counters.dropped_deleted = content_counters.dropped_deleted
    counters.dropped_short = content_counters.dropped_short
    counters.dropped_low_score = content_counters.dropped_low_score
    counters.content_kept = content_counters.kept

    counts = {name: sampler.seen for name, sampler in reservoirs.items()}
    community_filter = filter_communities(metas, counts)
    counters.dropped_community_excluded = sum(
        count for name, count in counts.items() if name not in community_filter.kept
    )

    lang_counters = LanguageFilterCounters()
    if language is not None and detector is None:
        detector = StopwordLanguageDetector()

    corpus: dict[str, list[ContentItem]] = {}
    for name in sorted(community_filter.kept):
        sampler = reservoirs[name]
        sampled = sampler.result()
        counters.dropped_downsampled += sampler.seen - len(sampled)
        if language is not None:
            kept = list(filter_language(sampled, language, detector, lang_counters))
        else:
            kept = sampled
        if kept:
            corpus[name] = kept
    counters.dropped_other_language = lang_counters.dropped_other_language
    counters.dropped_detector_failure = lang_counters.dropped_detector_failure
    counters.final_kept = sum(len(items) for items in corpus.values())
    counters.check_conservation()

    user_sets = {}
    for name, items in corpus.items():
        authors = sorted({i.author for i in items if not is_bot_author(i.author)})
        if authors:
            user_sets[name] = authors

    descriptions = {
        m.community: m.public_description
        for m in metas
        if m.community in corpus and m.public_description
    }

    stats = corpus_stats(corpus) if corpus else None
    return IngestResult(
        corpus=corpus,
        user_sets=user_sets,
        counters=counters,
        community_filter=community_filter,
        stats=stats,
        descriptions=descriptions,
    )


def safe_filename(community: str) -> str:
    """Filesystem-safe name for a community partition file."""
    return "".join(
        ch if ch.isalnum() or ch in "_-" else f"%{ord(ch):02X}" for ch in community
    )


def write_corpus(corpus: dict[str, list[ContentItem]], out_dir: Union[str, Path]) -> None:
    """Write the corpus as JSONL partitioned by community."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(corpus):
        path = out / f"{safe_filename(name)}.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            for item in corpus[name]:
                fh.write(json.dumps(item.as_dict(), ensure_ascii=False) + "\n")


def read_corpus(corpus_dir: Union[str, Path]) -> dict[str, list[ContentItem]]:
    """Load a partitioned corpus written by write_corpus."""
    corpus: dict[str, list[ContentItem]] = {}
    root = Path(corpus_dir)
    if not root.is_dir():
        raise DataError(f"corpus directory not found: {corpus_dir}")
    for path in sorted(root.glob("*.jsonl")):
        items = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    items.append(ContentItem.from_dict(json.loads(line)))
                except (ValueError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad content item: {exc}") from exc
        if items:
            corpus[items[0].community] = items
    return corpus


def write_user_sets(user_sets: dict[str, list[str]], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name in sorted(user_sets):
            fh.write(
                json.dumps({"community": name, "users": user_sets[name]}, ensure_ascii=False)
                + "\n"
            )


def read_user_sets(path: Union[str, Path]) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                out[str(obj["community"])] = set(map(str, obj["users"]))
    except OSError as exc:
        raise DataError(f"cannot read user sets {path}: {exc}") from exc
    return out
