"""Corpus scoring runner: deterministic order, worker threads, resume."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

from valuelens.errors import DataError, ScorerError, ScorerTransportError
from valuelens.ingest.records import ContentItem
from valuelens.scoring.base import (
    RelevanceScorer,
    ScoredItem,
    StanceScorer,
    score_item,
    scored_from_dict,
    scored_to_dict,
)
from valuelens.values import DEFAULT_GATE

log = logging.getLogger(__name__)

_BATCH = 32


@dataclass
class ScoreRunStats:
    scored: int = 0
    skipped_existing: int = 0
    failed: list[str] = field(default_factory=list)


def score_corpus(
    corpus: dict[str, list[ContentItem]],
    relevance_scorer: RelevanceScorer,
    stance_scorer: StanceScorer,
    gate: float = DEFAULT_GATE,
    threads: int = 1,
    skip_ids: Optional[set[str]] = None,
    stats: Optional[ScoreRunStats] = None,
) -> Iterator[ScoredItem]:
    """Score every corpus item, yielding results in a deterministic order
    (communities sorted, items in corpus order) regardless of thread count.

    Items already in skip_ids are not re-scored (resume).  Transport errors
    propagate; per-item scoring errors are recorded and the item excluded.
    """
    stats = stats if stats is not None else ScoreRunStats()
    items: list[ContentItem] = []
    for community in sorted(corpus):
        for item in corpus[community]:
            if skip_ids and item.id in skip_ids:
                stats.skipped_existing += 1
                continue
            items.append(item)

    def score_batch(batch: Sequence[ContentItem]) -> list[Optional[ScoredItem]]:
        out: list[Optional[ScoredItem]] = []
        for item in batch:
            try:
                out.append(score_item(relevance_scorer, stance_scorer, item, gate=gate))
            except ScorerTransportError:
                raise
            except (ScorerError, ValueError) as exc:
                log.warning("scoring failed for %s: %s", item.id, exc)
                stats.failed.append(item.id)
                out.append(None)
        return out

    def emit(results: Iterable[list[Optional[ScoredItem]]]) -> Iterator[ScoredItem]:
        for batch_result in results:
            for scored in batch_result:
                if scored is not None:
                    stats.scored += 1
                    yield scored

    batches = [items[i : i + _BATCH] for i in range(0, len(items), _BATCH)]
    if threads <= 1:
        yield from emit(map(score_batch, batches))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from emit(pool.map(score_batch, batches))


def write_scored(
    scored: Iterable[ScoredItem], path: Union[str, Path], append: bool = False
) -> int:
    n = 0
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for item in scored:
            fh.write(json.dumps(scored_to_dict(item), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_scored(
    path: Union[str, Path], gate: Optional[float] = DEFAULT_GATE
) -> list[ScoredItem]:
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(scored_from_dict(json.loads(line), gate=gate))
                except (ValueError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad scored item: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read scored items {path}: {exc}") from exc
    return out


def read_scored_ids(path: Union[str, Path]) -> set[str]:
    """Item ids already present in a scored file (resume support)."""
    ids: set[str] = set()
    p = Path(path)
    if not p.exists():
        return ids
    with open(p, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                ids.add(str(json.loads(line)["item_id"]))
            except (ValueError, KeyError):
                continue
    return ids
