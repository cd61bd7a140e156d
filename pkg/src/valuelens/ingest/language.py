"""Language filtering with a pluggable detector.

The default detector is a stopword-profile heuristic over the bundled lists:
cheap, deterministic, dependency-free.  Anything smarter can be dropped in by
implementing detect(text).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from importlib import resources
from typing import Iterable, Iterator, Optional, Protocol

from valuelens.ingest.records import ContentItem

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


class LanguageDetector(Protocol):
    def detect(self, text: str) -> Optional[str]:
        """Return a language code, or None when detection fails."""
        ...


def _load_stopwords() -> dict[str, frozenset[str]]:
    table = {}
    base = resources.files("valuelens").joinpath("data/stopwords")
    for entry in sorted(base.iterdir(), key=lambda e: e.name):
        if not entry.name.endswith(".txt"):
            continue
        code = entry.name[:-4]
        words = frozenset(entry.read_text(encoding="utf-8").split())
        table[code] = words
    return table


class StopwordLanguageDetector:
    """Pick the language whose stopword profile covers the largest share of
    tokens.  Requires a minimum of matching evidence, otherwise fails (None).
    """

    # A real sentence in a covered language typically has >25% stopwords;
    # these floors reject token soup without rejecting short sentences.
    MIN_HITS = 2
    MIN_SHARE = 0.12

    def __init__(self, languages: Optional[Iterable[str]] = None):
        table = _load_stopwords()
        if languages is not None:
            wanted = set(languages)
            missing = wanted - set(table)
            if missing:
                raise ValueError(f"no stopword list bundled for: {sorted(missing)}")
            table = {k: v for k, v in table.items() if k in wanted}
        self._table = table

    @property
    def languages(self) -> list[str]:
        return sorted(self._table)

    def detect(self, text: str) -> Optional[str]:
        tokens = [t.lower() for t in _TOKEN_RE.findall(text)]
        if not tokens:
            return None
        best_code = None
        best_score = (0.0, 0)
        for code in sorted(self._table):
            hits = sum(1 for t in tokens if t in self._table[code])
            score = (hits / len(tokens), hits)
            if score > best_score:
                best_score = score
                best_code = code
        share, hits = best_score
        if best_code is None or hits < self.MIN_HITS or share < self.MIN_SHARE:
            return None
        return best_code


@dataclass
class LanguageFilterCounters:
    kept: int = 0
    dropped_other_language: int = 0
    dropped_detector_failure: int = 0


def filter_language(
    items: Iterable[ContentItem],
    target: str,
    detector: LanguageDetector,
    counters: Optional[LanguageFilterCounters] = None,
) -> Iterator[ContentItem]:
    """Keep items whose detected language equals `target`; detection failures
    drop the item and bump a counter."""
    counters = counters if counters is not None else LanguageFilterCounters()
    for item in items:
        detected = detector.detect(item.text)
        if detected is None:
            counters.dropped_detector_failure += 1
            continue
        if detected != target:
            counters.dropped_other_language += 1
            continue
        counters.kept += 1
        yield item if item.language == detected else replace(item, language=detected)
