"""Deterministic lexicon reference scorer.

Relevance for value k is m/(m+1) where m counts lexicon-term occurrences in
the lowercased, whitespace-tokenized text; the positive-stance probability is
the positive share of those hits (0.5 with no evidence).  This scorer exists
so the whole pipeline can be exercised and tested without any model service.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from valuelens.errors import DataError
from valuelens.values import SCHWARTZ_VALUES, ValueVector, canonical_value

# value -> {term -> polarity}
Lexicon = dict[str, dict[str, int]]


def load_lexicon(source: Union[str, Path, Mapping, None] = None) -> Lexicon:
    """Load a lexicon from a JSON file ({value: [{"term","polarity"}]}) or an
    equivalent mapping; None loads the bundled demo lexicon."""
    if source is None:
        raw = json.loads(
            resources.files("valuelens").joinpath("data/lexicon.json").read_text("utf-8")
        )
    elif isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read lexicon {source}: {exc}") from exc
    else:
        raw = source

    lexicon: Lexicon = {v: {} for v in SCHWARTZ_VALUES}
    for name, entries in raw.items():
        value = canonical_value(name)
        for entry in entries:
            term = str(entry["term"])
            polarity = int(entry["polarity"])
            if term != term.lower():
                raise DataError(f"lexicon term not lowercase: {term!r}")
            if polarity not in (1, -1):
                raise DataError(f"lexicon polarity must be 1 or -1: {term!r}")
            lexicon[value][term] = polarity
    return lexicon


def lexicon_score(lexicon: Lexicon, text: str) -> tuple[ValueVector, list[float]]:
    """Relevance vector and per-value positive-stance probability for one
    text under the given lexicon."""
    tokens = text.lower().split()
    relevance = []
    p_pos = []
    for value in SCHWARTZ_VALUES:
        terms = lexicon.get(value, {})
        hits = 0
        positive = 0
        for tok in tokens:
            pol = terms.get(tok)
            if pol is not None:
                hits += 1
                if pol > 0:
                    positive += 1
        relevance.append(hits / (hits + 1))
        p_pos.append(positive / hits if hits else 0.5)
    return ValueVector.from_sequence(relevance), p_pos


class LexiconScorer:
    """Implements both scorer protocols on top of lexicon_score.

    Pure and thread-safe: scoring reads only the frozen lexicon.
    """

    def __init__(self, lexicon: Optional[Union[str, Path, Mapping, Lexicon]] = None):
        self._lexicon = load_lexicon(lexicon) if not _is_loaded(lexicon) else lexicon

    def relevance_batch(self, texts: Sequence[str]) -> list[ValueVector]:
        return [lexicon_score(self._lexicon, t)[0] for t in texts]

    def p_pos_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        out = []
        for text, value in pairs:
            value = canonical_value(value)
            _, p_pos = lexicon_score(self._lexicon, text)
            out.append(p_pos[SCHWARTZ_VALUES.index(value)])
        return out


def _is_loaded(obj) -> bool:
    """A loaded lexicon maps value -> {term -> int} rather than value -> list."""
    if not isinstance(obj, dict) or not obj:
        return False
    first = next(iter(obj.values()))
    return isinstance(first, dict)
