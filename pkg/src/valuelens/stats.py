"""Pure statistical kernel: rank correlation, NDCG@1, Cohen's kappa, F1,
two-sample z, and the seeded annotation samplers.

Everything here is a pure function of its arguments; summations use
math.fsum so results do not depend on input order beyond the documented
semantics.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Mapping, Optional, Sequence

from valuelens.errors import DataError
from valuelens.scoring.base import ScoredItem
from valuelens.values import canonical_value


def _midranks(xs: Sequence[float]) -> list[float]:
    """Average ranks (1-based), tied values sharing their mid-rank."""
    n = len(xs)
    order = sorted(range(n), key=lambda i: xs[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        mid = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def _pearson(x: Sequence[float], y: Sequence[float]) -> float:
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.fsum((a - mx) ** 2 for a in x)
    vy = math.fsum((b - my) ** 2 for b in y)
    if vx == 0.0 or vy == 0.0:
        raise DataError("correlation undefined for constant input")
    r = cov / math.sqrt(vx * vy)
    return max(-1.0, min(1.0, r))


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of mid-ranks (average-rank tie handling)."""
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} != {len(y)}")
    if len(x) < 2:
        raise DataError("need at least 2 observations")
    return _pearson(_midranks(x), _midranks(y))


def ndcg_at_1(gold_ranks: Sequence[float], predicted_top: int) -> float:
    """Gain of the predicted top item over the best achievable gain, with
    gain(i) = 3 - gold_rank(i) for mean annotator ranks in [1, 3].  Defined
    as 1 when every gain is zero."""
    if not 0 <= predicted_top < len(gold_ranks):
        raise DataError(f"predicted_top {predicted_top} out of range")
    gains = []
    for r in gold_ranks:
        if not 1.0 <= r <= 3.0:
            raise DataError(f"gold rank out of [1,3]: {r}")
        gains.append(3.0 - r)
    best = max(gains)
    if best == 0.0:
        return 1.0
    return gains[predicted_top] / best


def cohens_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """Chance-corrected agreement with empirical marginals."""
    if len(a) != len(b):
        raise DataError(f"length mismatch: {len(a)} != {len(b)}")
    if not a:
        raise DataError("need at least one labelled pair")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    count_a = Counter(a)
    count_b = Counter(b)
    labels = sorted(set(count_a) | set(count_b), key=repr)
    p_e = math.fsum((count_a[l] / n) * (count_b[l] / n) for l in labels)
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise DataError("kappa undefined: chance agreement is 1 but raters disagree")
    return (p_o - p_e) / (1.0 - p_e)


def f1_score(
    gold: Sequence[Hashable], pred: Sequence[Hashable], average: str = "macro"
) -> float:
    """Macro (default) or micro F1 over the label classes present in gold."""
    if len(gold) != len(pred):
        raise DataError(f"length mismatch: {len(gold)} != {len(pred)}")
    if not gold:
        raise DataError("empty input")
    classes = sorted(set(gold), key=repr)
    tp: dict[Hashable, int] = {c: 0 for c in classes}
    fp: dict[Hashable, int] = {c: 0 for c in classes}
    fn: dict[Hashable, int] = {c: 0 for c in classes}
    for g, p in zip(gold, pred):
        if g == p:
            tp[g] += 1
        else:
            if g in fn:
                fn[g] += 1
            if p in fp:
                fp[p] += 1
    if average == "macro":
        f1s = []
        for c in classes:
            precision = tp[c] / (tp[c] + fp[c]) if tp[c] + fp[c] else 0.0
            recall = tp[c] / (tp[c] + fn[c]) if tp[c] + fn[c] else 0.0
            f1s.append(
                2 * precision * recall / (precision + recall) if precision + recall else 0.0
            )
        return math.fsum(f1s) / len(f1s)
    if average == "micro":
        tp_all = sum(tp.values())
        fp_all = sum(fp.values())
        fn_all = sum(fn.values())
        denom = 2 * tp_all + fp_all + fn_all
        return 2 * tp_all / denom if denom else 0.0
    raise DataError(f"unknown averaging: {average}")


def two_sample_z(
    mean_a: float, var_a: float, n_a: int, mean_b: float, var_b: float, n_b: int
) -> float:
    """Welch-style z statistic with unpooled sample variances.  Degenerate
    zero-variance cases: 0 for equal means, signed infinity otherwise."""
    if n_a < 2 or n_b < 2:
        raise DataError("need at least 2 observations per sample")
    denom = math.sqrt(var_a / n_a + var_b / n_b)
    if denom == 0.0:
        if mean_a == mean_b:
            return 0.0
        return math.inf if mean_a > mean_b else -math.inf
    return (mean_a - mean_b) / denom


@dataclass(frozen=True)
class Band:
    """A half-open-or-closed model-confidence interval."""

    name: str
    lo: float
    hi: float
    lo_strict: bool = False
    hi_strict: bool = False

    def contains(self, p: float) -> bool:
        above = p > self.lo if self.lo_strict else p >= self.lo
        below = p < self.hi if self.hi_strict else p <= self.hi
        return above and below


# High confidence is "above 0.8", medium "0.4 - 0.6", low "below 0.2".
DEFAULT_BANDS: tuple[Band, ...] = (
    Band("high", 0.8, 1.0, lo_strict=True),
    Band("medium", 0.4, 0.6),
    Band("low", 0.0, 0.2, hi_strict=True),
)


@dataclass(frozen=True)
class RankingTriplet:
    """One annotation unit: one item per confidence band for one value."""

    triplet_id: str
    value: str
    item_ids: tuple[str, ...]
    texts: tuple[str, ...]
    model_confidences: tuple[float, ...]
    # one rank vector per annotator; each a permutation of 1..len(items)
    annotator_ranks: tuple[tuple[int, ...], ...] = ()

    def gold_ranks(self) -> tuple[float, ...]:
        """Per-item mean of annotator ranks."""
        if not self.annotator_ranks:
            raise DataError(f"triplet {self.triplet_id} has no annotations")
        n = len(self.item_ids)
        for ranks in self.annotator_ranks:
            if sorted(ranks) != list(range(1, n + 1)):
                raise DataError(
                    f"triplet {self.triplet_id}: ranks {ranks} are not a permutation"
                )
        return tuple(
            math.fsum(ranks[i] for ranks in self.annotator_ranks)
            / len(self.annotator_ranks)
            for i in range(n)
        )


@dataclass(frozen=True)
class StanceAnnotation:
    item_id: str
    value: str
    text: str
    annotator_labels: tuple[str, ...]
    gold: str


STANCE_LABELS = ("positive", "negative", "neutral")


def sample_confidence_bands(
    scored: Sequence[ScoredItem],
    value: str,
    texts: Optional[Mapping[str, str]] = None,
    bands: Sequence[Band] = DEFAULT_BANDS,
    per_band: int = 1,
    repeats: int = 5,
    seed: int = 0,
) -> list[RankingTriplet]:
    """Draw annotation-ready ranking units: per repeat, `per_band` items from
    each confidence band for `value`, without replacement across repeats.
    Fails naming the band when one cannot supply enough items."""
    value = canonical_value(value)
    rng = random.Random(seed)
    texts = texts or {}
    picks: list[list[ScoredItem]] = []
    chosen_ids: set[str] = set()
    for band in bands:
        eligible = sorted(
            (s for s in scored if band.contains(s.relevance[value]) and s.item_id not in chosen_ids),
            key=lambda s: s.item_id,
        )
        need = per_band * repeats
        if len(eligible) < need:
            raise DataError(
                f"band {band.name!r} for {value}: need {need} items, have {len(eligible)}"
            )
        selection = rng.sample(eligible, need)
        chosen_ids.update(s.item_id for s in selection)
        picks.append(selection)
    triplets = []
    for r in range(repeats):
        items: list[ScoredItem] = []
        for b in range(len(bands)):
            items.extend(picks[b][r * per_band : (r + 1) * per_band])
        triplets.append(
            RankingTriplet(
                triplet_id=f"{value}-{r + 1}",
                value=value,
                item_ids=tuple(s.item_id for s in items),
                texts=tuple(texts.get(s.item_id, "") for s in items),
                model_confidences=tuple(s.relevance[value] for s in items),
            )
        )
    return triplets


def sample_high_confidence(
    scored: Sequence[ScoredItem],
    value: str,
    threshold: float = 0.8,
    n: int = 20,
    seed: int = 0,
) -> list[str]:
    """Seeded uniform sample of n item ids whose relevance for `value` is at
    least `threshold`."""
    value = canonical_value(value)
    eligible = sorted(
        (s.item_id for s in scored if s.relevance[value] >= threshold)
    )
    if len(eligible) < n:
        raise DataError(
            f"only {len(eligible)} items at relevance >= {threshold} for {value}, need {n}"
        )
    rng = random.Random(seed)
    return rng.sample(eligible, n)
