"""Annotation-file formats and the model-evaluation harness.

Relevance annotations are ranking triplets (one item per confidence band);
stance annotations are 3-way labels with an adjudicated gold column.  The
harness recomputes model scores from the configured scorer, then reports
annotator agreement, model-vs-gold rank correlation, NDCG@1, Cohen's kappa
and stance F1, per value and overall.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from valuelens.errors import DataError
from valuelens.scoring.base import RelevanceScorer, StanceScorer
from valuelens.stats import (
    RankingTriplet,
    StanceAnnotation,
    cohens_kappa,
    f1_score,
    ndcg_at_1,
    spearman_rho,
)
from valuelens.values import SCHWARTZ_VALUES, canonical_value

RELEVANCE_COLUMNS = (
    "triplet_id",
    "value",
    "item_id",
    "text",
    "annotator_1_rank",
    "annotator_2_rank",
    "annotator_3_rank",
)

STANCE_COLUMNS = (
    "item_id",
    "value",
    "text",
    "annotator_1_label",
    "annotator_2_label",
    "gold_label",
)

_LABEL_ALIASES = {
    "positive": "positive",
    "pos": "positive",
    "negative": "negative",
    "neg": "negative",
    "neutral": "neutral",
    "neutral/unrelated": "neutral",
    "n/a": "neutral",
    "na": "neutral",
}


def _norm_label(raw: str) -> str:
    label = _LABEL_ALIASES.get(raw.strip().lower())
    if label is None:
        raise DataError(f"unknown stance label: {raw!r}")
    return label


def write_relevance_annotations(
    triplets: Sequence[RankingTriplet], path: Union[str, Path]
) -> None:
    """One row per item; rank cells stay empty until annotators fill them."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RELEVANCE_COLUMNS)
        for t in triplets:
            for i, item_id in enumerate(t.item_ids):
                ranks = [
                    str(t.annotator_ranks[a][i]) if a < len(t.annotator_ranks) else ""
                    for a in range(3)
                ]
                writer.writerow([t.triplet_id, t.value, item_id, t.texts[i], *ranks])


def read_relevance_annotations(path: Union[str, Path]) -> list[RankingTriplet]:
    """Load annotated ranking triplets; every rank cell must be filled."""
    groups: dict[str, dict[str, Any]] = {}
    order: list[str] = []
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(RELEVANCE_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise DataError(f"{path}: missing columns {sorted(missing)}")
            for lineno, row in enumerate(reader, start=2):
                tid = row["triplet_id"]
                if tid not in groups:
                    groups[tid] = {
                        "value": canonical_value(row["value"]),
                        "item_ids": [],
                        "texts": [],
                        "ranks": [[], [], []],
                    }
                    order.append(tid)
                g = groups[tid]
                g["item_ids"].append(row["item_id"])
                g["texts"].append(row["text"])
                for a in range(3):
                    cell = row[f"annotator_{a + 1}_rank"].strip()
                    if not cell:
                        raise DataError(f"{path}:{lineno}: empty rank cell")
                    g["ranks"][a].append(int(cell))
    except OSError as exc:
        raise DataError(f"cannot read relevance annotations {path}: {exc}") from exc
    triplets = []
    for tid in order:
        g = groups[tid]
        triplets.append(
            RankingTriplet(
                triplet_id=tid,
                value=g["value"],
                item_ids=tuple(g["item_ids"]),
                texts=tuple(g["texts"]),
                model_confidences=(),
                annotator_ranks=tuple(tuple(r) for r in g["ranks"]),
            )
        )
    return triplets


def write_stance_annotations(
    rows: Sequence[StanceAnnotation], path: Union[str, Path]
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(STANCE_COLUMNS)
        for r in rows:
            labels = [
                r.annotator_labels[a] if a < len(r.annotator_labels) else ""
                for a in range(2)
            ]
            writer.writerow([r.item_id, r.value, r.text, *labels, r.gold])


def read_stance_annotations(path: Union[str, Path]) -> list[StanceAnnotation]:
    rows = []
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(STANCE_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise DataError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                rows.append(
                    StanceAnnotation(
                        item_id=row["item_id"],
                        value=canonical_value(row["value"]),
                        text=row["text"],
                        annotator_labels=(
                            _norm_label(row["annotator_1_label"]),
                            _norm_label(row["annotator_2_label"]),
                        ),
                        gold=_norm_label(row["gold_label"]),
                    )
                )
    except OSError as exc:
        raise DataError(f"cannot read stance annotations {path}: {exc}") from exc
    return rows


@dataclass
class RelevanceEvalReport:
    per_value: dict[str, dict[str, Optional[float]]]
    annotator_spearman: float
    model_spearman: Optional[float]
    ndcg: float
    n_triplets: int
    skipped_model_spearman: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "per_value": self.per_value,
            "annotator_spearman": self.annotator_spearman,
            "model_spearman": self.model_spearman,
            "ndcg_at_1": self.ndcg,
            "n_triplets": self.n_triplets,
            "skipped_model_spearman": self.skipped_model_spearman,
        }


def evaluate_relevance(
    triplets: Sequence[RankingTriplet], scorer: RelevanceScorer
) -> RelevanceEvalReport:
    """Annotator agreement and model quality over annotated ranking triplets.

    Model confidences are recomputed from the scorer; the model ranking is
    confidence-descending.  Triplets where either side of a correlation is
    constant are skipped from that average (counted).
    """
    if not triplets:
        raise DataError("no relevance annotation triplets")
    by_value: dict[str, dict[str, list[float]]] = {}
    all_annotator: list[float] = []
    all_model: list[float] = []
    all_ndcg: list[float] = []
    skipped = 0
    for t in triplets:
        gold = t.gold_ranks()
        vectors = scorer.relevance_batch(list(t.texts))
        conf = [v[t.value] for v in vectors]
        bucket = by_value.setdefault(
            t.value, {"annotator": [], "model": [], "ndcg": []}
        )
        # pairwise annotator agreement; rank vectors are permutations so
        # never constant
        pairs = [
            (i, j)
            for i in range(len(t.annotator_ranks))
            for j in range(i + 1, len(t.annotator_ranks))
        ]
        for i, j in pairs:
            rho = spearman_rho(t.annotator_ranks[i], t.annotator_ranks[j])
            bucket["annotator"].append(rho)
            all_annotator.append(rho)
        # model vs gold pseudo-ranking; negate confidence so that higher
        # confidence means better (lower) rank
        try:
            rho = spearman_rho([-c for c in conf], gold)
            bucket["model"].append(rho)
            all_model.append(rho)
        except DataError:
            skipped += 1
        top = conf.index(max(conf))
        score = ndcg_at_1(gold, top)
        bucket["ndcg"].append(score)
        all_ndcg.append(score)

    per_value: dict[str, dict[str, Optional[float]]] = {}
    for value in SCHWARTZ_VALUES:
        if value not in by_value:
            continue
        b = by_value[value]
        per_value[value] = {
            "annotator_spearman": _mean_or_none(b["annotator"]),
            "model_spearman": _mean_or_none(b["model"]),
            "ndcg_at_1": _mean_or_none(b["ndcg"]),
        }
    return RelevanceEvalReport(
        per_value=per_value,
        annotator_spearman=_mean_or_none(all_annotator) or 0.0,
        model_spearman=_mean_or_none(all_model),
        ndcg=_mean_or_none(all_ndcg) or 0.0,
        n_triplets=len(triplets),
        skipped_model_spearman=skipped,
    )


@dataclass
class StanceEvalReport:
    per_value_kappa: dict[str, Optional[float]]
    overall_kappa: float
    f1_macro: float
    f1_micro: float
    n_scored: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "per_value_kappa": self.per_value_kappa,
            "overall_kappa": self.overall_kappa,
            "f1_macro": self.f1_macro,
            "f1_micro": self.f1_micro,
            "n_scored": self.n_scored,
        }


def evaluate_stance(
    rows: Sequence[StanceAnnotation], scorer: StanceScorer
) -> StanceEvalReport:
    """Inter-annotator kappa plus model F1 over the positive/negative gold
    subset.  The model predicts positive when its positive-class probability
    exceeds 0.5 (stance score > 0), negative otherwise."""
    if not rows:
        raise DataError("no stance annotation rows")
    per_value_kappa: dict[str, Optional[float]] = {}
    for value in SCHWARTZ_VALUES:
        sub = [r for r in rows if r.value == value]
        if not sub:
            continue
        try:
            per_value_kappa[value] = cohens_kappa(
                [r.annotator_labels[0] for r in sub],
                [r.annotator_labels[1] for r in sub],
            )
        except DataError:
            per_value_kappa[value] = None
    overall = cohens_kappa(
        [r.annotator_labels[0] for r in rows],
        [r.annotator_labels[1] for r in rows],
    )
    polar = [r for r in rows if r.gold in ("positive", "negative")]
    if not polar:
        raise DataError("no positive/negative gold rows to score")
    p_pos = scorer.p_pos_batch([(r.text, r.value) for r in polar])
    pred = ["positive" if p > 0.5 else "negative" for p in p_pos]
    gold = [r.gold for r in polar]
    return StanceEvalReport(
        per_value_kappa=per_value_kappa,
        overall_kappa=overall,
        f1_macro=f1_score(gold, pred, "macro"),
        f1_micro=f1_score(gold, pred, "micro"),
        n_scored=len(polar),
    )


def _mean_or_none(xs: Sequence[float]) -> Optional[float]:
    return math.fsum(xs) / len(xs) if xs else None
