"""Collapse scored items into community profiles; magnitudes, rankings,
global statistics.

All reductions sort contributors by item id and sum with math.fsum
(correctly-rounded), so results are bit-identical across input shuffles and
worker-thread counts.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from valuelens.errors import DataError
from valuelens.scoring.base import ScoredItem
from valuelens.values import (
    N_VALUES,
    SCHWARTZ_VALUES,
    StanceVector,
    ValueVector,
    stance_display_label,
)

@dataclass(frozen=True)
class CommunityProfile:
    community: str
    relevance: ValueVector
    stance: StanceVector
    n_items: int
    n_stance: tuple[int, ...]
    magnitude: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "community": self.community,
            "n_items": self.n_items,
            "relevance": self.relevance.as_dict(),
            "stance": self.stance.as_dict(),
            "n_stance": {v: n for v, n in zip(SCHWARTZ_VALUES, self.n_stance)},
            "magnitude": self.magnitude,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CommunityProfile":
        n_stance = tuple(int(d["n_stance"][v]) for v in SCHWARTZ_VALUES)
        return cls(
            community=str(d["community"]),
            relevance=ValueVector.from_mapping(d["relevance"]),
            stance=StanceVector.from_mapping(d["stance"]),
            n_items=int(d["n_items"]),
            n_stance=n_stance,
            magnitude=float(d["magnitude"]),
        )


def magnitude(relevance: ValueVector) -> float:
    """Euclidean norm of a relevance vector: total intensity of value
    expression, in [0, sqrt(10)]."""
    return math.sqrt(math.fsum(p * p for p in relevance.entries))


def aggregate_community(items: Sequence[ScoredItem]) -> CommunityProfile:
    """Mean relevance over all items and mean stance over non-Null
    contributors (Null when none), for items of one community."""
    if not items:
        raise DataError("cannot aggregate an empty item list")
    communities = {i.community for i in items}
    if len(communities) != 1:
        raise DataError(f"items span multiple communities: {sorted(communities)}")
    ordered = sorted(items, key=lambda i: i.item_id)
    n = len(ordered)
    relevance = ValueVector.from_sequence(
        tuple(
            math.fsum(i.relevance.entries[k] for i in ordered) / n
            for k in range(N_VALUES)
        )
    )
    stance_entries: list[Optional[float]] = []
    n_stance: list[int] = []
    for k in range(N_VALUES):
        contrib = [i.stance.entries[k] for i in ordered if i.stance.entries[k] is not None]
        n_stance.append(len(contrib))
        stance_entries.append(math.fsum(contrib) / len(contrib) if contrib else None)
    return CommunityProfile(
        community=next(iter(communities)),
        relevance=relevance,
        stance=StanceVector.from_sequence(tuple(stance_entries)),
        n_items=n,
        n_stance=tuple(n_stance),
        magnitude=magnitude(relevance),
    )


def aggregate_communities(
    scored: Iterable[ScoredItem], threads: int = 1
) -> list[CommunityProfile]:
    """Aggregate all communities, in parallel by community partition.

    Each community is reduced wholly by one worker, so the result is
    independent of the thread count.
    """
    groups: dict[str, list[ScoredItem]] = {}
    for item in scored:
        groups.setdefault(item.community, []).append(item)
    names = sorted(groups)
    if threads <= 1:
        return [aggregate_community(groups[name]) for name in names]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda name: aggregate_community(groups[name]), names))


@dataclass(frozen=True)
class ValueRanking:
    value: str
    direction: str  # by-relevance | by-stance-pos | by-stance-neg
    ranked: tuple[tuple[str, float], ...]  # (community, score)


RANK_DIRECTIONS = ("by-relevance", "by-stance-pos", "by-stance-neg")


def rank_by_value(
    profiles: Sequence[CommunityProfile],
    value: str,
    direction: str = "by-relevance",
    top_n: int = 20,
) -> ValueRanking:
    """Top communities for one value.  Stance directions exclude communities
    with Null stance; ties break by community name."""
    if top_n <= 0:
        raise DataError("top_n must be positive")
    if direction not in RANK_DIRECTIONS:
        raise DataError(f"unknown ranking direction: {direction}")
    if not profiles:
        raise DataError("no profiles to rank")
    if direction == "by-relevance":
        entries = [(p.community, p.relevance[value]) for p in profiles]
        entries.sort(key=lambda e: (-e[1], e[0]))
    else:
        entries = [
            (p.community, p.stance[value]) for p in profiles if p.stance[value] is not None
        ]
        if direction == "by-stance-pos":
            entries.sort(key=lambda e: (-e[1], e[0]))
        else:
            entries.sort(key=lambda e: (e[1], e[0]))
    return ValueRanking(value=value, direction=direction, ranked=tuple(entries[:top_n]))


@dataclass(frozen=True)
class GlobalStats:
    relevance_mean: ValueVector
    relevance_std: tuple[float, ...]
    stance_mean: tuple[Optional[float], ...]
    stance_std: tuple[Optional[float], ...]

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for k, v in enumerate(SCHWARTZ_VALUES):
            out[v] = {
                "relevance_mean": self.relevance_mean.entries[k],
                "relevance_std": self.relevance_std[k],
                "stance_mean": self.stance_mean[k],
                "stance_std": self.stance_std[k],
            }
        return out


def _mean_std(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    if all(x == xs[0] for x in xs):
        return xs[0], 0.0
    mean = math.fsum(xs) / n
    var = math.fsum((x - mean) ** 2 for x in xs) / n  # population
    return mean, math.sqrt(var)


def global_stats(profiles: Sequence[CommunityProfile]) -> GlobalStats:
    """Per-value mean/std of profile relevance and of non-Null profile
    stances (population std)."""
    if not profiles:
        raise DataError("no profiles for global statistics")
    ordered = sorted(profiles, key=lambda p: p.community)
    rel_mean = []
    rel_std = []
    st_mean: list[Optional[float]] = []
    st_std: list[Optional[float]] = []
    for k in range(N_VALUES):
        mean, std = _mean_std([p.relevance.entries[k] for p in ordered])
        rel_mean.append(mean)
        rel_std.append(std)
        stances = [p.stance.entries[k] for p in ordered if p.stance.entries[k] is not None]
        if stances:
            mean, std = _mean_std(stances)
            st_mean.append(mean)
            st_std.append(std)
        else:
            st_mean.append(None)
            st_std.append(None)
    return GlobalStats(
        relevance_mean=ValueVector.from_sequence(rel_mean),
        relevance_std=tuple(rel_std),
        stance_mean=tuple(st_mean),
        stance_std=tuple(st_std),
    )


def write_profiles(
    profiles: Sequence[CommunityProfile], path: Union[str, Path]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in sorted(profiles, key=lambda p: p.community):
            fh.write(json.dumps(p.as_dict(), ensure_ascii=False) + "\n")


def read_profiles(path: Union[str, Path]) -> list[CommunityProfile]:
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(CommunityProfile.from_dict(json.loads(line)))
                except (ValueError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad profile: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read profiles {path}: {exc}") from exc
    return out


def write_profiles_csv(
    profiles: Sequence[CommunityProfile], path: Union[str, Path]
) -> None:
    """Community x 20 matrix: ten relevance columns then ten stance columns,
    Null stance as an empty cell."""
    header = (
        ["community"]
        + [f"relevance_{v}" for v in SCHWARTZ_VALUES]
        + [f"stance_{v}" for v in SCHWARTZ_VALUES]
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for p in sorted(profiles, key=lambda p: p.community):
            row: list[Any] = [p.community]
            row.extend(repr(x) for x in p.relevance.entries)
            row.extend("" if s is None else repr(s) for s in p.stance.entries)
            writer.writerow(row)


def ranking_rows(
    ranking: ValueRanking,
    profiles_by_name: Optional[Mapping[str, CommunityProfile]] = None,
    stance_threshold: float = 0.2,
) -> list[dict[str, Any]]:
    """Display rows for a ranking.  Relevance rankings are labeled by the
    community's stance toward the value; stance rankings by the score itself.
    """
    rows = []
    for rank, (community, score) in enumerate(ranking.ranked, start=1):
        if ranking.direction == "by-relevance":
            stance = None
            if profiles_by_name and community in profiles_by_name:
                stance = profiles_by_name[community].stance[ranking.value]
            label = stance_display_label(stance, stance_threshold)
        else:
            label = stance_display_label(score, stance_threshold)
        rows.append(
            {
                "rank": rank,
                "community": community,
                "score": score,
                "stance_label": label,
            }
        )
    return rows
