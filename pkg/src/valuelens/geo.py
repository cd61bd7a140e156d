"""Region-level value extraction and rank correlation against survey tables.

A region pools items from its mapped communities, filters by the region's
language (unless "all"), translates via a pluggable translator (identity by
default), samples posts and comments under separate caps, scores them and
aggregates exactly like a community profile.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Optional, Protocol, Sequence, Union

from valuelens.aggregate import aggregate_community
from valuelens.errors import DataError
from valuelens.ingest.language import LanguageDetector, StopwordLanguageDetector
from valuelens.ingest.records import ContentItem
from valuelens.ingest.sampling import downsample, substream_seed
from valuelens.scoring.base import RelevanceScorer, StanceScorer
from valuelens.scoring.runner import score_corpus
from valuelens.stats import spearman_rho
from valuelens.values import (
    SCHWARTZ_VALUES,
    StanceVector,
    ValueVector,
    canonical_value,
)

log = logging.getLogger(__name__)

DEFAULT_POSTS_CAP = 2000
DEFAULT_COMMENTS_CAP = 2000
DEFAULT_MIN_TOTAL = 250

US_STATES = (
    "alabama", "alaska", "arizona", "arkansas", "california", "colorado",
    "connecticut", "delaware", "florida", "georgia", "hawaii", "idaho",
    "illinois", "indiana", "iowa", "kansas", "kentucky", "louisiana", "maine",
    "maryland", "massachusetts", "michigan", "minnesota", "mississippi",
    "missouri", "montana", "nebraska", "nevada", "new hampshire",
    "new jersey", "new mexico", "new york", "north carolina", "north dakota",
    "ohio", "oklahoma", "oregon", "pennsylvania", "rhode island",
    "south carolina", "south dakota", "tennessee", "texas", "utah", "vermont",
    "virginia", "washington", "west virginia", "wisconsin", "wyoming",
)


class Translator(Protocol):
    def translate(self, text: str, source_language: str) -> str:
        ...


class IdentityTranslator:
    def translate(self, text: str, source_language: str) -> str:
        return text


class FileCacheTranslator:
    """Looks translations up in a JSON map of source text -> translated text;
    falls back to the original text on misses (counted)."""

    def __init__(self, path: Union[str, Path]):
        try:
            with open(path, encoding="utf-8") as fh:
                self._cache: dict[str, str] = json.load(fh)
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read translation cache {path}: {exc}") from exc
        self.misses = 0

    def translate(self, text: str, source_language: str) -> str:
        hit = self._cache.get(text)
        if hit is None:
            self.misses += 1
            return text
        return hit


@dataclass(frozen=True)
class RegionSpec:
    region: str
    language: str  # code or "all"
    communities: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.communities:
            raise ValueError(f"region {self.region!r} has no communities")


def read_region_specs(path: Union[str, Path]) -> list[RegionSpec]:
    """JSON list of {"region", "language", "communities"}."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read region specs {path}: {exc}") from exc
    specs = []
    for entry in raw:
        try:
            specs.append(
                RegionSpec(
                    region=str(entry["region"]),
                    language=str(entry["language"]).lower(),
                    communities=tuple(map(str, entry["communities"])),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad region spec entry {entry!r}: {exc}") from exc
    return specs


@dataclass(frozen=True)
class RegionProfile:
    region: str
    relevance: ValueVector
    stance: StanceVector
    n_items: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "region": self.region,
            "n_items": self.n_items,
            "relevance": self.relevance.as_dict(),
            "stance": self.stance.as_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RegionProfile":
        return cls(
            region=str(d["region"]),
            relevance=ValueVector.from_mapping(d["relevance"]),
            stance=StanceVector.from_mapping(d["stance"]),
            n_items=int(d["n_items"]),
        )


@dataclass
class RegionSkip:
    region: str
    reason: str


def build_region_profile(
    spec: RegionSpec,
    corpus: Mapping[str, Sequence[ContentItem]],
    relevance_scorer: RelevanceScorer,
    stance_scorer: StanceScorer,
    seed: int,
    posts_cap: int = DEFAULT_POSTS_CAP,
    comments_cap: int = DEFAULT_COMMENTS_CAP,
    min_total: int = DEFAULT_MIN_TOTAL,
    gate: float = 0.5,
    detector: Optional[LanguageDetector] = None,
    translator: Optional[Translator] = None,
) -> Union[RegionProfile, RegionSkip]:
    """Pool, language-filter, translate, sample, score and aggregate one
    region; regions with too little data are skipped with a reason."""
    translator = translator or IdentityTranslator()
    pooled: list[ContentItem] = []
    for community in spec.communities:
        pooled.extend(corpus.get(community, ()))
    if not pooled:
        return RegionSkip(spec.region, "no communities found in corpus")

    if spec.language != "all":
        detector = detector or StopwordLanguageDetector()
        pooled = [i for i in pooled if detector.detect(i.text) == spec.language]
        if not pooled:
            return RegionSkip(spec.region, f"no content in language {spec.language!r}")

    if len(pooled) < min_total:
        return RegionSkip(
            spec.region, f"only {len(pooled)} samples available, need {min_total}"
        )

    posts = [i for i in pooled if i.kind == "post"]
    comments = [i for i in pooled if i.kind == "comment"]
    sampled = downsample(
        posts, posts_cap, substream_seed(seed, "geo", spec.region, "posts")
    ) + downsample(
        comments, comments_cap, substream_seed(seed, "geo", spec.region, "comments")
    )

    if spec.language != "all":
        sampled = [
            replace(i, text=translator.translate(i.text, spec.language)) for i in sampled
        ]

    # one synthetic community so the aggregation path is shared exactly
    region_items = [replace(i, community=spec.region) for i in sampled]
    scored = list(
        score_corpus(
            {spec.region: region_items}, relevance_scorer, stance_scorer, gate=gate
        )
    )
    if not scored:
        return RegionSkip(spec.region, "all items failed scoring")
    profile = aggregate_community(scored)
    return RegionProfile(
        region=spec.region,
        relevance=profile.relevance,
        stance=profile.stance,
        n_items=profile.n_items,
    )


def normalize_region(name: str) -> str:
    return " ".join(name.strip().lower().split())


@dataclass(frozen=True)
class SurveyTable:
    """Region-by-column matrix from a questionnaire study."""

    source: str
    columns: tuple[str, ...]
    rows: Mapping[str, tuple[float, ...]]  # normalized region -> values

    def column(self, name: str) -> dict[str, float]:
        if name not in self.columns:
            raise DataError(f"survey {self.source!r} has no column {name!r}")
        idx = self.columns.index(name)
        return {region: vals[idx] for region, vals in self.rows.items()}


def read_survey_csv(
    path: Union[str, Path],
    region_column: str = "region",
    canonicalize_values: bool = False,
) -> SurveyTable:
    """Header row with a region column plus one numeric column per value or
    survey metric.  Region ids are case-folded and whitespace-trimmed."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fields = reader.fieldnames or ()
            if region_column not in fields:
                raise DataError(f"{path}: no region column {region_column!r}")
            columns = tuple(c for c in fields if c != region_column)
            if canonicalize_values:
                columns = tuple(canonical_value(c) for c in columns)
            rows: dict[str, tuple[float, ...]] = {}
            for row in reader:
                region = normalize_region(row[region_column])
                if region in rows:
                    raise DataError(f"{path}: duplicate region {region!r}")
                try:
                    rows[region] = tuple(
                        float(row[c]) for c in fields if c != region_column
                    )
                except ValueError as exc:
                    raise DataError(f"{path}: bad number for {region!r}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read survey {path}: {exc}") from exc
    return SurveyTable(source=str(path), columns=columns, rows=rows)


@dataclass
class SurveyCorrelation:
    per_value: dict[str, Optional[float]]  # None: undefined (constant column)
    mean: float
    regions: tuple[str, ...]

    def as_dict(self) -> dict[str, Any]:
        return {
            "per_value": self.per_value,
            "mean": self.mean,
            "n_regions": len(self.regions),
            "regions": list(self.regions),
        }


def correlate_with_survey(
    profiles: Sequence[RegionProfile],
    survey: SurveyTable,
    values: Union[str, Sequence[str]] = "all",
    aliases: Optional[Mapping[str, str]] = None,
) -> SurveyCorrelation:
    """Column-wise Spearman correlation between extracted relevance and the
    survey matrix, restricted to the shared region set."""
    wanted = (
        list(SCHWARTZ_VALUES)
        if values == "all"
        else [canonical_value(v) for v in ([values] if isinstance(values, str) else values)]
    )
    aliases = {normalize_region(k): normalize_region(v) for k, v in (aliases or {}).items()}

    def resolve(region: str) -> str:
        norm = normalize_region(region)
        return aliases.get(norm, norm)

    by_region = {resolve(p.region): p for p in profiles}
    common = sorted(set(by_region) & set(survey.rows))
    if len(common) < 3:
        raise DataError(
            f"need >= 3 shared regions between profiles and survey, have {len(common)}"
        )
    per_value: dict[str, Optional[float]] = {}
    for value in wanted:
        survey_col = survey.column(value)
        xs = [by_region[r].relevance[value] for r in common]
        ys = [survey_col[r] for r in common]
        try:
            per_value[value] = spearman_rho(xs, ys)
        except DataError:
            # a constant column has no rank ordering to correlate
            log.warning("correlation undefined for %s (constant column)", value)
            per_value[value] = None
    defined = [rho for rho in per_value.values() if rho is not None]
    if not defined:
        raise DataError("no value column has a defined correlation")
    mean = math.fsum(defined) / len(defined)
    return SurveyCorrelation(per_value=per_value, mean=mean, regions=tuple(common))


@dataclass
class StateTraditionReport:
    rows: list[dict[str, Any]]  # state, tradition_value, party (sorted desc)
    conservatism_rho: float
    religiosity_rho: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "conservatism_spearman": self.conservatism_rho,
            "religiosity_spearman": self.religiosity_rho,
            "states": self.rows,
        }


def state_tradition_report(
    profiles: Sequence[RegionProfile],
    conservatism: Mapping[str, float],
    religiosity: Mapping[str, float],
    election: Mapping[str, str],
) -> StateTraditionReport:
    """US states sorted by extracted tradition relevance, tagged by party,
    with rank correlations against both survey columns.  All 50 states must
    be present in every input."""
    by_state = {normalize_region(p.region): p for p in profiles}
    conservatism = {normalize_region(k): v for k, v in conservatism.items()}
    religiosity = {normalize_region(k): v for k, v in religiosity.items()}
    election = {normalize_region(k): str(v) for k, v in election.items()}
    problems = []
    for label, table in (
        ("profiles", by_state),
        ("conservatism", conservatism),
        ("religiosity", religiosity),
        ("election", election),
    ):
        missing = [s for s in US_STATES if s not in table]
        if missing:
            problems.append(f"{label} missing states: {', '.join(missing)}")
    if problems:
        raise DataError("; ".join(problems))

    tradition = {s: by_state[s].relevance["tradition"] for s in US_STATES}
    rows = [
        {"state": s, "tradition_value": tradition[s], "party": election[s]}
        for s in sorted(US_STATES, key=lambda s: (-tradition[s], s))
    ]
    xs = [tradition[s] for s in US_STATES]
    return StateTraditionReport(
        rows=rows,
        conservatism_rho=spearman_rho(xs, [conservatism[s] for s in US_STATES]),
        religiosity_rho=spearman_rho(xs, [religiosity[s] for s in US_STATES]),
    )


def write_region_profiles(
    profiles: Sequence[RegionProfile], path: Union[str, Path]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in sorted(profiles, key=lambda p: p.region):
            fh.write(json.dumps(p.as_dict(), ensure_ascii=False) + "\n")


def read_region_profiles(path: Union[str, Path]) -> list[RegionProfile]:
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(RegionProfile.from_dict(json.loads(line)))
                except (ValueError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad region profile: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read region profiles {path}: {exc}") from exc
    return out
