"""Acceptance suite: one test per exit criterion, at its stated tolerance.

Runs entirely with the lexicon scorer, mock responses and fixture files; the
released-dataset reproduction is gated on VALUELENS_RELEASED_DIR.  A per-line
pass/fail summary is printed at the end of the pytest run (see conftest).
"""

import json
import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from valuelens.aggregate import aggregate_communities, aggregate_community, magnitude
from valuelens.geo import RegionProfile, SurveyTable, correlate_with_survey, normalize_region
from valuelens.ingest.pipeline import run_ingest
from valuelens.ingest.records import CommunityMeta
from valuelens.scoring.base import score_item
from valuelens.scoring.lexicon import LexiconScorer, load_lexicon
from valuelens.similarity import EmbeddingTable, matched_vs_random, sim_usr
from valuelens.stats import (
    cohens_kappa,
    f1_score,
    ndcg_at_1,
    spearman_rho,
    two_sample_z,
)
from valuelens.values import SCHWARTZ_VALUES, StanceVector, ValueVector, assert_gate_consistent
from synth import (
    EN_FILLER,
    lexicon_text,
    make_cluster_communities,
    random_scored_items,
    write_demo_dump,
)
from test_stats import (
    oracle_kappa,
    oracle_macro_f1,
    oracle_spearman,
)


# ---------------------------------------------------------------------------
# criterion 1: statistical kernel oracle suite (>=100 random instances each,
# |delta| < 1e-9, runtime < 10 s)
# ---------------------------------------------------------------------------

def test_kernel_oracle_suite():
    start = time.monotonic()
    rng = random.Random(20240)
    tol = 1e-9

    for _ in range(120):
        n = rng.randrange(3, 30)
        x = [rng.random() for _ in range(n)]
        y = [rng.random() for _ in range(n)]
        if rng.random() < 0.3:
            x = [round(v, 1) for v in x]
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        assert abs(spearman_rho(x, y) - oracle_spearman(x, y)) < tol

    for _ in range(120):
        gold = [rng.uniform(1, 3) for _ in range(3)]
        pick = rng.randrange(3)
        gains = [3 - g for g in gold]
        expected = 1.0 if max(gains) == 0 else gains[pick] / max(gains)
        assert abs(ndcg_at_1(gold, pick) - expected) < tol

    for _ in range(120):
        n = rng.randrange(2, 60)
        labels = ["a", "b", "c"][: rng.randrange(2, 4)]
        a = [rng.choice(labels) for _ in range(n)]
        b = [rng.choice(labels) for _ in range(n)]
        po = sum(1 for u, v in zip(a, b) if u == v) / n
        pe = sum((a.count(l) / n) * (b.count(l) / n) for l in set(a) | set(b))
        if pe == 1.0:
            continue
        assert abs(cohens_kappa(a, b) - oracle_kappa(a, b)) < tol

    for _ in range(120):
        n = rng.randrange(2, 60)
        labels = ["positive", "negative", "neutral"][: rng.randrange(2, 4)]
        gold = [rng.choice(labels) for _ in range(n)]
        pred = [rng.choice(labels) for _ in range(n)]
        assert abs(f1_score(gold, pred) - oracle_macro_f1(gold, pred)) < tol

    for _ in range(120):
        ma, mb = rng.random(), rng.random()
        va, vb = rng.random() + 1e-3, rng.random() + 1e-3
        na, nb = rng.randrange(2, 500), rng.randrange(2, 500)
        expected = (ma - mb) / math.sqrt(va / na + vb / nb)
        assert abs(two_sample_z(ma, va, na, mb, vb, nb) - expected) < tol

    for _ in range(120):
        universe = [f"u{i}" for i in range(40)]
        a = set(rng.sample(universe, rng.randrange(1, 30)))
        b = set(rng.sample(universe, rng.randrange(1, 30)))
        expected = len(a & b) / min(len(a), len(b))
        assert abs(sim_usr(a, b) - expected) < tol

    assert time.monotonic() - start < 10.0


# ---------------------------------------------------------------------------
# criterion 2: ingest compliance on a 10k-record dump with known composition
# ---------------------------------------------------------------------------

def _compliance_dump():
    """10k records over 12 communities with a fully known composition.

    Returns (lines, metas, expectation) where the expectation is computed by
    an independent re-application of the published rules to the raw lines.
    """
    lines = []
    communities = []
    for i in range(12):
        name = f"acc{i:02d}"
        subs = 4_999 if name == "acc01" else (5_000 if name == "acc02" else 80_000)
        nsfw = name == "acc05"
        communities.append((name, subs, nsfw))

    per_community = {
        # heavy community exercises the 1000-item downsample cap
        "acc00": 2600,
        "acc01": 900,   # excluded: 4,999 subscribers
        "acc02": 600,
        "acc03": 500,
        "acc04": 420,
        "acc05": 400,   # excluded: NSFW
        "acc06": 380,
        "acc07": 360,
        "acc08": 320,
        "acc09": 300,   # many records filtered to push it under 250
        "acc10": 260,
        "acc11": 240,   # excluded: fewer than 250 items even if all survive
    }
    rec = 0
    for name, _, _ in communities:
        n = per_community[name]
        for j in range(n):
            rec += 1
            # deterministic rule mix
            words = 10 + (j % 30)
            score = 10 + (j % 50)
            text = " ".join(EN_FILLER[k % len(EN_FILLER)] for k in range(j, j + words))
            if name == "acc09" and j % 4 == 0:
                words_bad = 9
                text = " ".join(["word"] * words_bad)  # dropped: too short
            elif name == "acc09" and j % 4 == 1:
                score = 9  # dropped: too few upvotes
            elif j % 97 == 0:
                text = "[deleted]"
            obj = {
                "id": f"x{rec:05d}", "subreddit": name, "author": f"a{j % 200}",
                "score": score, "created_utc": rec, "body": text,
            }
            lines.append(json.dumps(obj))
    # malformed lines round the total up to exactly 10,000
    while len(lines) < 10_000:
        lines.append("{malformed " + str(len(lines)))
    assert len(lines) == 10_000
    metas = [
        CommunityMeta(community=n, subscriber_count=s, nsfw_flag=f)
        for n, s, f in communities
    ]
    return lines, metas


def _independent_expectation(lines, metas):
    """Re-apply the rules with independent code: plain dict/loop logic."""
    malformed = 0
    survivors = {}
    for line in lines:
        try:
            obj = json.loads(line)
        except ValueError:
            malformed += 1
            continue
        text = obj["body"]
        if text.strip() in ("[deleted]", "[removed]"):
            continue
        if len(text.split()) < 10 or obj["score"] < 10:
            continue
        survivors.setdefault(obj["subreddit"], []).append(obj["id"])
    meta_by_name = {m.community: m for m in metas}
    kept = {}
    for name, ids in survivors.items():
        m = meta_by_name.get(name)
        if m is None or m.nsfw_flag or m.subscriber_count < 5000 or len(ids) < 250:
            continue
        kept[name] = ids
    return malformed, survivors, kept


def test_ingest_compliance_10k():
    import io

    lines, metas = _compliance_dump()
    malformed, survivors, kept_expected = _independent_expectation(lines, metas)

    data = ("\n".join(lines) + "\n").encode()
    result = run_ingest([io.BytesIO(data)], metas, seed=1234, cap=1000, language=None)

    # surviving community set matches the independent enumeration exactly
    assert sorted(result.corpus) == sorted(kept_expected)
    assert "acc01" in result.community_filter.excluded_small
    assert "acc05" in result.community_filter.excluded_nsfw
    assert "acc11" in result.community_filter.excluded_few_items
    assert "acc09" in result.community_filter.excluded_few_items

    for name, ids in kept_expected.items():
        got_ids = [i.id for i in result.corpus[name]]
        if len(ids) <= 1000:
            assert got_ids == ids, f"under-cap community {name} items differ"
        else:
            assert len(got_ids) == 1000
            assert set(got_ids) <= set(ids)

    # per-rule counters sum exactly to the input line count
    c = result.counters
    c.check_conservation()
    assert c.lines == 10_000
    assert c.malformed == malformed
    assert (
        c.malformed + c.dropped_deleted + c.dropped_short + c.dropped_low_score
        + c.dropped_community_excluded + c.dropped_downsampled + c.final_kept
    ) == 10_000

    # determinism of the seeded sample across an independent second run
    again = run_ingest([io.BytesIO(data)], metas, seed=1234, cap=1000, language=None)
    assert {n: [i.id for i in items] for n, items in again.corpus.items()} == {
        n: [i.id for i in items] for n, items in result.corpus.items()
    }


# ---------------------------------------------------------------------------
# criterion 3: gate consistency on 10^4 lexicon-scored random texts
# ---------------------------------------------------------------------------

def test_gate_consistency_property_10k():
    scorer = LexiconScorer()
    lex = load_lexicon()
    all_terms = sorted({t for v in SCHWARTZ_VALUES for t in lex[v]})
    rng = random.Random(4242)

    class _Item:
        __slots__ = ("id", "community", "text")

        def __init__(self, i, text):
            self.id = f"gc{i:05d}"
            self.community = "gate"
            self.text = text

    violations = 0
    for i in range(10_000):
        n_terms = rng.randrange(0, 10)
        n_filler = rng.randrange(1, 12)
        text = lexicon_text(rng, all_terms, n_terms, n_filler)
        scored = score_item(scorer, scorer, _Item(i, text), gate=0.5)
        try:
            assert_gate_consistent(scored.relevance, scored.stance, 0.5)
        except ValueError:
            violations += 1
    assert violations == 0


# ---------------------------------------------------------------------------
# criterion 4: aggregation oracle, 50 fixtures, 1e-12, thread/shuffle identity
# ---------------------------------------------------------------------------

def test_aggregation_oracle_50_fixtures():
    rng = random.Random(2025)
    for trial in range(50):
        n = rng.randrange(1, 120)
        items = random_scored_items(trial * 7 + 1, n, f"agg{trial:02d}")
        profile = aggregate_community(items)
        for k in range(10):
            exact = sum(
                (Fraction(i.relevance.entries[k]) for i in items), Fraction(0)
            ) / n
            assert abs(profile.relevance.entries[k] - float(exact)) < 1e-12
            contrib = [i.stance.entries[k] for i in items if i.stance.entries[k] is not None]
            if contrib:
                exact = sum((Fraction(c) for c in contrib), Fraction(0)) / len(contrib)
                assert abs(profile.stance.entries[k] - float(exact)) < 1e-12
            else:
                assert profile.stance.entries[k] is None

    scored = []
    for c in range(16):
        scored.extend(random_scored_items(c + 500, 60, f"thr{c:02d}"))
    reference = None
    for threads in (1, 4, 8):
        for shuffle_seed in (None, 1, 2):
            batch = scored[:]
            if shuffle_seed is not None:
                random.Random(shuffle_seed).shuffle(batch)
            profiles = [p.as_dict() for p in aggregate_communities(batch, threads=threads)]
            if reference is None:
                reference = profiles
            else:
                assert profiles == reference  # bit-identical


# ---------------------------------------------------------------------------
# criterion 5: synthetic similarity separation (200 communities, 4 clusters,
# sigma=0.05, seed 42): matched - random > 0.1 and z > 5, under 60 s
# ---------------------------------------------------------------------------

def test_similarity_cluster_separation():
    start = time.monotonic()
    profiles, embeddings, user_sets, _ = make_cluster_communities(
        seed=42, n_communities=200, noise=0.05
    )
    rep_sem = matched_vs_random(
        profiles, embeddings=EmbeddingTable(embeddings), seed=42,
        n_random_pairs=100_000,
    )
    assert rep_sem.matched_mean - rep_sem.random_mean > 0.1
    assert rep_sem.z_score > 5
    rep_usr = matched_vs_random(
        profiles, user_sets=user_sets, seed=42, n_random_pairs=100_000
    )
    assert rep_usr.matched_mean - rep_usr.random_mean > 0.1
    assert rep_usr.z_score > 5
    assert time.monotonic() - start < 60.0


# ---------------------------------------------------------------------------
# criterion 6: magnitude extremes rank all-high communities above all-low
# ---------------------------------------------------------------------------

def test_magnitude_extremes_zero_inversions():
    rng = random.Random(77)
    high_mags = []
    low_mags = []
    for i in range(40):
        high = ValueVector.from_sequence(
            [min(1.0, max(0.0, rng.gauss(0.85, 0.05))) for _ in range(10)]
        )
        low = ValueVector.from_sequence(
            [min(1.0, max(0.0, rng.gauss(0.1, 0.03))) for _ in range(10)]
        )
        high_mags.append(magnitude(high))
        low_mags.append(magnitude(low))
    assert min(high_mags) > max(low_mags)  # zero inversions


# ---------------------------------------------------------------------------
# criterion 7: survey correlation against a known-by-oracle matrix pair,
# plus the released-data reproduction when supplied
# ---------------------------------------------------------------------------

def test_survey_correlation_matches_oracle():
    rng = random.Random(32)
    regions = [f"country{i:02d}" for i in range(32)]
    extracted = {r: [rng.random() for _ in range(10)] for r in regions}
    survey_matrix = {r: [rng.random() for _ in range(10)] for r in regions}
    profiles = [
        RegionProfile(
            region=r,
            relevance=ValueVector.from_sequence(extracted[r]),
            stance=StanceVector.all_null(),
            n_items=100,
        )
        for r in regions
    ]
    survey = SurveyTable(
        source="fixture", columns=SCHWARTZ_VALUES,
        rows={normalize_region(r): tuple(v) for r, v in survey_matrix.items()},
    )
    corr = correlate_with_survey(profiles, survey)
    common = sorted(regions)
    for k, value in enumerate(SCHWARTZ_VALUES):
        expected = oracle_spearman(
            [extracted[r][k] for r in common], [survey_matrix[r][k] for r in common]
        )
        assert abs(corr.per_value[value] - expected) < 1e-9
    expected_mean = sum(corr.per_value.values()) / 10
    assert abs(corr.mean - expected_mean) < 1e-12


RELEASED = os.environ.get("VALUELENS_RELEASED_DIR")


released_gate = pytest.mark.skipif(
    not RELEASED or not Path(RELEASED or "").exists(),
    reason="released dataset not supplied (set VALUELENS_RELEASED_DIR)",
)


@released_gate
def test_global_stats_released_data():
    """Paper-gated: the released per-community profiles reproduce the
    published global statistics (universalism relevance mean ~0.43,
    hedonism stance mean ~0.45, +-0.005)."""
    from valuelens.aggregate import global_stats, read_profiles

    profiles = read_profiles(Path(RELEASED) / "profiles.jsonl")
    stats = global_stats(profiles).as_dict()
    assert abs(stats["universalism"]["relevance_mean"] - 0.43) <= 0.005
    assert abs(stats["hedonism"]["stance_mean"] - 0.45) <= 0.005


@released_gate
def test_matched_vs_random_released_data():
    """Paper-gated: matched ~0.81 vs random ~0.64 (+-0.02) on the released
    profiles and description embeddings."""
    from valuelens.aggregate import read_profiles
    from valuelens.similarity import read_embeddings

    profiles = read_profiles(Path(RELEASED) / "profiles.jsonl")
    table = read_embeddings(Path(RELEASED) / "embeddings.jsonl")
    rep = matched_vs_random(profiles, embeddings=table, seed=42)
    assert abs(rep.matched_mean - 0.81) <= 0.02
    assert abs(rep.random_mean - 0.64) <= 0.02


@released_gate
def test_survey_correlation_released_data():
    """Paper-gated: per-value rho on the released matrices reproduces
    TR 0.22, BE -0.31, mean -0.03 within +-0.01."""
    from valuelens.geo import read_region_profiles, read_survey_csv

    released = Path(RELEASED)
    profiles = read_region_profiles(released / "country_values.jsonl")
    survey = read_survey_csv(released / "survey_values.csv", canonicalize_values=True)
    corr = correlate_with_survey(profiles, survey)
    assert abs(corr.per_value["tradition"] - 0.22) <= 0.01
    assert abs(corr.per_value["benevolence"] - (-0.31)) <= 0.01
    assert abs(corr.mean - (-0.03)) <= 0.01


# ---------------------------------------------------------------------------
# criterion 8: end-to-end determinism; different seed touches only
# seed-echoing reports and seeded-sampling artifacts
# ---------------------------------------------------------------------------

def _run_pipeline(out: Path, dump: Path, meta: Path, seed: int) -> int:
    from valuelens.cli import main

    steps = [
        ["ingest", "--dump", str(dump), "--meta", str(meta)],
        ["score"],
        ["analyze", "--analysis", "profiles", "rankings", "magnitude",
         "globalstats", "similarity"],
    ]
    for step in steps:
        code = main(step + ["--seed", str(seed), "--out", str(out)])
        if code != 0:
            return code
    return 0


def _tree(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_end_to_end_determinism(tmp_path):
    import shutil

    dump = tmp_path / "dump.jsonl"
    meta = tmp_path / "meta.jsonl"
    write_demo_dump(dump, meta)
    out = tmp_path / "run"

    def clean_run(seed: int) -> dict[str, bytes]:
        if out.exists():
            shutil.rmtree(out)
        assert _run_pipeline(out, dump, meta, seed=seed) == 0
        return _tree(out)

    first = clean_run(11)
    second = clean_run(11)
    assert first == second, "identical config must reproduce byte-identical trees"

    third = clean_run(12)
    assert set(third) == set(first)
    differing = {name for name in first if first[name] != third[name]}
    # run reports echo the seed; the similarity report additionally depends on
    # the seeded random pairs; nothing else may move
    allowed = {
        "ingest_report.json", "score_report.json", "analyze_report.json",
        "similarity_user.json",
    }
    assert differing <= allowed, f"unexpected seed-dependent files: {differing - allowed}"
    assert "similarity_user.json" in differing


# ---------------------------------------------------------------------------
# criterion 9: streaming memory bound, 1 GB vs 100 MB ingest within 2x
# ---------------------------------------------------------------------------

def _write_big_dump(path: Path, target_bytes: int) -> None:
    """Synthetic NDJSON dump of roughly target_bytes, bounded author pool."""
    filler = (
        "the watcher walked along the river bank and counted the boats "
        "while the light faded over the quiet water of the old harbour town"
    )
    written = 0
    rec = 0
    with open(path, "w", encoding="utf-8") as fh:
        buffer = []
        while written < target_bytes:
            rec += 1
            community = f"big{rec % 24:02d}"
            line = (
                '{"id":"b%d","subreddit":"%s","author":"u%d","score":%d,'
                '"created_utc":%d,"body":"%s %d"}\n'
                % (rec, community, rec % 500, 10 + rec % 40, rec, filler, rec)
            )
            buffer.append(line)
            written += len(line)
            if len(buffer) >= 20_000:
                fh.write("".join(buffer))
                buffer.clear()
        fh.write("".join(buffer))


def _ingest_peak_rss_kb(dump: Path, meta: Path, out: Path) -> int:
    proc = subprocess.run(
        [sys.executable, "-m", "valuelens.cli", "ingest",
         "--dump", str(dump), "--meta", str(meta),
         "--seed", "5", "--out", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr[-2000:]
    for line in proc.stderr.splitlines():
        if "peak_rss_kb=" in line:
            return int(line.rsplit("=", 1)[1])
    raise AssertionError("peak_rss_kb line not found in stderr")


@pytest.mark.slow
def test_streaming_memory_bound(tmp_path):
    meta = tmp_path / "meta.jsonl"
    meta.write_text(
        "\n".join(
            json.dumps({"community": f"big{i:02d}", "subscribers": 10_000, "nsfw": False})
            for i in range(24)
        )
        + "\n"
    )
    small = tmp_path / "small.jsonl"
    big = tmp_path / "big.jsonl"
    _write_big_dump(small, 100 * 1024 * 1024)
    _write_big_dump(big, 1024 * 1024 * 1024)

    peak_small = _ingest_peak_rss_kb(small, meta, tmp_path / "out_small")
    peak_big = _ingest_peak_rss_kb(big, meta, tmp_path / "out_big")

    big.unlink()
    small.unlink()

    # a fixed cap well below the input size, and scale independence within 2x
    assert peak_big < 768 * 1024, f"peak RSS {peak_big} kB exceeds fixed cap"
    assert peak_big <= 2 * peak_small, (
        f"1 GB ingest peak {peak_big} kB vs 100 MB peak {peak_small} kB"
    )
