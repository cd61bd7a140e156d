"""Command-line pipeline driver.

Subcommands: ingest, score, analyze, eval, geo.  Every command is a pure
function of (config, inputs): identical config and inputs produce
byte-identical output trees.  Exit codes: 0 ok, 2 usage/config error,
3 input data error, 4 remote scorer failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import resource
import sys
from typing import Any, Optional

from valuelens import aggregate, evalharness, geo, report, similarity
from valuelens.config import RunConfig, load_config
from valuelens.errors import ConfigError, DataError, ScorerTransportError
from valuelens.ingest.pipeline import (
    run_ingest,
    write_corpus,
    read_corpus,
    write_user_sets,
    read_user_sets,
)
from valuelens.ingest.sampling import substream_seed
from valuelens.scoring.base import scored_to_dict
from valuelens.scoring.lexicon import LexiconScorer
from valuelens.scoring.remote import RemoteScorer
from valuelens.scoring.runner import ScoreRunStats, read_scored, score_corpus
from valuelens.values import SCHWARTZ_VALUES

log = logging.getLogger("valuelens")

ANALYSES = ("profiles", "rankings", "magnitude", "globalstats", "similarity", "geo")


def build_scorers(config: RunConfig):
    """One scorer object serving both the relevance and stance protocols."""
    if config.scorer == "lexicon":
        scorer = LexiconScorer(config.lexicon_path)
    else:
        url = config.scorer[len("remote:"):]
        scorer = RemoteScorer(
            url, batch_size=config.remote_batch_size, char_cap=config.char_cap
        )
    return scorer, scorer


def cmd_ingest(config: RunConfig, args: argparse.Namespace) -> None:
    if not config.dump_paths:
        raise ConfigError("no dump paths given (config dump_paths or --dump)")
    if not config.meta_path:
        raise ConfigError("no community metadata given (config meta_path or --meta)")
    result = run_ingest(
        sorted(config.dump_paths),
        config.meta_path,
        seed=config.seed,
        cap=config.downsample_cap,
        language=config.language,
    )
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    write_corpus(result.corpus, config.resolved_corpus_dir())
    write_user_sets(result.user_sets, config.resolved_user_sets_path())
    with open(out / "descriptions.jsonl", "w", encoding="utf-8") as fh:
        for name in sorted(result.descriptions):
            fh.write(
                json.dumps(
                    {"community": name, "public_description": result.descriptions[name]},
                    ensure_ascii=False,
                )
                + "\n"
            )
    cf = result.community_filter
    report.write_json(
        out / "ingest_report.json",
        report.run_report(
            config.as_dict(),
            counters=result.counters.as_dict(),
            communities={
                "kept": sorted(cf.kept),
                "excluded_nsfw": sorted(cf.excluded_nsfw),
                "excluded_small": sorted(cf.excluded_small),
                "excluded_few_items": sorted(cf.excluded_few_items),
                "unresolved": sorted(cf.unresolved),
            },
            corpus_stats=result.stats.as_dict() if result.stats else None,
        ),
    )
    log.info(
        "ingest complete: %d communities, %d content items",
        len(result.corpus),
        result.counters.final_kept,
    )
    log.info("peak_rss_kb=%d", resource.getrusage(resource.RUSAGE_SELF).ru_maxrss)


def cmd_score(config: RunConfig, args: argparse.Namespace) -> None:
    corpus = read_corpus(config.resolved_corpus_dir())
    if not corpus:
        raise DataError(f"no corpus found under {config.resolved_corpus_dir()}")
    relevance_scorer, stance_scorer = build_scorers(config)
    scored_path = config.resolved_scored_path()
    existing: dict[str, dict] = {}
    if scored_path.exists():
        for item in read_scored(scored_path, gate=config.gate):
            existing[item.item_id] = scored_to_dict(item)
        log.info("resuming: %d items already scored", len(existing))

    stats = ScoreRunStats()
    fresh = score_corpus(
        corpus,
        relevance_scorer,
        stance_scorer,
        gate=config.gate,
        threads=config.threads,
        skip_ids=set(existing),
        stats=stats,
    )
    tmp_path = scored_path.with_suffix(".jsonl.tmp")
    n_written = 0
    fresh_iter = iter(fresh)
    config.out.mkdir(parents=True, exist_ok=True)
    scored_path.parent.mkdir(parents=True, exist_ok=True)
    with open(tmp_path, "w", encoding="utf-8") as fh:
        # rewrite in canonical corpus order so a resumed run is byte-identical
        # to an uninterrupted one
        pending = {}
        for community in sorted(corpus):
            for item in corpus[community]:
                if item.id in existing:
                    record = existing[item.id]
                else:
                    while item.id not in pending:
                        nxt = next(fresh_iter, None)
                        if nxt is None:
                            break
                        pending[nxt.item_id] = scored_to_dict(nxt)
                    record = pending.pop(item.id, None)
                    if record is None:
                        continue  # item failed scoring
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
                n_written += 1
                if n_written % 5000 == 0:
                    log.info("scored %d items so far", n_written)
    tmp_path.replace(scored_path)
    report.write_json(
        config.out / "score_report.json",
        report.run_report(
            config.as_dict(),
            scored=stats.scored,
            reused=len(existing),
            failed=sorted(stats.failed),
            written=n_written,
        ),
    )
    log.info("scored %d items (%d reused, %d failed)", stats.scored, len(existing), len(stats.failed))


def _load_profiles(config: RunConfig) -> list[aggregate.CommunityProfile]:
    path = config.resolved_profiles_path()
    if not path.exists():
        raise DataError(
            f"profiles not found at {path}; run `analyze --analysis profiles` first"
        )
    return aggregate.read_profiles(path)


def _analyze_profiles(config: RunConfig, artifacts: list[str]) -> None:
    scored = read_scored(config.resolved_scored_path(), gate=config.gate)
    if not scored:
        raise DataError(f"no scored items at {config.resolved_scored_path()}")
    profiles = aggregate.aggregate_communities(scored, threads=config.threads)
    aggregate.write_profiles(profiles, config.resolved_profiles_path())
    aggregate.write_profiles_csv(profiles, config.out / "profiles.csv")
    artifacts += ["profiles.jsonl", "profiles.csv"]
    if config.radar_communities:
        by_name = {p.community: p for p in profiles}
        missing = [c for c in config.radar_communities if c not in by_name]
        if missing:
            log.warning("radar communities not in profiles: %s", ", ".join(missing))
        rows = []
        for name in sorted(set(config.radar_communities) & set(by_name)):
            p = by_name[name]
            for value in SCHWARTZ_VALUES:
                rows.append([name, value, repr(p.relevance[value]),
                             None if p.stance[value] is None else repr(p.stance[value])])
        report.write_csv(
            config.out / "radar.csv", ["subreddit", "value", "relevance", "stance"], rows
        )
        artifacts.append("radar.csv")


def _analyze_rankings(config: RunConfig, artifacts: list[str]) -> None:
    profiles = _load_profiles(config)
    by_name = {p.community: p for p in profiles}
    payload: dict[str, Any] = {}
    text_parts: list[str] = []
    for value in SCHWARTZ_VALUES:
        payload[value] = {}
        for direction in aggregate.RANK_DIRECTIONS:
            ranking = aggregate.rank_by_value(profiles, value, direction, config.top_n)
            rows = aggregate.ranking_rows(
                ranking, by_name, config.stance_display_threshold
            )
            payload[value][direction] = rows
            text_parts.append(f"== {value} ({direction}) ==")
            text_parts.append(
                report.aligned_table(
                    ["rank", "community", "score", "stance"],
                    [[r["rank"], r["community"], r["score"], r["stance_label"]] for r in rows],
                )
            )
    report.write_json(config.out / "rankings.json", payload)
    report.write_text(config.out / "rankings.txt", "\n".join(text_parts))
    artifacts += ["rankings.json", "rankings.txt"]


def _analyze_magnitude(config: RunConfig, artifacts: list[str]) -> None:
    profiles = _load_profiles(config)
    ordered = sorted(profiles, key=lambda p: (-p.magnitude, p.community))
    report.write_csv(
        config.out / "magnitude.csv",
        ["community", "magnitude"],
        [[p.community, repr(p.magnitude)] for p in ordered],
    )
    k = min(config.top_n, len(ordered))
    text = "== highest value magnitude ==\n" + report.aligned_table(
        ["community", "magnitude"], [[p.community, p.magnitude] for p in ordered[:k]]
    )
    text += "\n== lowest value magnitude ==\n" + report.aligned_table(
        ["community", "magnitude"], [[p.community, p.magnitude] for p in ordered[-k:]]
    )
    report.write_text(config.out / "magnitude.txt", text)
    artifacts += ["magnitude.csv", "magnitude.txt"]


def _analyze_globalstats(config: RunConfig, artifacts: list[str]) -> None:
    profiles = _load_profiles(config)
    stats = aggregate.global_stats(profiles)
    report.write_json(config.out / "global_stats.json", stats.as_dict())
    rows = []
    for value, cells in stats.as_dict().items():
        rows.append(
            [value, cells["relevance_mean"], cells["relevance_std"],
             cells["stance_mean"], cells["stance_std"]]
        )
    report.write_text(
        config.out / "global_stats.txt",
        report.aligned_table(
            ["value", "relevance_mean", "relevance_std", "stance_mean", "stance_std"],
            rows,
        ),
    )
    artifacts += ["global_stats.json", "global_stats.txt"]


def _semantic_table(config: RunConfig) -> Optional[similarity.EmbeddingTable]:
    """Embeddings from the configured file, or fetched once from a remote
    scorer's /v1/embed over the ingest descriptions (then cached to a file)."""
    if config.embeddings_path:
        return similarity.read_embeddings(config.embeddings_path)
    descriptions_path = config.out / "descriptions.jsonl"
    if not config.scorer.startswith("remote:") or not descriptions_path.exists():
        return None
    descriptions = {}
    with open(descriptions_path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                descriptions[obj["community"]] = obj["public_description"]
    if not descriptions:
        return None
    remote, _ = build_scorers(config)
    vectors = similarity.fetch_embeddings(remote, descriptions)
    cache_path = config.out / "embeddings.jsonl"
    similarity.write_embeddings(vectors, cache_path)
    log.info("fetched %d embeddings into %s", len(vectors), cache_path)
    return similarity.EmbeddingTable(vectors)


def _analyze_similarity(config: RunConfig, artifacts: list[str]) -> None:
    profiles = _load_profiles(config)
    ran_any = False
    table = _semantic_table(config)
    if table is not None:
        rep = similarity.matched_vs_random(
            profiles,
            embeddings=table,
            seed=substream_seed(config.seed, "similarity", "semantic"),
            n_random_pairs=config.n_random_pairs,
        )
        report.write_json(config.out / "similarity_semantic.json", rep.as_dict())
        artifacts.append("similarity_semantic.json")
        ran_any = True
    user_sets_path = config.resolved_user_sets_path()
    if user_sets_path.exists():
        user_sets = read_user_sets(user_sets_path)
        rep = similarity.matched_vs_random(
            profiles,
            user_sets=user_sets,
            seed=substream_seed(config.seed, "similarity", "user"),
            n_random_pairs=config.n_random_pairs,
        )
        report.write_json(config.out / "similarity_user.json", rep.as_dict())
        artifacts.append("similarity_user.json")
        ran_any = True
    if config.nn_targets:
        by_name = {p.community: p for p in profiles}
        payload = {}
        text_parts = []
        for target in sorted(config.nn_targets):
            if target not in by_name:
                log.warning("nearest-neighbour target not in profiles: %s", target)
                continue
            top = similarity.nearest_neighbor(
                target, profiles=by_name, measure="val", k=config.nn_top_k
            )
            payload[target] = [{"community": c, "sim_val": s} for c, s in top]
            text_parts.append(f"== most value-similar to {target} ==")
            text_parts.append(report.aligned_table(["community", "sim_val"], top))
        report.write_json(config.out / "nearest_value_neighbors.json", payload)
        report.write_text(
            config.out / "nearest_value_neighbors.txt", "\n".join(text_parts)
        )
        artifacts += ["nearest_value_neighbors.json", "nearest_value_neighbors.txt"]
        ran_any = True
    if not ran_any:
        raise DataError(
            "similarity analysis needs embeddings_path, user sets or nn_targets"
        )


def cmd_analyze(config: RunConfig, args: argparse.Namespace) -> None:
    requested = list(dict.fromkeys(args.analysis))
    unknown = [a for a in requested if a not in ANALYSES]
    if unknown:
        raise ConfigError(f"unknown analyses: {unknown}; choose from {ANALYSES}")
    config.out.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []
    # profiles first so later analyses in the same invocation can read them
    ordered = [a for a in ANALYSES if a in requested]
    for analysis in ordered:
        if analysis == "profiles":
            _analyze_profiles(config, artifacts)
        elif analysis == "rankings":
            _analyze_rankings(config, artifacts)
        elif analysis == "magnitude":
            _analyze_magnitude(config, artifacts)
        elif analysis == "globalstats":
            _analyze_globalstats(config, artifacts)
        elif analysis == "similarity":
            _analyze_similarity(config, artifacts)
        elif analysis == "geo":
            artifacts += _run_geo(config)
    report.write_json(
        config.out / "analyze_report.json",
        report.run_report(config.as_dict(), analyses=ordered, artifacts=artifacts),
    )
    log.info("analyze complete: %s", ", ".join(ordered))


def cmd_eval(config: RunConfig, args: argparse.Namespace) -> None:
    rel_path = args.relevance_annotations or config.eval.relevance_annotations
    st_path = args.stance_annotations or config.eval.stance_annotations
    if not rel_path and not st_path:
        raise ConfigError("eval needs relevance and/or stance annotation files")
    relevance_scorer, stance_scorer = build_scorers(config)
    config.out.mkdir(parents=True, exist_ok=True)
    sections: dict[str, Any] = {}
    text_parts: list[str] = []
    if rel_path:
        triplets = evalharness.read_relevance_annotations(rel_path)
        rel_report = evalharness.evaluate_relevance(triplets, relevance_scorer)
        sections["relevance"] = rel_report.as_dict()
        rows = [
            [v, m["annotator_spearman"], m["model_spearman"], m["ndcg_at_1"]]
            for v, m in rel_report.per_value.items()
        ]
        rows.append(
            ["(all)", rel_report.annotator_spearman, rel_report.model_spearman,
             rel_report.ndcg]
        )
        text_parts.append("== relevance model evaluation ==")
        text_parts.append(
            report.aligned_table(
                ["value", "annotator_rho", "model_rho", "ndcg_at_1"], rows
            )
        )
    if st_path:
        rows_in = evalharness.read_stance_annotations(st_path)
        st_report = evalharness.evaluate_stance(rows_in, stance_scorer)
        sections["stance"] = st_report.as_dict()
        rows = [[v, k] for v, k in st_report.per_value_kappa.items()]
        rows.append(["(all)", st_report.overall_kappa])
        text_parts.append("== stance annotator agreement (Cohen's kappa) ==")
        text_parts.append(report.aligned_table(["value", "kappa"], rows))
        text_parts.append(
            report.aligned_table(
                ["metric", "score"],
                [["f1_macro", st_report.f1_macro], ["f1_micro", st_report.f1_micro],
                 ["n_scored", st_report.n_scored]],
            )
        )
    report.write_json(
        config.out / "eval_report.json", report.run_report(config.as_dict(), **sections)
    )
    report.write_text(config.out / "eval_metrics.txt", "\n".join(text_parts))
    log.info("eval complete")


def _read_two_column_map(path: str, key: str, value: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if key not in (reader.fieldnames or ()) or value not in (reader.fieldnames or ()):
                raise DataError(f"{path}: need columns {key!r} and {value!r}")
            for row in reader:
                out[row[key]] = row[value]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return out


def _run_geo(config: RunConfig) -> list[str]:
    gc = config.geo
    if not gc.regions:
        raise ConfigError("geo needs a region spec file (geo.regions)")
    specs = geo.read_region_specs(gc.regions)
    corpus = read_corpus(config.resolved_corpus_dir())
    relevance_scorer, stance_scorer = build_scorers(config)
    translator = (
        geo.FileCacheTranslator(gc.translation_cache) if gc.translation_cache else None
    )
    profiles: list[geo.RegionProfile] = []
    skips: list[geo.RegionSkip] = []
    for spec in sorted(specs, key=lambda s: s.region):
        outcome = geo.build_region_profile(
            spec,
            corpus,
            relevance_scorer,
            stance_scorer,
            seed=config.seed,
            posts_cap=gc.posts_cap,
            comments_cap=gc.comments_cap,
            min_total=gc.min_total,
            gate=config.gate,
            translator=translator,
        )
        if isinstance(outcome, geo.RegionSkip):
            skips.append(outcome)
            log.info("region %s skipped: %s", outcome.region, outcome.reason)
        else:
            profiles.append(outcome)
    config.out.mkdir(parents=True, exist_ok=True)
    geo.write_region_profiles(profiles, config.out / "region_profiles.jsonl")
    artifacts = ["region_profiles.jsonl"]
    sections: dict[str, Any] = {
        "regions_built": [p.region for p in profiles],
        "regions_skipped": [{"region": s.region, "reason": s.reason} for s in skips],
    }
    if gc.survey_values:
        survey = geo.read_survey_csv(gc.survey_values, canonicalize_values=True)
        corr = geo.correlate_with_survey(profiles, survey, aliases=gc.region_aliases)
        report.write_json(config.out / "survey_correlation.json", corr.as_dict())
        artifacts.append("survey_correlation.json")
        sections["survey_correlation"] = corr.as_dict()
    if gc.state_metrics and gc.election:
        metrics = geo.read_survey_csv(gc.state_metrics)
        election = _read_two_column_map(gc.election, "region", "party")
        state_report = geo.state_tradition_report(
            profiles,
            metrics.column("conservatism"),
            metrics.column("religiosity"),
            election,
        )
        report.write_json(config.out / "state_report.json", state_report.as_dict())
        report.write_csv(
            config.out / "state_report.csv",
            ["region", "tradition_value", "party"],
            [[r["state"], repr(r["tradition_value"]), r["party"]] for r in state_report.rows],
        )
        artifacts += ["state_report.json", "state_report.csv"]
        sections["state_report"] = {
            "conservatism_spearman": state_report.conservatism_rho,
            "religiosity_spearman": state_report.religiosity_rho,
        }
    report.write_json(
        config.out / "geo_report.json",
        report.run_report(config.as_dict(), **sections),
    )
    artifacts.append("geo_report.json")
    return artifacts


def cmd_geo(config: RunConfig, args: argparse.Namespace) -> None:
    _run_geo(config)
    log.info("geo analysis complete")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="valuelens",
        description="Extract and analyse Schwartz value signals in community corpora",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="root seed (mandatory here or in config)")
        p.add_argument("--threads", type=int, help="worker thread limit")
        p.add_argument("--scorer", help="lexicon | remote:<URL>")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("ingest", help="parse, filter and sample raw dumps")
    common(p)
    p.add_argument("--dump", action="append", help="dump shard path (repeatable)")
    p.add_argument("--meta", help="community metadata JSONL")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("score", help="score a normalized corpus")
    common(p)
    p.add_argument("--corpus", help="corpus directory (default <out>/corpus)")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("analyze", help="run analyses over scored data")
    common(p)
    p.add_argument(
        "--analysis", nargs="+", required=True, metavar="NAME",
        help=f"one or more of: {', '.join(ANALYSES)}",
    )
    p.add_argument("--embeddings", help="community embeddings JSONL")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("eval", help="score annotation files and report metrics")
    common(p)
    p.add_argument("--relevance-annotations", help="relevance ranking CSV")
    p.add_argument("--stance-annotations", help="stance label CSV")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("geo", help="regional profiles and survey correlation")
    common(p)
    p.set_defaults(handler=cmd_geo)
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    over: dict[str, Any] = {
        "seed": getattr(args, "seed", None),
        "threads": getattr(args, "threads", None),
        "scorer": getattr(args, "scorer", None),
        "out_dir": getattr(args, "out", None),
        "corpus_dir": getattr(args, "corpus", None),
        "embeddings_path": getattr(args, "embeddings", None),
        "meta_path": getattr(args, "meta", None),
    }
    dumps = getattr(args, "dump", None)
    if dumps:
        over["dump_paths"] = list(dumps)
    return over


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(getattr(args, "config", None), _overrides(args))
        args.handler(config, args)
        return 0
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 2
    except DataError as exc:
        log.error("data error: %s", exc)
        return 3
    except ScorerTransportError as exc:
        log.error("remote scorer failure: %s", exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
