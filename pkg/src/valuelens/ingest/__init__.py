"""Streaming ingest: parse raw dumps, normalize, filter, sample and report."""

from valuelens.ingest.records import RawRecord, ContentItem, CommunityMeta, DumpFieldMap
from valuelens.ingest.dump import parse_dump
from valuelens.ingest.filters import filter_content, filter_communities
from valuelens.ingest.sampling import downsample, ReservoirSampler
from valuelens.ingest.language import StopwordLanguageDetector, filter_language
from valuelens.ingest.corpus_stats import corpus_stats, CorpusStats
from valuelens.ingest.pipeline import run_ingest, IngestResult

__all__ = [
    "RawRecord",
    "ContentItem",
    "CommunityMeta",
    "DumpFieldMap",
    "parse_dump",
    "filter_content",
    "filter_communities",
    "downsample",
    "ReservoirSampler",
    "StopwordLanguageDetector",
    "filter_language",
    "corpus_stats",
    "CorpusStats",
    "run_ingest",
    "IngestResult",
]
