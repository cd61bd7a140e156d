"""Value relevance and stance scoring: contract, lexicon reference scorer,
remote scorer client, and the corpus scoring runner."""

from valuelens.scoring.base import (
    RelevanceScorer,
    StanceScorer,
    ScoredItem,
    score_relevance,
    score_stance,
    score_item,
    scored_to_dict,
    scored_from_dict,
)
from valuelens.scoring.lexicon import LexiconScorer, lexicon_score, load_lexicon
from valuelens.scoring.remote import RemoteScorer
from valuelens.scoring.runner import score_corpus, write_scored, read_scored

__all__ = [
    "RelevanceScorer",
    "StanceScorer",
    "ScoredItem",
    "score_relevance",
    "score_stance",
    "score_item",
    "scored_to_dict",
    "scored_from_dict",
    "LexiconScorer",
    "lexicon_score",
    "load_lexicon",
    "RemoteScorer",
    "score_corpus",
    "write_scored",
    "read_scored",
]
