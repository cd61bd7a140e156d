"""Community similarity: value-vector cosine, semantic-embedding cosine,
user-overlap coefficient, nearest neighbours, and the matched-vs-random
expectation test.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from valuelens.aggregate import CommunityProfile
from valuelens.errors import DataError
from valuelens.stats import two_sample_z

log = logging.getLogger(__name__)

DEFAULT_RANDOM_PAIRS = 100_000


def profile_concat(profile: CommunityProfile) -> tuple[float, ...]:
    """20-dim concatenation [relevance || stance] with Null stance imputed as
    0, the neutral midpoint."""
    stance = tuple(0.0 if s is None else s for s in profile.stance.entries)
    return profile.relevance.entries + stance


def _cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = math.fsum(x * y for x, y in zip(a, b))
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def sim_val(a: CommunityProfile, b: CommunityProfile) -> float:
    """Cosine of the 20-dim relevance||stance concatenations; 0 when either
    concatenation is the zero vector."""
    return _cosine(profile_concat(a), profile_concat(b))


def sim_sem(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine between two embedding vectors of equal dimension."""
    if len(a) != len(b):
        raise DataError(f"embedding dimension mismatch: {len(a)} != {len(b)}")
    return _cosine(a, b)


def sim_usr(a: set[str], b: set[str]) -> float:
    """Overlap coefficient |A n B| / min(|A|, |B|)."""
    if not a or not b:
        raise DataError("user sets must be non-empty")
    return len(a & b) / min(len(a), len(b))


@dataclass(frozen=True)
class SimilarityReport:
    kind: str  # "semantic" | "user"
    matched_mean: float
    random_mean: float
    z_score: float
    n: int
    n_random: int
    seed: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "matched_mean": self.matched_mean,
            "random_mean": self.random_mean,
            "z_score": self.z_score,
            "n": self.n,
            "n_random": self.n_random,
            "seed": self.seed,
        }


class EmbeddingTable:
    """Community embeddings with a shared dimension and non-zero norms."""

    def __init__(self, vectors: Mapping[str, Sequence[float]]):
        if not vectors:
            raise DataError("no embeddings supplied")
        dims = {len(v) for v in vectors.values()}
        if len(dims) != 1:
            raise DataError(f"embeddings have mixed dimensions: {sorted(dims)}")
        self.dim = dims.pop()
        self.names = sorted(vectors)
        self._matrix = np.array([vectors[n] for n in self.names], dtype=np.float64)
        norms = np.linalg.norm(self._matrix, axis=1)
        if np.any(norms == 0):
            bad = [self.names[i] for i in np.nonzero(norms == 0)[0]]
            raise DataError(f"zero-norm embeddings for: {bad[:5]}")
        self._unit = self._matrix / norms[:, None]
        self._index = {n: i for i, n in enumerate(self.names)}

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def vector(self, name: str) -> np.ndarray:
        return self._matrix[self._index[name]]

    def cosine_to_all(self, name: str) -> dict[str, float]:
        row = self._unit[self._index[name]]
        sims = self._unit @ row
        return {n: float(s) for n, s in zip(self.names, sims)}


def read_embeddings(path: Union[str, Path]) -> EmbeddingTable:
    """Load embeddings JSONL: {"community", "dim", "vector"} per line."""
    vectors: dict[str, list[float]] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    vec = [float(x) for x in obj["vector"]]
                    if int(obj["dim"]) != len(vec):
                        raise ValueError(f"declared dim {obj['dim']} != {len(vec)}")
                    vectors[str(obj["community"])] = vec
                except (ValueError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: bad embedding: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read embeddings {path}: {exc}") from exc
    return EmbeddingTable(vectors)


def write_embeddings(
    vectors: Mapping[str, Sequence[float]], path: Union[str, Path]
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name in sorted(vectors):
            vec = [float(x) for x in vectors[name]]
            fh.write(
                json.dumps({"community": name, "dim": len(vec), "vector": vec}) + "\n"
            )


def fetch_embeddings(
    remote, descriptions: Mapping[str, str], batch_size: int = 64
) -> dict[str, list[float]]:
    """Fetch description embeddings from a scorer service's /v1/embed.

    `remote` is any object with embed(texts) -> (dim, vectors); communities
    with empty descriptions are skipped.
    """
    names = sorted(n for n, d in descriptions.items() if d)
    if not names:
        raise DataError("no non-empty descriptions to embed")
    out: dict[str, list[float]] = {}
    for start in range(0, len(names), batch_size):
        chunk = names[start : start + batch_size]
        _, vectors = remote.embed([descriptions[n] for n in chunk])
        out.update(zip(chunk, vectors))
    return out


def nearest_neighbor(
    target: str,
    profiles: Optional[Mapping[str, CommunityProfile]] = None,
    embeddings: Optional[EmbeddingTable] = None,
    user_sets: Optional[Mapping[str, set[str]]] = None,
    measure: str = "val",
    k: int = 1,
) -> list[tuple[str, float]]:
    """Top-k most similar communities to `target` under one measure; the
    target itself is excluded and ties break by name.  Candidates missing
    the measure's inputs are skipped."""
    if k < 1:
        raise DataError("k must be >= 1")
    scores: list[tuple[str, float]] = []
    if measure == "val":
        if not profiles or target not in profiles:
            raise DataError(f"no profile for target {target!r}")
        t = profiles[target]
        scores = [
            (name, sim_val(t, p)) for name, p in profiles.items() if name != target
        ]
    elif measure == "sem":
        if embeddings is None or target not in embeddings:
            raise DataError(f"no embedding for target {target!r}")
        sims = embeddings.cosine_to_all(target)
        scores = [(name, s) for name, s in sims.items() if name != target]
    elif measure == "usr":
        if not user_sets or target not in user_sets or not user_sets[target]:
            raise DataError(f"no user set for target {target!r}")
        t_users = user_sets[target]
        scores = [
            (name, sim_usr(t_users, users))
            for name, users in user_sets.items()
            if name != target and users
        ]
    else:
        raise DataError(f"unknown similarity measure: {measure}")
    if not scores:
        raise DataError(f"no candidates with {measure} data besides {target!r}")
    scores.sort(key=lambda e: (-e[1], e[0]))
    return scores[:k]


def _sample_stats(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, var


def matched_vs_random(
    profiles: Sequence[CommunityProfile],
    embeddings: Optional[EmbeddingTable] = None,
    user_sets: Optional[Mapping[str, set[str]]] = None,
    seed: int = 0,
    n_random_pairs: int = DEFAULT_RANDOM_PAIRS,
) -> SimilarityReport:
    """Compare mean value similarity of nearest-neighbour pairs (by semantic
    or user similarity, whichever table is given) against seeded random
    pairs, summarized by a Welch z statistic."""
    if (embeddings is None) == (user_sets is None):
        raise DataError("supply exactly one of embeddings or user_sets")
    if n_random_pairs < 2:
        raise DataError("n_random_pairs must be >= 2")
    kind = "semantic" if embeddings is not None else "user"
    by_name = {p.community: p for p in profiles}
    if len(by_name) < 2:
        raise DataError("need at least 2 communities")

    if embeddings is not None:
        pool = [n for n in sorted(by_name) if n in embeddings]
    else:
        pool = [n for n in sorted(by_name) if user_sets.get(n)]
    if len(pool) < 2:
        raise DataError(f"need at least 2 communities with {kind} data, have {len(pool)}")

    matched: list[float] = []
    pool_set = set(pool)
    for name in pool:
        if embeddings is not None:
            sims = embeddings.cosine_to_all(name)
            candidates = [(c, s) for c, s in sims.items() if c != name and c in pool_set]
        else:
            t_users = user_sets[name]
            candidates = [
                (c, sim_usr(t_users, user_sets[c]))
                for c in pool
                if c != name and user_sets.get(c)
            ]
        best = min(candidates, key=lambda e: (-e[1], e[0]))
        matched.append(sim_val(by_name[name], by_name[best[0]]))

    names = sorted(by_name)
    concat = np.array([profile_concat(by_name[n]) for n in names], dtype=np.float64)
    norms = np.linalg.norm(concat, axis=1)
    rng = random.Random(seed)
    rand_vals: list[float] = []
    n_names = len(names)
    for _ in range(n_random_pairs):
        i = rng.randrange(n_names)
        j = rng.randrange(n_names - 1)
        if j >= i:
            j += 1
        denom = norms[i] * norms[j]
        if denom == 0.0:
            rand_vals.append(0.0)
        else:
            rand_vals.append(float(np.dot(concat[i], concat[j]) / denom))

    matched_mean, matched_var = _sample_stats(matched)
    random_mean, random_var = _sample_stats(rand_vals)
    z = two_sample_z(
        matched_mean, matched_var, len(matched),
        random_mean, random_var, len(rand_vals),
    )
    return SimilarityReport(
        kind=kind,
        matched_mean=matched_mean,
        random_mean=random_mean,
        z_score=z,
        n=len(matched),
        n_random=len(rand_vals),
        seed=seed,
    )
