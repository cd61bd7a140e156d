"""Similarity measures, nearest neighbours, matched-vs-random test."""

import math
import random

import pytest

from valuelens.aggregate import CommunityProfile, magnitude
from valuelens.errors import DataError
from valuelens.similarity import (
    EmbeddingTable,
    matched_vs_random,
    nearest_neighbor,
    profile_concat,
    read_embeddings,
    sim_sem,
    sim_usr,
    sim_val,
    write_embeddings,
)
from valuelens.values import StanceVector, ValueVector
from synth import make_cluster_communities, random_profile


def make_profile(name, relevance, stance=None):
    vv = ValueVector.from_sequence(relevance)
    st = StanceVector.from_sequence(stance or [None] * 10)
    return CommunityProfile(
        community=name, relevance=vv, stance=st, n_items=10,
        n_stance=tuple(0 if s is None else 5 for s in st.entries),
        magnitude=magnitude(vv),
    )


# --- sim_val ---

def test_sim_val_identical_is_one():
    rng = random.Random(1)
    p = random_profile(rng, "p")
    assert sim_val(p, p) == pytest.approx(1.0, abs=1e-12)


def test_sim_val_antipodal_is_minus_one():
    rel = [0.0, 0.2, 0.8, 0.5, 0.1, 0.9, 0.3, 0.6, 0.4, 0.7]
    st = [None, 0.5, -0.5, None, None, 0.9, None, -0.9, None, 0.1]
    a = make_profile("a", rel, st)
    # cosine is over the raw concatenation, so the antipode needs negated
    # relevance entries, which live outside [0,1]; emulate via concat
    ca = profile_concat(a)
    cb = tuple(-x for x in ca)
    assert sim_sem(ca, cb) == pytest.approx(-1.0, abs=1e-12)


def test_sim_val_matches_hand_cosine():
    rng = random.Random(2)
    for _ in range(25):
        a = random_profile(rng, "a")
        b = random_profile(rng, "b")
        ca, cb = profile_concat(a), profile_concat(b)
        dot = sum(x * y for x, y in zip(ca, cb))
        na = math.sqrt(sum(x * x for x in ca))
        nb = math.sqrt(sum(y * y for y in cb))
        assert sim_val(a, b) == pytest.approx(dot / (na * nb), abs=1e-12)


def test_sim_val_zero_vector_guard():
    zero = make_profile("z", [0.0] * 10)
    other = make_profile("o", [0.5] * 10)
    assert sim_val(zero, other) == 0.0


def test_sim_val_null_stance_imputed_as_zero():
    a = make_profile("a", [0.6] * 10, [0.5] * 10)
    b_null = make_profile("b", [0.6] * 10, [None] * 10)
    concat = profile_concat(b_null)
    assert concat[10:] == (0.0,) * 10
    assert sim_val(a, b_null) < 1.0


def test_sim_val_symmetry():
    rng = random.Random(3)
    for _ in range(20):
        a, b = random_profile(rng, "a"), random_profile(rng, "b")
        assert sim_val(a, b) == pytest.approx(sim_val(b, a), abs=1e-15)


# --- sim_sem ---

def test_sim_sem_trivials():
    assert sim_sem([1.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0)
    assert sim_sem([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)
    with pytest.raises(DataError):
        sim_sem([1.0, 0.0], [1.0, 0.0, 0.0])


def test_sim_sem_scale_invariance():
    rng = random.Random(4)
    a = [rng.gauss(0, 1) for _ in range(16)]
    b = [rng.gauss(0, 1) for _ in range(16)]
    base = sim_sem(a, b)
    assert sim_sem([7.3 * x for x in a], b) == pytest.approx(base, abs=1e-12)


def test_sim_sem_matches_oracle():
    rng = random.Random(5)
    for _ in range(25):
        a = [rng.gauss(0, 1) for _ in range(8)]
        b = [rng.gauss(0, 1) for _ in range(8)]
        dot = sum(x * y for x, y in zip(a, b))
        na = math.sqrt(sum(x * x for x in a))
        nb = math.sqrt(sum(y * y for y in b))
        assert sim_sem(a, b) == pytest.approx(dot / (na * nb), abs=1e-12)


# --- sim_usr ---

def test_sim_usr_trivials_and_formula():
    assert sim_usr({"a", "b"}, {"a", "b"}) == 1.0
    assert sim_usr({"a"}, {"b"}) == 0.0
    assert sim_usr({"1", "2", "3"}, {"2", "3", "4", "5"}) == pytest.approx(2 / 3)
    with pytest.raises(DataError):
        sim_usr(set(), {"a"})


def test_sim_usr_subset_is_one():
    rng = random.Random(6)
    for _ in range(20):
        b = {f"u{i}" for i in range(rng.randrange(2, 30))}
        a = set(rng.sample(sorted(b), rng.randrange(1, len(b))))
        assert sim_usr(a, b) == 1.0


# --- nearest neighbour ---

def test_nn_three_pool_hand_verified():
    a = make_profile("a", [0.9] + [0.1] * 9)
    b = make_profile("b", [0.85] + [0.12] * 9)
    c = make_profile("c", [0.1] * 9 + [0.9])
    profiles = {p.community: p for p in (a, b, c)}
    assert sim_val(a, b) > sim_val(a, c)
    (top,) = nearest_neighbor("a", profiles=profiles, measure="val")
    assert top[0] == "b"


def test_nn_duplicate_wins_with_sim_one():
    rng = random.Random(7)
    target = random_profile(rng, "t")
    dup = CommunityProfile(
        community="t-dup", relevance=target.relevance, stance=target.stance,
        n_items=target.n_items, n_stance=target.n_stance, magnitude=target.magnitude,
    )
    pool = {p.community: p for p in [target, dup, random_profile(rng, "x")]}
    (top,) = nearest_neighbor("t", profiles=pool, measure="val")
    assert top[0] == "t-dup"
    assert top[1] == pytest.approx(1.0, abs=1e-12)


def test_nn_topk_matches_bruteforce():
    rng = random.Random(8)
    profiles = {f"n{i:02d}": random_profile(rng, f"n{i:02d}") for i in range(50)}
    target = "n00"
    got = nearest_neighbor(target, profiles=profiles, measure="val", k=10)
    brute = sorted(
        ((n, sim_val(profiles[target], p)) for n, p in profiles.items() if n != target),
        key=lambda e: (-e[1], e[0]),
    )[:10]
    assert [g[0] for g in got] == [b[0] for b in brute]
    for g, b in zip(got, brute):
        assert g[1] == pytest.approx(b[1], abs=1e-12)


def test_nn_semantic_and_user_measures():
    emb = EmbeddingTable({"a": [1.0, 0.0], "b": [0.9, 0.1], "c": [0.0, 1.0]})
    (top,) = nearest_neighbor("a", embeddings=emb, measure="sem")
    assert top[0] == "b"
    users = {"a": {"1", "2", "3"}, "b": {"2", "3"}, "c": {"9"}}
    (top,) = nearest_neighbor("a", user_sets=users, measure="usr")
    assert top[0] == "b"


def test_nn_skips_candidates_missing_data():
    users = {"a": {"1", "2"}, "b": set(), "c": {"2"}}
    (top,) = nearest_neighbor("a", user_sets=users, measure="usr")
    assert top[0] == "c"


# --- embeddings table / file ---

def test_embeddings_roundtrip(tmp_path):
    vectors = {"x": [0.1, 0.2, 0.3], "y": [0.3, 0.2, 0.1]}
    path = tmp_path / "emb.jsonl"
    write_embeddings(vectors, path)
    table = read_embeddings(path)
    assert table.dim == 3
    assert list(table.vector("x")) == vectors["x"]


def test_embeddings_reject_mixed_dims():
    with pytest.raises(DataError):
        EmbeddingTable({"a": [1.0], "b": [1.0, 2.0]})


def test_embeddings_reject_zero_norm():
    with pytest.raises(DataError):
        EmbeddingTable({"a": [0.0, 0.0]})


# --- matched vs random ---

def test_matched_vs_random_degenerate_identical_communities():
    rng = random.Random(9)
    base = random_profile(rng, "base")
    profiles = []
    embeddings = {}
    for i in range(10):
        name = f"same{i}"
        profiles.append(CommunityProfile(
            community=name, relevance=base.relevance, stance=base.stance,
            n_items=5, n_stance=base.n_stance, magnitude=base.magnitude,
        ))
        embeddings[name] = [1.0, 0.0]
    report = matched_vs_random(
        profiles, embeddings=EmbeddingTable(embeddings), seed=1, n_random_pairs=100
    )
    assert report.matched_mean == pytest.approx(1.0, abs=1e-12)
    assert report.random_mean == pytest.approx(1.0, abs=1e-12)
    assert report.z_score == 0.0  # 0/0 guarded


def test_matched_vs_random_cluster_separation_small():
    profiles, embeddings, user_sets, _ = make_cluster_communities(
        seed=5, n_communities=60
    )
    rep_sem = matched_vs_random(
        profiles, embeddings=EmbeddingTable(embeddings), seed=11, n_random_pairs=4000
    )
    assert rep_sem.kind == "semantic"
    assert rep_sem.matched_mean - rep_sem.random_mean > 0.1
    assert rep_sem.z_score > 5
    rep_usr = matched_vs_random(
        profiles, user_sets=user_sets, seed=11, n_random_pairs=4000
    )
    assert rep_usr.kind == "user"
    assert rep_usr.matched_mean - rep_usr.random_mean > 0.1
    assert rep_usr.z_score > 5


def test_matched_vs_random_seeded_reproducibility():
    profiles, embeddings, _, _ = make_cluster_communities(seed=5, n_communities=40)
    table = EmbeddingTable(embeddings)
    a = matched_vs_random(profiles, embeddings=table, seed=21, n_random_pairs=500)
    b = matched_vs_random(profiles, embeddings=table, seed=21, n_random_pairs=500)
    assert a == b  # bit-identical dataclasses
    c = matched_vs_random(profiles, embeddings=table, seed=22, n_random_pairs=500)
    assert c.random_mean != a.random_mean


def test_matched_vs_random_validation():
    rng = random.Random(10)
    profiles = [random_profile(rng, "only")]
    with pytest.raises(DataError):
        matched_vs_random(profiles, embeddings=EmbeddingTable({"only": [1.0]}),
                          seed=0, n_random_pairs=10)
    with pytest.raises(DataError):
        matched_vs_random(profiles, seed=0)
