"""Training-data construction: label collapse, value mapping, splits."""

import pytest

from scorer_service.data import (
    DataFormatError,
    build_training_data,
    read_argument_tsv,
    read_scenario_csv,
)


def test_scenario_reader(fixtures_dir):
    rows = read_scenario_csv(fixtures_dir / "scenarios_100.csv")
    assert len(rows) == 100
    assert all(label in (-1, 0, 1) for _, label, _ in rows)


def test_scenario_reader_rejects_unknown_value(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("value,label,scenario\nbravery,1,some text\n")
    with pytest.raises(DataFormatError, match="bravery"):
        read_scenario_csv(path)


def test_relevance_collapse_rule(fixtures_dir):
    """Non-neutral scenario labels (-1 and 1) both become the positive class."""
    splits = build_training_data(
        fixtures_dir / "scenarios_100.csv", None, task="relevance", seed=0
    )
    all_examples = splits.train + splits.dev + splits.test
    assert len(all_examples) == 100
    raw = {(v, t): l for v, l, t in read_scenario_csv(fixtures_dir / "scenarios_100.csv")}
    for ex in all_examples:
        original = raw[(ex.value, ex.text)]
        assert ex.label == (1 if original != 0 else 0)
    # hand-checked: every original -1 row is a positive relevance example
    minus_rows = [(v, t) for (v, t), l in raw.items() if l == -1]
    by_key = {(e.value, e.text): e.label for e in all_examples}
    assert minus_rows and all(by_key[k] == 1 for k in minus_rows)


def test_stance_excludes_neutral(fixtures_dir):
    splits = build_training_data(
        fixtures_dir / "scenarios_100.csv", None, task="stance", seed=0
    )
    all_examples = splits.train + splits.dev + splits.test
    assert len(all_examples) == 70  # 30 neutral rows excluded
    raw = {(v, t): l for v, l, t in read_scenario_csv(fixtures_dir / "scenarios_100.csv")}
    for ex in all_examples:
        original = raw[(ex.value, ex.text)]
        assert original != 0
        assert ex.label == (1 if original == 1 else 0)


def test_argument_prefix_mapping(fixtures_dir):
    rows = read_argument_tsv(
        fixtures_dir / "arguments.tsv", fixtures_dir / "argument_labels.tsv"
    )
    # 6 premises x 10 values
    assert len(rows) == 60
    # A02: both self-direction subcategories set -> one positive row
    a02 = [l for v, l, t in rows if v == "self-direction" and "voting" not in t and "freedom" in t]
    assert a02 == [1]
    # "Face" and "Humility" columns are dropped: A03 has humility=1 but no
    # ten-value category beyond self-direction
    a03_positive = [v for v, l, t in rows if "violates" in t and l == 1]
    assert a03_positive == ["self-direction"]
    # A05: conformity from "Conformity: rules"
    a05_positive = [v for v, l, t in rows if "uniform" in t and l == 1]
    assert a05_positive == ["conformity"]


def test_relevance_merges_both_sources(fixtures_dir):
    splits = build_training_data(
        fixtures_dir / "scenarios_100.csv",
        (fixtures_dir / "arguments.tsv", fixtures_dir / "argument_labels.tsv"),
        task="relevance",
        seed=0,
    )
    total = sum(splits.sizes())
    assert total == 160  # 100 scenario + 60 argument pairs
    sources = {e.source for e in splits.train + splits.dev + splits.test}
    assert sources == {"scenario", "argument"}


def test_split_sizes_and_determinism(fixtures_dir):
    a = build_training_data(fixtures_dir / "scenarios_100.csv", None, "relevance", seed=5)
    b = build_training_data(fixtures_dir / "scenarios_100.csv", None, "relevance", seed=5)
    assert a.train == b.train and a.dev == b.dev and a.test == b.test
    assert a.sizes() == (80, 10, 10)
    c = build_training_data(fixtures_dir / "scenarios_100.csv", None, "relevance", seed=6)
    assert c.train != a.train


def test_bad_argument_label_cell(tmp_path, fixtures_dir):
    labels = tmp_path / "labels.tsv"
    labels.write_text("Argument ID\tTradition\nA01\tmaybe\n")
    with pytest.raises(DataFormatError, match="0/1"):
        read_argument_tsv(fixtures_dir / "arguments.tsv", labels)
