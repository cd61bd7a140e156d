"""Canonical order and vector validation."""

import pytest

from valuelens.values import (
    SCHWARTZ_VALUES,
    StanceVector,
    ValueVector,
    assert_gate_consistent,
    canonical_value,
    stance_display_label,
)


def test_canonical_order_is_fixed():
    assert SCHWARTZ_VALUES == (
        "power", "achievement", "hedonism", "stimulation", "self-direction",
        "universalism", "benevolence", "tradition", "conformity", "security",
    )


def test_canonical_value_normalization():
    assert canonical_value("Self_Direction") == "self-direction"
    assert canonical_value(" POWER ") == "power"
    with pytest.raises(ValueError):
        canonical_value("bravery")


def test_value_vector_validation():
    with pytest.raises(ValueError):
        ValueVector.from_sequence([0.5] * 9)
    with pytest.raises(ValueError):
        ValueVector.from_sequence([1.5] + [0.5] * 9)
    with pytest.raises(ValueError):
        ValueVector.from_sequence([float("nan")] + [0.5] * 9)


def test_value_vector_mapping_roundtrip():
    vv = ValueVector.from_sequence([i / 10 for i in range(10)])
    assert ValueVector.from_mapping(vv.as_dict()) == vv
    assert vv["power"] == 0.0 and vv["security"] == 0.9
    assert vv.argmax() == "security"


def test_stance_vector_validation():
    with pytest.raises(ValueError):
        StanceVector.from_sequence([1.5] + [None] * 9)
    sv = StanceVector.from_sequence([0.5, -1.0] + [None] * 8)
    assert sv.present_values() == ["power", "achievement"]


def test_gate_consistency_check():
    rel = ValueVector.from_sequence([0.9] + [0.1] * 9)
    good = StanceVector.from_sequence([0.2] + [None] * 9)
    assert_gate_consistent(rel, good)
    bad = StanceVector.from_sequence([None] * 10)
    with pytest.raises(ValueError, match="power"):
        assert_gate_consistent(rel, bad)


def test_stance_display_thresholds():
    assert stance_display_label(0.21) == "positive"
    assert stance_display_label(0.2) == "neutral"
    assert stance_display_label(-0.2) == "neutral"
    assert stance_display_label(-0.21) == "negative"
    assert stance_display_label(None) == "neutral"
