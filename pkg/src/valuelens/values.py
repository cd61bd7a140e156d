"""Canonical Schwartz value order and the fixed-width vectors built on it.

Every vector in the package is ordered by SCHWARTZ_VALUES; serialized forms
always carry value names so an ordering mistake is detectable on load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

SCHWARTZ_VALUES: tuple[str, ...] = (
    "power",
    "achievement",
    "hedonism",
    "stimulation",
    "self-direction",
    "universalism",
    "benevolence",
    "tradition",
    "conformity",
    "security",
)

N_VALUES = len(SCHWARTZ_VALUES)

VALUE_INDEX: dict[str, int] = {v: i for i, v in enumerate(SCHWARTZ_VALUES)}

# Relevance threshold above which stance is computed at all.
DEFAULT_GATE = 0.5

# Display thresholds for calling a mean stance positive/negative.
STANCE_DISPLAY_THRESHOLD = 0.2


def canonical_value(name: str) -> str:
    """Normalize a value name (case, underscores) to its canonical form."""
    key = name.strip().lower().replace("_", "-").replace(" ", "-")
    if key not in VALUE_INDEX:
        raise ValueError(f"unknown Schwartz value: {name!r}")
    return key


@dataclass(frozen=True)
class ValueVector:
    """Ten independent relevance probabilities, one per Schwartz value."""

    entries: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != N_VALUES:
            raise ValueError(f"expected {N_VALUES} entries, got {len(self.entries)}")
        for value, p in zip(SCHWARTZ_VALUES, self.entries):
            if not (isinstance(p, (int, float)) and math.isfinite(p)):
                raise ValueError(f"relevance for {value} is not a finite number: {p!r}")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"relevance for {value} out of [0,1]: {p}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float]) -> "ValueVector":
        entries = []
        for value in SCHWARTZ_VALUES:
            if value not in mapping:
                raise ValueError(f"missing value {value!r} in relevance mapping")
            entries.append(float(mapping[value]))
        return cls(tuple(entries))

    @classmethod
    def from_sequence(cls, seq: Sequence[float]) -> "ValueVector":
        return cls(tuple(float(x) for x in seq))

    def as_dict(self) -> dict[str, float]:
        return {v: p for v, p in zip(SCHWARTZ_VALUES, self.entries)}

    def __getitem__(self, value: str) -> float:
        return self.entries[VALUE_INDEX[value]]

    def argmax(self) -> str:
        """Name of the highest-relevance value (first in canonical order on ties)."""
        best = max(self.entries)
        return SCHWARTZ_VALUES[self.entries.index(best)]


@dataclass(frozen=True)
class StanceVector:
    """Ten optional stance scores in [-1,1]; None where the relevance gate
    was not passed."""

    entries: tuple[Optional[float], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != N_VALUES:
            raise ValueError(f"expected {N_VALUES} entries, got {len(self.entries)}")
        for value, s in zip(SCHWARTZ_VALUES, self.entries):
            if s is None:
                continue
            if not (isinstance(s, (int, float)) and math.isfinite(s)):
                raise ValueError(f"stance for {value} is not a finite number: {s!r}")
            if not -1.0 <= s <= 1.0:
                raise ValueError(f"stance for {value} out of [-1,1]: {s}")

    @classmethod
    def all_null(cls) -> "StanceVector":
        return cls((None,) * N_VALUES)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Optional[float]]) -> "StanceVector":
        entries = []
        for value in SCHWARTZ_VALUES:
            if value not in mapping:
                raise ValueError(f"missing value {value!r} in stance mapping")
            raw = mapping[value]
            entries.append(None if raw is None else float(raw))
        return cls(tuple(entries))

    @classmethod
    def from_sequence(cls, seq: Sequence[Optional[float]]) -> "StanceVector":
        return cls(tuple(None if x is None else float(x) for x in seq))

    def as_dict(self) -> dict[str, Optional[float]]:
        return {v: s for v, s in zip(SCHWARTZ_VALUES, self.entries)}

    def __getitem__(self, value: str) -> Optional[float]:
        return self.entries[VALUE_INDEX[value]]

    def present_values(self) -> list[str]:
        return [v for v, s in zip(SCHWARTZ_VALUES, self.entries) if s is not None]


def assert_gate_consistent(
    relevance: ValueVector, stance: StanceVector, gate: float = DEFAULT_GATE
) -> None:
    """Raise unless stance[k] is present exactly when relevance[k] > gate."""
    for value, p, s in zip(SCHWARTZ_VALUES, relevance.entries, stance.entries):
        if (s is not None) != (p > gate):
            raise ValueError(
                f"gate inconsistency for {value}: relevance={p}, gate={gate}, "
                f"stance={'present' if s is not None else 'null'}"
            )


def stance_display_label(score: Optional[float], threshold: float = STANCE_DISPLAY_THRESHOLD) -> str:
    """Display label for a mean stance: positive above the threshold, negative
    below its negation, neutral otherwise (including at the boundary and for
    missing stances)."""
    if score is None:
        return "neutral"
    if score > threshold:
        return "positive"
    if score < -threshold:
        return "negative"
    return "neutral"
