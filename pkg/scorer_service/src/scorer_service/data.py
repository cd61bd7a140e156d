"""Training-data construction from the two labelled source datasets.

Relevance task: the scenario corpus with its non-neutral labels collapsed
into a single positive class, merged with the argument corpus's per-value
binary annotations.  Stance task: scenario rows with non-neutral labels only,
mapped onto {0, 1} for the positive class.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from scorer_service import SCHWARTZ_VALUES, VALUE_INDEX


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainExample:
    text: str
    value: str
    label: int  # relevance: {0,1}; stance: {0,1} with 1 = positive
    source: str


@dataclass
class Splits:
    train: list[TrainExample]
    dev: list[TrainExample]
    test: list[TrainExample]

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.dev), len(self.test)


def _canonical_value(raw: str, where: str) -> str:
    key = raw.strip().lower().replace("_", "-").replace(" ", "-")
    if key not in VALUE_INDEX:
        raise DataFormatError(f"{where}: unknown value name {raw!r}")
    return key


def read_scenario_csv(path: Union[str, Path]) -> list[tuple[str, str, int]]:
    """Scenario dataset rows (value, label in {-1,0,1}, text).

    Accepts a `scenario` or `text` column for the content.
    """
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or ()
        text_col = "scenario" if "scenario" in fields else "text"
        for required in ("value", "label", text_col):
            if required not in fields:
                raise DataFormatError(f"{path}: missing column {required!r}")
        for lineno, row in enumerate(reader, start=2):
            value = _canonical_value(row["value"], f"{path}:{lineno}")
            try:
                label = int(row["label"])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: bad label {row['label']!r}") from exc
            if label not in (-1, 0, 1):
                raise DataFormatError(f"{path}:{lineno}: label must be -1/0/1")
            text = row[text_col].strip()
            if text:
                rows.append((value, label, text))
    return rows


def read_argument_tsv(
    arguments_path: Union[str, Path], labels_path: Union[str, Path]
) -> list[tuple[str, str, int]]:
    """Argument dataset: premises plus per-category binary labels.

    Category columns map onto the ten values by their prefix before ':'
    (e.g. "Self-direction: thought"); categories outside the ten are dropped.
    """
    premises = {}
    with open(arguments_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        fields = reader.fieldnames or ()
        if "Argument ID" not in fields or "Premise" not in fields:
            raise DataFormatError(
                f"{arguments_path}: need 'Argument ID' and 'Premise' columns"
            )
        for row in reader:
            premises[row["Argument ID"]] = row["Premise"].strip()

    rows = []
    with open(labels_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter="\t")
        fields = list(reader.fieldnames or ())
        if not fields or fields[0] != "Argument ID":
            raise DataFormatError(f"{labels_path}: first column must be 'Argument ID'")
        categories = fields[1:]
        mapping: dict[str, Optional[str]] = {}
        for cat in categories:
            prefix = cat.split(":", 1)[0].strip().lower().replace("_", "-").replace(" ", "-")
            mapping[cat] = prefix if prefix in VALUE_INDEX else None
        for lineno, row in enumerate(reader, start=2):
            arg_id = row["Argument ID"]
            premise = premises.get(arg_id, "")
            if not premise:
                continue
            by_value = {v: 0 for v in SCHWARTZ_VALUES}
            for cat in categories:
                value = mapping[cat]
                if value is None:
                    continue
                cell = row[cat].strip()
                if cell not in ("0", "1"):
                    raise DataFormatError(
                        f"{labels_path}:{lineno}: label cell must be 0/1, got {cell!r}"
                    )
                if cell == "1":
                    by_value[value] = 1
            for value, label in by_value.items():
                rows.append((value, label, premise))
    return rows


def build_training_data(
    scenario_path: Optional[Union[str, Path]],
    argument_paths: Optional[tuple[Union[str, Path], Union[str, Path]]],
    task: str,
    seed: int = 0,
    split: tuple[float, float] = (0.8, 0.1),
) -> Splits:
    """Assemble seeded train/dev/test splits for one task.

    relevance: scenario labels collapse -1/1 -> 1 (0 stays 0), merged with
    the argument rows.  stance: scenario rows with label != 0 only,
    -1 -> 0 and 1 -> 1.
    """
    if task not in ("relevance", "stance"):
        raise DataFormatError(f"unknown task {task!r}")
    examples: list[TrainExample] = []
    if scenario_path is not None:
        for value, label, text in read_scenario_csv(scenario_path):
            if task == "relevance":
                examples.append(
                    TrainExample(text, value, 1 if label != 0 else 0, "scenario")
                )
            elif label != 0:
                examples.append(
                    TrainExample(text, value, 1 if label == 1 else 0, "scenario")
                )
    if task == "relevance" and argument_paths is not None:
        for value, label, text in read_argument_tsv(*argument_paths):
            examples.append(TrainExample(text, value, label, "argument"))
    if not examples:
        raise DataFormatError(f"no usable examples for task {task!r}")

    rng = random.Random(seed)
    order = list(range(len(examples)))
    rng.shuffle(order)
    shuffled = [examples[i] for i in order]
    n = len(shuffled)
    n_train = int(n * split[0])
    n_dev = int(n * split[1])
    return Splits(
        train=shuffled[:n_train],
        dev=shuffled[n_train : n_train + n_dev],
        test=shuffled[n_train + n_dev :],
    )
