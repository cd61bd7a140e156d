"""Training loop: AdamW, lr 5e-5, batch 32, up to ten epochs with early
stopping (patience 2 on dev macro-F1) and a linear LR schedule.

Smoke mode caps the data at 100 examples and one epoch for a sub-minute CPU
check that the loss goes downhill.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import torch
from torch import nn

from scorer_service.data import Splits, TrainExample
from scorer_service.model import ValueTextClassifier, batch_tensors, save_model

log = logging.getLogger(__name__)

LEARNING_RATE = 5e-5
BATCH_SIZE = 32
MAX_EPOCHS = 10
PATIENCE = 2
SMOKE_EXAMPLES = 100


@dataclass
class TrainResult:
    task: str
    epochs_run: int
    initial_loss: float
    final_loss: float
    best_dev_f1: float
    test_f1: Optional[float]
    history: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "epochs_run": self.epochs_run,
            "initial_loss": self.initial_loss,
            "final_loss": self.final_loss,
            "best_dev_f1": self.best_dev_f1,
            "test_f1": self.test_f1,
            "history": self.history,
        }


def _batches(examples: Sequence[TrainExample], batch_size: int):
    for start in range(0, len(examples), batch_size):
        yield examples[start : start + batch_size]


def _mean_loss(model: ValueTextClassifier, examples: Sequence[TrainExample],
               criterion: nn.Module) -> float:
    model.eval()
    total = 0.0
    with torch.no_grad():
        for batch in _batches(examples, BATCH_SIZE):
            loss = _batch_loss(model, batch, criterion)
            total += float(loss) * len(batch)
    return total / len(examples)


def _batch_loss(model, batch, criterion):
    token_ids, offsets, value_ids = batch_tensors(
        [e.text for e in batch], [e.value for e in batch], model.vocab_size
    )
    logits = model(token_ids, offsets, value_ids)
    labels = torch.tensor([float(e.label) for e in batch])
    return criterion(logits, labels)


def _macro_f1(model: ValueTextClassifier, examples: Sequence[TrainExample]) -> float:
    if not examples:
        return 0.0
    model.eval()
    preds = []
    with torch.no_grad():
        for batch in _batches(examples, BATCH_SIZE):
            token_ids, offsets, value_ids = batch_tensors(
                [e.text for e in batch], [e.value for e in batch], model.vocab_size
            )
            logits = model(token_ids, offsets, value_ids)
            preds.extend(int(p > 0.5) for p in torch.sigmoid(logits).tolist())
    gold = [e.label for e in examples]
    f1s = []
    for cls in sorted(set(gold)):
        tp = sum(1 for g, p in zip(gold, preds) if g == cls and p == cls)
        fp = sum(1 for g, p in zip(gold, preds) if g != cls and p == cls)
        fn = sum(1 for g, p in zip(gold, preds) if g == cls and p != cls)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else 0.0)
    return sum(f1s) / len(f1s)


def train(
    splits: Splits,
    task: str,
    seed: int = 0,
    smoke: bool = False,
    out_path: Optional[Union[str, Path]] = None,
    vocab_size: int = 4096,
    dim: int = 64,
) -> tuple[ValueTextClassifier, TrainResult]:
    """Fit a classifier on the given splits; returns the best model by dev
    macro-F1 (smoke mode: the final model after one epoch)."""
    torch.manual_seed(seed)
    torch.set_num_threads(1)  # bit-reproducible CPU runs

    train_set = list(splits.train)
    dev_set = list(splits.dev)
    test_set = list(splits.test)
    max_epochs = MAX_EPOCHS
    if smoke:
        train_set = train_set[:SMOKE_EXAMPLES]
        dev_set = dev_set[: SMOKE_EXAMPLES // 5]
        max_epochs = 1
    if not train_set:
        raise ValueError("no training examples")

    model = ValueTextClassifier(vocab_size=vocab_size, dim=dim)
    criterion = nn.BCEWithLogitsLoss()
    optimizer = torch.optim.AdamW(model.parameters(), lr=LEARNING_RATE)
    total_steps = max(1, max_epochs * ((len(train_set) + BATCH_SIZE - 1) // BATCH_SIZE))
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: max(0.0, 1.0 - step / total_steps)
    )

    initial_loss = _mean_loss(model, train_set, criterion)
    shuffler = torch.Generator().manual_seed(seed)
    best_dev = -1.0
    best_state = None
    epochs_without_gain = 0
    history = []
    epochs_run = 0
    started = time.monotonic()
    for epoch in range(max_epochs):
        model.train()
        order = torch.randperm(len(train_set), generator=shuffler).tolist()
        epoch_examples = [train_set[i] for i in order]
        for batch in _batches(epoch_examples, BATCH_SIZE):
            optimizer.zero_grad()
            loss = _batch_loss(model, batch, criterion)
            if not torch.isfinite(loss):
                raise RuntimeError(f"training diverged at epoch {epoch}: loss={loss}")
            loss.backward()
            optimizer.step()
            scheduler.step()
        epochs_run = epoch + 1
        epoch_loss = _mean_loss(model, train_set, criterion)
        dev_f1 = _macro_f1(model, dev_set)
        history.append({"epoch": epoch, "train_loss": epoch_loss, "dev_f1": dev_f1,
                        "elapsed_s": round(time.monotonic() - started, 2)})
        log.info("epoch %d: train_loss=%.5f dev_f1=%.4f", epoch, epoch_loss, dev_f1)
        if dev_f1 > best_dev:
            best_dev = dev_f1
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            epochs_without_gain = 0
        else:
            epochs_without_gain += 1
            if epochs_without_gain > PATIENCE:
                log.info("early stopping after epoch %d", epoch)
                break

    if not smoke and best_state is not None:
        model.load_state_dict(best_state)
    final_loss = _mean_loss(model, train_set, criterion)
    result = TrainResult(
        task=task,
        epochs_run=epochs_run,
        initial_loss=initial_loss,
        final_loss=final_loss,
        best_dev_f1=max(best_dev, 0.0),
        test_f1=_macro_f1(model, test_set) if test_set else None,
        history=history,
    )
    if out_path is not None:
        save_model(model, out_path)
        metrics_path = Path(out_path).with_suffix(".metrics.json")
        metrics_path.write_text(json.dumps(result.as_dict(), indent=2) + "\n")
    return model, result
