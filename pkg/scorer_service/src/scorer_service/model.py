"""Value-conditioned text classifier and the hashed-token featurizer.

The encoder choice is service-internal: a stable-hash token embedding bag
conditioned on a learned per-value embedding, trained from scratch.  It keeps
CPU training and inference in the seconds range while honouring the external
contract (a probability per (value, text) pair).
"""

from __future__ import annotations

import re
import zlib
from pathlib import Path
from typing import Sequence, Union

import torch
from torch import nn

from scorer_service import SCHWARTZ_VALUES, VALUE_INDEX

_TOKEN_RE = re.compile(r"[a-z0-9']+")

DEFAULT_VOCAB = 4096
DEFAULT_DIM = 64
DEFAULT_MAX_TOKENS = 256


def hash_tokens(text: str, vocab_size: int = DEFAULT_VOCAB,
                max_tokens: int = DEFAULT_MAX_TOKENS) -> list[int]:
    """Stable token-bucket ids (crc32, not Python's salted hash)."""
    tokens = _TOKEN_RE.findall(text.lower())[:max_tokens]
    return [zlib.crc32(t.encode("utf-8")) % vocab_size for t in tokens]


class ValueTextClassifier(nn.Module):
    """p(y | value, text) with a bag-of-hashed-tokens text encoder."""

    def __init__(self, vocab_size: int = DEFAULT_VOCAB, dim: int = DEFAULT_DIM):
        super().__init__()
        self.vocab_size = vocab_size
        self.dim = dim
        self.token_emb = nn.EmbeddingBag(vocab_size, dim, mode="mean")
        self.value_emb = nn.Embedding(len(SCHWARTZ_VALUES), dim)
        self.head = nn.Sequential(
            nn.Linear(2 * dim, dim),
            nn.ReLU(),
            nn.Linear(dim, 1),
        )

    def forward(self, token_ids: torch.Tensor, offsets: torch.Tensor,
                value_ids: torch.Tensor) -> torch.Tensor:
        text_vec = self.token_emb(token_ids, offsets)
        value_vec = self.value_emb(value_ids)
        return self.head(torch.cat([text_vec, value_vec], dim=1)).squeeze(1)

    @torch.no_grad()
    def probability(self, text: str, value: str) -> float:
        """Eval-mode probability for one (text, value) pair; processed alone
        so the result never depends on batch composition."""
        self.eval()
        ids = hash_tokens(text, self.vocab_size)
        if not ids:
            ids = [0]
        token_ids = torch.tensor(ids, dtype=torch.long)
        offsets = torch.tensor([0], dtype=torch.long)
        value_ids = torch.tensor([VALUE_INDEX[value]], dtype=torch.long)
        logit = self(token_ids, offsets, value_ids)
        return float(torch.sigmoid(logit)[0])


def batch_tensors(texts: Sequence[str], values: Sequence[str],
                  vocab_size: int) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    token_ids: list[int] = []
    offsets: list[int] = []
    for text in texts:
        offsets.append(len(token_ids))
        ids = hash_tokens(text, vocab_size)
        token_ids.extend(ids if ids else [0])
    value_ids = [VALUE_INDEX[v] for v in values]
    return (
        torch.tensor(token_ids, dtype=torch.long),
        torch.tensor(offsets, dtype=torch.long),
        torch.tensor(value_ids, dtype=torch.long),
    )


def save_model(model: ValueTextClassifier, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "vocab_size": model.vocab_size,
            "dim": model.dim,
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_model(path: Union[str, Path]) -> ValueTextClassifier:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    model = ValueTextClassifier(payload["vocab_size"], payload["dim"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model


def fresh_model(seed: int = 0, vocab_size: int = DEFAULT_VOCAB,
                dim: int = DEFAULT_DIM) -> ValueTextClassifier:
    """Deterministically initialized untrained model (service fallback)."""
    torch.manual_seed(seed)
    model = ValueTextClassifier(vocab_size, dim)
    model.eval()
    return model


class HashedEmbedder:
    """Deterministic description embedder: seeded random projection of the
    hashed token counts, L2-normalized."""

    def __init__(self, dim: int = 256, vocab_size: int = DEFAULT_VOCAB, seed: int = 0):
        self.dim = dim
        self.vocab_size = vocab_size
        gen = torch.Generator().manual_seed(seed)
        self.projection = torch.randn(vocab_size, dim, generator=gen) / dim**0.5

    def embed(self, text: str) -> list[float]:
        counts = torch.zeros(self.vocab_size)
        for bucket in hash_tokens(text, self.vocab_size):
            counts[bucket] += 1.0
        vec = counts @ self.projection
        norm = float(torch.linalg.vector_norm(vec))
        if norm > 0:
            vec = vec / norm
        else:
            vec = torch.zeros(self.dim)
            vec[0] = 1.0  # empty text: fixed unit vector keeps norms non-zero
        return [float(x) for x in vec]
