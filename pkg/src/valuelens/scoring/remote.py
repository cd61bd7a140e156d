"""HTTP client for a remote scorer service.

Wire protocol:
  POST {base}/v1/relevance  {"texts": [...], "values": null} -> {"scores": [[10 floats]]}
  POST {base}/v1/stance     {"pairs": [{"text","value"}]}    -> {"p_pos": [floats]}
  POST {base}/v1/embed      {"texts": [...]}                 -> {"dim": int, "vectors": [[floats]]}

Transient transport failures and 5xx responses are retried with exponential
backoff; anything still failing raises ScorerTransportError.  A response that
parses but violates the contract (shape, range, non-finite floats) raises
ScorerContractError immediately.
"""

from __future__ import annotations

import logging
import math
import time
from typing import Any, Optional, Sequence

import httpx

from valuelens.errors import ScorerContractError, ScorerTransportError
from valuelens.values import N_VALUES, ValueVector

log = logging.getLogger(__name__)

DEFAULT_CHAR_CAP = 4000


class RemoteScorer:
    """Batched client implementing both scorer protocols over the wire."""

    def __init__(
        self,
        base_url: str,
        batch_size: int = 64,
        char_cap: int = DEFAULT_CHAR_CAP,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff: float = 0.5,
        client: Optional[httpx.Client] = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.char_cap = char_cap
        self.max_retries = max_retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def _post(self, path: str, payload: dict) -> Any:
        url = f"{self.base_url}{path}"
        last_exc: Optional[Exception] = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._client.post(url, json=payload)
                if resp.status_code >= 500:
                    raise ScorerTransportError(
                        f"{url} returned {resp.status_code}: {resp.text[:200]}"
                    )
                if resp.status_code != 200:
                    raise ScorerContractError(
                        f"{url} returned {resp.status_code}: {resp.text[:200]}"
                    )
                return resp.json()
            except (httpx.TransportError, ScorerTransportError) as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    delay = self.backoff * (2**attempt)
                    log.warning("scorer request failed (%s), retrying in %.1fs", exc, delay)
                    time.sleep(delay)
        raise ScorerTransportError(f"remote scorer unreachable at {url}: {last_exc}")

    def _truncate(self, text: str) -> str:
        return text[: self.char_cap] if len(text) > self.char_cap else text

    def relevance_batch(self, texts: Sequence[str]) -> list[ValueVector]:
        out: list[ValueVector] = []
        for start in range(0, len(texts), self.batch_size):
            chunk = [self._truncate(t) for t in texts[start : start + self.batch_size]]
            body = self._post("/v1/relevance", {"texts": chunk, "values": None})
            scores = _expect_list(body, "scores", len(chunk))
            for row in scores:
                if not isinstance(row, list) or len(row) != N_VALUES:
                    raise ScorerContractError(
                        f"relevance row has {len(row) if isinstance(row, list) else 'no'} "
                        f"entries, expected {N_VALUES}"
                    )
                _check_unit_floats(row, "relevance")
                out.append(ValueVector.from_sequence(row))
        return out

    def p_pos_batch(self, pairs: Sequence[tuple[str, str]]) -> list[float]:
        out: list[float] = []
        for start in range(0, len(pairs), self.batch_size):
            chunk = pairs[start : start + self.batch_size]
            payload = {
                "pairs": [{"text": self._truncate(t), "value": v} for t, v in chunk]
            }
            body = self._post("/v1/stance", payload)
            p_pos = _expect_list(body, "p_pos", len(chunk))
            _check_unit_floats(p_pos, "p_pos")
            out.extend(float(p) for p in p_pos)
        return out

    def embed(self, texts: Sequence[str]) -> tuple[int, list[list[float]]]:
        dim: Optional[int] = None
        vectors: list[list[float]] = []
        for start in range(0, len(texts), self.batch_size):
            chunk = [self._truncate(t) for t in texts[start : start + self.batch_size]]
            body = self._post("/v1/embed", {"texts": chunk})
            got_dim = body.get("dim")
            rows = _expect_list(body, "vectors", len(chunk))
            if dim is None:
                dim = int(got_dim)
            elif got_dim != dim:
                raise ScorerContractError(f"embedding dim changed mid-run: {got_dim} != {dim}")
            for row in rows:
                if len(row) != dim:
                    raise ScorerContractError(f"embedding row dim {len(row)} != {dim}")
                if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in row):
                    raise ScorerContractError("non-finite embedding entry")
                vectors.append([float(x) for x in row])
        return (dim or 0), vectors


def _expect_list(body: Any, key: str, expected_len: int) -> list:
    if not isinstance(body, dict) or key not in body or not isinstance(body[key], list):
        raise ScorerContractError(f"response missing list field {key!r}")
    got = body[key]
    if len(got) != expected_len:
        raise ScorerContractError(f"{key} length {len(got)} != batch size {expected_len}")
    return got


def _check_unit_floats(values: Sequence[Any], label: str) -> None:
    for x in values:
        if not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ScorerContractError(f"non-finite {label} entry: {x!r}")
        if not 0.0 <= float(x) <= 1.0:
            raise ScorerContractError(f"{label} entry out of [0,1]: {x}")
