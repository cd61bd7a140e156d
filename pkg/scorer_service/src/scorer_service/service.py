"""HTTP service exposing the scorers behind the shared wire protocol.

POST /v1/relevance {"texts": [...], "values": null|[names]} -> {"scores": [[...]]}
POST /v1/stance    {"pairs": [{"text","value"}]}            -> {"p_pos": [...]}
POST /v1/embed     {"texts": [...]}                          -> {"dim", "vectors"}
GET  /v1/health                                              -> {"status": "ok"}

Responses always carry finite floats; relevance scores and p_pos lie in
[0, 1].  Requests are scored one text at a time in eval mode, so identical
text always yields identical scores regardless of batch composition.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from scorer_service import SCHWARTZ_VALUES, VALUE_INDEX, __version__
from scorer_service.model import (
    HashedEmbedder,
    ValueTextClassifier,
    fresh_model,
    load_model,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_BATCH = 256
DEFAULT_MAX_CHARS = 8000


@dataclass
class ServiceConfig:
    relevance_model: Optional[Union[str, Path]] = None
    stance_model: Optional[Union[str, Path]] = None
    max_batch: int = DEFAULT_MAX_BATCH
    max_chars: int = DEFAULT_MAX_CHARS
    embed_dim: int = 256
    fallback_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")


class RelevanceRequest(BaseModel):
    texts: list[str]
    values: Optional[list[str]] = None


class StancePair(BaseModel):
    text: str
    value: str


class StanceRequest(BaseModel):
    pairs: list[StancePair]


class EmbedRequest(BaseModel):
    texts: list[str]


def _load_or_fresh(path, seed: int, label: str) -> ValueTextClassifier:
    if path is not None and Path(path).exists():
        log.info("loading %s model from %s", label, path)
        return load_model(path)
    log.warning("no %s model artifact; serving a deterministic untrained model", label)
    return fresh_model(seed=seed)


def _canonical(value: str) -> str:
    key = value.strip().lower().replace("_", "-").replace(" ", "-")
    if key not in VALUE_INDEX:
        raise HTTPException(status_code=400, detail=f"unknown value name: {value!r}")
    return key


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    relevance_model = _load_or_fresh(config.relevance_model, config.fallback_seed, "relevance")
    stance_model = _load_or_fresh(config.stance_model, config.fallback_seed + 1, "stance")
    embedder = HashedEmbedder(dim=config.embed_dim, seed=config.fallback_seed)

    app = FastAPI(title="value scorer service", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def validation_as_400(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def check_batch(n: int) -> None:
        if n > config.max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {n} exceeds maximum {config.max_batch}",
            )

    def clip(text: str) -> str:
        return text[: config.max_chars]

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "version": __version__,
            "relevance_model": bool(config.relevance_model),
            "stance_model": bool(config.stance_model),
        }

    @app.post("/v1/relevance")
    def relevance(req: RelevanceRequest):
        check_batch(len(req.texts))
        values = (
            list(SCHWARTZ_VALUES)
            if req.values is None
            else [_canonical(v) for v in req.values]
        )
        scores = []
        for text in req.texts:
            text = clip(text)
            scores.append([relevance_model.probability(text, v) for v in values])
        return {"scores": scores}

    @app.post("/v1/stance")
    def stance(req: StanceRequest):
        check_batch(len(req.pairs))
        p_pos = [
            stance_model.probability(clip(p.text), _canonical(p.value))
            for p in req.pairs
        ]
        return {"p_pos": p_pos}

    @app.post("/v1/embed")
    def embed(req: EmbedRequest):
        check_batch(len(req.texts))
        vectors = [embedder.embed(clip(t)) for t in req.texts]
        return {"dim": embedder.dim, "vectors": vectors}

    return app
