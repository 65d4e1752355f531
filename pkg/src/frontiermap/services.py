"""HTTP clients for the external embedding and rerank service.

The service exposes ``POST /embed`` (texts -> vectors) and ``POST /rank``
(query + candidates -> scores in [0, 1]).  When the rank endpoint is
unavailable the client falls back to embedding cosine similarity mapped
by (cos + 1) / 2 and flags the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import httpx
import numpy as np

from .embeddings import HashingEncoder


class ServiceUnavailable(RuntimeError):
    """Retryable transport-level failure."""


class ServiceContractError(RuntimeError):
    """Hard failure: the service violated its response contract."""


@dataclass(frozen=True)
class RankResult:
    ids: tuple[str, ...]
    scores: tuple[float, ...]
    fallback_used: bool


class Encoder(Protocol):
    name: str

    def encode(self, texts: Sequence[str]) -> np.ndarray: ...


class HttpEncoder:
    """Batched client for ``POST /embed``.  Batching never changes results;
    a dimension change mid-call is a hard error."""

    def __init__(
        self,
        base_url: str,
        batch_size: int = 64,
        timeout: float = 30.0,
        client: Optional[httpx.Client] = None,
        name: str = "http-embed",
    ):
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.name = name
        self._client = client or httpx.Client(timeout=timeout)

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, 0))
        rows: list[list[float]] = []
        dim: Optional[int] = None
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start : start + self.batch_size])
            try:
                resp = self._client.post(f"{self.base_url}/embed", json={"texts": batch})
                resp.raise_for_status()
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                raise ServiceUnavailable(f"embed endpoint failed: {exc}") from exc
            vectors = resp.json()["vectors"]
            if len(vectors) != len(batch):
                raise ServiceContractError("embed returned wrong vector count")
            for vec in vectors:
                if dim is None:
                    dim = len(vec)
                elif len(vec) != dim:
                    raise ServiceContractError("embedding dimension drifted mid-call")
                rows.append(vec)
        out = np.asarray(rows, dtype=np.float64)
        if not np.all(np.isfinite(out)):
            raise ServiceContractError("embed returned non-finite values")
        return out


def cosine_fallback_scores(query_vec: np.ndarray, candidate_vecs: np.ndarray) -> np.ndarray:
    qn = np.linalg.norm(query_vec)
    cn = np.linalg.norm(candidate_vecs, axis=1)
    if qn == 0 or np.any(cn == 0):
        raise ServiceContractError("zero vector in fallback ranking")
    cos = candidate_vecs @ query_vec / (cn * qn)
    return (np.clip(cos, -1.0, 1.0) + 1.0) / 2.0


class RankClient:
    """Client for ``POST /rank`` with embedding-similarity fallback.

    ``encoder`` backs the fallback path; with ``base_url=None`` the
    client is purely offline and always reports ``fallback_used``.
    """

    def __init__(
        self,
        base_url: Optional[str] = None,
        encoder: Optional[Encoder] = None,
        timeout: float = 30.0,
        client: Optional[httpx.Client] = None,
    ):
        self.base_url = base_url.rstrip("/") if base_url else None
        self.encoder = encoder or HashingEncoder()
        self._client = client or httpx.Client(timeout=timeout)

    def _rank_remote(self, query: str, ids: Sequence[str], texts: Sequence[str]) -> RankResult:
        assert self.base_url is not None
        resp = self._client.post(
            f"{self.base_url}/rank",
            json={"query": query, "candidates": [{"id": i, "text": t} for i, t in zip(ids, texts)]},
        )
        resp.raise_for_status()
        scores = [float(s) for s in resp.json()["scores"]]
        if len(scores) != len(ids):
            raise ServiceContractError("rank returned wrong score count")
        if any(not 0.0 <= s <= 1.0 or not np.isfinite(s) for s in scores):
            raise ServiceContractError("rank scores outside [0, 1]")
        return RankResult(ids=tuple(ids), scores=tuple(scores), fallback_used=False)

    def rank(self, query: str, ids: Sequence[str], texts: Sequence[str]) -> RankResult:
        if not ids:
            raise ValueError("rank requires at least one candidate")
        if self.base_url is not None:
            try:
                return self._rank_remote(query, ids, texts)
            except (httpx.TransportError, httpx.HTTPStatusError):
                pass  # fall through to embedding fallback
        try:
            vectors = self.encoder.encode([query, *texts])
        except ServiceUnavailable as exc:
            raise ServiceUnavailable("both rank and embed endpoints unavailable") from exc
        scores = cosine_fallback_scores(vectors[0], vectors[1:])
        return RankResult(ids=tuple(ids), scores=tuple(float(s) for s in scores), fallback_used=True)
