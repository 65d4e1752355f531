"""Document vectors: file loading, deterministic local encoding, and the
PCA analysis space.

Vector files are little-endian 32-bit floats, row-major, with a JSON
sidecar manifest (``<path>.manifest.json``) giving ``n``, ``dim``,
``encoder_name``, and ``normalized``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    vectors: np.ndarray  # (N, p) float32/float64
    normalized: bool
    encoder_name: str

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.ids):
            raise EmbeddingError("vector row count does not match id count")
        if not np.all(np.isfinite(self.vectors)):
            bad = int(np.where(~np.isfinite(self.vectors).all(axis=1))[0][0])
            raise EmbeddingError(f"non-finite entry in row {bad} ({self.ids[bad]})")
        if self.normalized:
            norms = np.linalg.norm(self.vectors, axis=1)
            if not np.allclose(norms, 1.0, atol=1e-6):
                raise EmbeddingError("normalized flag set but rows are not unit norm")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def row(self, paper_id: str) -> np.ndarray:
        return self.vectors[self.ids.index(paper_id)]


def l2_normalize(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise EmbeddingError("cannot normalize a zero vector")
    return vectors / norms


def _manifest_path(path: str | Path) -> Path:
    return Path(str(path) + ".manifest.json")


def save_vectors(matrix: EmbeddingMatrix, path: str | Path) -> None:
    data = np.ascontiguousarray(matrix.vectors, dtype="<f4")
    Path(path).write_bytes(data.tobytes())
    manifest = {
        "n": len(matrix.ids),
        "dim": matrix.dim,
        "encoder_name": matrix.encoder_name,
        "normalized": matrix.normalized,
    }
    _manifest_path(path).write_text(json.dumps(manifest, indent=2))


def load_vectors(
    path: str | Path,
    ids: Sequence[str],
    normalize: bool = False,
) -> EmbeddingMatrix:
    """Load a row-major float32 vector file aligned with ``ids``."""
    manifest = json.loads(_manifest_path(path).read_text())
    n, dim = int(manifest["n"]), int(manifest["dim"])
    if n != len(ids):
        raise EmbeddingError(f"file has {n} rows but {len(ids)} ids were given")
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f4")
    if raw.size != n * dim:
        raise EmbeddingError("vector file size does not match manifest")
    vectors = raw.reshape(n, dim).astype(np.float64)
    normalized = bool(manifest.get("normalized", False))
    if normalize and not normalized:
        vectors = l2_normalize(vectors)
        normalized = True
    return EmbeddingMatrix(
        ids=tuple(ids),
        vectors=vectors,
        normalized=normalized,
        encoder_name=str(manifest.get("encoder_name", "unknown")),
    )


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class HashingEncoder:
    """Deterministic offline encoder: hashed token counts with signs,
    L2-normalized.  Texts sharing vocabulary land near each other, which
    is all the synthetic pipelines need."""

    def __init__(self, dim: int = 256, name: str = "hashing-v1"):
        self.dim = dim
        self.name = name

    def _bucket(self, token: str) -> tuple[int, float]:
        digest = hashlib.sha256(token.encode()).digest()
        index = int.from_bytes(digest[:4], "little") % self.dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        return index, sign

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for row, text in enumerate(texts):
            for token in tokenize(text):
                index, sign = self._bucket(token)
                out[row, index] += sign
            norm = np.linalg.norm(out[row])
            if norm == 0:
                # Empty text: stable unit vector so downstream cosine is defined.
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return out

    def encode_one(self, text: str) -> np.ndarray:
        return self.encode([text])[0]


@dataclass(frozen=True)
class ProjectionModel:
    mean_vector: np.ndarray  # (p,)
    components: np.ndarray  # (r, p) orthonormal rows
    explained_variance: np.ndarray  # (r,) non-increasing

    @property
    def r(self) -> int:
        return int(self.components.shape[0])


def fit_projection(matrix: np.ndarray, r: int) -> ProjectionModel:
    """PCA on mean-centered data via thin SVD.

    Sign convention: the largest-magnitude entry of each component is
    made positive, so the fit is deterministic across numeric stacks.
    """
    n, p = matrix.shape
    if n < 2:
        raise EmbeddingError("need at least 2 rows to fit a projection")
    if not 1 <= r <= min(n, p):
        raise EmbeddingError(f"invalid component count r={r} for shape {matrix.shape}")
    mean = matrix.mean(axis=0)
    centered = matrix - mean
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:r]
    for i in range(r):
        pivot = int(np.argmax(np.abs(components[i])))
        if components[i, pivot] < 0:
            components[i] = -components[i]
    explained = (singular[:r] ** 2) / n
    return ProjectionModel(mean_vector=mean, components=components, explained_variance=explained)


def apply_projection(model: ProjectionModel, matrix: np.ndarray) -> np.ndarray:
    return (matrix - model.mean_vector) @ model.components.T


def analysis_space(matrix: EmbeddingMatrix, r: Optional[int]) -> np.ndarray:
    """Project into the PCA analysis space; ``r=None`` (or r >= rank bound)
    keeps the original vectors."""
    if r is None or r >= min(matrix.vectors.shape):
        return np.array(matrix.vectors, dtype=np.float64)
    model = fit_projection(matrix.vectors, r)
    return apply_projection(model, matrix.vectors)
