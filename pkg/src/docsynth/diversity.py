"""Mean pairwise cosine similarity (MPCS) over document embeddings.

Lower MPCS means a more diverse dataset.  The built-in embedding uses only
annotation-derived layout and text-shape features; externally computed
vectors can be loaded from a text file instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from docsynth.annotate import OTHER, Annotation

HIST_BINS = 8


class DiversityError(ValueError):
    pass


@dataclass(frozen=True)
class DiversityReport:
    mean: float
    std: float
    n: int
    dim: int
    provider: str

    def __str__(self) -> str:
        return (f"MPCS {self.mean:.3f} ± {self.std:.3f} "
                f"(N={self.n}, d={self.dim}, provider={self.provider})")

    def to_dict(self) -> dict:
        return {"mpcs": self.mean, "std": self.std, "n": self.n, "dim": self.dim,
                "provider": self.provider}


class EmbeddingProvider(Protocol):
    provider_id: str

    def embed(self, annotations: Sequence[Annotation]) -> np.ndarray: ...


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DiversityError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise DiversityError("cosine similarity is undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))


def mpcs(vectors, provider: str = "external", block: int = 512) -> DiversityReport:
    """Mean and population std of cosine similarity over all unordered pairs.

    Pairs are processed in row blocks to bound memory; block sums are
    combined with ``math.fsum``.
    """
    x = np.asarray(vectors, dtype=float)
    if x.ndim != 2:
        raise DiversityError("expected a 2-D array of vectors")
    n, d = x.shape
    if n < 2:
        raise DiversityError(f"MPCS needs at least 2 vectors, got {n}")
    if not np.all(np.isfinite(x)):
        raise DiversityError("embedding vectors must be finite")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise DiversityError("cosine similarity is undefined for a zero vector")
    unit = x / norms[:, None]
    pairs = n * (n - 1) // 2

    def blocks():
        for i0 in range(0, n, block):
            a = unit[i0:i0 + block]
            for j0 in range(i0, n, block):
                sims = a @ unit[j0:j0 + block].T
                if j0 == i0:
                    sims = sims[np.triu_indices(len(a), k=1)]
                yield np.clip(sims.ravel(), -1.0, 1.0)

    mean = math.fsum(float(s.sum()) for s in blocks()) / pairs
    var = math.fsum(float(((s - mean) ** 2).sum()) for s in blocks()) / pairs
    return DiversityReport(mean, math.sqrt(var), n, d, provider)


class LayoutFeatureEmbedder:
    """Annotation-only document embedding.

    Concatenates an 8x8 histogram of token centres (normalized to sum 1),
    class frequencies over ``expected_keys`` plus ``Other`` (normalized),
    and three token-shape statistics: mean token length / 10, digit ratio
    and uppercase ratio.
    """

    provider_id = "layout-features-v1"

    def __init__(self, expected_keys: Sequence[str], canvas_size: tuple[int, int]):
        self.classes = list(expected_keys) + [OTHER]
        self.canvas_size = canvas_size

    @property
    def dim(self) -> int:
        return HIST_BINS * HIST_BINS + len(self.classes) + 3

    def embed(self, annotations: Sequence[Annotation]) -> np.ndarray:
        tokens = [(box, text) for a in annotations for box, text in a.children]
        if not tokens:
            raise DiversityError("document has no tokens to embed")
        w, h = self.canvas_size
        hist = np.zeros((HIST_BINS, HIST_BINS))
        for box, _ in tokens:
            col = min(HIST_BINS - 1, max(0, int((box.x + box.w / 2) * HIST_BINS / w)))
            row = min(HIST_BINS - 1, max(0, int((box.y + box.h / 2) * HIST_BINS / h)))
            hist[row, col] += 1
        hist /= hist.sum()
        index = {c: i for i, c in enumerate(self.classes)}
        freq = np.zeros(len(self.classes))
        for a in annotations:
            freq[index.get(a.label, len(self.classes) - 1)] += 1
        freq /= freq.sum()
        chars = "".join(t for _, t in tokens)
        letters = sum(ch.isalpha() for ch in chars)
        shape = np.array([
            np.mean([len(t) for _, t in tokens]) / 10.0,
            sum(ch.isdigit() for ch in chars) / len(chars),
            sum(ch.isupper() for ch in chars) / letters if letters else 0.0,
        ])
        return np.concatenate([hist.ravel(), freq, shape])


def embed_document(annotations: Sequence[Annotation], provider: EmbeddingProvider) -> np.ndarray:
    return provider.embed(annotations)


def load_vectors(path: str | Path) -> np.ndarray:
    """Read one vector per line; values separated by whitespace or commas."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.replace(",", " ").split()])
        except ValueError as exc:
            raise DiversityError(f"{path}:{lineno}: {exc}") from exc
    if rows and len({len(r) for r in rows}) != 1:
        raise DiversityError(f"{path}: vectors have differing dimensions")
    return np.array(rows, dtype=float).reshape(len(rows), -1)
