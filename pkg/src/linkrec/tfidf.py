"""TF-IDF vectorization and the four distance scorers for the baseline.

Term frequency is normalized by the most frequent term of the document,
idf uses an unsmoothed natural log over document frequency, so terms that
appear in every document carry zero weight and are dropped from vectors.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

METRICS = ("cosine", "euclidean", "manhattan", "chebyshev")


@dataclass(frozen=True)
class TfidfModel:
    vocab: dict[str, int]  # term -> dense column index
    idf: np.ndarray  # per-term weight, aligned with vocab indices
    doc_count: int


@dataclass(frozen=True)
class SparseVec:
    """Sparse vector as parallel (strictly increasing indices, weights)."""

    indices: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return len(self.indices)


EMPTY_VEC = SparseVec(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))


def sparse_from_pairs(pairs: Sequence[tuple[int, float]]) -> SparseVec:
    """Build a SparseVec from (index, weight) pairs, dropping zeros."""
    pairs = sorted((i, w) for i, w in pairs if w != 0.0)
    if not pairs:
        return EMPTY_VEC
    idx, val = zip(*pairs)
    return SparseVec(np.array(idx, dtype=np.int64), np.array(val, dtype=np.float64))


def fit_tfidf(docs: Sequence[Sequence[str]]) -> TfidfModel:
    """Fit vocabulary and inverse document frequencies on a corpus."""
    if not docs:
        raise ValueError("empty corpus")
    if all(len(d) == 0 for d in docs):
        raise ValueError("corpus has no tokens")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc))
    vocab = {term: i for i, term in enumerate(sorted(df))}
    n = len(docs)
    idf = np.zeros(len(vocab), dtype=np.float64)
    for term, i in vocab.items():
        idf[i] = np.log(n / df[term])
    return TfidfModel(vocab=vocab, idf=idf, doc_count=n)


def vectorize(model: TfidfModel, doc: Sequence[str]) -> SparseVec:
    """Weight = (count / max count over the doc's tokens) * idf.

    The max runs over every token of the document, in-vocabulary or not;
    out-of-vocabulary tokens get no weight of their own.
    """
    if not doc:
        return EMPTY_VEC
    counts = Counter(doc)
    max_count = max(counts.values())
    pairs = []
    for term, c in counts.items():
        col = model.vocab.get(term)
        if col is None:
            continue
        pairs.append((col, (c / max_count) * model.idf[col]))
    return sparse_from_pairs(pairs)


def _aligned(u: SparseVec, v: SparseVec):
    """Masks and positions of the shared support of u and v."""
    if u.nnz == 0 or v.nnz == 0:
        empty = np.empty(0, dtype=bool)
        return empty, np.empty(0, dtype=np.int64)
    pos = np.searchsorted(v.indices, u.indices)
    pos_c = np.minimum(pos, v.nnz - 1)
    mask_u = (pos < v.nnz) & (v.indices[pos_c] == u.indices)
    return mask_u, pos_c[mask_u]


def _dot(u: SparseVec, v: SparseVec) -> float:
    mask_u, pos_v = _aligned(u, v)
    if not mask_u.size:
        return 0.0
    return float(np.dot(u.values[mask_u], v.values[pos_v]))


def distance(u: SparseVec, v: SparseVec, metric: str) -> float:
    """Cosine similarity or one of the three true distances.

    Cosine of two zero vectors is defined as 0 (degenerate empty documents
    occur in real corpora); a RuntimeWarning flags the case.
    """
    if metric == "cosine":
        nu = float(np.linalg.norm(u.values))
        nv = float(np.linalg.norm(v.values))
        if nu == 0.0 and nv == 0.0:
            warnings.warn(
                "cosine of two zero vectors; similarity defined as 0",
                RuntimeWarning,
                stacklevel=2,
            )
            return 0.0
        if nu == 0.0 or nv == 0.0:
            return 0.0
        return _dot(u, v) / (nu * nv)

    mask_u, pos_v = _aligned(u, v)
    u_shared = u.values[mask_u] if mask_u.size else np.empty(0)
    v_shared = v.values[pos_v]
    u_only = u.values[~mask_u] if mask_u.size else u.values
    v_mask = np.ones(v.nnz, dtype=bool)
    v_mask[pos_v] = False
    v_only = v.values[v_mask]

    if metric == "euclidean":
        s = float(
            np.sum((u_shared - v_shared) ** 2)
            + np.sum(u_only**2)
            + np.sum(v_only**2)
        )
        return float(np.sqrt(s))
    if metric == "manhattan":
        return float(
            np.sum(np.abs(u_shared - v_shared))
            + np.sum(np.abs(u_only))
            + np.sum(np.abs(v_only))
        )
    if metric == "chebyshev":
        parts = [
            np.abs(u_shared - v_shared),
            np.abs(u_only),
            np.abs(v_only),
        ]
        return float(max(float(p.max()) if p.size else 0.0 for p in parts))
    raise ValueError(f"unknown metric: {metric!r} (expected one of {METRICS})")


def score(u: SparseVec, v: SparseVec, metric: str) -> float:
    """Higher-is-better adapter: similarity for cosine, negated distance
    for the rest."""
    d = distance(u, v, metric)
    return d if metric == "cosine" else -d


def model_to_json(model: TfidfModel) -> dict:
    """Diagnostic dump of vocabulary and idf weights."""
    terms = sorted(model.vocab, key=model.vocab.get)
    return {
        "doc_count": model.doc_count,
        "terms": terms,
        "idf": [float(x) for x in model.idf],
    }
