"""Pretrained word-vector loading and fixed-length sequence encoding.

Vector files are the common text format: an optional "count dim" header,
then one token and ``dim`` reals per line.  Unknown and padding positions
are zero vectors so they contribute nothing to convolution sums.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .textprep import _stem_fixpoint

log = logging.getLogger(__name__)


class VectorFormatError(ValueError):
    """Malformed word-vector file."""


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    rows: dict[str, np.ndarray]

    def lookup(self, token: str) -> np.ndarray | None:
        return self.rows.get(token)

    @property
    def pad_vector(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.float64)

    @property
    def oov_vector(self) -> np.ndarray:
        return np.zeros(self.dim, dtype=np.float64)


@dataclass(frozen=True)
class EncodedSeq:
    matrix: np.ndarray  # (max_len, dim); rows past true_len are zero
    true_len: int
    oov_count: int


def _is_header(parts: list[str]) -> bool:
    if len(parts) != 2:
        return False
    try:
        int(parts[0]), int(parts[1])
    except ValueError:
        return False
    return True


def load_vectors(path, dim: int, stem_vocab: bool = True) -> EmbeddingTable:
    """Load a text-format vector file with the declared dimensionality.

    With ``stem_vocab`` each file token is Porter-stemmed so lookups line
    up with preprocessed issue text; the first surface form wins a stem
    collision (vector files order tokens by corpus frequency).  An exact
    duplicate surface token overwrites the earlier entry with a warning.
    """
    if dim <= 0:
        raise ValueError("dim must be positive")
    rows: dict[str, np.ndarray] = {}
    owner: dict[str, str] = {}  # stem key -> surface token that owns the row
    seen_surface: set[str] = set()
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if line_no == 1 and _is_header(parts):
                continue
            token, comps = parts[0], parts[1:]
            if len(comps) != dim:
                raise VectorFormatError(
                    f"line {line_no}: expected {dim} components, got {len(comps)}"
                )
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError as exc:
                raise VectorFormatError(
                    f"line {line_no}: non-numeric component: {exc}"
                ) from exc
            if not np.all(np.isfinite(vec)):
                raise VectorFormatError(f"line {line_no}: non-finite component")
            key = _stem_fixpoint(token) if stem_vocab else token
            if token in seen_surface:
                log.warning("duplicate token %r at line %d; last wins", token, line_no)
                if owner.get(key) == token:
                    rows[key] = vec
                continue
            seen_surface.add(token)
            if key not in rows:
                rows[key] = vec
                owner[key] = token
    return EmbeddingTable(dim=dim, rows=rows)


def encode(tokens: Sequence[str], table: EmbeddingTable, max_len: int) -> EncodedSeq:
    """Map the first ``max_len`` tokens to vectors, right-padded with zeros."""
    if max_len <= 0:
        raise ValueError("max_len must be positive")
    matrix = np.zeros((max_len, table.dim), dtype=np.float64)
    kept = tokens[:max_len]
    oov = 0
    for i, tok in enumerate(kept):
        vec = table.lookup(tok)
        if vec is None:
            oov += 1
        else:
            matrix[i] = vec
    return EncodedSeq(matrix=matrix, true_len=len(kept), oov_count=oov)
