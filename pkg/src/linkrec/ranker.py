"""Candidate generation with time-window filtering, scoring and top-K
selection.

Candidates are issues created strictly before the query, optionally within
a fixed day window ("months" are 30 days exactly).  Ties in score break to
the more recently created candidate, then to the lexicographically smaller
key, so result lists are total-ordered and repeatable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import features as feats
from . import tfidf
from .corpus import Issue, IssueSet, SECONDS_PER_DAY
from .siamese import SiameseModel, encode_issue, pair_scalars
from .textprep import concat_fields, preprocess

DAYS_PER_MONTH = 30.0

_FILTER_NAMES = {"none": None, "1m": 30.0, "2m": 60.0, "3m": 90.0}


@dataclass(frozen=True)
class TimeFilter:
    """Candidate window in days before the query's creation; None = all."""

    days: float | None = None

    def __post_init__(self):
        if self.days is not None and self.days <= 0:
            raise ValueError("window days must be positive")

    @classmethod
    def parse(cls, name: str) -> "TimeFilter":
        key = name.strip().lower()
        if key in _FILTER_NAMES:
            return cls(_FILTER_NAMES[key])
        raise ValueError(f"unknown time filter {name!r}; expected one of "
                         f"{sorted(_FILTER_NAMES)}")

    @property
    def name(self) -> str:
        for label, days in _FILTER_NAMES.items():
            if days == self.days:
                return label
        return f"{self.days:g}d"


@dataclass(frozen=True)
class Recommendation:
    key: str
    score: float
    rank: int


def candidates(query: Issue, pool: IssueSet, time_filter: TimeFilter) -> list[Issue]:
    """Issues created strictly before the query, within the window, sorted
    by creation descending then key ascending."""
    out = []
    limit = None
    if time_filter.days is not None:
        limit = time_filter.days * SECONDS_PER_DAY
    for iss in pool:
        if iss.key == query.key or iss.created >= query.created:
            continue
        if limit is not None:
            gap = (query.created - iss.created).total_seconds()
            if gap > limit:
                continue
        out.append(iss)
    out.sort(key=lambda c: (-c.created.timestamp(), c.key))
    return out


def recommend(query: Issue, pool: IssueSet, scorer, time_filter: TimeFilter,
              k: int) -> list[Recommendation]:
    """Top-k candidates by score; fewer than k candidates gives a shorter
    list."""
    if k < 1:
        raise ValueError("K must be >= 1")
    cands = candidates(query, pool, time_filter)
    if not cands:
        return []
    scores = np.asarray(scorer.score_candidates(query, cands), dtype=np.float64)
    if scores.shape != (len(cands),):
        raise ValueError("scorer returned wrong number of scores")
    order = sorted(
        range(len(cands)),
        key=lambda i: (-scores[i], -cands[i].created.timestamp(), cands[i].key),
    )
    return [
        Recommendation(key=cands[i].key, score=float(scores[i]), rank=rank)
        for rank, i in enumerate(order[:k], start=1)
    ]


class BaselineScorer:
    """TF-IDF vectors plus one of the four distance scorers.

    Only the textual members of the feature set participate; C2/CU have no
    defined combination rule for the distance baseline and are ignored.
    Vectors are cached per issue key, so one scorer instance must only be
    used against a single corpus.
    """

    def __init__(self, metric: str, feature_set, models, split_fields: bool = False):
        if metric not in tfidf.METRICS:
            raise ValueError(f"unknown metric: {metric!r}")
        self.metric = metric
        self.feature_set = feats.validate_features(feature_set)
        self.split_fields = split_fields
        self._models = models  # field name -> TfidfModel ("*" = combined)
        self._cache: dict[str, tfidf.SparseVec] = {}

    @classmethod
    def fit(cls, train: Iterable[Issue], feature_set, metric: str,
            split_fields: bool = False) -> "BaselineScorer":
        feature_set = feats.validate_features(feature_set)
        issues = list(train)
        if split_fields:
            models = {}
            for member in feats.text_members(feature_set):
                docs = [_field_tokens(iss, member) for iss in issues]
                models[member] = tfidf.fit_tfidf(docs)
        else:
            docs = [concat_fields(iss, feature_set) for iss in issues]
            models = {"*": tfidf.fit_tfidf(docs)}
        return cls(metric, feature_set, models, split_fields)

    @property
    def name(self) -> str:
        return f"tfidf-{self.metric}"

    @property
    def features(self) -> str:
        return feats.format_features(self.feature_set)

    def vectorize_issue(self, issue: Issue) -> tfidf.SparseVec:
        vec = self._cache.get(issue.key)
        if vec is not None:
            return vec
        if self.split_fields:
            vec = self._stacked_vector(issue)
        else:
            vec = tfidf.vectorize(
                self._models["*"], concat_fields(issue, self.feature_set)
            )
        self._cache[issue.key] = vec
        return vec

    def _stacked_vector(self, issue: Issue) -> tfidf.SparseVec:
        pairs: list[tuple[int, float]] = []
        offset = 0
        for member in feats.text_members(self.feature_set):
            model = self._models[member]
            block = tfidf.vectorize(model, _field_tokens(issue, member))
            pairs.extend(
                (offset + int(i), float(w))
                for i, w in zip(block.indices, block.values)
            )
            offset += len(model.vocab)
        return tfidf.sparse_from_pairs(pairs)

    def score_candidates(self, query: Issue, cands: Sequence[Issue]) -> np.ndarray:
        qv = self.vectorize_issue(query)
        return np.array(
            [tfidf.score(qv, self.vectorize_issue(c), self.metric) for c in cands],
            dtype=np.float64,
        )


def _field_tokens(issue: Issue, member: str) -> list[str]:
    raw = {"T": issue.title, "D": issue.description, "S": issue.summary}[member]
    return preprocess(raw)


class SiameseScorer:
    """Scores candidates with a trained matcher; encoder features are
    cached per issue key, so one instance per corpus."""

    def __init__(self, model: SiameseModel):
        self.model = model
        self._features: dict[str, np.ndarray] = {}

    @property
    def name(self) -> str:
        return "siamese-cnn"

    @property
    def features(self) -> str:
        return self.model.config.features

    def _encoder_features(self, issue: Issue) -> np.ndarray:
        u = self._features.get(issue.key)
        if u is None:
            u = self.model.encoder.encode_features(encode_issue(self.model, issue))
            self._features[issue.key] = u
        return u

    def score_candidates(self, query: Issue, cands: Sequence[Issue]) -> np.ndarray:
        uq = self._encoder_features(query)
        uc = np.stack([self._encoder_features(c) for c in cands])
        ua = np.broadcast_to(uq, uc.shape)
        scalar_names = self.model.config.scalar_names
        scalars = None
        if scalar_names:
            scalars = np.stack(
                [pair_scalars(query, c, scalar_names) for c in cands]
            )
        probs, _ = self.model.head_probs(ua, uc, scalars)
        return probs[:, 1]
