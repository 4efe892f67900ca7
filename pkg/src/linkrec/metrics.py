"""Ranking metrics and the experiment evaluation over a test split.

Accuracy@K is the hit rate (fraction of queries with at least one relevant
key in the top K), which makes Accuracy@1 coincide with MRR@1 exactly.
MRR@K is the mean truncated reciprocal rank of the first relevant item,
zero on a miss.  Recall@K is macro-averaged per query.  Queries whose
links all point to later-created issues are unreachable by construction and
are excluded (and counted) rather than scored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import features as feats
from .corpus import IssueSet
from .ranker import TimeFilter, recommend

DEFAULT_KS = (1, 2, 3, 5)

CSV_COLUMNS = (
    "dataset",
    "features",
    "scorer",
    "filter",
    "K",
    "accuracy",
    "mrr",
    "recall",
    "queries",
    "excluded",
)


@dataclass(frozen=True)
class QueryResult:
    query: str
    ranked: tuple[str, ...]  # top-K candidate keys, best first
    relevant: frozenset[str]

    def __post_init__(self):
        if not self.relevant:
            raise ValueError(f"query {self.query!r} has no relevant keys")


def _check(results: Sequence[QueryResult], k: int) -> None:
    if k < 1:
        raise ValueError("K must be >= 1")
    if not results:
        raise ValueError("no evaluable queries")


def accuracy_at_k(results: Sequence[QueryResult], k: int) -> float:
    """Hit rate: fraction of queries with a relevant key in the top K."""
    _check(results, k)
    hits = sum(1 for r in results if any(c in r.relevant for c in r.ranked[:k]))
    return hits / len(results)


def mrr_at_k(results: Sequence[QueryResult], k: int) -> float:
    """Mean reciprocal rank of the first relevant item within the top K."""
    _check(results, k)
    total = 0.0
    for r in results:
        for pos, c in enumerate(r.ranked[:k], start=1):
            if c in r.relevant:
                total += 1.0 / pos
                break
    return total / len(results)


def recall_at_k(results: Sequence[QueryResult], k: int) -> float:
    """Macro average of |relevant in top K| / |relevant|."""
    _check(results, k)
    total = 0.0
    for r in results:
        found = sum(1 for c in r.ranked[:k] if c in r.relevant)
        total += found / len(r.relevant)
    return total / len(results)


_TEXT_COMBOS = ("T", "D", "S", "TD", "TS", "TDS", "DS")
_SCALAR_COMBOS = ("", "C2", "CU", "C2CU")


def enumerate_feature_combos() -> list[frozenset]:
    """The 28 feature sets: each non-empty text subset alone, with C2,
    with CU, and with both."""
    return [
        feats.parse_features(text + scalar)
        for scalar in _SCALAR_COMBOS
        for text in _TEXT_COMBOS
    ]


@dataclass(frozen=True)
class EvalConfig:
    dataset: str
    features: str
    scorer: str
    filter: str


@dataclass
class EvalReport:
    config: EvalConfig
    per_k: dict[int, dict[str, float]]
    queries: int
    excluded: int
    forward_links_dropped: int

    def to_json(self) -> dict:
        return {
            "dataset": self.config.dataset,
            "features": self.config.features,
            "scorer": self.config.scorer,
            "filter": self.config.filter,
            "per_k": {
                str(k): dict(metrics) for k, metrics in sorted(self.per_k.items())
            },
            "queries": self.queries,
            "excluded": self.excluded,
            "forward_links_dropped": self.forward_links_dropped,
        }

    def csv_rows(self) -> list[dict]:
        rows = []
        for k in sorted(self.per_k):
            m = self.per_k[k]
            rows.append(
                {
                    "dataset": self.config.dataset,
                    "features": self.config.features,
                    "scorer": self.config.scorer,
                    "filter": self.config.filter,
                    "K": k,
                    "accuracy": m["accuracy"],
                    "mrr": m["mrr"],
                    "recall": m["recall"],
                    "queries": self.queries,
                    "excluded": self.excluded,
                }
            )
        return rows


def collect_query_results(
    pool: IssueSet,
    queries: IssueSet,
    scorer,
    time_filter: TimeFilter,
    max_k: int,
) -> tuple[list[QueryResult], int, int]:
    """Rank candidates for every query with at least one backward link.

    Returns (results, excluded_query_count, forward_links_dropped).
    """
    results: list[QueryResult] = []
    excluded = 0
    forward = 0
    for query in queries:
        in_pool = [k for k in query.links if k in pool]
        relevant = {k for k in in_pool if pool.by_key(k).created < query.created}
        forward += len(in_pool) - len(relevant)
        if not relevant:
            excluded += 1
            continue
        recs = recommend(query, pool, scorer, time_filter, max_k)
        results.append(
            QueryResult(
                query=query.key,
                ranked=tuple(r.key for r in recs),
                relevant=frozenset(relevant),
            )
        )
    return results, excluded, forward


def evaluate(
    pool: IssueSet,
    queries: IssueSet,
    scorer,
    time_filter: TimeFilter,
    ks: Iterable[int] = DEFAULT_KS,
    config: EvalConfig | None = None,
) -> EvalReport:
    """Full evaluation of one (features, scorer, filter) configuration."""
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("K values must be >= 1")
    if config is None:
        config = EvalConfig(
            dataset="",
            features=getattr(scorer, "features", ""),
            scorer=getattr(scorer, "name", type(scorer).__name__),
            filter=time_filter.name,
        )
    scorer_features = getattr(scorer, "features", None)
    if scorer_features is not None and config.features not in ("", scorer_features):
        raise ValueError(
            f"config features {config.features!r} do not match "
            f"scorer features {scorer_features!r}"
        )
    results, excluded, forward = collect_query_results(
        pool, queries, scorer, time_filter, max(ks)
    )
    if not results:
        raise ValueError("no evaluable queries")
    per_k = {
        k: {
            "accuracy": accuracy_at_k(results, k),
            "mrr": mrr_at_k(results, k),
            "recall": recall_at_k(results, k),
        }
        for k in ks
    }
    return EvalReport(
        config=config,
        per_k=per_k,
        queries=len(results),
        excluded=excluded,
        forward_links_dropped=forward,
    )
