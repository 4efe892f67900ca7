"""Issue corpus: loading, link-graph normalization, chronological splits,
time-gap features and labeled training pairs.

Input is JSON lines, one issue per line, with fields
``key, title, description, summary, created, updated, links`` and ISO-8601
timestamps (naive timestamps are taken as UTC).  On load the link graph is
symmetrized (union of directed mentions), self links and links to unknown
keys are dropped, and issues are sorted by (created, key).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Iterator

import numpy as np

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0


class CorpusError(ValueError):
    """Malformed input file or record."""


@dataclass(frozen=True)
class Issue:
    key: str
    title: str
    description: str
    summary: str
    created: datetime
    updated: datetime
    links: frozenset[str]


@dataclass(frozen=True)
class LabeledPair:
    """Training pair; ``a`` was created before ``b``; label 1 means linked."""

    a: str
    b: str
    label: int


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp, normalized to UTC."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


class IssueSet:
    """Immutable collection of issues sorted by (created, key)."""

    def __init__(self, issues: Iterable[Issue], _presorted: bool = False):
        items = list(issues)
        if not _presorted:
            items.sort(key=lambda iss: (iss.created, iss.key))
        self._issues: tuple[Issue, ...] = tuple(items)
        self._by_key = {iss.key: iss for iss in self._issues}
        if len(self._by_key) != len(self._issues):
            seen: set[str] = set()
            for iss in self._issues:
                if iss.key in seen:
                    raise CorpusError(f"duplicate key: {iss.key}")
                seen.add(iss.key)
        self._position = {iss.key: i for i, iss in enumerate(self._issues)}

    def __len__(self) -> int:
        return len(self._issues)

    def __iter__(self) -> Iterator[Issue]:
        return iter(self._issues)

    def __getitem__(self, i: int) -> Issue:
        return self._issues[i]

    def __contains__(self, key: str) -> bool:
        return key in self._by_key

    @property
    def issues(self) -> tuple[Issue, ...]:
        return self._issues

    @property
    def day_zero(self) -> datetime | None:
        return self._issues[0].created if self._issues else None

    def by_key(self, key: str) -> Issue:
        return self._by_key[key]

    def position(self, key: str) -> int:
        return self._position[key]

    def link_count(self) -> int:
        """Number of undirected links among issues in this set."""
        n = 0
        for iss in self._issues:
            for other in iss.links:
                if other in self._by_key:
                    n += 1
        return n // 2


def _normalize_links(issues: list[Issue]) -> list[Issue]:
    keys = {iss.key for iss in issues}
    adj: dict[str, set[str]] = {iss.key: set() for iss in issues}
    dropped = 0
    for iss in issues:
        for other in iss.links:
            if other == iss.key:
                continue
            if other not in keys:
                dropped += 1
                continue
            adj[iss.key].add(other)
            adj[other].add(iss.key)
    if dropped:
        log.warning("dropped %d links to keys not present in the file", dropped)
    return [
        Issue(
            key=iss.key,
            title=iss.title,
            description=iss.description,
            summary=iss.summary,
            created=iss.created,
            updated=iss.updated,
            links=frozenset(adj[iss.key]),
        )
        for iss in issues
    ]


def _parse_record(obj: dict, line_no: int) -> Issue:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {line_no}: record is not an object")
    for field in ("key", "title", "created"):
        if field not in obj:
            raise CorpusError(f"line {line_no}: missing required field {field!r}")
    key = obj["key"]
    if not isinstance(key, str) or not key:
        raise CorpusError(f"line {line_no}: key must be a non-empty string")
    try:
        created = parse_timestamp(str(obj["created"]))
        updated = (
            parse_timestamp(str(obj["updated"])) if obj.get("updated") else created
        )
    except ValueError as exc:
        raise CorpusError(f"line {line_no}: bad timestamp: {exc}") from exc
    if updated < created:
        raise CorpusError(f"line {line_no}: updated precedes created for {key!r}")
    links = obj.get("links", [])
    if not isinstance(links, (list, tuple)):
        raise CorpusError(f"line {line_no}: links must be an array")
    return Issue(
        key=key,
        title=str(obj.get("title") or ""),
        description=str(obj.get("description") or ""),
        summary=str(obj.get("summary") or ""),
        created=created,
        updated=updated,
        links=frozenset(str(k) for k in links),
    )


def load_issues(path, format: str = "jsonl") -> IssueSet:
    """Load an issue export into a normalized :class:`IssueSet`."""
    if format != "jsonl":
        raise CorpusError(f"unsupported format: {format}")
    issues: list[Issue] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {line_no}: invalid JSON: {exc}") from exc
            issue = _parse_record(obj, line_no)
            if issue.key in seen:
                raise CorpusError(f"duplicate key: {issue.key}")
            seen.add(issue.key)
            issues.append(issue)
    return IssueSet(_normalize_links(issues))


def issue_to_record(issue: Issue) -> dict:
    """JSONL record for an issue (inverse of loading, links sorted)."""
    return {
        "key": issue.key,
        "title": issue.title,
        "description": issue.description,
        "summary": issue.summary,
        "created": issue.created.isoformat(),
        "updated": issue.updated.isoformat(),
        "links": sorted(issue.links),
    }


def day_index(issue: Issue, day_zero: datetime) -> int:
    """Whole days elapsed from day_zero to the issue's creation."""
    return int((issue.created - day_zero).total_seconds() // SECONDS_PER_DAY)


def chronological_split(issue_set: IssueSet, split_day: int) -> tuple[IssueSet, IssueSet]:
    """Partition into (train, test): train holds issues created before
    ``split_day`` whole days after the earliest creation timestamp.
    """
    if split_day < 0:
        raise ValueError("split_day must be >= 0")
    day_zero = issue_set.day_zero
    if day_zero is None:
        return IssueSet(()), IssueSet(())
    train = [iss for iss in issue_set if day_index(iss, day_zero) < split_day]
    test = [iss for iss in issue_set if day_index(iss, day_zero) >= split_day]
    return IssueSet(train, _presorted=True), IssueSet(test, _presorted=True)


def time_gap_cc(x: Issue, y: Issue) -> float:
    """Absolute gap between creation times, in fractional days."""
    return abs((x.created - y.created).total_seconds()) / SECONDS_PER_DAY


def time_gap_cu(x: Issue, y: Issue) -> float:
    """Absolute gap between x's creation and y's update, in fractional days.

    x is the query issue, y the candidate; not symmetric in its arguments.
    """
    return abs((x.created - y.updated).total_seconds()) / SECONDS_PER_DAY


def _positive_pairs(train: IssueSet) -> list[tuple[int, int]]:
    pairs: list[tuple[int, int]] = []
    for jb, iss in enumerate(train):
        partners = sorted(
            train.position(k) for k in iss.links if k in train and train.position(k) < jb
        )
        pairs.extend((ja, jb) for ja in partners)
    return pairs


def generate_training_pairs(
    train: IssueSet,
    neg_ratio: float = 1.0,
    seed: int = 0,
    lonely_negatives: bool = False,
) -> list[LabeledPair]:
    """Emit every linked (earlier, later) pair once with label 1, plus
    ``round(neg_ratio * positives)`` negatives sampled uniformly without
    replacement from the non-linked pairs (capped at availability).

    With ``lonely_negatives`` the negative pool is restricted to pairs where
    at least one side has no links at all.
    """
    if neg_ratio < 0:
        raise ValueError("neg_ratio must be non-negative")
    if len(train) == 0:
        raise ValueError("empty training split")
    positives = _positive_pairs(train)
    if not positives:
        raise ValueError("no links in training split")
    n = len(train)
    total = n * (n - 1) // 2
    linked = set(positives)
    lonely = np.array([not iss.links for iss in train], dtype=bool)
    if lonely_negatives:
        non_lonely = int((~lonely).sum())
        available = total - non_lonely * (non_lonely - 1) // 2
    else:
        available = total - len(positives)
    target = min(int(round(neg_ratio * len(positives))), available)

    def acceptable(i: int, j: int) -> bool:
        if (i, j) in linked:
            return False
        if lonely_negatives and not (lonely[i] or lonely[j]):
            return False
        return True

    rng = np.random.default_rng(seed)
    negatives: list[tuple[int, int]] = []
    if total <= 200_000 or target * 2 >= available:
        pool = [
            (i, j) for i in range(n) for j in range(i + 1, n) if acceptable(i, j)
        ]
        idx = rng.choice(len(pool), size=target, replace=False) if target else []
        negatives = [pool[int(k)] for k in idx]
    else:
        chosen: set[tuple[int, int]] = set()
        while len(negatives) < target:
            u = int(rng.integers(n))
            v = int(rng.integers(n))
            if u == v:
                continue
            i, j = (u, v) if u < v else (v, u)
            if (i, j) in chosen or not acceptable(i, j):
                continue
            chosen.add((i, j))
            negatives.append((i, j))

    keys = [iss.key for iss in train]
    out = [LabeledPair(keys[i], keys[j], 1) for i, j in positives]
    out.extend(LabeledPair(keys[i], keys[j], 0) for i, j in negatives)
    return out
