"""Shared builders for corpora, embedding tables and synthetic data."""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from linkrec.corpus import Issue, IssueSet
from linkrec.embeddings import EmbeddingTable

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)

# letters that survive preprocessing unchanged: no vowels (measure 0), no
# trailing-s plural stripping, not stop words
_CONSONANTS = "bcdfghjklmnpqrtvwz"


def at_day(day: float) -> datetime:
    return T0 + timedelta(days=day)


def make_issue(key, *, day=0.0, title="", description="", summary="",
               updated_day=None, links=()):
    created = at_day(day)
    updated = created if updated_day is None else at_day(updated_day)
    return Issue(
        key=key,
        title=title,
        description=description,
        summary=summary,
        created=created,
        updated=updated,
        links=frozenset(links),
    )


def stable_token(rng: np.random.Generator, length: int = 5) -> str:
    return "".join(rng.choice(list(_CONSONANTS), size=length))


def make_separable_corpus(n_pairs: int, seed: int = 0, vocab_per_pair: int = 10,
                          dim: int = 16):
    """Corpus of linked pairs where both sides carry the same private
    token sequence; unlinked issues share no tokens.

    All first members come first in time, then all second members in a
    shuffled order, so a constant scorer cannot win on the recency
    tie-break.  Returns (issue_set, embedding_table, pair_keys).
    """
    rng = np.random.default_rng(seed)
    vocab: dict[str, np.ndarray] = {}
    pair_tokens = []
    for _ in range(n_pairs):
        tokens = []
        while len(tokens) < vocab_per_pair:
            tok = stable_token(rng)
            if tok not in vocab:
                vocab[tok] = rng.normal(0.0, 1.0, size=dim)
                tokens.append(tok)
        pair_tokens.append(tokens)

    issues = []
    pair_keys = []
    later_order = rng.permutation(n_pairs)
    for p in range(n_pairs):
        text = " ".join(pair_tokens[p])
        a_key, b_key = f"A-{p:04d}", f"B-{p:04d}"
        pair_keys.append((a_key, b_key))
        issues.append(
            make_issue(a_key, day=p * 0.1, title=text, links={b_key})
        )
    for slot, p in enumerate(later_order):
        a_key, b_key = pair_keys[p]
        text = " ".join(pair_tokens[p])
        issues.append(
            make_issue(
                b_key,
                day=n_pairs * 0.1 + slot * 0.1,
                title=text,
                links={a_key},
            )
        )
    table = EmbeddingTable(dim=dim, rows=vocab)
    return IssueSet(issues), table, pair_keys


def write_jsonl(path, issues) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for iss in issues:
            fh.write(json.dumps({
                "key": iss.key,
                "title": iss.title,
                "description": iss.description,
                "summary": iss.summary,
                "created": iss.created.isoformat(),
                "updated": iss.updated.isoformat(),
                "links": sorted(iss.links),
            }))
            fh.write("\n")


def write_vectors(path, table: EmbeddingTable) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.rows)} {table.dim}\n")
        for tok in sorted(table.rows):
            comps = " ".join(format(x, ".8f") for x in table.rows[tok])
            fh.write(f"{tok} {comps}\n")


@pytest.fixture
def tiny_corpus() -> IssueSet:
    """Five issues, two links, fixed timestamps."""
    return IssueSet([
        make_issue("I-1", day=0, title="alpha crash report", links={"I-3"}),
        make_issue("I-2", day=1, title="beta crash report"),
        make_issue("I-3", day=2, title="alpha crash again", links={"I-1"}),
        make_issue("I-4", day=3, title="gamma feature request", links={"I-5"}),
        make_issue("I-5", day=10, title="gamma feature follow", links={"I-4"}),
    ])
