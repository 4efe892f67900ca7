"""Deterministic text normalization: raw issue text -> stemmed token sequence.

Pipeline order: lowercase, strip HTML-like tag spans, drop URL-ish tokens,
replace everything outside a-z with spaces, tokenize on whitespace, drop
stop words, Porter-stem, drop stems that emptied or landed on a stop word.
All stages are pure and locale-independent; no regular expressions.
"""

from __future__ import annotations

from importlib import resources

from . import porter

# Words removed in addition to the snapshot list.  "e.g"/"i.e" cannot
# survive punctuation stripping but are kept for parity with the list the
# pipeline was frozen against.
EXTRA_STOP_WORDS = frozenset({"e.g", "i.e", "http", "htt", "or", "www"})


def _load_snapshot() -> frozenset[str]:
    text = (
        resources.files("linkrec.data").joinpath("stopwords_en.txt").read_text("utf-8")
    )
    return frozenset(w for w in text.splitlines() if w)


STOP_WORDS: frozenset[str] = _load_snapshot() | EXTRA_STOP_WORDS

_ASCII_LOWER = frozenset("abcdefghijklmnopqrstuvwxyz")

# token -> fixed-point stem; unbounded but corpora carry few distinct tokens
_stem_cache: dict[str, str] = {}


def _stem_fixpoint(token: str) -> str:
    """Stem until stable so that re-processing pipeline output is a no-op."""
    out = _stem_cache.get(token)
    if out is None:
        out = token
        while True:
            nxt = porter.stem(out)
            if nxt == out:
                break
            out = nxt
        _stem_cache[token] = out
    return out


def _strip_tags(text: str) -> str:
    """Replace <...> spans with spaces; an unclosed '<' is left alone."""
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "<":
            end = text.find(">", i + 1)
            if end == -1:
                out.append(text[i:])
                break
            out.append(" ")
            i = end + 1
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _drop_url_tokens(text: str) -> str:
    return " ".join(
        tok for tok in text.split() if not tok.startswith(("http", "www"))
    )


def _letters_only(text: str) -> str:
    return "".join(c if c in _ASCII_LOWER else " " for c in text)


def preprocess(raw: str) -> list[str]:
    """Normalize raw text to a list of stemmed tokens."""
    text = raw.lower()
    text = _strip_tags(text)
    text = _drop_url_tokens(text)
    text = _letters_only(text)
    tokens = text.split()
    out: list[str] = []
    for tok in tokens:
        if tok in STOP_WORDS:
            continue
        stemmed = _stem_fixpoint(tok)
        if stemmed and stemmed not in STOP_WORDS:
            out.append(stemmed)
    return out


def concat_fields(issue, features) -> list[str]:
    """Concatenate the selected text fields of an issue, in title,
    description, summary order, each run through :func:`preprocess`.
    """
    from .features import text_members

    members = text_members(features)
    if not members:
        raise ValueError("text feature required")
    field_of = {"T": issue.title, "D": issue.description, "S": issue.summary}
    out: list[str] = []
    for m in members:
        out.extend(preprocess(field_of[m]))
    return out
