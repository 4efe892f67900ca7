"""Feature-set handling for the T/D/S text fields and the C2/CU time gaps."""

from __future__ import annotations

from typing import FrozenSet, Iterable

TEXT_FEATURES = ("T", "D", "S")
SCALAR_FEATURES = ("C2", "CU")
ALL_FEATURES = TEXT_FEATURES + SCALAR_FEATURES

FeatureSet = FrozenSet[str]


def parse_features(spec: str) -> FeatureSet:
    """Parse a compact feature string such as "TDS", "TDSC2CU" or "T+CC".

    Separators (space, comma, plus) are ignored; "CC" is accepted as an
    alias for "C2".
    """
    s = spec.upper().replace(",", "").replace("+", "").replace(" ", "")
    out: set[str] = set()
    i = 0
    while i < len(s):
        if s.startswith("C2", i) or s.startswith("CC", i):
            out.add("C2")
            i += 2
        elif s.startswith("CU", i):
            out.add("CU")
            i += 2
        elif s[i] in TEXT_FEATURES:
            out.add(s[i])
            i += 1
        else:
            raise ValueError(f"unknown feature at {spec!r}[{i}]")
    if not out:
        raise ValueError("empty feature set")
    return frozenset(out)


def format_features(features: Iterable[str]) -> str:
    feats = set(features)
    unknown = feats - set(ALL_FEATURES)
    if unknown:
        raise ValueError(f"unknown features: {sorted(unknown)}")
    return "".join(f for f in ALL_FEATURES if f in feats)


def text_members(features: Iterable[str]) -> tuple[str, ...]:
    feats = set(features)
    return tuple(f for f in TEXT_FEATURES if f in feats)


def scalar_members(features: Iterable[str]) -> tuple[str, ...]:
    feats = set(features)
    return tuple(f for f in SCALAR_FEATURES if f in feats)


def validate_features(features: Iterable[str]) -> FeatureSet:
    feats = frozenset(features)
    unknown = feats - set(ALL_FEATURES)
    if unknown:
        raise ValueError(f"unknown features: {sorted(unknown)}")
    if not text_members(feats):
        raise ValueError("text feature required")
    return feats
