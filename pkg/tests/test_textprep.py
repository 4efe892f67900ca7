"""Preprocessing pipeline tests, including the golden tracker excerpts."""

import hypothesis.strategies as st
import pytest
from hypothesis import given

from linkrec.porter import stem
from linkrec.textprep import STOP_WORDS, preprocess, concat_fields

from conftest import make_issue


def test_empty_input():
    assert preprocess("") == []


def test_stop_word_saturation():
    assert preprocess("The THE the!!!") == []


def test_shared_stem_prefix():
    out = preprocess("Running runs runner")
    assert len(out) == 3
    assert all(tok.startswith("run") for tok in out)


def test_urls_and_tags_removed():
    out = preprocess("<p>see https://x.io/y?z=1 and www.example.com now</p> ok")
    assert out == ["see", "ok"]


def test_numbers_removed_entirely():
    assert preprocess("error 600 codes 404") == ["error", "code"]


def test_unclosed_tag_left_for_punctuation_pass():
    assert preprocess("a < b crash") == ["b", "crash"]


def test_stem_landing_on_stop_word_is_dropped():
    # "https" stems to "http", which is on the extra list
    assert preprocess("https handshake") == ["handshak"]


def test_non_ascii_treated_as_separators():
    assert preprocess("café bug") == ["caf", "bug"]


# Reference excerpts from the upstream NLTK-based pipeline's published
# before/after table.  That pipeline printed some tokens unstemmed
# ("message", "writing"), so the comparison stems the reference tokens too
# and asserts stem-level equality.

FLUME_RAW = (
    "<p> RPM install runs as user flume, but a file such as/var/log/messages "
    "is default perms 600 on centos/redhat. </p> <p>Ideally we don’t want "
    "to run flume node as root.</p>Flume node’s tail source does not "
    "report error or go into error state to user attempts to tail a file it "
    "doesn’t have permissions to read. Flume node’s tail source does "
    "not report error or go into error state to user attempts to tail a file "
    "it doesn’t have permissions to read."
)
FLUME_REF = (
    "rpm install run user flume file var log message default perm centos "
    "redhat ideally want run flume node root flume node tail source report "
    "error go error state user attempt tail file permission read flume node "
    "tail source report error go error state user attempt tail file "
    "permission read"
).split()

MDLSITE_RAW = (
    "</p>Rather than writing docs AT moodle DOT org, it would be nice to have "
    "mail to links.</p>Add email obfuscation to Moodle Docs Add email "
    "obfuscation to Moodle Docs Fix."
)
# Three known quirks of the reference output, adjusted here: it dropped
# "org" and the trailing "fix" without an explanation, and it let the stop
# word "to" through once ("mail to link").
MDLSITE_REF = (
    "rather writing doc moodle dot org would nice mail link add email "
    "obfuscation moodle doc add email obfuscation moodle doc fix"
).split()


def test_golden_flume_excerpt():
    assert preprocess(FLUME_RAW) == [stem(tok) for tok in FLUME_REF]


def test_golden_flume_prefix():
    out = preprocess(FLUME_RAW)
    assert out[:9] == ["rpm", "instal", "run", "user", "flume", "file", "var",
                       "log", "messag"]


def test_golden_mdlsite_excerpt():
    assert preprocess(MDLSITE_RAW) == [stem(tok) for tok in MDLSITE_REF]


# concat_fields


def test_concat_single_field():
    iss = make_issue("K", title="Fix login bug", description="ignored")
    assert concat_fields(iss, {"T"}) == preprocess("Fix login bug")


def test_concat_duplicate_summary():
    iss = make_issue("K", title="parser crash", summary="parser crash")
    out = concat_fields(iss, {"T", "S"})
    assert out == preprocess("parser crash") * 2


def test_concat_fixed_field_order():
    iss = make_issue("K", title="alpha", description="beta", summary="gamma")
    assert concat_fields(iss, {"S", "D", "T"}) == ["alpha", "beta", "gamma"]


def test_concat_requires_text_feature():
    iss = make_issue("K", title="alpha")
    with pytest.raises(ValueError, match="text feature required"):
        concat_fields(iss, {"C2"})


def test_concat_scalar_members_do_not_add_text():
    iss = make_issue("K", title="alpha", description="beta")
    assert concat_fields(iss, {"T", "C2", "CU"}) == ["alpha"]


# properties

text_strategy = st.text(
    alphabet=st.characters(max_codepoint=0x2FF),
    max_size=200,
)


@given(text_strategy)
def test_idempotent_at_token_level(raw):
    out = preprocess(raw)
    assert preprocess(" ".join(out)) == out


@given(text_strategy)
def test_no_stop_words_survive(raw):
    assert not set(preprocess(raw)) & STOP_WORDS


@given(text_strategy)
def test_tokens_are_clean(raw):
    for tok in preprocess(raw):
        assert tok
        assert tok.isascii() and tok.isalpha() and tok == tok.lower()


@given(text_strategy)
def test_deterministic(raw):
    assert preprocess(raw) == preprocess(raw)


def test_order_preserved():
    out = preprocess("zebra apple zebra mango")
    assert out == ["zebra", "appl", "zebra", "mango"]
