"""TF-IDF fit/vectorize against a hand oracle, and distance axioms."""

import itertools
import math
import warnings
from collections import Counter

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from linkrec.tfidf import (
    METRICS,
    SparseVec,
    distance,
    fit_tfidf,
    score,
    sparse_from_pairs,
    vectorize,
)


def oracle_fit(docs):
    """Independent computation: idf(w) = ln(|D| / df(w))."""
    df = Counter()
    for doc in docs:
        df.update(set(doc))
    n = len(docs)
    return {w: math.log(n / df[w]) for w in df}


def oracle_vectorize(idf_by_term, doc):
    """Independent computation: weight = count/max_count * idf."""
    if not doc:
        return {}
    counts = Counter(doc)
    max_count = max(counts.values())
    out = {}
    for term, c in counts.items():
        if term in idf_by_term:
            w = (c / max_count) * idf_by_term[term]
            if w != 0.0:
                out[term] = w
    return out


def as_dict(model, vec):
    terms = {i: t for t, i in model.vocab.items()}
    return {terms[int(i)]: float(v) for i, v in zip(vec.indices, vec.values)}


def dense(pairs):
    return sparse_from_pairs(list(enumerate(pairs)))


class TestFit:
    def test_two_doc_hand_values(self):
        model = fit_tfidf([["a", "b"], ["a"]])
        assert model.doc_count == 2
        assert model.idf[model.vocab["a"]] == pytest.approx(0.0)
        assert model.idf[model.vocab["b"]] == pytest.approx(math.log(2))

    def test_single_document_all_zero_idf(self):
        model = fit_tfidf([["x", "y", "x"]])
        assert np.allclose(model.idf, 0.0)

    def test_vocab_dense_indices(self):
        model = fit_tfidf([["c", "a"], ["b"]])
        assert sorted(model.vocab.values()) == [0, 1, 2]

    def test_absent_token_not_in_vocab(self):
        model = fit_tfidf([["a"]])
        assert "z" not in model.vocab

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            fit_tfidf([])
        with pytest.raises(ValueError):
            fit_tfidf([[], []])


class TestVectorize:
    def test_hand_example(self):
        model = fit_tfidf([["a", "b"], ["a"]])
        vec = as_dict(model, vectorize(model, ["a", "a", "b"]))
        # idf(a) = 0 so "a" is dropped; b: (1/2) * ln 2
        assert vec == pytest.approx({"b": 0.5 * math.log(2)})

    def test_empty_doc(self):
        model = fit_tfidf([["a"], ["b"]])
        assert vectorize(model, []).nnz == 0

    def test_repeated_single_token_full_idf(self):
        model = fit_tfidf([["a"], ["b"]])
        vec = as_dict(model, vectorize(model, ["a", "a", "a"]))
        assert vec == pytest.approx({"a": math.log(2)})

    def test_oov_ignored_but_counts_toward_max(self):
        model = fit_tfidf([["a"], ["b"]])
        vec = as_dict(model, vectorize(model, ["a", "zz", "zz"]))
        assert vec == pytest.approx({"a": 0.5 * math.log(2)})

    def test_weights_bounded_by_idf(self):
        docs = [["a", "b", "c"], ["a", "c"], ["d"]]
        model = fit_tfidf(docs)
        for doc in docs:
            for term, w in as_dict(model, vectorize(model, doc)).items():
                assert w <= model.idf[model.vocab[term]] + 1e-12


def test_exhaustive_subset_corpora_match_oracle():
    """fit -> vectorize equals the hand oracle on every corpus of up to 5
    subset-documents over a 4-term alphabet (multisets of docs; term
    multiplicity inside a doc is covered separately)."""
    alphabet = ("a", "b", "c", "d")
    subset_docs = [
        tuple(t for t, keep in zip(alphabet, mask) if keep)
        for mask in itertools.product((0, 1), repeat=4)
    ]
    checked = 0
    for size in range(1, 6):
        for combo in itertools.combinations_with_replacement(subset_docs, size):
            docs = [list(d) for d in combo]
            if all(not d for d in docs):
                continue
            model = fit_tfidf(docs)
            idf_oracle = oracle_fit(docs)
            assert set(model.vocab) == set(idf_oracle)
            for term, col in model.vocab.items():
                assert model.idf[col] == pytest.approx(idf_oracle[term])
            for doc in docs:
                got = as_dict(model, vectorize(model, doc))
                assert got == pytest.approx(oracle_vectorize(idf_oracle, doc))
            checked += 1
    assert checked > 20000


@given(
    st.lists(
        st.lists(st.sampled_from("abcd"), min_size=0, max_size=6),
        min_size=1,
        max_size=5,
    ).filter(lambda docs: any(docs))
)
@settings(max_examples=200)
def test_random_multiplicity_corpora_match_oracle(docs):
    model = fit_tfidf(docs)
    idf_oracle = oracle_fit(docs)
    for doc in docs:
        got = as_dict(model, vectorize(model, doc))
        assert got == pytest.approx(oracle_vectorize(idf_oracle, doc))


class TestDistanceHandValues:
    def test_identity(self):
        u = dense([1.0, 2.0, 3.0])
        assert distance(u, u, "cosine") == pytest.approx(1.0)
        for metric in ("euclidean", "manhattan", "chebyshev"):
            assert distance(u, u, metric) == pytest.approx(0.0)

    def test_orthogonal_unit_axes(self):
        u = sparse_from_pairs([(0, 1.0)])
        v = sparse_from_pairs([(1, 1.0)])
        assert distance(u, v, "cosine") == pytest.approx(0.0)
        assert distance(u, v, "euclidean") == pytest.approx(math.sqrt(2))
        assert distance(u, v, "manhattan") == pytest.approx(2.0)
        assert distance(u, v, "chebyshev") == pytest.approx(1.0)

    def test_against_zero_vector(self):
        u = dense([3.0, 4.0])
        z = dense([])
        assert distance(u, z, "euclidean") == pytest.approx(5.0)
        assert distance(u, z, "manhattan") == pytest.approx(7.0)
        assert distance(u, z, "chebyshev") == pytest.approx(4.0)

    def test_cosine_zero_zero_flagged(self):
        z = dense([])
        with pytest.warns(RuntimeWarning):
            assert distance(z, z, "cosine") == 0.0

    def test_cosine_one_zero_is_zero(self):
        u = dense([1.0])
        z = dense([])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert distance(u, z, "cosine") == 0.0

    def test_unknown_metric(self):
        u = dense([1.0])
        with pytest.raises(ValueError, match="unknown metric"):
            distance(u, u, "hamming")

    def test_score_adapter_signs(self):
        u = dense([1.0, 0.0])
        v = dense([0.0, 1.0])
        assert score(u, v, "cosine") == distance(u, v, "cosine")
        for metric in ("euclidean", "manhattan", "chebyshev"):
            assert score(u, v, metric) == -distance(u, v, metric)


def random_sparse(rng, size=12, max_nnz=6):
    nnz = int(rng.integers(0, max_nnz + 1))
    idx = rng.choice(size, size=nnz, replace=False)
    vals = rng.uniform(-5.0, 5.0, size=nnz)
    vals[vals == 0.0] = 1.0
    return sparse_from_pairs([(int(i), float(v)) for i, v in zip(idx, vals)])


def to_dense(vec, size=12):
    out = np.zeros(size)
    out[vec.indices] = vec.values
    return out


class TestDistanceAxioms:
    def test_500_trials_vs_dense_oracle_and_axioms(self):
        rng = np.random.default_rng(42)
        warnings.simplefilter("ignore", RuntimeWarning)
        for _ in range(500):
            u, v, w = (random_sparse(rng) for _ in range(3))
            du, dv, dw = to_dense(u), to_dense(v), to_dense(w)
            # dense-vector oracle
            assert distance(u, v, "euclidean") == pytest.approx(
                np.linalg.norm(du - dv), abs=1e-12
            )
            assert distance(u, v, "manhattan") == pytest.approx(
                np.abs(du - dv).sum(), abs=1e-12
            )
            assert distance(u, v, "chebyshev") == pytest.approx(
                np.abs(du - dv).max(initial=0.0), abs=1e-12
            )
            nu, nv = np.linalg.norm(du), np.linalg.norm(dv)
            if nu > 0 and nv > 0:
                assert distance(u, v, "cosine") == pytest.approx(
                    float(du @ dv) / (nu * nv), abs=1e-12
                )
            # symmetry for all four
            for metric in METRICS:
                assert distance(u, v, metric) == pytest.approx(
                    distance(v, u, metric), abs=1e-12
                )
            # triangle inequality for the three true distances
            for metric in ("euclidean", "manhattan", "chebyshev"):
                assert distance(u, w, metric) <= (
                    distance(u, v, metric) + distance(v, w, metric) + 1e-9
                )
            # componentwise bound chain
            assert (
                distance(u, v, "chebyshev")
                <= distance(u, v, "euclidean") + 1e-12
                <= distance(u, v, "manhattan") + 1e-9
            )

    def test_cosine_scale_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            u = random_sparse(rng)
            v = random_sparse(rng)
            if u.nnz == 0 or v.nnz == 0:
                continue
            alpha = float(rng.uniform(0.1, 50.0))
            scaled = SparseVec(u.indices, u.values * alpha)
            assert distance(scaled, v, "cosine") == pytest.approx(
                distance(u, v, "cosine"), abs=1e-9
            )
