"""Word-vector loading and fixed-length encoding."""

import numpy as np
import pytest

from linkrec.embeddings import (
    EmbeddingTable,
    VectorFormatError,
    encode,
    load_vectors,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestLoad:
    def test_two_token_file(self, tmp_path):
        path = write(tmp_path / "v.txt", "hello 0.1 0.2\nworld 0.3 0.4\n")
        table = load_vectors(path, dim=2, stem_vocab=False)
        assert set(table.rows) == {"hello", "world"}
        assert table.rows["hello"] == pytest.approx([0.1, 0.2])

    def test_header_line_skipped(self, tmp_path):
        path = write(tmp_path / "v.txt", "2 2\nhello 0.1 0.2\nworld 0.3 0.4\n")
        table = load_vectors(path, dim=2, stem_vocab=False)
        assert set(table.rows) == {"hello", "world"}

    def test_dim_mismatch_names_line(self, tmp_path):
        path = write(tmp_path / "v.txt", "hello 0.1 0.2\n")
        with pytest.raises(VectorFormatError, match="line 1"):
            load_vectors(path, dim=3, stem_vocab=False)

    def test_duplicate_token_last_wins(self, tmp_path, caplog):
        path = write(tmp_path / "v.txt", "tok 1.0\ntok 2.0\n")
        with caplog.at_level("WARNING"):
            table = load_vectors(path, dim=1, stem_vocab=False)
        assert table.rows["tok"] == pytest.approx([2.0])
        assert any("duplicate token" in r.message for r in caplog.records)

    def test_stem_vocab_aligns_lookups(self, tmp_path):
        path = write(tmp_path / "v.txt", "running 1.0\n")
        table = load_vectors(path, dim=1, stem_vocab=True)
        assert "run" in table.rows

    def test_stem_collision_first_surface_wins(self, tmp_path):
        # vector files order tokens by frequency; keep the frequent form
        path = write(tmp_path / "v.txt", "run 1.0\nrunning 2.0\n")
        table = load_vectors(path, dim=1, stem_vocab=True)
        assert table.rows["run"] == pytest.approx([1.0])

    def test_non_numeric_rejected(self, tmp_path):
        path = write(tmp_path / "v.txt", "tok x y\n")
        with pytest.raises(VectorFormatError, match="line 1"):
            load_vectors(path, dim=2, stem_vocab=False)


def table_of(dim=2, **rows):
    return EmbeddingTable(
        dim=dim, rows={k: np.asarray(v, dtype=np.float64) for k, v in rows.items()}
    )


class TestEncode:
    def test_empty_tokens_all_pad(self):
        table = table_of(a=[1.0, 2.0])
        seq = encode([], table, max_len=4)
        assert seq.matrix.shape == (4, 2)
        assert not seq.matrix.any()
        assert seq.true_len == 0
        assert seq.oov_count == 0

    def test_known_tokens_then_padding(self):
        table = table_of(a=[1.0, 0.0], b=[0.0, 1.0], c=[1.0, 1.0])
        seq = encode(["a", "b", "c"], table, max_len=5)
        assert seq.true_len == 3
        assert seq.matrix[0] == pytest.approx([1.0, 0.0])
        assert seq.matrix[2] == pytest.approx([1.0, 1.0])
        assert not seq.matrix[3:].any()

    def test_truncation_keeps_head(self):
        table = table_of(dim=1, **{f"t{i}": [float(i)] for i in range(10)})
        seq = encode([f"t{i}" for i in range(10)], table, max_len=5)
        assert seq.true_len == 5
        assert seq.matrix[:, 0] == pytest.approx([0.0, 1.0, 2.0, 3.0, 4.0])

    def test_oov_counted_and_zero(self):
        table = table_of(a=[1.0, 1.0])
        seq = encode(["a", "zz", "a", "qq"], table, max_len=8)
        assert seq.oov_count == 2
        assert not seq.matrix[1].any() and not seq.matrix[3].any()

    def test_fully_covered_corpus_zero_oov(self):
        table = table_of(a=[1.0, 0.0], b=[0.0, 1.0])
        seq = encode(["a", "b", "a"], table, max_len=4)
        assert seq.oov_count == 0

    def test_shape_always_exact(self):
        table = table_of(a=[1.0, 0.0])
        for tokens in ([], ["a"], ["a"] * 20):
            assert encode(tokens, table, max_len=7).matrix.shape == (7, 2)
