"""Corpus loading and preprocessing behavior.

Expected token lists below were worked out by hand from the documented
pipeline (lowercase, strip punctuation, whitespace split, drop short
tokens and stopwords) before the implementation was written.
"""

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from topicloop.corpus import (
    Corpus,
    CorpusError,
    build_corpus,
    load_corpus,
    load_stopwords,
    tokenize,
)


class TestTokenize:
    def test_lowercase_and_punctuation(self):
        assert tokenize("Teaching English online!") == ["teaching", "english", "online"]

    def test_short_tokens_dropped(self):
        assert tokenize("a cat on a mat") == ["cat", "on", "mat"]

    def test_single_char_after_strip_dropped(self):
        # "I'm" loses its apostrophe, "im" survives; bare "I" does not
        assert tokenize("I say: I'm here") == ["say", "im", "here"]

    def test_stopwords_removed(self):
        assert tokenize("the cat is here", stopwords={"the", "is"}) == ["cat", "here"]

    def test_punctuation_stripped_inside_tokens(self):
        assert tokenize("don't stop") == ["dont", "stop"]

    def test_unicode_punctuation_stripped(self):
        # U+2026 ellipsis and U+00BF inverted question mark are both category P
        assert tokenize("hello…world ¿qué tal?") == [
            "helloworld",
            "qué",
            "tal",
        ]

    def test_digits_kept(self):
        assert tokenize("route 66 rocks") == ["route", "66", "rocks"]

    def test_empty_text(self):
        assert tokenize("") == []
        assert tokenize("  !  ?  ") == []

    @given(st.text(max_size=200))
    def test_token_properties(self, text):
        toks = tokenize(text, stopwords={"the"})
        for t in toks:
            assert len(t) >= 2
            assert t == t.lower()
            assert t != "the"
            assert " " not in t


class TestBuildCorpus:
    def records(self):
        return [
            {"id": "d1", "text": "apple banana apple", "category": "fruit"},
            {"id": "d2", "text": "banana cherry"},
            {"id": "d3", "text": "cherry apple banana"},
        ]

    def test_vocabulary_is_sorted_and_stable(self):
        corpus = build_corpus(self.records(), min_doc_freq=1)
        assert corpus.vocab.terms == sorted(corpus.vocab.terms)
        assert corpus.vocab.index["apple"] == corpus.vocab.terms.index("apple")

    def test_min_doc_freq_filters_rare_terms(self):
        recs = self.records() + [{"id": "d4", "text": "durian banana"}]
        corpus = build_corpus(recs, min_doc_freq=2)
        assert "durian" not in corpus.vocab.index  # appears in one doc only
        assert "banana" in corpus.vocab.index

    def test_doc_freq_counts_documents_not_tokens(self):
        corpus = build_corpus(self.records(), min_doc_freq=1)
        # "apple" occurs twice in d1 but that is still one document
        assert corpus.vocab.doc_freq[corpus.vocab.index["apple"]] == 2

    def test_token_order_preserved(self):
        corpus = build_corpus(self.records(), min_doc_freq=1)
        v = corpus.vocab.index
        got = list(corpus.documents[0].tokens)
        assert got == [v["apple"], v["banana"], v["apple"]]

    def test_empty_documents_dropped_and_logged(self, caplog):
        recs = self.records() + [{"id": "d5", "text": "!!!"}]
        with caplog.at_level("WARNING"):
            corpus = build_corpus(recs, min_doc_freq=1)
        assert [d.doc_id for d in corpus.documents] == ["d1", "d2", "d3"]
        assert any("d5" in r.message for r in caplog.records)

    def test_all_documents_empty_is_an_error(self):
        with pytest.raises(CorpusError):
            build_corpus([{"id": "d1", "text": "? !"}], min_doc_freq=1)

    def test_category_kept(self):
        corpus = build_corpus(self.records(), min_doc_freq=1)
        assert corpus.documents[0].category == "fruit"
        assert corpus.documents[1].category is None

    def test_duplicate_ids_rejected(self):
        recs = [{"id": "d1", "text": "apple pie"}, {"id": "d1", "text": "apple tart"}]
        with pytest.raises(CorpusError):
            build_corpus(recs, min_doc_freq=1)

    def test_filtering_can_empty_a_document(self):
        # d4's only term is too rare to survive, so the doc is dropped
        recs = self.records() + [{"id": "d4", "text": "zzyzx"}]
        corpus = build_corpus(recs, min_doc_freq=2)
        assert "d4" not in [d.doc_id for d in corpus.documents]

    def test_token_and_term_counts(self):
        corpus = build_corpus(self.records(), min_doc_freq=1)
        assert corpus.n_tokens == 8
        counts = corpus.term_counts()
        assert counts[corpus.vocab.index["apple"]] == 3
        assert counts.sum() == corpus.n_tokens


class TestLoadCorpus:
    def write_jsonl(self, path, rows):
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")

    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        self.write_jsonl(
            path,
            [
                {"id": "a", "text": "green tea leaves", "category": "tea"},
                {"id": "b", "text": "black tea leaves"},
            ],
        )
        corpus = load_corpus(path, min_doc_freq=1)
        assert len(corpus.documents) == 2
        assert corpus.documents[0].category == "tea"

    def test_malformed_jsonl_line_reports_line_number(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"id": "a", "text": "fine here"}\nnot json at all\n')
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path, min_doc_freq=1)

    def test_missing_field_reports_line_number(self, tmp_path):
        path = tmp_path / "docs.jsonl"
        path.write_text('{"id": "a", "text": "fine here"}\n{"id": "b"}\n')
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path, min_doc_freq=1)

    def test_csv_fallback(self, tmp_path):
        path = tmp_path / "docs.csv"
        path.write_text("id,text\na,green tea leaves\nb,black tea leaves\n")
        corpus = load_corpus(path, min_doc_freq=1)
        assert [d.doc_id for d in corpus.documents] == ["a", "b"]

    def test_csv_with_category_column(self, tmp_path):
        path = tmp_path / "docs.csv"
        path.write_text("id,text,category\na,green tea leaves,tea\n")
        corpus = load_corpus(path, min_doc_freq=1)
        assert corpus.documents[0].category == "tea"

    def test_csv_missing_column_is_an_error(self, tmp_path):
        path = tmp_path / "docs.csv"
        path.write_text("id,body\na,green tea\n")
        with pytest.raises(CorpusError):
            load_corpus(path, min_doc_freq=1)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CorpusError):
            load_corpus(tmp_path / "nope.jsonl")

    def test_unknown_format(self, tmp_path):
        path = tmp_path / "docs.parquet"
        path.write_text("whatever")
        with pytest.raises(CorpusError):
            load_corpus(path)

    def test_stopword_file(self, tmp_path):
        sw = tmp_path / "stop.txt"
        sw.write_text("the\nand\n\n# comment lines are fine\nof\n")
        stops = load_stopwords(sw)
        assert stops == frozenset({"the", "and", "of"})
        path = tmp_path / "docs.jsonl"
        self.write_jsonl(path, [{"id": "a", "text": "the tea and the leaves"}])
        corpus = load_corpus(path, stopwords=stops, min_doc_freq=1)
        assert corpus.vocab.terms == ["leaves", "tea"]


class TestCorpusPersistence:
    def test_save_load_round_trip(self, tmp_path):
        corpus = build_corpus(
            [
                {"id": "d1", "text": "apple banana apple", "category": "fruit"},
                {"id": "d2", "text": "banana cherry"},
            ],
            min_doc_freq=1,
        )
        path = tmp_path / "corpus.json"
        corpus.save(path)
        loaded = Corpus.load(path)
        assert loaded.vocab.terms == corpus.vocab.terms
        assert [d.doc_id for d in loaded.documents] == ["d1", "d2"]
        assert loaded.documents[0].category == "fruit"
        for a, b in zip(loaded.documents, corpus.documents):
            assert np.array_equal(a.tokens, b.tokens)
