"""Corpus ingestion and preprocessing.

Input is a JSONL file with one ``{"id", "text", "category"?}`` record per
line, or a CSV file with ``id`` and ``text`` columns as a fallback.
Preprocessing is deliberately plain: lowercase, strip Unicode punctuation,
split on whitespace, drop tokens shorter than two characters and stopwords,
then drop terms below a document-frequency floor.  Documents that end up
empty are dropped (with a warning); a corpus where everything is empty is
an error.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

logger = logging.getLogger(__name__)

MIN_TOKEN_LEN = 2


class CorpusError(Exception):
    """Raised for unreadable, malformed, or empty corpus input."""


# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------

def _punctuation_table() -> dict[int, None]:
    # Delete every code point whose Unicode category starts with "P".
    # Built once over the BMP plus the common supplementary punctuation.
    table = {}
    for cp in range(sys.maxunicode + 1):
        if unicodedata.category(chr(cp)).startswith("P"):
            table[cp] = None
    return table


_PUNCT_TABLE = _punctuation_table()


def tokenize(text: str, stopwords: Iterable[str] = ()) -> list[str]:
    """Split ``text`` into normalized tokens.

    Lowercases, removes punctuation characters in place (so "don't"
    becomes "dont"), splits on whitespace, and drops stopwords and
    tokens shorter than two characters.
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    out = []
    for raw in text.lower().split():
        tok = raw.translate(_PUNCT_TABLE)
        if len(tok) < MIN_TOKEN_LEN or tok in stop:
            continue
        out.append(tok)
    return out


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: one term per line, blank lines and # comments skipped."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read stopword file {path}: {exc}") from exc
    words = set()
    for line in lines:
        term = line.strip()
        if term and not term.startswith("#"):
            words.add(term.lower())
    return frozenset(words)


# ---------------------------------------------------------------------------
# corpus containers
# ---------------------------------------------------------------------------

@dataclass
class Vocabulary:
    """Bidirectional term index with document frequencies."""

    terms: list[str]
    doc_freq: np.ndarray
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index


@dataclass
class Document:
    doc_id: str
    text: str
    tokens: np.ndarray  # int32 term ids, in-document order preserved
    category: str | None = None

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Corpus:
    documents: list[Document]
    vocab: Vocabulary

    @property
    def n_docs(self) -> int:
        return len(self.documents)

    @property
    def n_tokens(self) -> int:
        return sum(len(d) for d in self.documents)

    def term_counts(self) -> np.ndarray:
        """Corpus-wide token count per term id."""
        counts = np.zeros(len(self.vocab), dtype=np.int64)
        for doc in self.documents:
            np.add.at(counts, doc.tokens, 1)
        return counts

    def categories(self) -> list[str]:
        """Distinct non-null category labels, sorted."""
        return sorted({d.category for d in self.documents if d.category is not None})

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": "topicloop-corpus-v1",
            "terms": self.vocab.terms,
            "doc_freq": self.vocab.doc_freq.tolist(),
            "documents": [
                {
                    "id": d.doc_id,
                    "text": d.text,
                    "tokens": d.tokens.tolist(),
                    "category": d.category,
                }
                for d in self.documents
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Corpus":
        if data.get("format") != "topicloop-corpus-v1":
            raise CorpusError(f"unrecognized corpus format tag {data.get('format')!r}")
        vocab = Vocabulary(
            terms=list(data["terms"]),
            doc_freq=np.asarray(data["doc_freq"], dtype=np.int64),
        )
        docs = [
            Document(
                doc_id=d["id"],
                text=d["text"],
                tokens=np.asarray(d["tokens"], dtype=np.int32),
                category=d.get("category"),
            )
            for d in data["documents"]
        ]
        return cls(documents=docs, vocab=vocab)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Corpus":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CorpusError(f"corpus file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------

def build_corpus(
    records: Iterable[dict],
    stopwords: Iterable[str] = (),
    min_doc_freq: int = 2,
) -> Corpus:
    """Tokenize raw records and assemble a :class:`Corpus`.

    ``records`` holds dicts with ``id`` and ``text`` keys and an optional
    ``category``.  Terms must appear in at least ``min_doc_freq`` documents
    to enter the vocabulary; tokens of dropped terms are removed from the
    documents.
    """
    stop = frozenset(s.lower() for s in stopwords)
    seen_ids: set[str] = set()
    raw_docs: list[tuple[str, str, str | None, list[str]]] = []
    df: dict[str, int] = {}
    for rec in records:
        doc_id = str(rec["id"])
        if doc_id in seen_ids:
            raise CorpusError(f"duplicate document id {doc_id!r}")
        seen_ids.add(doc_id)
        toks = tokenize(rec.get("text", ""), stop)
        raw_docs.append((doc_id, rec.get("text", ""), rec.get("category"), toks))
        for term in set(toks):
            df[term] = df.get(term, 0) + 1

    kept_terms = sorted(t for t, n in df.items() if n >= min_doc_freq)
    vocab = Vocabulary(
        terms=kept_terms,
        doc_freq=np.asarray([df[t] for t in kept_terms], dtype=np.int64),
    )

    documents: list[Document] = []
    for doc_id, text, category, toks in raw_docs:
        ids = [vocab.index[t] for t in toks if t in vocab.index]
        if not ids:
            logger.warning("dropping document %s: no tokens survive preprocessing", doc_id)
            continue
        documents.append(
            Document(
                doc_id=doc_id,
                text=text,
                tokens=np.asarray(ids, dtype=np.int32),
                category=category,
            )
        )

    if not documents:
        raise CorpusError("corpus is empty after preprocessing")
    return Corpus(documents=documents, vocab=vocab)


def load_corpus(
    path: str | Path,
    format: str | None = None,
    stopwords: Iterable[str] = (),
    min_doc_freq: int = 2,
) -> Corpus:
    """Load raw documents from ``path`` and build a corpus.

    ``format`` is "jsonl" or "csv"; when omitted it is inferred from the
    file extension.  Malformed records raise :class:`CorpusError` naming
    the offending line.
    """
    path = Path(path)
    if format is None:
        ext = path.suffix.lower()
        if ext in (".jsonl", ".ndjson", ".json"):
            format = "jsonl"
        elif ext == ".csv":
            format = "csv"
        else:
            raise CorpusError(f"cannot infer corpus format from extension {ext!r}")
    if format == "jsonl":
        records = _read_jsonl(path)
    elif format == "csv":
        records = _read_csv(path)
    else:
        raise CorpusError(f"unknown corpus format {format!r}")
    return build_corpus(records, stopwords=stopwords, min_doc_freq=min_doc_freq)


def _read_jsonl(path: Path) -> list[dict]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    records = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path} line {lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
            raise CorpusError(f"{path} line {lineno}: record needs 'id' and 'text' fields")
        records.append(rec)
    return records


def _read_csv(path: Path) -> list[dict]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "id" not in cols or "text" not in cols:
            raise CorpusError(f"{path}: CSV needs 'id' and 'text' columns, found {cols}")
        records = []
        for lineno, row in enumerate(reader, start=2):  # line 1 is the header
            if row.get("id") is None or row.get("text") is None:
                raise CorpusError(f"{path} line {lineno}: missing id or text value")
            rec = {"id": row["id"], "text": row["text"]}
            if row.get("category"):
                rec["category"] = row["category"]
            records.append(rec)
    return records
