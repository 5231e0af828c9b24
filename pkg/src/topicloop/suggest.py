"""Topic-word suggestions driven by per-document relevance sampling.

The pipeline runs in two stages per topic. First a collapsed Gibbs
sweep decides for every document whether it is relevant to the topic:
the two status weights multiply a count prior (documents already under
that status, plus a gamma hyperparameter) by the Dirichlet-multinomial
predictive probability of the document's terms under either the topic
itself or the background formed by all other active topics, evaluated
in log space. A document that contains a currently suggested word and
was relevant in the previous iteration stays relevant without a draw.

Second, terms are scored inside the relevant document set against the
whole corpus, the highest scorers become candidates, and a candidate
survives only when its embedding lies within cosine > 0.5 of the
topic's embedding and it is not already among the topic's top words.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .corpus import Corpus, tokenize
from .state import ModelState

logger = logging.getLogger(__name__)


class SuggestError(ValueError):
    """Suggestion pipeline failure (bad embeddings, OOV queries, ...)."""


# -- embeddings -----------------------------------------------------------


class EmbeddingTable:
    """Immutable word -> vector map with vectorized cosine helpers."""

    def __init__(self, vectors: Mapping[str, np.ndarray]):
        if not vectors:
            raise SuggestError("embedding table is empty")
        self.words = list(vectors)
        self.matrix = np.stack([np.asarray(vectors[w], dtype=np.float64) for w in self.words])
        self.dim = self.matrix.shape[1]
        self._index = {w: i for i, w in enumerate(self.words)}
        self._norms = np.linalg.norm(self.matrix, axis=1)
        if np.any(self._norms == 0.0):
            bad = self.words[int(np.argmin(self._norms))]
            raise SuggestError(f"embedding for {bad!r} is the zero vector")

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self.words)

    def vector(self, word: str) -> np.ndarray:
        return self.matrix[self._index[word]]

    def similarities(self, query: np.ndarray) -> np.ndarray:
        """Cosine of every table word against ``query``."""
        qn = np.linalg.norm(query)
        if qn == 0.0:
            raise SuggestError("query embedding is the zero vector")
        return (self.matrix @ query) / (self._norms * qn)

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        """Read a text table: one ``word v1 v2 ...`` record per line.

        A first line of exactly two integers is treated as a
        ``count dim`` header and skipped.
        """
        vectors: dict[str, np.ndarray] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                if lineno == 1 and len(parts) == 2 and _all_ints(parts):
                    continue
                word, raw = parts[0], parts[1:]
                try:
                    vec = np.array([float(x) for x in raw], dtype=np.float64)
                except ValueError as exc:
                    raise SuggestError(f"{path}: line {lineno}: {exc}") from exc
                if not raw:
                    raise SuggestError(f"{path}: line {lineno}: no vector components")
                if vectors and len(vec) != len(next(iter(vectors.values()))):
                    raise SuggestError(
                        f"{path}: line {lineno}: expected "
                        f"{len(next(iter(vectors.values())))} components, got {len(vec)}"
                    )
                vectors.setdefault(word, vec)
        if not vectors:
            raise SuggestError(f"{path}: embedding table is empty")
        return cls(vectors)


def _all_ints(parts: Sequence[str]) -> bool:
    try:
        [int(p) for p in parts]
    except ValueError:
        return False
    return True


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine of a zero vector is undefined")
    return float(u @ v) / float(nu * nv)


# -- relevance state ------------------------------------------------------


class RelevanceState:
    """Per-topic binary document relevance plus the suggested-word sets.

    Documents all start irrelevant; stickiness therefore cannot trigger
    before the first sweep has run and suggestions exist.
    """

    def __init__(self, n_docs: int, gamma_r: float = 1.0, gamma_ir: float = 1.0):
        self.n_docs = n_docs
        self.gamma_r = gamma_r
        self.gamma_ir = gamma_ir
        self.statuses: dict[int, np.ndarray] = {}
        self.suggested: dict[int, list[str]] = {}

    @classmethod
    def for_model(cls, state: ModelState) -> "RelevanceState":
        return cls(state.n_docs, state.hyper.gamma_rel, state.hyper.gamma_irr)

    def status(self, k: int) -> np.ndarray:
        arr = self.statuses.get(k)
        if arr is None:
            arr = np.zeros(self.n_docs, dtype=np.int8)
            self.statuses[k] = arr
        return arr

    def set_status(self, k: int, values: Iterable[int]) -> None:
        arr = np.asarray(list(values), dtype=np.int8)
        if arr.shape != (self.n_docs,) or not np.isin(arr, (0, 1)).all():
            raise SuggestError("relevance status must be one 0/1 value per document")
        self.statuses[k] = arr

    def counts(self, k: int) -> tuple[int, int]:
        c1 = int(self.status(k).sum())
        return c1, self.n_docs - c1

    def to_dict(self) -> dict:
        return {
            "format": "topicloop-relevance-v1",
            "n_docs": self.n_docs,
            "gamma_r": self.gamma_r,
            "gamma_ir": self.gamma_ir,
            "status": {str(k): [int(x) for x in v] for k, v in sorted(self.statuses.items())},
            "suggested": {str(k): list(v) for k, v in sorted(self.suggested.items())},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RelevanceState":
        rel = cls(int(data["n_docs"]), float(data["gamma_r"]), float(data["gamma_ir"]))
        for k, values in data.get("status", {}).items():
            rel.set_status(int(k), values)
        for k, words in data.get("suggested", {}).items():
            rel.suggested[int(k)] = list(words)
        return rel


# -- relevance sampling ---------------------------------------------------


def dm_log_predictive(
    counts: np.ndarray, total: int, freqs: np.ndarray, length: int, n_terms: int, beta: float
) -> float:
    """Log predictive probability of a term-frequency vector under a
    Dirichlet-multinomial with the given observed counts.

    Exactly zero for an empty frequency vector.
    """
    nz = np.nonzero(freqs)[0]
    s = float(np.sum(gammaln(counts[nz] + freqs[nz] + beta) - gammaln(counts[nz] + beta)))
    s -= float(gammaln(total + length + n_terms * beta) - gammaln(total + n_terms * beta))
    return s


def _assigned_totals(state: ModelState) -> np.ndarray:
    """Per-term token counts summed over all active topics."""
    return state.n_kv[state.active].sum(axis=0)


def _doc_term_profile(state: ModelState, k: int, m: int):
    """Term frequencies of doc ``m``: all tokens, and the ones in topic ``k``."""
    lo, hi = int(state.doc_off[m]), int(state.doc_off[m + 1])
    ws = state.tokens[lo:hi]
    slots = state.assign[lo:hi]
    if np.any(slots < 0):
        raise SuggestError("relevance sampling needs a fully seated state")
    topics = state.tb_topic[lo + slots]
    f = np.bincount(ws, minlength=state.V)
    in_k = np.bincount(ws[topics == k], minlength=state.V)
    return f, in_k, hi - lo


def relevance_probability(
    state: ModelState,
    rel: RelevanceState,
    k: int,
    m: int,
    _totals: np.ndarray | None = None,
) -> float:
    """Probability that document ``m`` is relevant to topic ``k``.

    All counts exclude the document itself: its current status, and its
    tokens' contributions to both the topic and the background.
    """
    beta, V = state.hyper.beta, state.V
    totals = _assigned_totals(state) if _totals is None else _totals
    f, in_k, length = _doc_term_profile(state, k, m)

    n_topic = state.n_kv[k] - in_k
    lr1 = dm_log_predictive(
        n_topic, int(state.n_k[k]) - int(in_k.sum()), f, length, V, beta
    )
    out_k = f - in_k
    bg = (totals - state.n_kv[k]) - out_k
    lr0 = dm_log_predictive(bg, int(bg.sum()), f, length, V, beta)

    arr = rel.status(k)
    c1 = int(arr.sum()) - int(arr[m])
    c0 = (rel.n_docs - 1) - c1
    lw1 = np.log(c1 + rel.gamma_r) + lr1
    lw0 = np.log(c0 + rel.gamma_ir) + lr0
    return float(1.0 / (1.0 + np.exp(lw0 - lw1)))


def _doc_contains_any(state: ModelState, m: int, words: Sequence[str]) -> bool:
    index = state.corpus.vocab.index
    ids = [index[w] for w in words if w in index]
    if not ids:
        return False
    lo, hi = int(state.doc_off[m]), int(state.doc_off[m + 1])
    return bool(np.isin(state.tokens[lo:hi], ids).any())


def sample_doc_relevance(
    state: ModelState,
    rel: RelevanceState,
    k: int,
    m: int,
    _totals: np.ndarray | None = None,
) -> int:
    """Draw a relevance status for one document.

    Sticky rule: a document that was relevant last iteration and still
    contains a suggested word of the topic stays relevant, no draw.
    """
    suggested = rel.suggested.get(k) or []
    if rel.status(k)[m] == 1 and suggested and _doc_contains_any(state, m, suggested):
        return 1
    p = relevance_probability(state, rel, k, m, _totals)
    return 1 if state.rng.random() < p else 0


def relevance_sweep(state: ModelState, rel: RelevanceState, k: int) -> None:
    """One sequential Gibbs pass over all documents for topic ``k``."""
    totals = _assigned_totals(state)
    arr = rel.status(k)
    for m in range(rel.n_docs):
        arr[m] = sample_doc_relevance(state, rel, k, m, _totals=totals)


# -- term scoring and suggestion ------------------------------------------


def _term_scores(corpus: Corpus, relevant_docs: Sequence[int]) -> np.ndarray:
    """Per-term scores inside the relevant set against the whole corpus:
    p_rel * ln(p_rel / p_corpus), zero where the term never occurs in
    the relevant documents."""
    V = len(corpus.vocab)
    r_counts = np.zeros(V, dtype=np.int64)
    for m in relevant_docs:
        np.add.at(r_counts, corpus.documents[m].tokens, 1)
    r_total = int(r_counts.sum())
    scores = np.zeros(V, dtype=np.float64)
    if r_total == 0:
        return scores
    c_counts = corpus.term_counts()
    nz = r_counts > 0
    p_r = r_counts[nz] / r_total
    p_c = c_counts[nz] / corpus.n_tokens
    scores[nz] = p_r * np.log(p_r / p_c)
    return scores


def term_score(word: str, relevant_docs: Iterable[int], corpus: Corpus) -> float:
    wid = corpus.vocab.index.get(word)
    if wid is None:
        return 0.0
    return float(_term_scores(corpus, sorted(relevant_docs))[wid])


def topic_embedding(
    state: ModelState, k: int, emb: EmbeddingTable, top_m: int = 10
) -> np.ndarray:
    """Weighted average embedding of the topic's top words.

    Weights are the topic's word probabilities renormalized over the
    top words that have embeddings; invariant to their listing order.
    """
    pairs = [(w, wt) for w, wt in state.top_words(k, top_m) if w in emb]
    if not pairs:
        raise SuggestError(f"no embeddable words among the top {top_m} of topic {k}")
    total = sum(wt for _, wt in pairs)
    vec = np.zeros(emb.dim, dtype=np.float64)
    for w, wt in pairs:
        vec += (wt / total) * emb.vector(w)
    return vec


@dataclass(frozen=True)
class SuggestionEntry:
    word: str
    score: float
    cosine: float


def suggest_words(
    state: ModelState,
    rel: RelevanceState,
    k: int,
    emb: EmbeddingTable,
    top_candidates: int = 50,
    top_m: int = 10,
) -> list[SuggestionEntry]:
    """Ranked suggestions for topic ``k``.

    The ``top_candidates`` best-scoring terms (positive scores only,
    ties broken by term id) are filtered: a suggestion must have an
    embedding within cosine > 0.5 of the topic embedding and must not
    already sit among the topic's top ``top_m`` words.
    """
    relevant = np.flatnonzero(rel.status(k) == 1)
    if relevant.size == 0:
        return []
    scores = _term_scores(state.corpus, relevant)
    topic_vec = topic_embedding(state, k, emb, top_m)
    current = {w for w, _ in state.top_words(k, top_m)}
    terms = state.corpus.vocab.terms
    order = np.lexsort((np.arange(len(terms)), -scores))
    entries: list[SuggestionEntry] = []
    taken = 0
    for idx in order:
        if scores[idx] <= 0.0 or taken >= top_candidates:
            break
        taken += 1
        word = terms[idx]
        if word not in emb or word in current:
            continue
        sim = cosine(emb.vector(word), topic_vec)
        if sim > 0.5:
            entries.append(SuggestionEntry(word, float(scores[idx]), sim))
    return entries


def refresh_suggestions(
    state: ModelState,
    rel: RelevanceState,
    emb: EmbeddingTable,
    top_candidates: int = 50,
    top_m: int = 10,
) -> RelevanceState:
    """Resample relevance and rebuild suggestions for every active topic.

    Topics whose top words have no embeddings keep an empty suggestion
    list; retired topics are pruned from the relevance state.
    """
    active = state.active_topics()
    for k in sorted(active):
        relevance_sweep(state, rel, k)
        try:
            entries = suggest_words(state, rel, k, emb, top_candidates, top_m)
        except SuggestError as exc:
            logger.warning("suggestions skipped for topic %d: %s", k, exc)
            entries = []
        rel.suggested[k] = [e.word for e in entries]
    keep = set(active)
    rel.statuses = {k: v for k, v in rel.statuses.items() if k in keep}
    rel.suggested = {k: v for k, v in rel.suggested.items() if k in keep}
    return rel


# -- query expansion ------------------------------------------------------


def expand_query(phrase: str, emb: EmbeddingTable, n: int = 30) -> list[str]:
    """Nearest table words to the mean embedding of the phrase tokens.

    Phrase tokens themselves are excluded from the result.
    """
    toks = tokenize(phrase)
    known = [t for t in toks if t in emb]
    if not known:
        raise SuggestError("no phrase token has an embedding")
    query = np.mean([emb.vector(t) for t in known], axis=0)
    sims = emb.similarities(query)
    exclude = set(toks)
    ranked = sorted(zip(emb.words, sims), key=lambda ws: (-ws[1], ws[0]))
    out = [w for w, _ in ranked if w not in exclude]
    return out[: max(n, 0)]
