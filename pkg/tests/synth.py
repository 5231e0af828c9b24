"""Synthetic corpora with planted structure for acceptance checks.

``planted_corpus`` mixes per-category vocabularies with shared noise so
recovery is nontrivial; ``disjoint_corpus`` gives each category a fully
private vocabulary so recovery should be near-perfect. Word embeddings
mirror the plant: every category occupies its own orthogonal axis and
noise words live on axes no category uses.
"""

from __future__ import annotations

import numpy as np

from topicloop.corpus import Corpus, build_corpus
from topicloop.state import ModelState
from topicloop.suggest import EmbeddingTable


def cat_word(c: int, i: int) -> str:
    return f"c{c}w{i:02d}"


def planted_corpus(
    n_docs: int = 1000,
    n_cats: int = 4,
    words_per_cat: int = 30,
    n_noise: int = 10,
    doc_len: int = 15,
    noise_frac: float = 0.3,
    mixed_frac: float = 0.3,
    seed: int = 1234,
) -> Corpus:
    """Balanced corpus with noise and cross-category contamination.

    Every document spends ``noise_frac`` of its tokens on corpus-wide
    noise words. A ``mixed_frac`` share of documents additionally draw
    half their category tokens from the next category over, which
    splits word assignments across topics and leaves clear headroom
    for refinement.
    """
    rng = np.random.default_rng(seed)
    noise = [f"noise{i:02d}" for i in range(n_noise)]
    records = []
    for j in range(n_docs):
        c = j % n_cats
        mixed = rng.random() < mixed_frac
        other = (c + 1) % n_cats
        toks = []
        for _ in range(doc_len):
            u = rng.random()
            if u < noise_frac:
                toks.append(noise[int(rng.integers(n_noise))])
            elif mixed and u < noise_frac + (1.0 - noise_frac) / 2.0:
                toks.append(cat_word(other, int(rng.integers(words_per_cat))))
            else:
                toks.append(cat_word(c, int(rng.integers(words_per_cat))))
        records.append({"id": f"d{j}", "text": " ".join(toks), "category": f"cat{c}"})
    return build_corpus(records, min_doc_freq=1)


def disjoint_corpus(
    n_docs: int = 90,
    n_cats: int = 3,
    words_per_cat: int = 15,
    doc_len: int = 10,
    seed: int = 99,
) -> Corpus:
    """Each category draws from its own private vocabulary, no overlap."""
    rng = np.random.default_rng(seed)
    records = []
    for j in range(n_docs):
        c = j % n_cats
        toks = [
            cat_word(c, int(rng.integers(words_per_cat))) for _ in range(doc_len)
        ]
        records.append({"id": f"d{j}", "text": " ".join(toks), "category": f"cat{c}"})
    return build_corpus(records, min_doc_freq=1)


def planted_embeddings(
    n_cats: int = 4, words_per_cat: int = 30, n_noise: int = 10
) -> EmbeddingTable:
    """One orthogonal axis per category; noise words are smeared over
    every axis so no single-category embedding lies within cosine 0.5
    of them."""
    dim = n_cats + 1
    vectors: dict[str, np.ndarray] = {}
    for c in range(n_cats):
        axis = np.zeros(dim)
        axis[c] = 1.0
        for i in range(words_per_cat):
            vectors[cat_word(c, i)] = axis
    smear = np.ones(dim)
    for i in range(n_noise):
        vectors[f"noise{i:02d}"] = smear
    return EmbeddingTable(vectors)


def purity(state: ModelState, corpus: Corpus) -> float:
    """Majority-category purity of the document clustering induced by
    each document's dominant topic."""
    clusters: dict[int, dict[str, int]] = {}
    for j, doc in enumerate(corpus.documents):
        dist = state.doc_topic_dist(j)
        top = max(sorted(dist), key=lambda k: dist[k])
        by_cat = clusters.setdefault(top, {})
        by_cat[doc.category] = by_cat.get(doc.category, 0) + 1
    hits = sum(max(by_cat.values()) for by_cat in clusters.values())
    return hits / corpus.n_docs
