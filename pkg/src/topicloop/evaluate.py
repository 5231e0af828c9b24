"""Model quality metrics and the inter-topic distance map.

Coherence is corpus-internal NPMI over document co-occurrence, so the
whole evaluation is self-contained: no external reference corpus is
needed. Precision@K measures how well a topic's top-ranked documents
agree with a known category labelling. The distance map reduces the
pairwise Jensen-Shannon divergences between topic-word distributions
to 2-D via classical metric MDS with a fixed sign convention, giving
reproducible layouts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .state import ModelState

logger = logging.getLogger(__name__)

NPMI_EPS = 1e-12


class EvalError(ValueError):
    """Evaluation request that cannot be satisfied."""


# -- coherence ------------------------------------------------------------


def npmi_coherence(
    words: Sequence[str], corpus: Corpus, top_n: int = 10, eps: float = NPMI_EPS
) -> float:
    """Mean pairwise NPMI of the word list, document-level co-occurrence.

    Words missing from the corpus are skipped; a pair present in every
    single document is scored 0 (the 0/0 limit). Smoothing ``eps`` is
    added to the joint probability only.
    """
    if top_n < 2:
        raise EvalError("top_n must be at least 2")
    index = corpus.vocab.index
    present = [w for w in words[:top_n] if w in index]
    docsets: dict[str, set[int]] = {w: set() for w in present}
    for j, doc in enumerate(corpus.documents):
        toks = set(doc.tokens.tolist())
        for w in present:
            if index[w] in toks:
                docsets[w].add(j)
    n_docs = corpus.n_docs
    values = []
    for a, b in combinations(present, 2):
        p_a = len(docsets[a]) / n_docs
        p_b = len(docsets[b]) / n_docs
        if p_a == 0.0 or p_b == 0.0:
            continue
        p_ab = len(docsets[a] & docsets[b]) / n_docs
        if p_ab >= 1.0:
            values.append(0.0)
            continue
        pmi = math.log((p_ab + eps) / (p_a * p_b))
        values.append(pmi / -math.log(p_ab + eps))
    if not values:
        raise EvalError("coherence undefined: no scorable word pairs")
    return float(np.mean(values))


# -- precision@K ----------------------------------------------------------


def precision_at_k(
    state: ModelState,
    labels: Sequence[str],
    topic_map: Mapping[int, str],
    k: int = 10,
) -> dict:
    """Category precision of each mapped topic's top-K documents.

    Documents are ranked by their token share under the topic, ties
    broken by document index. When the corpus holds fewer than K
    documents all of them are used and the result is flagged truncated.
    """
    if not topic_map:
        raise EvalError("no topics mapped to categories")
    labels = list(labels)
    if len(labels) != state.n_docs:
        raise EvalError(
            f"got {len(labels)} labels for {state.n_docs} documents"
        )
    truncated = k > state.n_docs
    if truncated:
        logger.info("precision@%d truncated to the %d available documents", k, state.n_docs)
    kk = min(k, state.n_docs)

    shares = [state.doc_topic_dist(j) for j in range(state.n_docs)]
    per_topic: dict[int, float] = {}
    for topic, category in sorted(topic_map.items()):
        if not (0 <= topic < state.next_topic_id and state.active[topic]):
            raise EvalError(f"topic {topic} is not active")
        ranked = sorted(range(state.n_docs), key=lambda j: (-shares[j].get(topic, 0.0), j))
        hits = sum(1 for j in ranked[:kk] if labels[j] == category)
        per_topic[topic] = hits / kk
    return {
        "per_topic": per_topic,
        "mean": float(np.mean(list(per_topic.values()))),
        "k": kk,
        "truncated": truncated,
    }


# -- divergence and layout ------------------------------------------------


def jsd(p: np.ndarray, q: np.ndarray) -> float:
    """Jensen-Shannon divergence, log base 2, in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    for dist in (p, q):
        if np.any(dist < 0):
            raise ValueError("distributions must not contain negative mass")
        if abs(float(dist.sum()) - 1.0) > 1e-9:
            raise ValueError("inputs must be normalized distributions")
    if p.shape != q.shape:
        raise ValueError("distributions must share a support")
    m = 0.5 * (p + q)

    def kl(a, b):
        nz = a > 0
        return float(np.sum(a[nz] * np.log2(a[nz] / b[nz])))

    return 0.5 * kl(p, m) + 0.5 * kl(q, m)


def _mds_2d(dist: np.ndarray) -> np.ndarray:
    """Classical metric MDS of a distance matrix into 2-D.

    Deterministic: symmetric eigendecomposition, top-2 components, each
    axis flipped so its largest-magnitude coordinate is positive.
    """
    n = dist.shape[0]
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (dist**2) @ j
    eigvals, eigvecs = np.linalg.eigh(b)
    idx = [n - 1, n - 2] if n >= 2 else [n - 1]
    coords = np.zeros((n, 2))
    for col, i in enumerate(idx):
        scale = math.sqrt(max(float(eigvals[i]), 0.0))
        axis = eigvecs[:, i] * scale
        anchor = int(np.argmax(np.abs(axis)))
        if axis[anchor] < 0:
            axis = -axis
        coords[:, col] = axis
    return coords


def distance_map(state: ModelState) -> list[dict]:
    """2-D layout of the active topics: ``{topic, x, y, weight}`` each.

    Weight is the topic's share of all tokens. A single topic sits at
    the origin.
    """
    topics = state.active_topics()
    if not topics:
        raise EvalError("no active topics to map")
    total = float(state.n_k[list(topics)].sum())
    if len(topics) == 1:
        k = topics[0]
        return [{"topic": k, "x": 0.0, "y": 0.0, "weight": 1.0}]
    dists = [state.topic_word_dist(k) for k in topics]
    n = len(topics)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = jsd(dists[i], dists[j])
    coords = _mds_2d(d)
    return [
        {
            "topic": k,
            "x": float(coords[i, 0]),
            "y": float(coords[i, 1]),
            "weight": float(state.n_k[k] / total),
        }
        for i, k in enumerate(topics)
    ]


# -- summaries and reports ------------------------------------------------


@dataclass
class TopicSummary:
    """Displayable digest of one topic."""

    topic: int
    label: str
    weight: float
    words: list[tuple[str, float]]

    @classmethod
    def from_state(cls, state: ModelState, k: int, n: int = 10) -> "TopicSummary":
        words = state.top_words(k, n)
        label = "/".join(w for w, _ in words[:3])
        return cls(
            topic=k,
            label=label,
            weight=float(state.n_k[k] / state.n_tokens),
            words=words,
        )

    def to_dict(self) -> dict:
        return {
            "topic": self.topic,
            "label": self.label,
            "weight": self.weight,
            "words": [[w, wt] for w, wt in self.words],
        }


def build_report(
    state: ModelState,
    node_id: int | None = None,
    labels: Sequence[str] | None = None,
    topic_map: Mapping[int, str] | None = None,
    k: int = 10,
    top_n: int = 10,
) -> dict:
    """Flat per-run evaluation record; precision only when labels given."""
    precision = None
    if labels is not None and topic_map:
        precision = precision_at_k(state, labels, topic_map, k)
    topics = []
    coherences = []
    for t in state.active_topics():
        summary = TopicSummary.from_state(state, t, top_n)
        coh = npmi_coherence([w for w, _ in summary.words], state.corpus, top_n)
        coherences.append(coh)
        entry = {
            "topic": t,
            "label": summary.label,
            "weight": summary.weight,
            "coherence": coh,
        }
        if precision and t in precision["per_topic"]:
            entry["precision"] = precision["per_topic"][t]
        topics.append(entry)
    return {
        "node_id": node_id,
        "k": k,
        "topics": topics,
        "mean_coherence": float(np.mean(coherences)),
        "mean_precision": precision["mean"] if precision else None,
    }


def format_report(report: dict) -> str:
    """Human-readable table for terminals and logs."""
    lines = [
        f"{'topic':>6}  {'label':<32} {'weight':>8}  {'coherence':>9}  {'prec@K':>7}"
    ]
    for t in report["topics"]:
        prec = f"{t['precision']:.3f}" if "precision" in t else "-"
        lines.append(
            f"{t['topic']:>6}  {t['label']:<32.32} {t['weight']:>8.3f}  "
            f"{t['coherence']:>9.3f}  {prec:>7}"
        )
    lines.append(
        f"{'mean':>6}  {'':<32} {'':>8}  {report['mean_coherence']:>9.3f}  "
        + (f"{report['mean_precision']:.3f}" if report["mean_precision"] is not None else "-")
    )
    return "\n".join(lines)
