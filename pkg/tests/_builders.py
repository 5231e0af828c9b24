"""Shared construction helpers for tests.

``hand_state`` builds a ModelState from an explicit seating plan so tests
can pin exact count configurations; ``random_corpus`` makes small
synthetic corpora for invariant and parity checks.
"""

from __future__ import annotations

import numpy as np

from topicloop.corpus import Corpus, build_corpus
from topicloop.state import ConceptPrior, Hyperparams, ModelState


def corpus_from_texts(texts, min_doc_freq=1, categories=None):
    records = []
    for i, text in enumerate(texts):
        rec = {"id": f"d{i}", "text": text}
        if categories is not None:
            rec["category"] = categories[i]
        records.append(rec)
    return build_corpus(records, min_doc_freq=min_doc_freq)


def hand_state(
    corpus: Corpus,
    hyper: Hyperparams,
    seating: list[list[tuple[int, int]]],
    prior: ConceptPrior | None = None,
) -> ModelState:
    """Build a state from per-token ``(slot, topic)`` assignments.

    ``seating[j][i]`` gives the table slot and that slot's topic for token
    ``i`` of document ``j``.  All tokens of one slot must agree on the
    topic.  Topics must lie in ``[0, k_init)``.
    """
    state = ModelState(corpus, hyper, prior)
    tables_per_doc: list[dict[int, int]] = []
    for j, plan in enumerate(seating):
        base = state.doc_off[j]
        assert len(plan) == state.doc_len(j), f"doc {j}: seating length mismatch"
        slot_topic: dict[int, int] = {}
        for i, (slot, topic) in enumerate(plan):
            if slot in slot_topic:
                assert slot_topic[slot] == topic, f"doc {j} slot {slot}: topic conflict"
            else:
                slot_topic[slot] = topic
            w = state.tokens[base + i]
            state.assign[base + i] = slot
            state.tb_topic[base + slot] = topic
            state.tb_count[base + slot] += 1
            state.n_kv[topic, w] += 1
            state.n_k[topic] += 1
        tables_per_doc.append(slot_topic)
        state.hw[j] = max(slot_topic) + 1 if slot_topic else 0
    for slot_topic in tables_per_doc:
        for topic in slot_topic.values():
            state.m_k[topic] += 1
            state.total_tables += 1
    state.check_invariants()
    return state


def random_corpus(n_docs=30, vocab_size=20, min_len=5, max_len=15, seed=0) -> Corpus:
    rng = np.random.default_rng(seed)
    words = [f"w{i:03d}" for i in range(vocab_size)]
    texts = []
    for _ in range(n_docs):
        L = int(rng.integers(min_len, max_len + 1))
        texts.append(" ".join(words[int(i)] for i in rng.integers(0, vocab_size, L)))
    return corpus_from_texts(texts, min_doc_freq=1)
