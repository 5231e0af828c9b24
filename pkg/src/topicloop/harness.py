"""Benchmark harness: plain sampling versus the auto-add suggestion loop.

The auto-add arm folds the suggestion pipeline into training. After a
burn-in, every iteration refreshes document relevance and suggestions,
then pins each suggested word to its topic exactly the way an accepted
add-word refinement would: a one-hot potential layer plus forgetting
the word's tokens so the next sweep re-seats them. When the model was
built with seeded concept topics, only those topics receive pins; free
topics churn too much to hold words captive. Layers installed by the
previous round are replaced, not stacked, so the potential stays
bounded and always mirrors the current suggestion sets.
"""

from __future__ import annotations

import logging

import numpy as np

from .corpus import Corpus
from .evaluate import build_report
from .potentials import Layer
from .refine import _positions
from .sampler import detach_token, gibbs_sweep, init_model, train
from .state import ConceptPrior, Hyperparams, ModelState
from .suggest import EmbeddingTable, RelevanceState, refresh_suggestions

logger = logging.getLogger(__name__)


def run_baseline(
    corpus: Corpus,
    hyper: Hyperparams,
    prior: ConceptPrior | None = None,
    n_iters: int = 100,
    use_kernel: bool | None = None,
    progress=None,
) -> ModelState:
    state = init_model(corpus, hyper, prior)
    train(state, n_iters, progress=progress, use_kernel=use_kernel)
    return state


def _auto_add_topics(state: ModelState) -> list[int]:
    """Topics whose suggestions get pinned: the seeded concept topics
    when a prior is present, otherwise every active topic.

    Restricting to protected topics matters: they can neither retire
    nor lose their last table while words are pinned to them, so a
    pinned word always has somewhere to go.
    """
    protected = [k for k in state.active_topics() if state.protected[k]]
    return protected or state.active_topics()


def _replace_auto_layers(state: ModelState, rel: RelevanceState, old_count: int) -> int:
    """Swap the harness-owned tail of the potential for the current
    suggestion sets and forget the newly pinned words' tokens."""
    if old_count:
        del state.potential.layers[-old_count:]
    index = state.corpus.vocab.index
    layers = []
    pinned: set[int] = set()
    for k in _auto_add_topics(state):
        for word in rel.suggested.get(k, ()):
            wid = index[word]
            anchor = int(state.seed_topic[wid])
            if anchor >= 0 and anchor != k:
                continue
            layers.append(Layer(topic=k, match_value=1.0, other_value=0.0, word=wid))
            pinned.add(wid)
    state.potential.extend(layers)
    if pinned:
        mask = np.isin(state.tokens, list(pinned))
        for j, i in sorted(_positions(state, mask)):
            detach_token(state, j, i)
    return len(layers)


def run_auto_add(
    corpus: Corpus,
    hyper: Hyperparams,
    emb: EmbeddingTable,
    prior: ConceptPrior | None = None,
    n_iters: int = 100,
    burn_in: int = 10,
    refresh_every: int = 1,
    top_candidates: int = 50,
    top_m: int = 10,
    use_kernel: bool | None = None,
    progress=None,
) -> tuple[ModelState, RelevanceState]:
    """Train with all suggested words auto-accepted each refresh round."""
    state = init_model(corpus, hyper, prior)
    rel = RelevanceState.for_model(state)
    harness_layers = 0
    for it in range(n_iters):
        if it >= burn_in and (it - burn_in) % refresh_every == 0:
            refresh_suggestions(state, rel, emb, top_candidates, top_m)
            harness_layers = _replace_auto_layers(state, rel, harness_layers)
        gibbs_sweep(state, use_kernel=use_kernel)
        if progress is not None:
            progress(it + 1, n_iters)
    state.check_invariants()
    return state, rel


def suggest_bench(
    corpus: Corpus,
    emb: EmbeddingTable,
    hyper: Hyperparams,
    prior: ConceptPrior | None = None,
    n_iters: int = 100,
    burn_in: int = 10,
    labels=None,
    topic_map=None,
    k: int = 10,
    use_kernel: bool | None = None,
) -> dict:
    """Run both arms on the same corpus and report their metrics."""
    base = run_baseline(corpus, hyper, prior, n_iters, use_kernel=use_kernel)
    auto, rel = run_auto_add(
        corpus, hyper, emb, prior, n_iters, burn_in, use_kernel=use_kernel
    )
    return {
        "baseline": build_report(base, labels=labels, topic_map=topic_map, k=k),
        "auto_add": build_report(auto, labels=labels, topic_map=topic_map, k=k),
        "auto_add_words": {k_: list(v) for k_, v in sorted(rel.suggested.items())},
    }
