"""Collapsed Gibbs sampling over the table-based topic model.

Each token is resampled by removing it from the counts and then choosing
among the occupied tables of its document plus one "new table" option:

- occupied table t:   indicator * occupancy_t * f_k(w) * potential(k, w, j)
- new table:          alpha * (topic-choice mass) / (total_tables + gamma0)

where ``f_k(w) = (n_kw + beta) / (n_k + V*beta)`` is the collapsed word
predictive of topic k.  The topic-choice mass sums, over every active
topic, ``indicator * m_k * f_k(w) * potential`` (an empty protected topic
counts with mass gamma0 so it can attract its first table), plus
``gamma0 * (1/V) * wildcard-potential`` for a brand-new topic.  The
indicator zeroes any choice that violates a seed-word pin.

Two interchangeable implementations exist: a plain Python reference
(this module) and a numba kernel (:mod:`._kernel`).  They consume the
same random stream and must stay bit-identical; the parity tests hold
them to that.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus
from .state import ConceptPrior, Hyperparams, ModelState

logger = logging.getLogger(__name__)

FALLBACK_MSG = "all sampling weights were zero; fallback seating used %d times during sweep"


def predictive_prob(n_kw: int, n_k: int, V: int, beta: float) -> float:
    """Collapsed word predictive of a topic: (n_kw + beta) / (n_k + V*beta)."""
    return (n_kw + beta) / (n_k + V * beta)


# ---------------------------------------------------------------------------
# token-level bookkeeping
# ---------------------------------------------------------------------------

def detach_token(state: ModelState, j: int, i: int) -> tuple[int, int]:
    """Remove token ``i`` of doc ``j`` from all counts; returns (slot, topic).

    Empties may retire the table and, for an unprotected topic, the topic
    itself.  The token is left with ``assign == -1``.
    """
    base = state.doc_off[j]
    slot = int(state.assign[base + i])
    if slot < 0:
        raise ValueError(f"token {i} of doc {j} is already detached")
    w = state.tokens[base + i]
    ti = base + slot
    k = int(state.tb_topic[ti])
    state.assign[base + i] = -1
    state.tb_count[ti] -= 1
    state.n_kv[k, w] -= 1
    state.n_k[k] -= 1
    if state.tb_count[ti] == 0:
        state.m_k[k] -= 1
        state.total_tables -= 1
        if state.m_k[k] == 0 and not state.protected[k]:
            state.active[k] = False
        if slot == state.hw[j] - 1:
            h = state.hw[j] - 1
            while h > 0 and state.tb_count[base + h - 1] == 0:
                h -= 1
            state.hw[j] = h
    return slot, k


def attach_token(state: ModelState, j: int, i: int, slot: int, topic: int) -> None:
    """Seat a detached token at ``slot`` of doc ``j``, serving ``topic``.

    Creates the table when the slot is empty; the exact inverse of
    :func:`detach_token` when called with its return values.
    """
    base = state.doc_off[j]
    w = state.tokens[base + i]
    ti = base + slot
    if state.tb_count[ti] == 0:
        state.tb_topic[ti] = topic
        state.m_k[topic] += 1
        state.total_tables += 1
        state.active[topic] = True
        if slot >= state.hw[j]:
            state.hw[j] = slot + 1
    elif state.tb_topic[ti] != topic:
        raise ValueError(
            f"slot {slot} of doc {j} serves topic {int(state.tb_topic[ti])}, not {topic}"
        )
    state.assign[base + i] = slot
    state.tb_count[ti] += 1
    state.n_kv[topic, w] += 1
    state.n_k[topic] += 1


# ---------------------------------------------------------------------------
# sampling weights
# ---------------------------------------------------------------------------

@dataclass
class TokenWeights:
    """Unnormalized seating weights for one detached token."""

    slots: list[int]
    slot_topics: list[int]
    slot_weights: list[float]
    new_table_weight: float
    topic_ids: list[int]
    topic_weights: list[float]
    fresh_topic_weight: float

    @property
    def total(self) -> float:
        return sum(self.slot_weights) + self.new_table_weight


def _weights_for(state: ModelState, j: int, w: int) -> TokenWeights:
    hyper = state.hyper
    beta = hyper.beta
    V = state.V
    Vbeta = V * beta
    pot = state.potential
    pot_empty = pot.is_empty
    base = state.doc_off[j]
    sz = int(state.seed_topic[w])

    slots: list[int] = []
    slot_topics: list[int] = []
    slot_weights: list[float] = []
    for s in range(int(state.hw[j])):
        c = int(state.tb_count[base + s])
        if c == 0:
            continue
        k = int(state.tb_topic[base + s])
        wt = 0.0
        if sz < 0 or k == sz:
            p = 1.0 if pot_empty else pot.lookup(k, w, j)
            if p != 0.0:
                f = (state.n_kv[k, w] + beta) / (state.n_k[k] + Vbeta)
                wt = c * f * p
        slots.append(s)
        slot_topics.append(k)
        slot_weights.append(float(wt))

    topic_ids: list[int] = []
    topic_weights: list[float] = []
    tw_total = 0.0
    for r in range(state.next_topic_id):
        if not state.active[r]:
            continue
        wt = 0.0
        if sz < 0 or r == sz:
            p = 1.0 if pot_empty else pot.lookup(r, w, j)
            if p != 0.0:
                f = (state.n_kv[r, w] + beta) / (state.n_k[r] + Vbeta)
                mass = float(state.m_k[r]) if state.m_k[r] > 0 else hyper.gamma0
                wt = mass * f * p
        topic_ids.append(r)
        topic_weights.append(float(wt))
        tw_total += wt

    fresh = 0.0
    if sz < 0:
        pf = 1.0 if pot_empty else pot.fresh_topic_value(w, j)
        fresh = hyper.gamma0 * (1.0 / V) * pf
    new_w = hyper.alpha * (tw_total + fresh) / (state.total_tables + hyper.gamma0)
    return TokenWeights(
        slots=slots,
        slot_topics=slot_topics,
        slot_weights=slot_weights,
        new_table_weight=float(new_w),
        topic_ids=topic_ids,
        topic_weights=topic_weights,
        fresh_topic_weight=float(fresh),
    )


def token_weights(state: ModelState, j: int, i: int) -> TokenWeights:
    """Seating weights token ``i`` of doc ``j`` would face if resampled now.

    Detaches the token, computes the weights, and reseats it exactly
    where it was; the state is unchanged and no randomness is consumed.
    """
    base = state.doc_off[j]
    w = int(state.tokens[base + i])
    slot, topic = detach_token(state, j, i)
    try:
        return _weights_for(state, j, w)
    finally:
        attach_token(state, j, i, slot, topic)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _resample_token_py(state: ModelState, j: int, i: int) -> int:
    """Resample one token in place; returns 1 if the zero-weight fallback fired."""
    base = state.doc_off[j]
    w = int(state.tokens[base + i])
    if state.assign[base + i] >= 0:
        detach_token(state, j, i)
    tw = _weights_for(state, j, w)
    grand = tw.total
    rng = state.rng
    fell_back = 0

    sel_slot = -1
    sel_topic = -1
    if grand <= 0.0:
        fell_back = 1
        if tw.slots:
            u = rng.random()
            idx = int(u * len(tw.slots))
            if idx >= len(tw.slots):
                idx = len(tw.slots) - 1
            sel_slot = tw.slots[idx]
            sel_topic = tw.slot_topics[idx]
        else:
            act = [r for r in range(state.next_topic_id) if state.active[r]]
            if act:
                u = rng.random()
                idx = int(u * len(act))
                if idx >= len(act):
                    idx = len(act) - 1
                sel_topic = act[idx]
            else:
                sel_topic = state.spawn_topic()
    else:
        u = rng.random() * grand
        acc = 0.0
        for s, wt in zip(tw.slots, tw.slot_weights):
            acc += wt
            if u < acc:
                sel_slot = s
                sel_topic = state.tb_topic[base + s]
                break
        if sel_slot < 0:
            topic_total = sum(tw.topic_weights) + tw.fresh_topic_weight
            u2 = rng.random() * topic_total
            acc2 = 0.0
            for r, wt in zip(tw.topic_ids, tw.topic_weights):
                acc2 += wt
                if u2 < acc2:
                    sel_topic = r
                    break
            if sel_topic < 0:
                sel_topic = state.spawn_topic()

    if sel_slot < 0:
        # open a new table on the lowest free slot
        H = int(state.hw[j])
        sel_slot = H
        for s in range(H):
            if state.tb_count[base + s] == 0:
                sel_slot = s
                break
    attach_token(state, j, i, sel_slot, sel_topic)
    return fell_back


def _sweep_python(state: ModelState) -> int:
    fallbacks = 0
    for j in range(state.n_docs):
        for i in range(state.doc_len(j)):
            fallbacks += _resample_token_py(state, j, i)
    return fallbacks


def _sweep_kernel(state: ModelState) -> int:
    from . import _kernel

    pack = _kernel.compile_potential(state.potential, state.V, state.n_docs)
    fallbacks = 0
    j, i = 0, 0
    while True:
        state.ensure_capacity(state.next_topic_id + 16)
        counters = np.array([state.total_tables, state.next_topic_id, 0], dtype=np.int64)
        max_len = int(np.diff(state.doc_off).max()) if state.n_docs else 1
        n_entries = max(1, len(state.potential.layers))
        rj, ri = _kernel.sweep(
            state.tokens,
            state.doc_off,
            state.assign,
            state.tb_topic,
            state.tb_count,
            state.hw,
            state.n_kv,
            state.n_k,
            state.m_k,
            state.active,
            state.protected,
            state.seed_topic,
            counters,
            state.hyper.alpha,
            state.hyper.gamma0,
            state.hyper.beta,
            *pack.arrays(),
            state.rng,
            j,
            i,
            np.zeros(max_len, dtype=np.float64),
            np.zeros(state.n_kv.shape[0], dtype=np.float64),
            np.zeros(max_len, dtype=np.int64),
            np.zeros(n_entries, dtype=np.int64),
            np.zeros(n_entries, dtype=np.float64),
            np.zeros(n_entries, dtype=np.float64),
            np.zeros(n_entries, dtype=np.bool_),
        )
        state.total_tables = int(counters[0])
        state.next_topic_id = int(counters[1])
        fallbacks += int(counters[2])
        if rj < 0:
            break
        j, i = int(rj), int(ri)  # ran out of topic rows; grow and resume
    return fallbacks


def gibbs_sweep(state: ModelState, use_kernel: bool | None = None) -> None:
    """One full resampling pass over every token, in document order."""
    if use_kernel is None:
        use_kernel = True
    fallbacks = _sweep_kernel(state) if use_kernel else _sweep_python(state)
    if fallbacks:
        logger.warning(FALLBACK_MSG, fallbacks)
    state.iteration += 1


def train(
    state: ModelState,
    n_iters: int,
    progress=None,
    use_kernel: bool | None = None,
) -> ModelState:
    """Run ``n_iters`` Gibbs sweeps in place; ``progress(done, total)`` per sweep."""
    for it in range(n_iters):
        gibbs_sweep(state, use_kernel=use_kernel)
        if progress is not None:
            progress(it + 1, n_iters)
    return state


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def init_model(
    corpus: Corpus,
    hyper: Hyperparams,
    prior: ConceptPrior | None = None,
) -> ModelState:
    """Seat every token on a random table among ``k_init`` random topics.

    Per document, up to ``min(len, k_init)`` candidate tables are opened
    with uniform-random topics and tokens land on uniform-random tables,
    except seed words, which always go to a table serving their seed
    topic (opened on demand).  Empty candidates are dropped.
    """
    state = ModelState(corpus, hyper, prior)
    rng = state.rng
    k_init = hyper.k_init
    for j in range(state.n_docs):
        base = state.doc_off[j]
        L = state.doc_len(j)
        T0 = min(L, k_init)
        slot_topics = [int(t) for t in rng.integers(0, k_init, size=T0)]
        plan = []
        for i in range(L):
            w = state.tokens[base + i]
            z = int(state.seed_topic[w])
            if z >= 0:
                for idx, t in enumerate(slot_topics):
                    if t == z:
                        slot = idx
                        break
                else:
                    slot_topics.append(z)
                    slot = len(slot_topics) - 1
            else:
                slot = int(rng.integers(0, T0))
            plan.append(slot)

        used = sorted({s for s in plan})
        remap = {s: n for n, s in enumerate(used)}
        for i, s in enumerate(plan):
            slot = remap[s]
            topic = slot_topics[s]
            state.assign[base + i] = slot
            state.tb_topic[base + slot] = topic
            state.tb_count[base + slot] += 1
            w = state.tokens[base + i]
            state.n_kv[topic, w] += 1
            state.n_k[topic] += 1
        state.hw[j] = len(used)
        for s in used:
            state.m_k[slot_topics[s]] += 1
            state.total_tables += 1
    # an initial topic that attracted no table at all retires immediately,
    # exactly as it would after one sweep (protected seed topics stay)
    for k in range(k_init):
        if state.m_k[k] == 0 and not state.protected[k]:
            state.active[k] = False
    return state
