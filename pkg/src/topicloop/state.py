"""Model state for the table-based nonparametric topic sampler.

The state follows the restaurant metaphor: every document owns a set of
tables, every table serves one topic, every token sits at one table of
its document.  Topic ids are handed out by a monotone counter and never
reused, so refinement logs stay unambiguous; retired topics simply leave
the active set.  Count arrays are indexed by topic id directly (row k is
topic k) and grow on demand.

All randomness flows through one PCG64 generator owned by the state.  Its
full state is part of serialization, which is what makes a deserialized
snapshot continue sampling bit-identically.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .corpus import Corpus
from .potentials import PotentialFunction

logger = logging.getLogger(__name__)

STATE_FORMAT = "topicloop-state-v1"


class StateError(Exception):
    """Raised for invalid configuration or corrupt/mismatched snapshots."""


@dataclass
class Hyperparams:
    """Sampler and refinement configuration.

    ``alpha`` governs how readily documents open new tables, ``gamma0``
    how readily new tables take brand-new topics.  ``beta`` is the
    symmetric word-smoothing prior.  ``gamma_rel`` and ``gamma_irr`` are
    the pseudo-counts of the per-topic document relevance sampler.
    """

    alpha: float = 1.0
    gamma0: float = 1.0
    beta: float = 0.5
    k_init: int = 10
    gamma_rel: float = 1.0
    gamma_irr: float = 1.0
    apply_sweeps: int = 10
    seed: int = 0

    def validate(self) -> None:
        for name in ("alpha", "gamma0", "beta", "gamma_rel", "gamma_irr"):
            if getattr(self, name) <= 0:
                raise StateError(f"{name} must be positive, got {getattr(self, name)}")
        if self.k_init < 1:
            raise StateError(f"k_init must be at least 1, got {self.k_init}")
        if self.apply_sweeps < 0:
            raise StateError("apply_sweeps cannot be negative")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "gamma0": self.gamma0,
            "beta": self.beta,
            "k_init": self.k_init,
            "gamma_rel": self.gamma_rel,
            "gamma_irr": self.gamma_irr,
            "apply_sweeps": self.apply_sweeps,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Hyperparams":
        return cls(**dict(data))


@dataclass
class ConceptPrior:
    """Seed words pinned to initial topics: topic id -> seed terms.

    A seed word may belong to at most one topic; the sampler then never
    assigns it anywhere else.
    """

    seeds: dict[int, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.seeds = {int(k): tuple(v) for k, v in self.seeds.items()}
        owner: dict[str, int] = {}
        for topic, words in self.seeds.items():
            for w in words:
                if w in owner and owner[w] != topic:
                    raise StateError(
                        f"seed word {w!r} assigned to both topic {owner[w]} and {topic}"
                    )
                owner[w] = topic

    @property
    def is_empty(self) -> bool:
        return not any(self.seeds.values())

    def topics(self) -> list[int]:
        return sorted(self.seeds)

    def to_dict(self) -> dict:
        return {str(k): list(v) for k, v in sorted(self.seeds.items())}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConceptPrior":
        return cls({int(k): tuple(v) for k, v in data.items()})


def _corpus_fingerprint(corpus: Corpus) -> dict:
    digest = hashlib.sha256("\x00".join(corpus.vocab.terms).encode("utf-8")).hexdigest()
    return {"n_docs": corpus.n_docs, "n_terms": len(corpus.vocab), "terms_sha256": digest}


class ModelState:
    """Full sampler state bound to one corpus.

    Attributes of note:

    - ``assign[i]``: table slot of token ``i`` within its document, -1 while
      a token is detached (mid-refinement);
    - ``tb_topic`` / ``tb_count``: flattened per-document table slots, slot
      ``s`` of doc ``j`` lives at ``doc_off[j] + s``;
    - ``n_kv`` / ``n_k`` / ``m_k``: per-topic word counts, totals, and table
      counts, row-indexed by topic id;
    - ``protected``: topics exempt from retirement (concept-seeded topics
      and freshly split topics waiting for their first table).
    """

    def __init__(self, corpus: Corpus, hyper: Hyperparams, prior: ConceptPrior | None = None):
        hyper.validate()
        self.corpus = corpus
        self.hyper = hyper
        self.prior = prior or ConceptPrior()
        self._bind_corpus(corpus)

        k_cap = max(64, 2 * hyper.k_init)
        V = len(corpus.vocab)
        self.n_kv = np.zeros((k_cap, V), dtype=np.int64)
        self.n_k = np.zeros(k_cap, dtype=np.int64)
        self.m_k = np.zeros(k_cap, dtype=np.int64)
        self.active = np.zeros(k_cap, dtype=np.bool_)
        self.protected = np.zeros(k_cap, dtype=np.bool_)
        self.active[: hyper.k_init] = True
        self.next_topic_id = hyper.k_init
        self.total_tables = 0

        N = len(self.tokens)
        self.assign = np.full(N, -1, dtype=np.int32)
        self.tb_topic = np.zeros(N, dtype=np.int32)
        self.tb_count = np.zeros(N, dtype=np.int32)
        self.hw = np.zeros(self.n_docs, dtype=np.int32)

        self.iteration = 0
        self.potential = PotentialFunction()
        self.rng = np.random.Generator(np.random.PCG64(hyper.seed))

        self._resolve_prior()

    # -- corpus binding ---------------------------------------------------

    def _bind_corpus(self, corpus: Corpus) -> None:
        self.n_docs = corpus.n_docs
        self.doc_off = np.zeros(self.n_docs + 1, dtype=np.int64)
        parts = []
        for j, doc in enumerate(corpus.documents):
            self.doc_off[j + 1] = self.doc_off[j] + len(doc)
            parts.append(doc.tokens)
        self.tokens = (
            np.concatenate(parts).astype(np.int32) if parts else np.zeros(0, dtype=np.int32)
        )

    def _resolve_prior(self) -> None:
        V = len(self.corpus.vocab)
        self.seed_topic = np.full(V, -1, dtype=np.int32)
        index = self.corpus.vocab.index
        for topic, words in self.prior.seeds.items():
            if not 0 <= topic < self.hyper.k_init:
                raise StateError(
                    f"concept prior names topic {topic}, outside the initial range "
                    f"0..{self.hyper.k_init - 1}"
                )
            self.protected[topic] = True
            for w in words:
                wid = index.get(w)
                if wid is None:
                    logger.warning("seed word %r is not in the vocabulary, skipping", w)
                    continue
                self.seed_topic[wid] = topic

    # -- basic views ------------------------------------------------------

    @property
    def V(self) -> int:
        return len(self.corpus.vocab)

    @property
    def n_tokens(self) -> int:
        return len(self.tokens)

    @property
    def n_topics(self) -> int:
        return int(self.active.sum())

    def active_topics(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.active)]

    def doc_len(self, j: int) -> int:
        return int(self.doc_off[j + 1] - self.doc_off[j])

    def doc_slots(self, j: int) -> list[int]:
        """Occupied table slots of document ``j``."""
        base = self.doc_off[j]
        return [s for s in range(self.hw[j]) if self.tb_count[base + s] > 0]

    def topic_word_dist(self, k: int) -> np.ndarray:
        """Smoothed word distribution of topic ``k`` (sums to 1)."""
        if not self.active[k]:
            raise StateError(f"topic {k} is not active")
        beta = self.hyper.beta
        return (self.n_kv[k] + beta) / (self.n_k[k] + self.V * beta)

    def top_words(self, k: int, n: int = 10) -> list[tuple[str, float]]:
        dist = self.topic_word_dist(k)
        order = np.argsort(-dist, kind="stable")[:n]
        terms = self.corpus.vocab.terms
        return [(terms[i], float(dist[i])) for i in order]

    def doc_topic_dist(self, j: int) -> dict[int, float]:
        """Share of document ``j``'s tokens sitting at each topic."""
        base = self.doc_off[j]
        L = self.doc_len(j)
        shares: dict[int, float] = {}
        for s in range(self.hw[j]):
            c = int(self.tb_count[base + s])
            if c > 0:
                k = int(self.tb_topic[base + s])
                shares[k] = shares.get(k, 0.0) + c / L
        return shares

    def doc_topic_token_counts(self, j: int) -> dict[int, np.ndarray]:
        """Per-topic term count vectors contributed by document ``j``."""
        base = self.doc_off[j]
        out: dict[int, np.ndarray] = {}
        for i in range(self.doc_len(j)):
            s = self.assign[base + i]
            if s < 0:
                continue
            k = int(self.tb_topic[base + s])
            if k not in out:
                out[k] = np.zeros(self.V, dtype=np.int64)
            out[k][self.tokens[base + i]] += 1
        return out

    # -- topic lifecycle --------------------------------------------------

    def ensure_capacity(self, rows: int) -> None:
        k_cap = self.n_kv.shape[0]
        if rows <= k_cap:
            return
        new_cap = max(rows, 2 * k_cap)
        grow = lambda arr, shape: np.concatenate([arr, np.zeros(shape, dtype=arr.dtype)])
        self.n_kv = np.concatenate(
            [self.n_kv, np.zeros((new_cap - k_cap, self.V), dtype=np.int64)]
        )
        self.n_k = grow(self.n_k, new_cap - k_cap)
        self.m_k = grow(self.m_k, new_cap - k_cap)
        self.active = grow(self.active, new_cap - k_cap)
        self.protected = grow(self.protected, new_cap - k_cap)

    def spawn_topic(self, protect: bool = False) -> int:
        """Create a fresh empty topic with the next never-used id."""
        k = self.next_topic_id
        self.ensure_capacity(k + 1)
        self.active[k] = True
        self.protected[k] = protect
        self.n_kv[k] = 0
        self.n_k[k] = 0
        self.m_k[k] = 0
        self.next_topic_id = k + 1
        return k

    def retire_topic(self, k: int) -> None:
        if self.m_k[k] != 0 or self.n_k[k] != 0:
            raise StateError(f"cannot retire topic {k}: it still has tables or tokens")
        self.active[k] = False
        self.protected[k] = False

    # -- copying ----------------------------------------------------------

    def copy(self) -> "ModelState":
        """Deep copy sharing only the (immutable) corpus."""
        dup = object.__new__(ModelState)
        dup.corpus = self.corpus
        dup.hyper = Hyperparams.from_dict(self.hyper.to_dict())
        dup.prior = ConceptPrior.from_dict(self.prior.to_dict())
        dup.n_docs = self.n_docs
        dup.doc_off = self.doc_off
        dup.tokens = self.tokens
        dup.seed_topic = self.seed_topic.copy()
        for name in ("n_kv", "n_k", "m_k", "active", "protected", "assign", "tb_topic", "tb_count", "hw"):
            setattr(dup, name, getattr(self, name).copy())
        dup.next_topic_id = self.next_topic_id
        dup.total_tables = self.total_tables
        dup.iteration = self.iteration
        dup.potential = self.potential.copy()
        bg = np.random.PCG64()
        bg.state = self.rng.bit_generator.state
        dup.rng = np.random.Generator(bg)
        return dup

    # -- consistency ------------------------------------------------------

    def check_invariants(self, allow_detached: bool = False) -> None:
        """Verify count bookkeeping; raises :class:`StateError` on violation."""
        seated = 0
        tables = 0
        m_recount = np.zeros_like(self.m_k)
        for j in range(self.n_docs):
            base = self.doc_off[j]
            L = self.doc_len(j)
            occupancy = 0
            for s in range(self.hw[j]):
                c = int(self.tb_count[base + s])
                if c < 0:
                    raise StateError(f"doc {j} slot {s}: negative table count")
                if c > 0:
                    k = int(self.tb_topic[base + s])
                    if not self.active[k]:
                        raise StateError(f"doc {j} slot {s} serves retired topic {k}")
                    m_recount[k] += 1
                    tables += 1
                    occupancy += c
            for i in range(L):
                s = int(self.assign[base + i])
                if s < 0:
                    if not allow_detached:
                        raise StateError(f"doc {j} token {i} is detached")
                    continue
                if s >= self.hw[j] or self.tb_count[base + s] <= 0:
                    raise StateError(f"doc {j} token {i} points at empty slot {s}")
                seated += 1
            n_assigned = int((self.assign[base : base + L] >= 0).sum())
            if occupancy != n_assigned:
                raise StateError(
                    f"doc {j}: table occupancy {occupancy} != seated tokens {n_assigned}"
                )
        if not allow_detached and seated != self.n_tokens:
            raise StateError(f"{self.n_tokens - seated} tokens are detached")

        if (self.n_kv < 0).any() or (self.n_k < 0).any() or (self.m_k < 0).any():
            raise StateError("negative topic counts")
        row_sums = self.n_kv.sum(axis=1)
        if not np.array_equal(row_sums, self.n_k):
            raise StateError("n_kv rows do not sum to n_k")
        if int(self.n_k.sum()) != seated:
            raise StateError("topic token totals do not match seated tokens")
        if not np.array_equal(m_recount, self.m_k):
            raise StateError("table counts per topic do not match m_k")
        if tables != self.total_tables:
            raise StateError(f"total_tables {self.total_tables} != recount {tables}")
        inactive = ~self.active
        if self.n_k[inactive].any() or self.m_k[inactive].any():
            raise StateError("retired topic rows still carry counts")
        for k in self.active_topics():
            if self.m_k[k] == 0 and not self.protected[k]:
                raise StateError(f"active topic {k} has no tables and is not protected")

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": STATE_FORMAT,
            "hyper": self.hyper.to_dict(),
            "prior": self.prior.to_dict(),
            "corpus": _corpus_fingerprint(self.corpus),
            "iteration": self.iteration,
            "next_topic_id": self.next_topic_id,
            "assign": self.assign.tolist(),
            "tb_topic": self.tb_topic.tolist(),
            "tb_count": self.tb_count.tolist(),
            "topics": [
                {
                    "id": int(k),
                    "m": int(self.m_k[k]),
                    "n": int(self.n_k[k]),
                    "protected": bool(self.protected[k]),
                    "counts": self.n_kv[k].tolist(),
                }
                for k in self.active_topics()
            ],
            "potential": self.potential.to_dict(),
            "rng": self.rng.bit_generator.state,
        }

    @classmethod
    def from_dict(cls, data: Mapping, corpus: Corpus) -> "ModelState":
        if data.get("format") != STATE_FORMAT:
            raise StateError(f"unrecognized state format tag {data.get('format')!r}")
        fp = _corpus_fingerprint(corpus)
        if data["corpus"] != fp:
            raise StateError(
                "snapshot does not match the supplied corpus "
                f"(expected {data['corpus']}, got {fp})"
            )
        state = cls(
            corpus,
            Hyperparams.from_dict(data["hyper"]),
            ConceptPrior.from_dict(data["prior"]),
        )
        state.iteration = int(data["iteration"])
        state.next_topic_id = int(data["next_topic_id"])
        state.assign = np.asarray(data["assign"], dtype=np.int32)
        state.tb_topic = np.asarray(data["tb_topic"], dtype=np.int32)
        state.tb_count = np.asarray(data["tb_count"], dtype=np.int32)
        state.ensure_capacity(state.next_topic_id)
        state.active[:] = False
        state.protected[:] = False
        state.n_kv[:] = 0
        state.n_k[:] = 0
        state.m_k[:] = 0
        for entry in data["topics"]:
            k = int(entry["id"])
            state.active[k] = True
            state.protected[k] = bool(entry["protected"])
            state.m_k[k] = int(entry["m"])
            state.n_k[k] = int(entry["n"])
            state.n_kv[k] = np.asarray(entry["counts"], dtype=np.int64)
        state.total_tables = int(state.m_k.sum())
        state.potential = PotentialFunction.from_dict(data["potential"])
        bg = np.random.PCG64()
        bg.state = dict(data["rng"])
        state.rng = np.random.Generator(bg)
        # recompute slot high-water marks from the loaded tables
        for j in range(state.n_docs):
            base = state.doc_off[j]
            hw = 0
            for s in range(state.doc_len(j)):
                if state.tb_count[base + s] > 0:
                    hw = s + 1
            state.hw[j] = hw
        state.check_invariants(allow_detached=True)
        return state


def seeds_from_iterable(pairs: Iterable[tuple[int, Iterable[str]]]) -> ConceptPrior:
    return ConceptPrior({k: tuple(ws) for k, ws in pairs})
