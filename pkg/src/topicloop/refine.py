"""Interactive refinement of a fitted model.

Every refinement compiles down to the same three ingredients:

- potential layers that bias future sampling for the affected words,
  documents, or word-document cells;
- a *forget set* of token positions whose assignments are discarded so
  the next sweeps can re-seat them under the new potential;
- optional structural actions (spawning the target topic of a split,
  transferring seed anchors when a seeded topic is absorbed).

``apply_refinements`` runs the whole batch against a copy of the parent
state: compile each refinement in order, install the layers, detach the
union of the forget sets, then run a few Gibbs sweeps so the forgotten
tokens settle. The parent state is never touched; a failed compile
aborts the batch with nothing applied.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .potentials import Layer
from .sampler import detach_token, gibbs_sweep
from .state import ConceptPrior, ModelState

logger = logging.getLogger(__name__)


class RefinementError(ValueError):
    """A refinement that cannot be compiled or applied as requested."""


# -- refinement requests --------------------------------------------------


@dataclass(frozen=True)
class AddWord:
    """Pull every occurrence of ``word`` into ``topic``."""

    topic: int
    word: str


@dataclass(frozen=True)
class RemoveWord:
    """Ban ``word`` from ``topic``; other topics keep their say."""

    topic: int
    word: str


@dataclass(frozen=True)
class SwapOrder:
    """Promote ``lower`` above ``higher`` in ``topic``'s ranking.

    ``higher`` and ``lower`` name the words by their current order. The
    promoted word is pinned inside the topic and demoted elsewhere by a
    data-driven penalty (see :func:`swap_penalty`).
    """

    topic: int
    higher: str
    lower: str


@dataclass(frozen=True)
class RemoveDoc:
    """Ban every token of document ``doc`` from ``topic``."""

    topic: int
    doc: int


@dataclass(frozen=True)
class MergeTopics:
    """Fold topic ``absorb`` into topic ``keep``."""

    keep: int
    absorb: int


@dataclass(frozen=True)
class SplitTopic:
    """Carve the given seed words out of ``topic`` into a fresh topic."""

    topic: int
    seed_words: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "seed_words", tuple(self.seed_words))


Refinement = Union[AddWord, RemoveWord, SwapOrder, RemoveDoc, MergeTopics, SplitTopic]

_TYPE_TAGS = {
    AddWord: "add_word",
    RemoveWord: "remove_word",
    SwapOrder: "swap_order",
    RemoveDoc: "remove_doc",
    MergeTopics: "merge_topics",
    SplitTopic: "split_topic",
}


def refinement_to_dict(ref: Refinement) -> dict:
    data = {"type": _TYPE_TAGS[type(ref)]}
    for key, value in ref.__dict__.items():
        data[key] = list(value) if isinstance(value, tuple) else value
    return data


def refinement_from_dict(data: dict) -> Refinement:
    tags = {tag: cls for cls, tag in _TYPE_TAGS.items()}
    cls = tags.get(data.get("type"))
    if cls is None:
        raise RefinementError(f"unknown refinement type {data.get('type')!r}")
    kwargs = {k: v for k, v in data.items() if k != "type"}
    if cls is SplitTopic:
        kwargs["seed_words"] = tuple(kwargs.get("seed_words", ()))
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise RefinementError(f"bad fields for {data['type']}: {exc}") from exc


# -- swap penalty ---------------------------------------------------------


def swap_penalty(n_higher: int, n_lower: int, n_lower_elsewhere: int) -> float:
    """Demotion factor for the promoted word outside the target topic.

    The ratio ``r = (n_higher - n_lower) / n_lower_elsewhere`` measures how
    much of the promoted word's count deficit could be covered by pulling
    its occurrences in from other topics. A ratio above one means other
    topics hold more than enough, so they are fully drained (penalty 0);
    at zero or below nothing needs to move (penalty 1); in between the
    penalty falls linearly. When the word never occurs elsewhere the
    penalty is 0 or 1 by the sign of the deficit alone.
    """
    diff = n_higher - n_lower
    if n_lower_elsewhere == 0:
        return 0.0 if diff > 0 else 1.0
    r = diff / n_lower_elsewhere
    return min(1.0, max(0.0, 1.0 - r))


# -- compilation ----------------------------------------------------------


@dataclass
class CompiledRefinement:
    """The executable form of one refinement.

    ``forget`` holds ``(doc, position)`` pairs. ``actions`` lists
    structural steps ``apply_refinements`` must run before forgetting:
    ``("spawn", topic_id)`` or ``("move_seeds", src, dst)``.
    """

    layers: list[Layer] = field(default_factory=list)
    forget: set[tuple[int, int]] = field(default_factory=set)
    record: dict = field(default_factory=dict)
    actions: list[tuple] = field(default_factory=list)


def _require_topic(state: ModelState, topic: int) -> int:
    if not (0 <= topic < state.next_topic_id and state.active[topic]):
        raise RefinementError(f"topic {topic} is not active")
    return int(topic)


def _require_word(state: ModelState, word: str) -> int:
    wid = state.corpus.vocab.index.get(word)
    if wid is None:
        raise RefinementError(f"word {word!r} is not in the vocabulary")
    return wid


def _check_anchor(state: ModelState, word: str, wid: int, topic: int) -> None:
    anchor = int(state.seed_topic[wid])
    if anchor >= 0 and anchor != topic:
        raise RefinementError(
            f"word {word!r} is seed-anchored to topic {anchor} and cannot be "
            f"pulled into topic {topic}"
        )


def _token_topics(state: ModelState) -> np.ndarray:
    """Current topic of every token, -1 where detached."""
    lengths = np.diff(state.doc_off)
    docs = np.repeat(np.arange(state.n_docs), lengths)
    base = state.doc_off[docs]
    slots = state.assign
    topics = state.tb_topic[base + np.maximum(slots, 0)]
    return np.where(slots >= 0, topics, -1)


def _positions(state: ModelState, mask: np.ndarray) -> set[tuple[int, int]]:
    """Translate a global token mask into (doc, in-doc position) pairs."""
    pos = np.nonzero(mask)[0]
    docs = np.searchsorted(state.doc_off, pos, side="right") - 1
    return {(int(j), int(p - state.doc_off[j])) for j, p in zip(docs, pos)}


def compile_refinement(state: ModelState, ref: Refinement) -> CompiledRefinement:
    """Turn one refinement into layers, forgets, and structural actions.

    Reads the state but never mutates it; counts are taken as they stand
    right now, which is what makes the swap penalty data-driven.
    """
    if isinstance(ref, AddWord):
        z = _require_topic(state, ref.topic)
        wid = _require_word(state, ref.word)
        _check_anchor(state, ref.word, wid, z)
        return CompiledRefinement(
            layers=[Layer(topic=z, match_value=1.0, other_value=0.0, word=wid)],
            forget=_positions(state, state.tokens == wid),
            record={"type": "add_word", "topic": z, "word": ref.word},
        )

    if isinstance(ref, RemoveWord):
        z = _require_topic(state, ref.topic)
        wid = _require_word(state, ref.word)
        if int(state.seed_topic[wid]) == z:
            raise RefinementError(
                f"word {ref.word!r} is seed-anchored to topic {z} and cannot be removed from it"
            )
        mask = (state.tokens == wid) & (_token_topics(state) == z)
        return CompiledRefinement(
            layers=[Layer(topic=z, match_value=0.0, other_value=None, word=wid)],
            forget=_positions(state, mask),
            record={"type": "remove_word", "topic": z, "word": ref.word},
        )

    if isinstance(ref, SwapOrder):
        z = _require_topic(state, ref.topic)
        w_hi = _require_word(state, ref.higher)
        w_lo = _require_word(state, ref.lower)
        if w_hi == w_lo:
            raise RefinementError("swap needs two distinct words")
        _check_anchor(state, ref.lower, w_lo, z)
        n_hi = int(state.n_kv[z, w_hi])
        n_lo = int(state.n_kv[z, w_lo])
        elsewhere = int(state.corpus.term_counts()[w_lo]) - n_lo
        delta = swap_penalty(n_hi, n_lo, elsewhere)
        mask = (state.tokens == w_hi) | (state.tokens == w_lo)
        return CompiledRefinement(
            layers=[Layer(topic=z, match_value=1.0, other_value=delta, word=w_lo)],
            forget=_positions(state, mask),
            record={
                "type": "swap_order",
                "topic": z,
                "higher": ref.higher,
                "lower": ref.lower,
                "computed_delta": delta,
            },
        )

    if isinstance(ref, RemoveDoc):
        z = _require_topic(state, ref.topic)
        if not 0 <= ref.doc < state.n_docs:
            raise RefinementError(f"doc index {ref.doc} out of range")
        topics = _token_topics(state)
        lo, hi = int(state.doc_off[ref.doc]), int(state.doc_off[ref.doc + 1])
        forget = {(ref.doc, i - lo) for i in range(lo, hi) if topics[i] == z}
        return CompiledRefinement(
            layers=[Layer(topic=z, match_value=0.0, other_value=None, doc=ref.doc)],
            forget=forget,
            record={"type": "remove_doc", "topic": z, "doc": ref.doc},
        )

    if isinstance(ref, MergeTopics):
        keep = _require_topic(state, ref.keep)
        absorb = _require_topic(state, ref.absorb)
        if keep == absorb:
            raise RefinementError("merge needs two distinct topics")
        mask = _token_topics(state) == absorb
        forget = _positions(state, mask)
        cells = sorted({(j, int(state.tokens[state.doc_off[j] + i])) for j, i in forget})
        layers = [
            Layer(topic=keep, match_value=1.0, other_value=0.0, word=w, doc=j)
            for j, w in cells
        ]
        actions: list[tuple] = []
        if any(state.seed_topic == absorb):
            actions.append(("move_seeds", absorb, keep))
        return CompiledRefinement(
            layers=layers,
            forget=forget,
            record={"type": "merge_topics", "keep": keep, "absorb": absorb},
            actions=actions,
        )

    if isinstance(ref, SplitTopic):
        z = _require_topic(state, ref.topic)
        if not ref.seed_words:
            raise RefinementError("split needs at least one seed word")
        t_new = state.next_topic_id
        layers = []
        forget: set[tuple[int, int]] = set()
        for word in ref.seed_words:
            wid = _require_word(state, word)
            _check_anchor(state, word, wid, t_new)
            if state.n_kv[z, wid] == 0:
                raise RefinementError(
                    f"seed word {word!r} does not currently appear in topic {z}"
                )
            layers.append(Layer(topic=t_new, match_value=1.0, other_value=0.0, word=wid))
            forget |= _positions(state, state.tokens == wid)
        return CompiledRefinement(
            layers=layers,
            forget=forget,
            record={
                "type": "split_topic",
                "topic": z,
                "seed_words": list(ref.seed_words),
                "new_topic": t_new,
            },
            actions=[("spawn", t_new)],
        )

    raise RefinementError(f"unknown refinement {ref!r}")


# -- application ----------------------------------------------------------


@dataclass
class ApplyResult:
    state: ModelState
    records: list[dict]


def _compile_batch(work: ModelState, refinements: Sequence[Refinement]):
    """Compile a batch in order against ``work``, executing structural
    actions as they appear so later entries see their effects."""
    layers: list[Layer] = []
    forget: set[tuple[int, int]] = set()
    records: list[dict] = []
    spawned: list[int] = []
    for ref in refinements:
        comp = compile_refinement(work, ref)
        for action in comp.actions:
            if action[0] == "spawn":
                t = work.spawn_topic(protect=True)
                assert t == action[1]
                spawned.append(t)
            else:
                _move_seeds(work, action[1], action[2])
        layers.extend(comp.layers)
        forget |= comp.forget
        records.append(comp.record)
    return layers, forget, records, spawned


def validate_refinements(state: ModelState, refinements: Sequence[Refinement]) -> list[dict]:
    """Check that a batch would compile against ``state``; return the
    records it would produce. The state itself is never touched."""
    if not refinements:
        raise RefinementError("no refinements to apply")
    _, _, records, _ = _compile_batch(state.copy(), refinements)
    return records


def _move_seeds(state: ModelState, src: int, dst: int) -> None:
    """Transfer seed anchors from an absorbed topic to the kept one."""
    moved = state.seed_topic == src
    state.seed_topic[moved] = dst
    seeds = {int(k): list(v) for k, v in state.prior.seeds.items()}
    seeds.setdefault(dst, []).extend(seeds.pop(src, []))
    state.prior = ConceptPrior({k: tuple(v) for k, v in seeds.items() if v})
    state.protected[src] = False
    if moved.any():
        state.protected[dst] = True


def apply_refinements(
    state: ModelState,
    refinements: Sequence[Refinement],
    sweeps: int | None = None,
    use_kernel: bool | None = None,
) -> ApplyResult:
    """Apply a batch of refinements to a copy of ``state``.

    Refinements compile in order against the working copy, so a split's
    fresh topic is visible to later entries and later layers shadow
    earlier ones. Returns the refined child state together with the
    per-refinement records (including computed swap penalties and split
    topic ids) for provenance logs. Raises without side effects if any
    entry fails to compile.
    """
    if sweeps is None:
        sweeps = state.hyper.apply_sweeps
    if sweeps < 1:
        raise RefinementError("applying refinements needs at least one sweep")
    if not refinements:
        raise RefinementError("no refinements to apply")

    work = state.copy()
    layers, forget, records, spawned = _compile_batch(work, refinements)

    work.potential.extend(layers)
    for j, i in sorted(forget):
        detach_token(work, j, i)
    for _ in range(sweeps):
        gibbs_sweep(work, use_kernel=use_kernel)

    for t in spawned:
        work.protected[t] = False
        if work.m_k[t] == 0:
            work.active[t] = False
            logger.warning("split topic %d attracted no tables and was retired", t)
    work.check_invariants()
    return ApplyResult(state=work, records=records)


# -- pending queue --------------------------------------------------------


class PendingSet:
    """Ordered batch of refinements staged for the next apply."""

    def __init__(self):
        self.items: list[Refinement] = []

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def queue(self, ref: Refinement) -> None:
        self.items.append(ref)

    def undo(self) -> Refinement | None:
        """Drop and return the most recently queued refinement."""
        if not self.items:
            logger.warning("undo requested but the pending set is empty")
            return None
        return self.items.pop()

    def clear(self) -> None:
        self.items.clear()

    def to_dicts(self) -> list[dict]:
        return [refinement_to_dict(r) for r in self.items]
