"""Sampling potentials: soft and hard constraints on topic assignments.

A :class:`PotentialFunction` maps ``(topic, word, doc)`` cells to a
nonnegative multiplier applied to sampling weights.  It is stored as an
ordered stack of :class:`Layer` objects.  Every layer names one topic and
assigns ``match_value`` to cells of that topic; ``other_value``, when set,
covers every other topic including topics that do not exist yet.  ``word``
and ``doc`` restrict the cells a layer speaks for (``None`` means any).

Lookup walks the stack newest to oldest and returns the first opinion
found, defaulting to 1.0.  A layer whose ``other_value`` is ``None`` has
no opinion on topics other than its own, so older layers still apply
there.  Refinement operations compile into these layers; the sampler
multiplies them into every assignment weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

FRESH_TOPIC = -1  # pseudo topic id used to query the wildcard value


@dataclass(frozen=True)
class Layer:
    topic: int
    match_value: float
    other_value: float | None = None
    word: int | None = None
    doc: int | None = None

    def __post_init__(self):
        if self.match_value < 0.0:
            raise ValueError(f"potential values must be nonnegative, got {self.match_value}")
        if self.other_value is not None and self.other_value < 0.0:
            raise ValueError(f"potential values must be nonnegative, got {self.other_value}")

    def covers(self, word: int, doc: int) -> bool:
        return (self.word is None or self.word == word) and (
            self.doc is None or self.doc == doc
        )

    def value_for(self, topic: int) -> float | None:
        """This layer's opinion on ``topic``, or None if it has none."""
        if topic == self.topic:
            return self.match_value
        return self.other_value


class PotentialFunction:
    def __init__(self, layers: Sequence[Layer] = ()):
        self.layers: list[Layer] = list(layers)

    @property
    def is_empty(self) -> bool:
        return not self.layers

    def install(self, layer: Layer) -> None:
        self.layers.append(layer)

    def extend(self, layers: Sequence[Layer]) -> None:
        self.layers.extend(layers)

    def lookup(self, topic: int, word: int, doc: int) -> float:
        for layer in reversed(self.layers):
            if not layer.covers(word, doc):
                continue
            val = layer.value_for(topic)
            if val is not None:
                return val
        return 1.0

    def fresh_topic_value(self, word: int, doc: int) -> float:
        """Multiplier a not-yet-existing topic would get at ``(word, doc)``."""
        return self.lookup(FRESH_TOPIC, word, doc)

    def column(
        self, word: int, doc: int, topics: Sequence[int]
    ) -> tuple[np.ndarray, float]:
        """Values for several topics at one ``(word, doc)`` cell.

        Returns the per-topic array plus the fresh-topic wildcard value.
        """
        col = np.array([self.lookup(k, word, doc) for k in topics], dtype=np.float64)
        return col, self.fresh_topic_value(word, doc)

    def copy(self) -> "PotentialFunction":
        return PotentialFunction(self.layers)  # layers are frozen, sharing is safe

    # -- persistence ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "layers": [
                {
                    "topic": l.topic,
                    "match": l.match_value,
                    "other": l.other_value,
                    "word": l.word,
                    "doc": l.doc,
                }
                for l in self.layers
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialFunction":
        return cls(
            Layer(
                topic=d["topic"],
                match_value=d["match"],
                other_value=d["other"],
                word=d["word"],
                doc=d["doc"],
            )
            for d in data["layers"]
        )
