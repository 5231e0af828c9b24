"""topicloop: interactive topic modeling with live human refinements.

A nonparametric topic sampler whose state can be branched, refined with
word- and document-level edits, and resampled, plus the supporting
suggestion, evaluation, and serving layers.
"""

__version__ = "0.1.0"
