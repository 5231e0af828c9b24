"""Branching version store for refined models.

Every commit freezes a full serialized snapshot of the model (plus its
relevance state) as a new leaf under an existing node, labelled with
the refinement records that produced it. Snapshots are plain dicts, so
committed nodes are immutable by construction: materializing a node
always builds a fresh state, and nothing written later can reach back.

Trees persist as a single zip archive holding a manifest (format tag,
node index, per-blob sha256 checksums), the corpus, and one blob per
node. Loading is self-contained apart from the embedding file path,
which travels in the manifest metadata.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import zipfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .corpus import Corpus
from .state import ModelState, _corpus_fingerprint
from .suggest import RelevanceState

logger = logging.getLogger(__name__)

TREE_FORMAT = "topicloop-tree-v1"


class TreeError(ValueError):
    """Invalid tree operation or unreadable tree archive."""


@dataclass
class ModelNode:
    node_id: int
    parent_id: int | None
    snapshot: dict
    relevance: dict | None
    edge_log: list[dict] = field(default_factory=list)
    created_at: str = ""
    note: str = ""


class ModelTree:
    """Numbered model versions connected by refinement edges.

    The root is always node 1; ids increase monotonically and are never
    reused. Commits serialize on an internal lock, reads are lock-free.
    """

    def __init__(
        self,
        corpus: Corpus,
        root_state: ModelState | None = None,
        root_relevance: RelevanceState | None = None,
        embedding_path: str | None = None,
    ):
        self.corpus = corpus
        self.embedding_path = embedding_path
        self.nodes: dict[int, ModelNode] = {}
        self._children: dict[int, list[int]] = {}
        self._next_id = 1
        self._lock = threading.Lock()
        if root_state is not None:
            self._insert(
                parent_id=None,
                snapshot=root_state.to_dict(),
                relevance=root_relevance.to_dict() if root_relevance else None,
                edge_log=[],
            )

    # -- structure --------------------------------------------------------

    @property
    def root_id(self) -> int:
        return 1

    def node(self, node_id: int) -> ModelNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise TreeError(f"node {node_id} does not exist") from None

    def children_of(self, node_id: int) -> list[int]:
        self.node(node_id)
        return sorted(self._children.get(node_id, []))

    def _insert(self, parent_id, snapshot, relevance, edge_log, note="", created_at=None):
        node = ModelNode(
            node_id=self._next_id,
            parent_id=parent_id,
            snapshot=snapshot,
            relevance=relevance,
            edge_log=list(edge_log),
            created_at=created_at or datetime.now(timezone.utc).isoformat(),
            note=note,
        )
        self.nodes[node.node_id] = node
        if parent_id is not None:
            self._children.setdefault(parent_id, []).append(node.node_id)
        self._next_id += 1
        return node.node_id

    def commit(
        self,
        parent_id: int,
        state: ModelState,
        relevance: RelevanceState | None,
        edge_log: Sequence[dict],
        note: str = "",
    ) -> int:
        """Freeze ``state`` as a new child of ``parent_id``."""
        if parent_id not in self.nodes:
            raise TreeError(f"parent node {parent_id} does not exist")
        if not edge_log:
            raise TreeError("edge log must not be empty")
        if _corpus_fingerprint(state.corpus) != _corpus_fingerprint(self.corpus):
            raise TreeError("state was built on a different corpus than this tree")
        with self._lock:
            return self._insert(
                parent_id=parent_id,
                snapshot=state.to_dict(),
                relevance=relevance.to_dict() if relevance else None,
                edge_log=[dict(r) for r in edge_log],
                note=note,
            )

    # -- materialization --------------------------------------------------

    def state_at(self, node_id: int) -> ModelState:
        """A fresh, independent model rebuilt from the node's snapshot."""
        return ModelState.from_dict(self.node(node_id).snapshot, self.corpus)

    def relevance_at(self, node_id: int) -> RelevanceState:
        node = self.node(node_id)
        if node.relevance is not None:
            return RelevanceState.from_dict(node.relevance)
        hyper = node.snapshot.get("hyper", {})
        return RelevanceState(
            self.corpus.n_docs,
            gamma_r=hyper.get("gamma_rel", 1.0),
            gamma_ir=hyper.get("gamma_irr", 1.0),
        )

    # -- history and comparison -------------------------------------------

    def edge_history(self, parent_id: int, child_id: int) -> list[dict]:
        """Refinement records along the direct edge parent -> child."""
        child = self.node(child_id)
        self.node(parent_id)
        if child.parent_id != parent_id:
            raise TreeError(f"no edge from node {parent_id} to node {child_id}")
        return list(child.edge_log)

    def compare(self, node_ids: Sequence[int]) -> list[dict]:
        """Side-by-side topic summaries for the given nodes."""
        if not node_ids:
            raise TreeError("compare needs at least one node id")
        out = []
        for nid in node_ids:
            state = self.state_at(nid)
            topics = [
                {
                    "topic": k,
                    "words": [[w, wt] for w, wt in state.top_words(k, 10)],
                }
                for k in state.active_topics()
            ]
            out.append({"node_id": nid, "topics": topics})
        return out

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write the whole tree atomically as a checksummed zip archive."""
        path = Path(path)
        blobs: dict[str, bytes] = {
            "corpus.json": json.dumps(self.corpus.to_dict()).encode("utf-8")
        }
        index = []
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            name = f"nodes/{nid}.json"
            blobs[name] = json.dumps(
                {
                    "snapshot": node.snapshot,
                    "relevance": node.relevance,
                    "edge_log": node.edge_log,
                }
            ).encode("utf-8")
            index.append(
                {
                    "id": nid,
                    "parent": node.parent_id,
                    "created_at": node.created_at,
                    "note": node.note,
                    "blob": name,
                }
            )
        manifest = {
            "format": TREE_FORMAT,
            "embedding_path": self.embedding_path,
            "next_id": self._next_id,
            "corpus_blob": "corpus.json",
            "nodes": index,
            "checksums": {
                name: hashlib.sha256(data).hexdigest() for name, data in blobs.items()
            },
        }
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        os.close(fd)
        try:
            with zipfile.ZipFile(tmp, "w", compression=zipfile.ZIP_DEFLATED) as zf:
                zf.writestr("manifest.json", json.dumps(manifest, indent=1))
                for name, data in blobs.items():
                    zf.writestr(name, data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path: str | Path) -> "ModelTree":
        try:
            zf = zipfile.ZipFile(path)
        except (zipfile.BadZipFile, OSError) as exc:
            raise TreeError(f"{path}: not a valid tree archive: {exc}") from exc
        with zf:
            try:
                manifest = json.loads(zf.read("manifest.json"))
            except KeyError:
                raise TreeError(f"{path}: archive is missing manifest.json") from None
            fmt = manifest.get("format")
            if fmt != TREE_FORMAT:
                raise TreeError(f"{path}: unsupported tree format {fmt!r}")

            def read_checked(name: str) -> bytes:
                try:
                    data = zf.read(name)
                except KeyError:
                    raise TreeError(f"{path}: archive is missing {name}") from None
                want = manifest["checksums"].get(name)
                if hashlib.sha256(data).hexdigest() != want:
                    raise TreeError(f"{path}: checksum mismatch for {name}")
                return data

            corpus = Corpus.from_dict(json.loads(read_checked(manifest["corpus_blob"])))
            tree = cls(corpus, embedding_path=manifest.get("embedding_path"))
            for entry in sorted(manifest["nodes"], key=lambda e: e["id"]):
                blob = json.loads(read_checked(entry["blob"]))
                node = ModelNode(
                    node_id=entry["id"],
                    parent_id=entry["parent"],
                    snapshot=blob["snapshot"],
                    relevance=blob.get("relevance"),
                    edge_log=blob.get("edge_log", []),
                    created_at=entry.get("created_at", ""),
                    note=entry.get("note", ""),
                )
                tree.nodes[node.node_id] = node
                if node.parent_id is not None:
                    tree._children.setdefault(node.parent_id, []).append(node.node_id)
            tree._next_id = manifest["next_id"]
        return tree


def save_tree(tree: ModelTree, path: str | Path) -> None:
    tree.save(path)


def load_tree(path: str | Path) -> ModelTree:
    return ModelTree.load(path)
