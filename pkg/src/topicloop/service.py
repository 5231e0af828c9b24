"""HTTP façade over corpora, model trees, and refinement jobs.

One process hosts many corpora and many trees. Sampling work (training
and refinement application) runs on background threads, at most one job
per tree at a time; everything else answers synchronously from committed
snapshots. All mutating operations land as new tree nodes, so clients
can poll, branch, and download freely while a job runs.
"""

from __future__ import annotations

import logging
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from fastapi import Body, FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .corpus import Corpus, CorpusError, build_corpus, load_corpus
from .evaluate import EvalError, TopicSummary, distance_map
from .refine import (
    PendingSet,
    RefinementError,
    refinement_from_dict,
    refinement_to_dict,
    apply_refinements,
    validate_refinements,
)
from .sampler import train, init_model
from .state import ConceptPrior, Hyperparams, StateError
from .suggest import (
    EmbeddingTable,
    RelevanceState,
    SuggestError,
    expand_query,
    refresh_suggestions,
    suggest_words,
)
from .tree import ModelTree, TreeError

logger = logging.getLogger(__name__)


class CorpusUpload(BaseModel):
    records: list[dict] | None = None
    path: str | None = None
    stopwords: list[str] = []
    min_doc_freq: int = 2


class ModelCreate(BaseModel):
    corpus_id: str
    hyper: dict = {}
    priors: dict[str, list[str]] = {}
    note: str = ""


class TrainRequest(BaseModel):
    iters: int = Field(ge=0)


class ExpandRequest(BaseModel):
    phrase: str
    n: int = Field(default=30, ge=1)


@dataclass
class Job:
    job_id: str
    tree_id: str
    phase: str
    total_iters: int
    status: str = "running"
    done_iters: int = 0
    node_id: int | None = None
    error: str | None = None
    started_at: float = field(default_factory=time.time)

    def summary(self) -> dict:
        return {
            "job_id": self.job_id,
            "tree_id": self.tree_id,
            "phase": self.phase,
            "status": self.status,
            "done_iters": self.done_iters,
            "total_iters": self.total_iters,
            "node_id": self.node_id,
            "error": self.error,
            "started_at": self.started_at,
        }


class Registry:
    """All server-side state: corpora, trees, pending edits, jobs."""

    def __init__(self, workdir=None, embedding_path=None, use_kernel=None):
        self.workdir = Path(workdir) if workdir is not None else None
        if self.workdir is not None:
            self.workdir.mkdir(parents=True, exist_ok=True)
        self.embedding_path = str(embedding_path) if embedding_path else None
        self.emb = EmbeddingTable.load(embedding_path) if embedding_path else None
        self.use_kernel = use_kernel
        self.corpora: dict[str, Corpus] = {}
        self.trees: dict[str, ModelTree] = {}
        self.pending: dict[tuple[str, int], PendingSet] = {}
        self.jobs: dict[str, Job] = {}
        self.busy: dict[str, str] = {}
        self.lock = threading.Lock()
        self._counter = 0

    def next_id(self, prefix: str) -> str:
        with self.lock:
            self._counter += 1
            return f"{prefix}-{self._counter}"

    def corpus(self, corpus_id: str) -> Corpus:
        try:
            return self.corpora[corpus_id]
        except KeyError:
            raise HTTPException(404, f"corpus {corpus_id!r} does not exist") from None

    def tree(self, tree_id: str) -> ModelTree:
        try:
            return self.trees[tree_id]
        except KeyError:
            raise HTTPException(404, f"tree {tree_id!r} does not exist") from None

    def node_of(self, tree_id: str, node_id: int):
        tree = self.tree(tree_id)
        if node_id not in tree.nodes:
            raise HTTPException(404, f"node {node_id} does not exist in tree {tree_id!r}")
        return tree

    def pending_for(self, tree_id: str, node_id: int) -> PendingSet:
        return self.pending.setdefault((tree_id, node_id), PendingSet())

    def refresh(self, state, rel: RelevanceState) -> RelevanceState:
        if self.emb is not None:
            rel = refresh_suggestions(state, rel, self.emb)
        return rel

    def autosave(self, tree_id: str) -> None:
        if self.workdir is None:
            return
        try:
            self.trees[tree_id].save(self.workdir / f"{tree_id}.tpl")
        except OSError:
            logger.exception("autosave of tree %s failed", tree_id)

    # -- job control ------------------------------------------------------

    def start_job(self, tree_id: str, phase: str, total_iters: int,
                  work: Callable[[Job], int], synchronous: bool) -> Job:
        """Register a job for ``tree_id`` and run ``work`` on a thread.

        Raises 409 if the tree already has a job in flight. ``work``
        receives the job (for progress updates) and returns the id of
        the committed node.
        """
        with self.lock:
            if tree_id in self.busy:
                raise HTTPException(
                    409, f"tree {tree_id!r} already has job {self.busy[tree_id]} running"
                )
            job = Job(
                job_id=f"job-{self._bump()}",
                tree_id=tree_id,
                phase=phase,
                total_iters=total_iters,
            )
            self.jobs[job.job_id] = job
            self.busy[tree_id] = job.job_id

        def run():
            try:
                job.node_id = work(job)
                job.status = "done"
            except Exception as exc:  # jobs must never take the server down
                logger.exception("%s job %s failed", phase, job.job_id)
                job.error = str(exc)
                job.status = "failed"
            finally:
                with self.lock:
                    if self.busy.get(tree_id) == job.job_id:
                        del self.busy[tree_id]

        if synchronous:
            run()
        else:
            threading.Thread(target=run, daemon=True, name=job.job_id).start()
        return job

    def _bump(self) -> int:
        self._counter += 1
        return self._counter


def _job_ticket(job: Job) -> dict:
    """Submission response: job handle plus whatever is known already.

    A fast job can finish before the response is built, so the ticket
    must carry the node id (or error) whenever it is present.
    """
    out = {"job_id": job.job_id, "status": job.status}
    if job.node_id is not None:
        out["node_id"] = job.node_id
    if job.error is not None:
        out["error"] = job.error
    return out


def _tree_view(tree_id: str, tree: ModelTree, job: Job | None) -> dict:
    nodes = []
    for nid in sorted(tree.nodes):
        node = tree.nodes[nid]
        nodes.append(
            {
                "id": nid,
                "parent": node.parent_id,
                "children": tree.children_of(nid),
                "created_at": node.created_at,
                "note": node.note,
                "edge_types": [r.get("type") for r in node.edge_log],
            }
        )
    return {
        "tree_id": tree_id,
        "embedding_path": tree.embedding_path,
        "job": job.summary() if job is not None else None,
        "nodes": nodes,
    }


def create_app(workdir=None, embedding_path=None, use_kernel=None) -> FastAPI:
    """Build the API application around a fresh :class:`Registry`.

    ``workdir`` enables autosaving every tree to ``<workdir>/<id>.tpl``
    after each commit; ``embedding_path`` enables word suggestions and
    query expansion.
    """
    app = FastAPI(title="topicloop", version=__version__)
    svc = Registry(workdir=workdir, embedding_path=embedding_path, use_kernel=use_kernel)
    app.state.svc = svc

    for err in (CorpusError, StateError, RefinementError, SuggestError, TreeError, EvalError):

        @app.exception_handler(err)
        async def _domain_error(request: Request, exc: Exception):
            return JSONResponse(status_code=400, content={"detail": str(exc)})

    # -- corpora ----------------------------------------------------------

    @app.post("/corpora", status_code=201)
    def upload_corpus(body: CorpusUpload):
        if (body.records is None) == (body.path is None):
            raise HTTPException(400, "provide exactly one of 'records' or 'path'")
        if body.records is not None:
            corpus = build_corpus(
                body.records, stopwords=body.stopwords, min_doc_freq=body.min_doc_freq
            )
        else:
            corpus = load_corpus(
                body.path, stopwords=body.stopwords, min_doc_freq=body.min_doc_freq
            )
        corpus_id = svc.next_id("corpus")
        svc.corpora[corpus_id] = corpus
        return {
            "corpus_id": corpus_id,
            "n_docs": corpus.n_docs,
            "n_terms": len(corpus.vocab),
            "n_tokens": corpus.n_tokens,
        }

    @app.get("/corpora")
    def list_corpora():
        return [
            {"corpus_id": cid, "n_docs": c.n_docs, "n_terms": len(c.vocab)}
            for cid, c in sorted(svc.corpora.items())
        ]

    @app.get("/corpora/{corpus_id}")
    def corpus_summary(corpus_id: str):
        corpus = svc.corpus(corpus_id)
        return {
            "corpus_id": corpus_id,
            "n_docs": corpus.n_docs,
            "n_terms": len(corpus.vocab),
            "n_tokens": corpus.n_tokens,
            "categories": corpus.categories(),
        }

    # -- models and trees -------------------------------------------------

    @app.post("/models", status_code=201)
    def create_model(body: ModelCreate):
        corpus = svc.corpus(body.corpus_id)
        try:
            hyper = Hyperparams.from_dict(body.hyper)
        except TypeError as exc:
            raise HTTPException(400, f"bad hyperparameters: {exc}") from None
        hyper.validate()
        prior = ConceptPrior.from_dict(body.priors) if body.priors else None
        oov = []
        if prior is not None:
            oov = sorted(
                w
                for words in prior.seeds.values()
                for w in words
                if w not in corpus.vocab.index
            )
        state = init_model(corpus, hyper, prior)
        rel = RelevanceState.for_model(state)
        tree = ModelTree(
            corpus,
            root_state=state,
            root_relevance=rel,
            embedding_path=svc.embedding_path,
        )
        tree_id = svc.next_id("tree")
        svc.trees[tree_id] = tree
        svc.autosave(tree_id)
        return {
            "tree_id": tree_id,
            "corpus_id": body.corpus_id,
            "root": tree.root_id,
            "warnings": oov,
        }

    @app.get("/trees")
    def list_trees():
        out = []
        for tid, tree in sorted(svc.trees.items()):
            job = svc.jobs.get(svc.busy.get(tid, ""))
            out.append(_tree_view(tid, tree, job))
        return out

    @app.get("/trees/{tree_id}")
    def tree_view(tree_id: str):
        tree = svc.tree(tree_id)
        job = svc.jobs.get(svc.busy.get(tree_id, ""))
        return _tree_view(tree_id, tree, job)

    # -- jobs -------------------------------------------------------------

    @app.post("/trees/{tree_id}/nodes/{node_id}/train", status_code=202)
    def start_training(tree_id: str, node_id: int, body: TrainRequest):
        tree = svc.node_of(tree_id, node_id)
        iters = body.iters

        def work(job: Job) -> int:
            state = tree.state_at(node_id)
            rel = tree.relevance_at(node_id)

            def prog(done, total):
                job.done_iters = done

            train(state, iters, progress=prog, use_kernel=svc.use_kernel)
            rel = svc.refresh(state, rel)
            child = tree.commit(
                node_id, state, rel, [{"type": "train", "iters": iters}]
            )
            svc.autosave(tree_id)
            return child

        job = svc.start_job(tree_id, "train", iters, work, synchronous=iters == 0)
        return _job_ticket(job)

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = svc.jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"job {job_id!r} does not exist")
        return job.summary()

    # -- topic inspection -------------------------------------------------

    @app.get("/trees/{tree_id}/nodes/{node_id}/topics")
    def topic_list(tree_id: str, node_id: int):
        tree = svc.node_of(tree_id, node_id)
        state = tree.state_at(node_id)
        return [TopicSummary.from_state(state, k).to_dict() for k in state.active_topics()]

    @app.get("/trees/{tree_id}/nodes/{node_id}/topics/{topic}")
    def topic_detail(tree_id: str, node_id: int, topic: int):
        tree = svc.node_of(tree_id, node_id)
        state = tree.state_at(node_id)
        if topic not in state.active_topics():
            raise HTTPException(404, f"topic {topic} is not active at node {node_id}")
        summary = TopicSummary.from_state(state, topic).to_dict()

        shares = []
        for j, doc in enumerate(state.corpus.documents):
            w = state.doc_topic_dist(j).get(topic, 0.0)
            if w > 0:
                shares.append((j, doc, w))
        shares.sort(key=lambda item: (-item[2], item[0]))
        summary["docs"] = [
            {"doc": j, "doc_id": doc.doc_id, "text": doc.text, "weight": w}
            for j, doc, w in shares[:10]
        ]

        suggestions = []
        if svc.emb is not None:
            rel = tree.relevance_at(node_id)
            try:
                suggestions = [
                    {"word": s.word, "score": s.score, "cosine": s.cosine}
                    for s in suggest_words(state, rel, topic, svc.emb)
                ]
            except SuggestError as exc:
                logger.warning("no suggestions for topic %d: %s", topic, exc)
        summary["suggestions"] = suggestions
        return summary

    @app.get("/trees/{tree_id}/nodes/{node_id}/map")
    def topic_map(tree_id: str, node_id: int):
        tree = svc.node_of(tree_id, node_id)
        return distance_map(tree.state_at(node_id))

    # -- pending refinements ----------------------------------------------

    @app.get("/trees/{tree_id}/nodes/{node_id}/pending")
    def pending_list(tree_id: str, node_id: int):
        svc.node_of(tree_id, node_id)
        return {"pending": svc.pending_for(tree_id, node_id).to_dicts()}

    @app.post("/trees/{tree_id}/nodes/{node_id}/pending")
    def pending_queue(tree_id: str, node_id: int, payload: dict = Body(...)):
        tree = svc.node_of(tree_id, node_id)
        pending = svc.pending_for(tree_id, node_id)
        candidate = refinement_from_dict(payload)
        batch = [refinement_from_dict(d) for d in pending.to_dicts()] + [candidate]
        validate_refinements(tree.state_at(node_id), batch)
        pending.queue(candidate)
        return {"pending": pending.to_dicts()}

    @app.delete("/trees/{tree_id}/nodes/{node_id}/pending/last")
    def pending_undo(tree_id: str, node_id: int):
        svc.node_of(tree_id, node_id)
        pending = svc.pending_for(tree_id, node_id)
        undone = pending.undo()
        return {
            "undone": None if undone is None else refinement_to_dict(undone),
            "pending": pending.to_dicts(),
        }

    @app.post("/trees/{tree_id}/nodes/{node_id}/apply", status_code=202)
    def apply_pending(tree_id: str, node_id: int):
        tree = svc.node_of(tree_id, node_id)
        pending = svc.pending_for(tree_id, node_id)
        batch = pending.to_dicts()
        if not batch:
            raise HTTPException(400, "no pending refinements to apply")
        refs = [refinement_from_dict(d) for d in batch]
        validate_refinements(tree.state_at(node_id), refs)
        sweeps = tree.node(node_id).snapshot["hyper"].get("apply_sweeps", 10)

        def work(job: Job) -> int:
            state = tree.state_at(node_id)
            result = apply_refinements(state, refs, use_kernel=svc.use_kernel)
            job.done_iters = job.total_iters
            rel = svc.refresh(result.state, tree.relevance_at(node_id))
            child = tree.commit(node_id, result.state, rel, result.records)
            pending.clear()
            svc.autosave(tree_id)
            return child

        job = svc.start_job(tree_id, "apply", sweeps, work, synchronous=False)
        return _job_ticket(job)

    # -- history and comparison -------------------------------------------

    @app.get("/trees/{tree_id}/history")
    def edge_history(tree_id: str, parent: int, child: int):
        tree = svc.tree(tree_id)
        for nid in (parent, child):
            if nid not in tree.nodes:
                raise HTTPException(404, f"node {nid} does not exist in tree {tree_id!r}")
        return tree.edge_history(parent, child)

    @app.get("/trees/{tree_id}/compare")
    def compare_nodes(tree_id: str, ids: str):
        tree = svc.tree(tree_id)
        try:
            node_ids = [int(part) for part in ids.split(",") if part.strip()]
        except ValueError:
            raise HTTPException(400, f"ids must be comma-separated integers, got {ids!r}") from None
        if not node_ids:
            raise HTTPException(400, "compare needs at least one node id")
        for nid in node_ids:
            if nid not in tree.nodes:
                raise HTTPException(404, f"node {nid} does not exist in tree {tree_id!r}")
        return tree.compare(node_ids)

    # -- archive exchange -------------------------------------------------

    @app.get("/trees/{tree_id}/file")
    def download_tree(tree_id: str):
        tree = svc.tree(tree_id)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "tree.tpl"
            tree.save(path)
            data = path.read_bytes()
        return Response(
            content=data,
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{tree_id}.tpl"'},
        )

    @app.put("/trees/{tree_id}/file")
    async def upload_tree(tree_id: str, request: Request):
        data = await request.body()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "upload.tpl"
            path.write_bytes(data)
            tree = ModelTree.load(path)
        with svc.lock:
            if tree_id in svc.busy:
                raise HTTPException(409, f"tree {tree_id!r} has a job running")
            svc.trees[tree_id] = tree
        svc.autosave(tree_id)
        return {"tree_id": tree_id, "nodes": sorted(tree.nodes)}

    # -- query expansion --------------------------------------------------

    @app.post("/expand-query")
    def expand(body: ExpandRequest):
        if svc.emb is None:
            raise HTTPException(400, "no embedding table is configured on this server")
        return {"words": expand_query(body.phrase, svc.emb, n=body.n)}

    return app
