"""Command-line interface: ingest, train, eval, bench, serve, export."""

from __future__ import annotations

import functools
import json
import logging
from pathlib import Path

import click

from . import __version__
from .corpus import Corpus, CorpusError, load_corpus, load_stopwords
from .evaluate import EvalError, build_report, distance_map, format_report
from .harness import suggest_bench
from .refine import RefinementError
from .sampler import init_model, train
from .state import ConceptPrior, Hyperparams, StateError
from .suggest import EmbeddingTable, RelevanceState, SuggestError, refresh_suggestions
from .tree import ModelTree, TreeError, load_tree

DOMAIN_ERRORS = (
    CorpusError,
    StateError,
    RefinementError,
    SuggestError,
    TreeError,
    EvalError,
    OSError,
)


def friendly_errors(fn):
    """Turn domain exceptions into clean CLI failures instead of tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DOMAIN_ERRORS as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def hyper_options(fn):
    """Sampler hyperparameter flags shared by train and suggest-bench."""
    opts = [
        click.option("--k-init", default=10, show_default=True, help="Initial topic count."),
        click.option("--alpha", default=1.0, show_default=True, help="Document-level concentration."),
        click.option("--gamma0", default=1.0, show_default=True, help="Corpus-level concentration."),
        click.option("--beta", default=0.5, show_default=True, help="Word smoothing prior."),
        click.option("--gamma-rel", default=1.0, show_default=True, help="Relevant-document pseudo-count."),
        click.option("--gamma-irr", default=1.0, show_default=True, help="Irrelevant-document pseudo-count."),
        click.option("--apply-sweeps", default=10, show_default=True, help="Sweeps run after applying refinements."),
        click.option("--seed", default=0, show_default=True, help="Random seed."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def collect_hyper(kwargs) -> Hyperparams:
    hyper = Hyperparams(
        alpha=kwargs.pop("alpha"),
        gamma0=kwargs.pop("gamma0"),
        beta=kwargs.pop("beta"),
        k_init=kwargs.pop("k_init"),
        gamma_rel=kwargs.pop("gamma_rel"),
        gamma_irr=kwargs.pop("gamma_irr"),
        apply_sweeps=kwargs.pop("apply_sweeps"),
        seed=kwargs.pop("seed"),
    )
    hyper.validate()
    return hyper


def pick_node(tree: ModelTree, node: int | None) -> int:
    if node is None:
        return max(tree.nodes)
    tree.node(node)
    return node


@click.group(context_settings={"auto_envvar_prefix": "TOPICLOOP"})
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
def main(verbose):
    """Interactive topic modeling: build corpora, train, refine, serve."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True),
              help="Raw documents, .jsonl or .csv with id/text columns.")
@click.option("--out", required=True, type=click.Path(), help="Where to write the corpus file.")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default=None,
              help="Input format; inferred from the extension when omitted.")
@click.option("--stopwords", type=click.Path(exists=True), default=None,
              help="Optional stopword list, one word per line.")
@click.option("--min-doc-freq", default=2, show_default=True,
              help="Drop terms seen in fewer documents than this.")
@friendly_errors
def ingest(input_path, out, fmt, stopwords, min_doc_freq):
    """Tokenize raw documents into a reusable corpus file."""
    stop = load_stopwords(stopwords) if stopwords else ()
    corpus = load_corpus(input_path, format=fmt, stopwords=stop, min_doc_freq=min_doc_freq)
    corpus.save(out)
    click.echo(
        f"wrote {out}: {corpus.n_docs} documents, "
        f"{len(corpus.vocab)} terms, {corpus.n_tokens} tokens"
    )


@main.command("train")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True),
              help="Corpus file produced by ingest.")
@click.option("--out", required=True, type=click.Path(), help="Where to write the model tree.")
@click.option("--iters", default=2000, show_default=True, help="Gibbs sweeps to run.")
@click.option("--prior", "prior_path", type=click.Path(exists=True), default=None,
              help="JSON file of seed words: {\"0\": [\"word\", ...], ...}.")
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True), default=None,
              help="Word embedding table; enables suggestions downstream.")
@click.option("--no-kernel", is_flag=True, help="Force the pure-Python sampler.")
@hyper_options
@friendly_errors
def train_cmd(corpus_path, out, iters, prior_path, embeddings_path, no_kernel, **kwargs):
    """Initialize a model and train it, saving a two-node model tree."""
    hyper = collect_hyper(kwargs)
    corpus = Corpus.load(corpus_path)
    prior = None
    if prior_path:
        prior = ConceptPrior.from_dict(json.loads(Path(prior_path).read_text()))

    state = init_model(corpus, hyper, prior)
    rel = RelevanceState.for_model(state)
    tree = ModelTree(
        corpus,
        root_state=state,
        root_relevance=rel,
        embedding_path=str(embeddings_path) if embeddings_path else None,
    )

    use_kernel = False if no_kernel else None
    with click.progressbar(length=iters, label="sampling") as bar:
        train(state, iters, progress=lambda done, total: bar.update(1),
              use_kernel=use_kernel)
    if embeddings_path:
        rel = refresh_suggestions(state, rel, EmbeddingTable.load(embeddings_path))
    child = tree.commit(1, state, rel, [{"type": "train", "iters": iters}])
    tree.save(out)
    click.echo(
        f"wrote {out}: node {child} trained for {iters} sweeps, "
        f"{len(state.active_topics())} active topics"
    )


@main.command("eval")
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
@click.option("--node", type=int, default=None, help="Node to evaluate; defaults to the newest.")
@click.option("--k", default=10, show_default=True, help="Documents per topic for precision.")
@click.option("--topic-map", "topic_map_path", type=click.Path(exists=True), default=None,
              help="JSON mapping of topic id to category for precision scoring.")
@click.option("--map", "map_path", type=click.Path(), default=None,
              help="Also write the 2-D topic distance map to this JSON file.")
@friendly_errors
def eval_cmd(tree_path, node, k, topic_map_path, map_path):
    """Print coherence (and optional precision) for one tree node."""
    tree = load_tree(tree_path)
    node = pick_node(tree, node)
    state = tree.state_at(node)

    labels = None
    topic_map = None
    if topic_map_path:
        raw = json.loads(Path(topic_map_path).read_text())
        topic_map = {int(t): c for t, c in raw.items()}
        labels = [doc.category for doc in tree.corpus.documents]
        if any(lb is None for lb in labels):
            raise click.ClickException("corpus documents have no category labels")

    report = build_report(state, node_id=node, labels=labels, topic_map=topic_map, k=k)
    click.echo(f"node {node}")
    click.echo(format_report(report))
    if map_path:
        Path(map_path).write_text(json.dumps(distance_map(state), indent=1))
        click.echo(f"wrote {map_path}")


@main.command("export-report")
@click.option("--tree", "tree_path", required=True, type=click.Path(exists=True))
@click.option("--node", type=int, default=None, help="Node to export; defaults to the newest.")
@click.option("--out", required=True, type=click.Path())
@click.option("--k", default=10, show_default=True)
@friendly_errors
def export_report(tree_path, node, out, k):
    """Write one node's evaluation report as JSON."""
    tree = load_tree(tree_path)
    node = pick_node(tree, node)
    report = build_report(tree.state_at(node), node_id=node, k=k)
    Path(out).write_text(json.dumps(report, indent=1))
    click.echo(f"wrote {out}")


@main.command("suggest-bench")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--iters", default=100, show_default=True)
@click.option("--burn-in", default=10, show_default=True)
@hyper_options
@friendly_errors
def suggest_bench_cmd(corpus_path, embeddings_path, iters, burn_in, **kwargs):
    """Compare plain training against training with automatic word adds."""
    hyper = collect_hyper(kwargs)
    corpus = Corpus.load(corpus_path)
    emb = EmbeddingTable.load(embeddings_path)
    result = suggest_bench(corpus, emb, hyper, n_iters=iters, burn_in=burn_in)
    for arm in ("baseline", "auto_add"):
        click.echo(f"\n{arm.replace('_', '-')}")
        click.echo(format_report(result[arm]))
    added = {t: words for t, words in result["auto_add_words"].items() if words}
    if added:
        click.echo("\nwords added automatically")
        for t, words in sorted(added.items()):
            click.echo(f"  topic {t}: {', '.join(words)}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--workdir", type=click.Path(), default=None,
              help="Directory for tree autosaves.")
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True), default=None,
              help="Word embedding table for suggestions and query expansion.")
@friendly_errors
def serve(host, port, workdir, embeddings_path):
    """Run the HTTP API server."""
    import uvicorn

    from .service import create_app

    app = create_app(workdir=workdir, embedding_path=embeddings_path)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
