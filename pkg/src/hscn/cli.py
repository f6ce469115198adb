"""Command-line interface.

``serve`` runs the service; the ``api`` group is a thin HTTP client
mirroring every endpoint for scripted runs. The ``metrics``, ``author``,
``review`` and ``clf`` groups are pure file transforms and run in-process;
they never touch a live store except where an explicit ``--store`` flag
says so.
"""

from __future__ import annotations

import json
import sys
import uuid
from pathlib import Path

import click
import httpx

from . import __version__
from .author.backends import AuthorBackend, GenerationRequest
from .author.generate import batch_generate
from .errors import PipelineError
from .events import Store
from .metrics import (
    RRConfig,
    CorpusStats,
    corpus_bleu,
    corpus_novelty,
    edit_rate,
    repetition_rate,
    type_distribution,
)
from .pairs import dedup as dedup_pairs
from .pairs import read_pairs_jsonl, write_pairs_jsonl
from .review.classifier import BaselineScorer, evaluate_classifier, score_pair, train_baseline
from .review.dataset import (
    ClassifierDatasetSpec,
    dataset_from_store,
    read_labeled_jsonl,
    write_labeled_jsonl,
)
from .review.scoring import ReviewScore, TierReport, aggregate


def _die(exc: PipelineError) -> None:
    click.echo(json.dumps({"error": exc.to_payload()}, ensure_ascii=False), err=True)
    sys.exit(1)


def _emit(data, table: str | None = None) -> None:
    click.echo(json.dumps(data, ensure_ascii=False, sort_keys=True))
    if table:
        click.echo(table, err=True)


@click.group()
@click.version_option(__version__)
def main():
    """Curation pipeline for HS-CN pair datasets."""


# --------------------------------------------------------------------------
# serve
# --------------------------------------------------------------------------

@main.command()
@click.option("--store", "store_dir", type=click.Path(file_okay=False), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8800, show_default=True)
def serve(store_dir: str, host: str, port: int):
    """Run the pipeline service over a store directory."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(store_dir), host=host, port=port)


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------

@main.group()
def metrics():
    """Corpus metrics over dataset files."""


def _cns_from_dataset(path: str, use_dedup: bool) -> tuple[list[str], int]:
    pairs = read_pairs_jsonl(path)
    if use_dedup:
        pairs = dedup_pairs(pairs)
    return [p.counter_narrative for p in pairs], len(pairs)


@metrics.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--window", default=1000, show_default=True)
@click.option("--max-n", default=4, show_default=True)
@click.option("--shuffles", default=5, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--dedup/--no-dedup", "use_dedup", default=True, show_default=True)
@click.option("--table", is_flag=True, help="Also print a human-readable table to stderr.")
def rr(dataset, window, max_n, shuffles, seed, use_dedup, table):
    """Repetition Rate of the dataset's CNs."""
    try:
        cns, n = _cns_from_dataset(dataset, use_dedup)
        cfg = RRConfig(window_words=window, max_n=max_n, shuffles=shuffles, rng_seed=seed)
        stats = CorpusStats(n_pairs=n, rr=repetition_rate(cns, cfg))
    except PipelineError as exc:
        _die(exc)
    _emit(json.loads(stats.to_json()), stats.to_table() if table else None)


@metrics.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--training", type=click.Path(exists=True), required=True)
@click.option("--variant", type=click.Choice(["max", "mean"]), default="max", show_default=True)
@click.option("--table", is_flag=True)
def novelty(dataset, training, variant, table):
    """Mean novelty of dataset CNs against a training dataset's CNs."""
    try:
        cands, n = _cns_from_dataset(dataset, use_dedup=False)
        train, _ = _cns_from_dataset(training, use_dedup=False)
        stats = CorpusStats(
            n_pairs=n,
            novelty=corpus_novelty(cands, train, variant=variant),
            novelty_variant=variant,
        )
    except PipelineError as exc:
        _die(exc)
    _emit(json.loads(stats.to_json()), stats.to_table() if table else None)


@metrics.command()
@click.option("--pairs-file", type=click.Path(exists=True), required=True,
              help="JSONL with {cn, refs: [..]} per line.")
@click.option("--table", is_flag=True)
def bleu(pairs_file, table):
    """Corpus BLEU of candidates against their reference lists."""
    cands, refs = [], []
    with open(pairs_file, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            cands.append(rec["cn"])
            refs.append(rec["refs"])
    try:
        stats = CorpusStats(n_pairs=len(cands), bleu=corpus_bleu(cands, refs))
    except PipelineError as exc:
        _die(exc)
    _emit(json.loads(stats.to_json()), stats.to_table() if table else None)


@metrics.command()
@click.option("--pairs-file", type=click.Path(exists=True), required=True,
              help="JSONL with {machine_cn, postedited_cn} per line.")
@click.option("--table", is_flag=True)
def hter(pairs_file, table):
    """Mean post-editing edit rate over machine/post-edited text pairs."""
    rates = []
    try:
        with open(pairs_file, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                rates.append(edit_rate(rec["machine_cn"], rec["postedited_cn"]))
        stats = CorpusStats(
            n_pairs=len(rates),
            mean_hter=sum(rates) / len(rates) if rates else None,
        )
    except PipelineError as exc:
        _die(exc)
    _emit(json.loads(stats.to_json()), stats.to_table() if table else None)


@metrics.command()
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--table", is_flag=True)
def types(dataset, table):
    """CN-type percentage distribution of a labeled dataset."""
    try:
        pairs = read_pairs_jsonl(dataset)
        stats = CorpusStats(n_pairs=len(pairs), type_distribution=type_distribution(pairs))
    except PipelineError as exc:
        _die(exc)
    _emit(json.loads(stats.to_json()), stats.to_table() if table else None)


# --------------------------------------------------------------------------
# author
# --------------------------------------------------------------------------

@main.group()
def author():
    """Candidate generation."""


@author.command()
@click.option("--backend", "kind", type=click.Choice(["stub", "remote"]), default="stub", show_default=True)
@click.option("--endpoint", default="", help="Remote generation endpoint URL.")
@click.option("--stub-seed", default=0, show_default=True)
@click.option("--bank", "bank_path", type=click.Path(exists=True), default=None,
              help="Override the bundled fixture bank (marker-format text).")
@click.option("--hs-file", type=click.Path(exists=True), required=True,
              help="One hate-speech text per line.")
@click.option("--out", type=click.Path(), required=True, help="Candidate pairs JSONL.")
@click.option("--top-p", default=0.9, show_default=True)
@click.option("--temperature", default=1.0, show_default=True)
@click.option("--max-new-tokens", default=256, show_default=True)
@click.option("--n-samples", default=3, show_default=True)
@click.option("--in-flight", default=4, show_default=True)
@click.option("--timeout", default=30.0, show_default=True)
@click.option("--retries", default=2, show_default=True)
@click.option("--store", "store_dir", type=click.Path(file_okay=False), default=None,
              help="Also persist candidates as events into this store.")
def run(kind, endpoint, stub_seed, bank_path, hs_file, out, top_p, temperature,
        max_new_tokens, n_samples, in_flight, timeout, retries, store_dir):
    """Generate candidates for every HS in a file."""
    hs_list = [line.strip() for line in Path(hs_file).read_text(encoding="utf-8").splitlines() if line.strip()]
    cfg = AuthorBackend(kind=kind, endpoint=endpoint, timeout=timeout, retries=retries,
                        stub_seed=stub_seed, bank_path=bank_path)
    req = GenerationRequest(max_new_tokens=max_new_tokens, top_p=top_p,
                            temperature=temperature, n_samples=n_samples)
    store = Store(store_dir) if store_dir else None
    try:
        candidates, report = batch_generate(hs_list, cfg, req, max_in_flight=in_flight, store=store)
    except PipelineError as exc:
        _die(exc)
    finally:
        if store is not None:
            store.close()
    write_pairs_jsonl(candidates, out)
    _emit(report.to_dict())


# --------------------------------------------------------------------------
# review / clf
# --------------------------------------------------------------------------

@main.group()
def review():
    """Non-expert review utilities."""


@review.command("aggregate")
@click.option("--scores", "scores_file", type=click.Path(exists=True), required=True,
              help="JSONL of {pair_id, annotator_id, score, bad_hs, elapsed}.")
def review_aggregate(scores_file):
    """Aggregate a score stream into tiers and report counts + percentages."""
    by_pair: dict[str, list[ReviewScore]] = {}
    with open(scores_file, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            by_pair.setdefault(rec["pair_id"], []).append(ReviewScore(
                pair_id=rec["pair_id"], annotator_id=rec["annotator_id"],
                score=rec["score"], bad_hs=rec.get("bad_hs", False),
                elapsed=rec.get("elapsed", 0.0),
            ))
    try:
        tiers = [aggregate(scores) for scores in by_pair.values()]
    except PipelineError as exc:
        _die(exc)
    _emit(TierReport.from_tiers(tiers).to_dict())


@main.group()
def clf():
    """Machine-reviewer classifier tooling."""


@clf.command("build-data")
@click.option("--store", "store_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--verbatim", default=50, show_default=True)
@click.option("--random-pairs", default=50, show_default=True)
@click.option("--balance/--no-balance", default=True, show_default=True)
@click.option("--seed", default=0, show_default=True)
def clf_build_data(store_dir, out, verbatim, random_pairs, balance, seed):
    """Build a labeled classifier dataset from a store snapshot."""
    from .events import load_snapshot

    spec = ClassifierDatasetSpec(verbatim_negatives=verbatim, random_pair_negatives=random_pairs,
                                 balance=balance, rng_seed=seed)
    try:
        dataset, manifest = dataset_from_store(load_snapshot(store_dir), spec)
    except PipelineError as exc:
        _die(exc)
    write_labeled_jsonl(dataset, out)
    _emit(manifest.to_dict())


@clf.command("train-baseline")
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--seed", default=0, show_default=True)
def clf_train_baseline(data, out, seed):
    """Train the native baseline scorer on a labeled JSONL dataset."""
    try:
        scorer = train_baseline(read_labeled_jsonl(data), seed=seed)
    except PipelineError as exc:
        _die(exc)
    scorer.save(out)
    _emit({"model": out, "seed": seed})


@clf.command("eval")
@click.option("--model", type=click.Path(exists=True), required=True)
@click.option("--data", type=click.Path(exists=True), required=True)
@click.option("--threshold", default=0.5, show_default=True)
def clf_eval(model, data, threshold):
    """Evaluate a saved scorer: F1 / precision / recall + confusion matrix."""
    try:
        result = evaluate_classifier(BaselineScorer.load(model), read_labeled_jsonl(data), threshold)
    except PipelineError as exc:
        _die(exc)
    _emit(result.to_dict())


@clf.command("filter")
@click.option("--model", type=click.Path(exists=True), required=True)
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--store", "store_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Also log machine verdicts into this store (offline use only).")
def clf_filter(model, dataset, out, threshold, store_dir):
    """Keep dataset pairs the scorer deems suitable."""
    scorer = BaselineScorer.load(model)
    pairs = read_pairs_jsonl(dataset)
    kept = []
    verdicts = []
    for pair in pairs:
        verdict = score_pair(pair, scorer, threshold)
        verdicts.append(verdict)
        if verdict.label == "suitable":
            kept.append(pair)
    write_pairs_jsonl(kept, out)
    if store_dir:
        store = Store(store_dir)
        try:
            for verdict in verdicts:
                if verdict.pair_id in store.state.pairs:
                    store.append("filtered", {
                        "pair_id": verdict.pair_id, "by": "machine",
                        "label": verdict.label, "confidence": verdict.confidence,
                        "scorer": verdict.scorer,
                    })
        finally:
            store.close()
    _emit({"scored": len(pairs), "suitable": len(kept), "threshold": threshold})


# --------------------------------------------------------------------------
# api: thin client over the service
# --------------------------------------------------------------------------

@main.group()
@click.option("--server", envvar="HSCN_SERVER", default="http://127.0.0.1:8800",
              show_default=True, help="Base URL of a running pipeline service.")
@click.pass_context
def api(ctx, server):
    """Talk to a running pipeline service."""
    ctx.obj = httpx.Client(base_url=server, timeout=60.0)


def _api_call(client: httpx.Client, method: str, path: str, **kwargs):
    resp = client.request(method, path, **kwargs)
    try:
        body = resp.json()
    except ValueError:
        body = {"raw": resp.text}
    click.echo(json.dumps(body, ensure_ascii=False, sort_keys=True))
    if resp.status_code >= 400:
        sys.exit(1)


@api.command("health")
@click.pass_obj
def api_health(client):
    _api_call(client, "GET", "/healthz")


@api.command("ingest")
@click.option("--file", "path", type=click.Path(exists=True), required=True,
              help="Dataset JSONL ({id, hs, cn, source, cn_type?, state}).")
@click.pass_obj
def api_ingest(client, path):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                pairs.append({k: rec[k] for k in ("hs", "cn") } |
                             {k: rec[k] for k in ("id", "source", "cn_type") if k in rec})
    _api_call(client, "POST", "/candidates", json={"pairs": pairs})


@api.command("generate")
@click.option("--hs-file", type=click.Path(exists=True), required=True)
@click.option("--backend", "kind", type=click.Choice(["stub", "remote"]), default="stub")
@click.option("--endpoint", default="")
@click.option("--stub-seed", default=0)
@click.option("--n-samples", default=3)
@click.option("--top-p", default=0.9)
@click.pass_obj
def api_generate(client, hs_file, kind, endpoint, stub_seed, n_samples, top_p):
    hs_list = [line.strip() for line in Path(hs_file).read_text(encoding="utf-8").splitlines() if line.strip()]
    _api_call(client, "POST", "/candidates", json={"generate": {
        "hs": hs_list,
        "backend": {"kind": kind, "endpoint": endpoint, "stub_seed": stub_seed},
        "params": {"n_samples": n_samples, "top_p": top_p},
    }})


@api.command("review-next")
@click.option("--annotator", required=True)
@click.pass_obj
def api_review_next(client, annotator):
    _api_call(client, "GET", "/review/next", params={"annotator": annotator})


@api.command("score")
@click.option("--pair-id", required=True)
@click.option("--annotator", required=True)
@click.option("--score", "value", type=click.IntRange(0, 3), required=True)
@click.option("--bad-hs", is_flag=True)
@click.option("--elapsed", default=0.0)
@click.option("--key", default=None, help="Idempotency key (default: random).")
@click.pass_obj
def api_score(client, pair_id, annotator, value, bad_hs, elapsed, key):
    _api_call(client, "POST", "/review/score", json={
        "pair_id": pair_id, "annotator_id": annotator, "score": value,
        "bad_hs": bad_hs, "elapsed": elapsed,
        "idempotency_key": key or uuid.uuid4().hex,
    })


@api.command("experiment")
@click.option("--conditions", required=True,
              help="Comma-separated reviewer modes, e.g. expert_direct,human_geq1.")
@click.option("--operators", required=True, help="Comma-separated operator ids.")
@click.option("--session-size", default=20, show_default=True)
@click.option("--sampling", type=click.Choice(["stratified", "uniform"]), default="stratified")
@click.option("--seed", default=0, show_default=True)
@click.pass_obj
def api_experiment(client, conditions, operators, session_size, sampling, seed):
    conds = [
        {"reviewer_mode": mode.strip(), "sampling": sampling,
         "session_size": session_size, "rng_seed": seed}
        for mode in conditions.split(",") if mode.strip()
    ]
    ops = [o.strip() for o in operators.split(",") if o.strip()]
    _api_call(client, "POST", "/experiments", json={"conditions": conds, "operators": ops})


@api.command("expert-next")
@click.option("--operator", required=True)
@click.option("--experiment", default=None)
@click.pass_obj
def api_expert_next(client, operator, experiment):
    params = {"operator": operator}
    if experiment:
        params["experiment"] = experiment
    _api_call(client, "GET", "/expert/next", params=params)


@api.command("decide")
@click.option("--experiment", required=True)
@click.option("--pair-id", required=True)
@click.option("--operator", required=True)
@click.option("--action", type=click.Choice(["validate", "edit", "discard"]), required=True)
@click.option("--edited-cn", default=None)
@click.option("--elapsed", default=0.0)
@click.option("--key", default=None)
@click.pass_obj
def api_decide(client, experiment, pair_id, operator, action, edited_cn, elapsed, key):
    _api_call(client, "POST", "/expert/decision", json={
        "experiment_id": experiment, "pair_id": pair_id, "operator_id": operator,
        "action": action, "edited_cn": edited_cn, "elapsed": elapsed,
        "idempotency_key": key or uuid.uuid4().hex,
    })


@api.command("effort")
@click.option("--experiment", required=True)
@click.option("--condition", required=True)
@click.pass_obj
def api_effort(client, experiment, condition):
    _api_call(client, "GET", "/reports/effort",
              params={"experiment": experiment, "condition": condition})


@api.command("export-accepted")
@click.option("--out", type=click.Path(), default=None, help="Write NDJSON here instead of stdout.")
@click.pass_obj
def api_export_accepted(client, out):
    resp = client.get("/export/accepted")
    if resp.status_code >= 400:
        click.echo(resp.text, err=True)
        sys.exit(1)
    if out:
        Path(out).write_text(resp.text, encoding="utf-8")
        click.echo(json.dumps({"written": out}))
    else:
        click.echo(resp.text, nl=False)


if __name__ == "__main__":
    main()
