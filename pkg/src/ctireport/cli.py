"""Command line interface: ingest, generate, evaluate, serve, list, train-lm."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .config import load_config
from .fluency import NgramLanguageModel, train_from_text
from .graph import GraphError, graph_from_scope
from .kb import KnowledgeBase
from .pipeline import evaluate_report, generate_report
from .rewrite import PassthroughProvider, RemoteChatProvider, ReplayProvider
from .selection import SelectionError
from .service import create_app, known_entity_names
from .stix import StixParseError, StixValidationError, load_bundle_file


@click.group()
def main() -> None:
    """Generate and evaluate CTI reports from STIX 2.1 entity graphs."""


@main.command()
@click.argument("paths", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--kb", "kb_path", required=True, type=click.Path(),
              help="Knowledge base directory.")
def ingest(paths: tuple[str, ...], kb_path: str) -> None:
    """Ingest STIX bundle files into the knowledge base."""
    kb = KnowledgeBase(kb_path)
    failures = 0
    for path in paths:
        try:
            bundle = load_bundle_file(path, source_label=Path(path).stem)
        except (StixParseError, StixValidationError, OSError) as exc:
            failures += 1
            click.echo(f"warning: skipped {path}: {exc}", err=True)
            continue
        kb.ingest(bundle)
        for diag in bundle.diagnostics:
            click.echo(json.dumps(diag.to_dict(), sort_keys=True), err=True)
    summary = {"files": len(paths), "failed": failures,
               "counts_by_type": kb.type_counts()}
    click.echo(json.dumps(summary, sort_keys=True))
    if failures == len(paths):
        sys.exit(1)


def _scope_graph(kb: KnowledgeBase, roots: tuple[str, ...],
                 expands: tuple[str, ...]):
    try:
        return graph_from_scope(kb, list(roots), list(expands))
    except GraphError as exc:
        raise click.ClickException(str(exc))


def _provider(kind: str, transcript: Optional[str], cfg):
    if kind == "passthrough":
        return PassthroughProvider()
    if kind == "recorded-replay":
        path = transcript or cfg.rewrite.transcript_path
        if not path:
            raise click.UsageError("replay provider requires --transcript")
        return ReplayProvider(path)
    if kind == "remote-chat":
        return RemoteChatProvider(endpoint=cfg.rewrite.endpoint,
                                  model=cfg.rewrite.model,
                                  api_key_env=cfg.rewrite.api_key_env)
    raise click.UsageError(f"unknown provider kind {kind!r}")


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--report-type", "report_kind", required=True,
              type=click.Choice(["overview", "subject", "timeline", "vulnerability"]))
@click.option("--focus", "focus_id", default=None,
              help="Focus entity id (subject and vulnerability reports).")
@click.option("--root", "roots", multiple=True, required=True,
              help="Root entity id; repeatable.")
@click.option("--expand", "expands", multiple=True,
              help="Entity id to expand into its KB neighborhood; repeatable.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--rewrite/--no-rewrite", default=False)
@click.option("--provider", default=None,
              type=click.Choice(["passthrough", "recorded-replay", "remote-chat"]))
@click.option("--transcript", default=None, type=click.Path(exists=True))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def generate(kb_path: str, report_kind: str, focus_id: Optional[str],
             roots: tuple[str, ...], expands: tuple[str, ...], out_dir: str,
             rewrite: bool, provider: Optional[str],
             transcript: Optional[str], config_path: Optional[str]) -> None:
    """Generate a report for a KB scope; writes report file(s) to --out."""
    cfg = load_config(config_path)
    kb = KnowledgeBase(kb_path)
    graph = _scope_graph(kb, roots, expands)

    rewrite_provider = None
    if rewrite:
        rewrite_provider = _provider(provider or cfg.rewrite.provider,
                                     transcript, cfg)
    try:
        result = generate_report(
            graph, report_kind, kb=kb, focus_id=focus_id,
            provider=rewrite_provider,
            known_names=known_entity_names(kb),
            threshold=cfg.rewrite.threshold,
            retries=cfg.rewrite.retries,
            rate_in=cfg.rewrite.rate_in,
            rate_out=cfg.rewrite.rate_out,
            provenance=tuple(roots),
        )
    except SelectionError as exc:
        raise click.UsageError(str(exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    template_path = out / f"{report_kind}.txt"
    template_path.write_text(result.template_text, encoding="utf-8")
    written = [str(template_path)]
    if result.rewrite_result is not None:
        final_path = out / f"{report_kind}.rewritten.txt"
        final_path.write_text(result.rewrite_result.text, encoding="utf-8")
        written.append(str(final_path))

    summary = {"written": written, "metrics": result.metrics}
    if result.rewrite_result is not None:
        summary["rewrite"] = {
            "gate": result.rewrite_result.gate,
            "fact_recall": result.rewrite_result.fact_recall,
            "estimated_cost": str(result.rewrite_result.estimated_cost),
        }
    click.echo(json.dumps(summary, sort_keys=True))


@main.command()
@click.argument("report_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--report-type", "report_kind", required=True,
              type=click.Choice(["overview", "subject", "timeline", "vulnerability"]))
@click.option("--focus", "focus_id", default=None)
@click.option("--root", "roots", multiple=True, required=True)
@click.option("--expand", "expands", multiple=True)
@click.option("--lm", "lm_path", default=None, type=click.Path())
def evaluate(report_path: str, kb_path: str, report_kind: str,
             focus_id: Optional[str], roots: tuple[str, ...],
             expands: tuple[str, ...], lm_path: Optional[str]) -> None:
    """Score an existing report against its input scope; prints metrics JSON."""
    kb = KnowledgeBase(kb_path)
    graph = _scope_graph(kb, roots, expands)
    report_text = Path(report_path).read_text(encoding="utf-8")

    lm = None
    if lm_path:
        if Path(lm_path).exists():
            lm = NgramLanguageModel.load(lm_path)
        else:
            click.echo(f"warning: language model {lm_path} not found; "
                       f"SLOR fields omitted", err=True)
    try:
        result = evaluate_report(report_text, graph, report_kind, kb=kb,
                                 focus_id=focus_id,
                                 known_names=known_entity_names(kb), lm=lm)
    except SelectionError as exc:
        raise click.UsageError(str(exc))
    click.echo(json.dumps(result, sort_keys=True))


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
@click.option("--enable-ingest", is_flag=True, default=False)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def serve(kb_path: str, host: str, port: int, enable_ingest: bool,
          config_path: Optional[str]) -> None:
    """Run the HTTP service."""
    import uvicorn
    app = create_app(kb_path, config=load_config(config_path),
                     enable_ingest=enable_ingest)
    uvicorn.run(app, host=host, port=port)


@main.command(name="list")
@click.option("--kb", "kb_path", required=True, type=click.Path(exists=True))
@click.option("--type", "stix_type", default=None)
def list_entities(kb_path: str, stix_type: Optional[str]) -> None:
    """List stored entities, optionally filtered by STIX type."""
    kb = KnowledgeBase(kb_path)
    if stix_type:
        records = kb.query_by_type(stix_type)
    else:
        records = [r for i in kb.entity_ids()
                   if (r := kb.get_entity(i)) is not None]
    payload = [{"id": r.object.id, "type": r.object.type,
                "name": r.object.display_name()} for r in records]
    click.echo(json.dumps(payload, sort_keys=True))


@main.command(name="train-lm")
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--order", default=3, type=int)
@click.option("--smoothing", default=0.5, type=float)
def train_lm(corpus_path: str, out_path: str, order: int, smoothing: float) -> None:
    """Train an n-gram language model from one-sentence-per-line text."""
    text = Path(corpus_path).read_text(encoding="utf-8")
    lm = train_from_text(text, n=order, k=smoothing)
    lm.save(out_path)
    click.echo(json.dumps({"saved": out_path, "order": order,
                           "vocab": len(lm.vocab)}))


if __name__ == "__main__":
    main()
