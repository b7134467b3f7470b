"""End-to-end report generation shared by the CLI and the HTTP service.

prepare_report assembles everything realization needs from a scope graph;
both the rendered report and the expected fact set are derived from the
same prepared parts, so a template-stage report always matches its fact
set exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .facts import Fact, facts_from_parts, f1, match_facts, precision, recall
from .fluency import LanguageModel, report_slor
from .graph import EntityGraph
from .kb import KnowledgeBase
from .realize import RealizeContext, ReportDocument, realize, render_text
from .rewrite import RewriteProvider, RewriteResult
from .rewrite import rewrite as run_rewrite
from .selection import (
    ReportType,
    SectionDict,
    TimelineEntry,
    VulnRecord,
    build_section_dict,
    build_timeline,
    collect_vulnerabilities,
    graph_as_of,
    routes_to_iocs,
    select_entities,
    select_template,
    selected_edges,
)
from .templates import TemplateSpec


@dataclass
class ReportParts:
    spec: TemplateSpec
    graph: EntityGraph
    selected: list[str]
    dicts: list[SectionDict]
    ctx: RealizeContext
    timeline: Optional[list[TimelineEntry]] = None
    vulns: Optional[list[VulnRecord]] = None


def prepare_report(graph: EntityGraph, report_kind: str,
                   kb: Optional[KnowledgeBase] = None,
                   focus_id: Optional[str] = None,
                   spec: Optional[TemplateSpec] = None,
                   provenance: tuple[str, ...] = ()) -> ReportParts:
    report_type = ReportType(kind=report_kind, focus_id=focus_id)
    if spec is None:
        spec = select_template(report_type)

    selected = select_entities(graph, spec, focus_id=focus_id)
    as_of = graph_as_of(graph)
    dicts = [build_section_dict(entity_id, kb, graph=graph, as_of=as_of)
             for entity_id in selected]

    edges = selected_edges(graph, selected)
    rendered = [
        e.as_tuple() for e in edges
        if not routes_to_iocs(graph.nodes[e.source])
        and not routes_to_iocs(graph.nodes[e.target])
    ]
    ctx = RealizeContext(
        names={i: graph.nodes[i].display_name() for i in selected},
        edges=[e.as_tuple() for e in edges],
        rendered_edges=rendered,
        entity_count=len(selected),
        edge_count=len(edges),
        focus_id=focus_id,
        provenance=provenance,
    )

    timeline = None
    if report_kind == "timeline":
        if kb is None:
            raise ValueError("timeline reports require a knowledge base")
        timeline = build_timeline(selected, kb)
    vulns = None
    if report_kind == "vulnerability":
        vulns = collect_vulnerabilities(focus_id, kb, graph=graph)

    return ReportParts(spec=spec, graph=graph, selected=selected, dicts=dicts,
                       ctx=ctx, timeline=timeline, vulns=vulns)


@dataclass
class GenerationResult:
    parts: ReportParts
    document: ReportDocument
    template_text: str
    facts: frozenset[Fact]
    rewrite_result: Optional[RewriteResult] = None
    metrics: dict = field(default_factory=dict)

    @property
    def final_text(self) -> str:
        if self.rewrite_result is not None:
            return self.rewrite_result.text
        return self.template_text


def generate_report(graph: EntityGraph, report_kind: str,
                    kb: Optional[KnowledgeBase] = None,
                    focus_id: Optional[str] = None,
                    provider: Optional[RewriteProvider] = None,
                    known_names: tuple[str, ...] = (),
                    threshold: float = 0.98,
                    retries: int = 1,
                    rate_in: str = "0.0000015",
                    rate_out: str = "0.000002",
                    provenance: tuple[str, ...] = ()) -> GenerationResult:
    parts = prepare_report(graph, report_kind, kb=kb, focus_id=focus_id,
                           provenance=provenance)
    document = realize(parts.spec, parts.dicts, timeline=parts.timeline,
                       vulns=parts.vulns, ctx=parts.ctx)
    template_text = render_text(document)
    facts = facts_from_parts(parts)

    rewrite_result = None
    if provider is not None:
        rewrite_result = run_rewrite(
            template_text, provider, facts, known_names=known_names,
            threshold=threshold, retries=retries,
            rate_in=rate_in, rate_out=rate_out,
        )

    final_text = rewrite_result.text if rewrite_result else template_text
    counts = match_facts(facts, final_text, known_names=known_names)
    metrics = {
        **counts.to_dict(),
        "precision": precision(counts),
        "recall": recall(counts),
        "f1": f1(counts),
    }
    return GenerationResult(parts=parts, document=document,
                            template_text=template_text, facts=facts,
                            rewrite_result=rewrite_result, metrics=metrics)


def evaluate_report(report_text: str, graph: EntityGraph, report_kind: str,
                    kb: Optional[KnowledgeBase] = None,
                    focus_id: Optional[str] = None,
                    known_names: tuple[str, ...] = (),
                    lm: Optional[LanguageModel] = None) -> dict:
    """Full metrics JSON for an existing report against its input scope."""
    parts = prepare_report(graph, report_kind, kb=kb, focus_id=focus_id)
    facts = facts_from_parts(parts)
    counts = match_facts(facts, report_text, known_names=known_names)
    result = {
        **counts.to_dict(),
        "precision": precision(counts),
        "recall": recall(counts),
        "f1": f1(counts),
    }
    if lm is not None:
        slor_result = report_slor(lm, report_text)
        result["slor_mean"] = slor_result.mean
        result["slor_std"] = slor_result.std
        result["per_sentence"] = list(slor_result.per_sentence)
    return result
