"""Fact extraction and TP/FP/FN scoring of generated reports.

A fact is a canonical (subject, predicate, object) triple. The expected
fact set is derived from the same selection and routing code that feeds
realization, so a correct template stage scores recall 1.0 with zero false
positives. False-positive detection is limited to pattern-detectable
artifacts (IPs, CVE ids, hashes, domains, ISO dates) and known entity
names; free-prose hallucinations are out of automated scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional

from .selection import (
    CVE_RE,
    IPV4_RE,
    entity_attributes,
)
from .templates import PLACEHOLDER_RE, TemplateSpec

if TYPE_CHECKING:
    from .graph import EntityGraph
    from .kb import KnowledgeBase

HEX_RUN_RE = re.compile(r"\b[0-9a-fA-F]{32,64}\b")
DOMAIN_ARTIFACT_RE = re.compile(
    r"\b(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+[a-z]{2,}\b", re.IGNORECASE)
ISO_DATE_RE = re.compile(r"\b\d{4}-\d{2}-\d{2}\b")

FACT_KINDS = ("attribute", "relation", "ioc")


def canonical(value: str) -> str:
    """Total canonical form: case-folded, whitespace-collapsed."""
    return " ".join(str(value).split()).casefold()


@dataclass(frozen=True)
class Fact:
    subject: str
    predicate: str
    object: str
    kind: str = "attribute"

    def __post_init__(self) -> None:
        if self.kind not in FACT_KINDS:
            raise ValueError(f"unknown fact kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"subject": self.subject, "predicate": self.predicate,
                "object": self.object, "kind": self.kind}


def make_fact(subject: str, predicate: str, obj: str, kind: str = "attribute") -> Fact:
    return Fact(subject=canonical(subject), predicate=canonical(predicate),
                object=canonical(obj), kind=kind)


@dataclass(frozen=True)
class MatchCounts:
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn}


def spec_placeholders(spec: TemplateSpec) -> set[str]:
    names: set[str] = set(PLACEHOLDER_RE.findall(spec.title_pattern))
    for _, body in spec.sections:
        names.update(PLACEHOLDER_RE.findall(body))
    return names


def extract_facts(graph: "EntityGraph", spec: TemplateSpec,
                  kb: Optional["KnowledgeBase"] = None,
                  focus_id: Optional[str] = None) -> frozenset[Fact]:
    """Expected facts for a report generated from the same inputs.

    Mirrors exactly what the template emits: a slot absent from the
    template contributes no facts. The KB is needed only for timeline
    histories; omitting it drops sighting-derived events.
    """
    from .pipeline import prepare_report
    parts = prepare_report(graph, spec.report_type, kb=kb, focus_id=focus_id,
                           spec=spec)
    return facts_from_parts(parts)


def facts_from_parts(parts) -> frozenset[Fact]:
    spec = parts.spec
    placeholders = spec_placeholders(spec)
    names = parts.ctx.names
    facts: set[Fact] = set()

    def attribute_facts(entity_id: str) -> None:
        obj = parts.graph.nodes[entity_id]
        subject = obj.display_name()
        for predicate, value in entity_attributes(obj):
            facts.add(make_fact(subject, predicate, value, kind="attribute"))

    if "entity_blocks" in placeholders:
        for entity_id in parts.selected:
            attribute_facts(entity_id)
    if "focus_overview" in placeholders and parts.ctx.focus_id:
        attribute_facts(parts.ctx.focus_id)

    if "relationship_sentences" in placeholders:
        for src, rel, tgt in parts.ctx.rendered_edges:
            facts.add(make_fact(names.get(src, src), rel, names.get(tgt, tgt),
                                kind="relation"))

    if "ioc_list" in placeholders:
        for section in parts.dicts:
            owner = names.get(section.entity_id, section.entity_id)
            for kind, value in section.iocs:
                facts.add(make_fact(owner, kind, value, kind="ioc"))

    if "ttp_list" in placeholders:
        for section in parts.dicts:
            for technique_id, name in section.ttps:
                facts.add(make_fact(name, "technique", name, kind="attribute"))
                if technique_id:
                    facts.add(make_fact(name, "technique_id", technique_id,
                                        kind="attribute"))

    if "resources_list" in placeholders and parts.ctx.focus_id:
        focus_dict = next((d for d in parts.dicts
                           if d.entity_id == parts.ctx.focus_id), None)
        if focus_dict is not None:
            subject = names.get(parts.ctx.focus_id, parts.ctx.focus_id)
            for label, url in focus_dict.useful_resources:
                facts.add(make_fact(subject, f"resource {label}", url,
                                    kind="attribute"))

    if "timeline_list" in placeholders and parts.timeline is not None:
        from .selection import date_str
        for entry in parts.timeline:
            subject = names.get(entry.entity_id, entry.entity_id)
            facts.add(make_fact(subject, "event_date",
                                date_str(entry.timestamp), kind="attribute"))
            facts.add(make_fact(subject, "event", entry.description,
                                kind="attribute"))

    if "vulnerability_tables" in placeholders and parts.vulns is not None:
        for record in parts.vulns:
            facts.add(make_fact(record.cve_id, "cve_id", record.cve_id,
                                kind="ioc"))
            if record.cvss_score is not None:
                facts.add(make_fact(record.cve_id, "cvss",
                                    f"{record.cvss_score:.1f}", kind="attribute"))
            if record.summary:
                facts.add(make_fact(record.cve_id, "summary", record.summary,
                                    kind="attribute"))
            for mitigation in record.mitigations:
                facts.add(make_fact(record.cve_id, "mitigation", mitigation,
                                    kind="attribute"))
            for config in record.vulnerable_configurations:
                facts.add(make_fact(record.cve_id, "configuration", config,
                                    kind="attribute"))

    return frozenset(facts)


def _detect_artifacts(text: str, known_names: Iterable[str]) -> set[str]:
    found: set[str] = set()
    for regex in (IPV4_RE, CVE_RE, HEX_RUN_RE, ISO_DATE_RE):
        for match in regex.findall(text):
            if regex is HEX_RUN_RE and len(match) not in (32, 40, 64):
                continue
            found.add(canonical(match))
    for match in DOMAIN_ARTIFACT_RE.findall(text):
        found.add(canonical(match))
    lowered = canonical(text)
    for name in known_names:
        if canonical(name) in lowered:
            found.add(canonical(name))
    return found


def match_facts(expected: Iterable[Fact], report_text: str,
                known_names: Iterable[str] = ()) -> MatchCounts:
    """TP/FN by canonical presence; FP from detectable artifacts."""
    expected = set(expected)
    text = canonical(report_text)

    tp = 0
    for fact in expected:
        present = fact.object in text
        if fact.kind == "relation":
            present = present and fact.subject in text
        if present:
            tp += 1
    fn = len(expected) - tp

    covered: set[str] = set()
    for fact in expected:
        covered.add(fact.object)
        covered.add(fact.subject)
    fp = 0
    for artifact in _detect_artifacts(report_text, known_names):
        if not any(artifact in value for value in covered):
            fp += 1
    return MatchCounts(tp=tp, fp=fp, fn=fn)


def precision(counts: MatchCounts) -> Optional[float]:
    if counts.tp == 0 and counts.fp == 0:
        if counts.fn == 0:
            return 1.0
        return None  # undefined, not zero
    return counts.tp / (counts.tp + counts.fp)


def recall(counts: MatchCounts) -> Optional[float]:
    if counts.tp == 0 and counts.fn == 0:
        if counts.fp == 0:
            return 1.0
        return None
    return counts.tp / (counts.tp + counts.fn)


def f1(counts: MatchCounts) -> Optional[float]:
    p, r = precision(counts), recall(counts)
    if p is None or r is None:
        return None
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def f1_from_scores(p: float, r: float) -> float:
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)
