#!/usr/bin/env python3
"""Regenerate the recorded-replay transcripts for the fixture reports.

For every fixture report this emits a fluent prose rewrite built from the
same selected content, keyed by the prompt hash of the template-stage text.
A second transcript drops one CVE from a vulnerability report to exercise
the fact-preservation gate. The script refuses to write transcripts that
would not pass the gate (or, for the violation file, that would pass it).
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from ctireport.facts import match_facts, recall  # noqa: E402
from ctireport.fluency import report_slor, train_from_text  # noqa: E402
from ctireport.graph import graph_from_scope  # noqa: E402
from ctireport.kb import KnowledgeBase  # noqa: E402
from ctireport.pipeline import generate_report  # noqa: E402
from ctireport.realize import lexicalize_relationship  # noqa: E402
from ctireport.rewrite import build_prompt, prompt_hash  # noqa: E402
from ctireport.selection import _article, entity_attributes  # noqa: E402
from ctireport.service import known_entity_names  # noqa: E402
from ctireport.stix import load_bundle_file  # noqa: E402

OUT = ROOT / "fixtures" / "transcripts"

OPENINGS = {
    "overview": "This report summarizes the available intelligence on the "
                "selected activity.",
    "subject": "This report profiles {focus} and the activity linked to it.",
    "timeline": "This report walks through the recorded history of the "
                "selected entities.",
    "vulnerability": "This report reviews the security weaknesses recorded "
                     "for {focus}.",
}

RELATION_LEADS = (
    "The collected evidence shows that",
    "The records also show that",
    "The evidence further shows that",
)


def _join(values: list[str]) -> str:
    if len(values) == 1:
        return values[0]
    return ", ".join(values[:-1]) + " and " + values[-1]


def _entity_paragraph(obj) -> str:
    attrs = entity_attributes(obj)
    by_kind: dict[str, list[str]] = {}
    for predicate, value in attrs:
        by_kind.setdefault(predicate, []).append(value)
    name = by_kind["name"][0]
    label = by_kind["type"][0]
    sentence = f"{name} is {_article(label)} {label}"
    if "alias" in by_kind:
        sentence += f", also known as {_join(by_kind['alias'])}"
    if "created" in by_kind:
        sentence += f", and it was first documented on {by_kind['created'][0]}"
    if "first_seen" in by_kind:
        sentence += f"; it was first seen on {by_kind['first_seen'][0]}"
    sentence += "."
    parts = [sentence]
    for description in by_kind.get("description", []):
        parts.append(description if description.endswith(".") else description + ".")
    return " ".join(parts)


def fluent_rewrite(result) -> str:
    parts = result.parts
    from ctireport.facts import spec_placeholders
    placeholders = spec_placeholders(parts.spec)
    names = parts.ctx.names
    focus = parts.ctx.focus_name
    paragraphs = [OPENINGS[parts.spec.report_type].format(focus=focus)]

    if "focus_overview" in placeholders and parts.ctx.focus_id:
        paragraphs.append(_entity_paragraph(parts.graph.nodes[parts.ctx.focus_id]))

    if "entity_blocks" in placeholders:
        for entity_id in parts.selected:
            paragraphs.append(_entity_paragraph(parts.graph.nodes[entity_id]))

    if "timeline_list" in placeholders and parts.timeline:
        from ctireport.selection import date_str
        lines = [f"On {date_str(e.timestamp)}, {e.description}"
                 for e in sorted(parts.timeline,
                             key=lambda e: (e.timestamp, e.entity_id, e.description))]
        paragraphs.append(" ".join(lines))

    if "vulnerability_tables" in placeholders and parts.vulns:
        for record in parts.vulns:
            sentences = []
            if record.cvss_score is not None:
                sentences.append(f"{record.cve_id} carries a CVSS score of "
                                 f"{record.cvss_score:.1f}.")
            else:
                sentences.append(f"No CVSS score is available for {record.cve_id}.")
            if record.summary:
                sentences.append(record.summary if record.summary.endswith(".")
                                 else record.summary + ".")
            if record.mitigations:
                sentences.append("Recommended mitigations include "
                                 f"{_join(list(record.mitigations))}.")
            if record.vulnerable_configurations:
                sentences.append("Affected configurations include "
                                 f"{_join(list(record.vulnerable_configurations))}.")
            paragraphs.append(" ".join(sentences))

    if "relationship_sentences" in placeholders and parts.ctx.rendered_edges:
        sentences = []
        for i, (src, rel, tgt) in enumerate(parts.ctx.rendered_edges):
            named = (names.get(src, src), rel, names.get(tgt, tgt))
            lead = RELATION_LEADS[min(i, len(RELATION_LEADS) - 1)]
            sentences.append(f"{lead} {lexicalize_relationship(named)}")
        paragraphs.append(" ".join(sentences))

    if "ioc_list" in placeholders:
        values = sorted({value for d in parts.dicts for _, value in d.iocs})
        if values:
            paragraphs.append("During the investigation, analysts identified "
                              "the following indicators of compromise: "
                              f"{_join(values)}.")

    if "ttp_list" in placeholders:
        seen = []
        for d in parts.dicts:
            for technique_id, name in d.ttps:
                if (technique_id, name) in seen:
                    continue
                seen.append((technique_id, name))
                if technique_id:
                    paragraphs.append(f"The activity involves the {name} "
                                      f"technique, tracked as {technique_id}.")
                else:
                    paragraphs.append(f"The activity involves the {name} technique.")

    if "resources_list" in placeholders and parts.ctx.focus_id:
        focus_dict = next((d for d in parts.dicts
                           if d.entity_id == parts.ctx.focus_id), None)
        for _, url in (focus_dict.useful_resources if focus_dict else []):
            paragraphs.append(f"Additional background on {focus} is "
                              f"available at {url}.")

    return "\n\n".join(paragraphs) + "\n"


def main() -> None:
    index = json.loads((ROOT / "fixtures" / "index.json").read_text())
    with tempfile.TemporaryDirectory() as tmp:
        kb = KnowledgeBase(tmp)
        for entry in index["reports"]:
            kb.ingest(load_bundle_file(
                ROOT / "fixtures" / "bundles" / entry["file"],
                source_label=entry["name"]))
        kb.ingest(load_bundle_file(
            ROOT / "fixtures" / "bundles" / index["expansion_bundle"],
            source_label="expansion"))
        names = known_entity_names(kb)

        replay_lines = []
        gate_lines = []
        template_texts, rewritten_texts = [], []
        for entry in index["reports"]:
            graph = graph_from_scope(kb, entry["root_ids"])
            result = generate_report(graph, entry["report_type"], kb=kb,
                                     focus_id=entry["focus_id"],
                                     known_names=names)
            rewritten = fluent_rewrite(result)
            counts = match_facts(result.facts, rewritten, known_names=names)
            r = recall(counts)
            if counts.fp != 0 or r is None or r < 0.98:
                raise SystemExit(f"{entry['name']}: rewrite fails the gate "
                                 f"(recall={r}, fp={counts.fp})")
            key = prompt_hash(build_prompt(result.template_text))
            replay_lines.append(json.dumps(
                {"prompt_hash": key, "response": rewritten}))
            template_texts.append(result.template_text)
            rewritten_texts.append(rewritten)

            if entry["name"] == "vuln-plant":
                broken = "\n\n".join(
                    p for p in rewritten.split("\n\n")
                    if "CVE-2017-0144" not in p)
                broken_counts = match_facts(result.facts, broken,
                                            known_names=names)
                broken_recall = recall(broken_counts)
                if broken_recall is None or broken_recall >= 0.98:
                    raise SystemExit("gate-violation transcript still passes "
                                     f"the gate (recall={broken_recall})")
                gate_lines.append(json.dumps(
                    {"prompt_hash": key, "response": broken}))

        lm = train_from_text((ROOT / "data" / "fluency.txt").read_text(), n=3)
        mean = lambda texts: sum(report_slor(lm, t).mean for t in texts) / len(texts)
        template_mean, rewritten_mean = mean(template_texts), mean(rewritten_texts)
        if rewritten_mean < template_mean:
            raise SystemExit(f"rewrites are not more fluent: "
                             f"{rewritten_mean:.3f} < {template_mean:.3f}")

        OUT.mkdir(parents=True, exist_ok=True)
        (OUT / "replay.jsonl").write_text("\n".join(replay_lines) + "\n")
        (OUT / "gate-violation.jsonl").write_text("\n".join(gate_lines) + "\n")
        print(f"wrote {len(replay_lines)} replay entries; "
              f"mean SLOR template={template_mean:.3f} "
              f"rewritten={rewritten_mean:.3f}")


if __name__ == "__main__":
    main()
