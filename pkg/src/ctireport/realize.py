"""Template realization: fill section slots and render plain text.

Realization is pure and deterministic: the same inputs always produce the
same document and byte-identical rendered text. Empty sections render a
fixed "No data available." sentence instead of disappearing, so the section
layout of a report type is invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional, Union

from .selection import SectionDict, TimelineEntry, VulnRecord, date_str
from .templates import (
    BLOCK_PLACEHOLDERS,
    PLACEHOLDER_RE,
    TemplateSpec,
    relationship_lexicon,
)

NO_DATA = "No data available."


class RealizationError(ValueError):
    pass


@dataclass(frozen=True)
class Paragraph:
    text: str


@dataclass(frozen=True)
class Bullets:
    items: tuple[str, ...]


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.header):
                raise RealizationError("table rows must match header width")


Block = Union[Paragraph, Bullets, Table]


@dataclass(frozen=True)
class ReportDocument:
    report_type: str
    title: str
    sections: tuple[tuple[str, tuple[Block, ...]], ...]
    generated_at: datetime
    provenance: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "report_type": self.report_type,
            "title": self.title,
            "generated_at": self.generated_at.isoformat(),
            "provenance": list(self.provenance),
            "sections": [
                {"heading": heading, "blocks": [_block_dict(b) for b in blocks]}
                for heading, blocks in self.sections
            ],
        }


def _block_dict(block: Block) -> dict:
    if isinstance(block, Paragraph):
        return {"kind": "paragraph", "text": block.text}
    if isinstance(block, Bullets):
        return {"kind": "bullets", "items": list(block.items)}
    return {"kind": "table", "header": list(block.header),
            "rows": [list(r) for r in block.rows]}


@dataclass
class RealizeContext:
    """Everything the slot patterns may draw on besides the section dicts."""
    names: dict[str, str] = field(default_factory=dict)
    edges: list[tuple[str, str, str]] = field(default_factory=list)
    rendered_edges: list[tuple[str, str, str]] = field(default_factory=list)
    entity_count: int = 0
    edge_count: int = 0
    focus_id: Optional[str] = None
    provenance: tuple[str, ...] = ()

    @property
    def focus_name(self) -> str:
        if self.focus_id is None:
            return ""
        return self.names.get(self.focus_id, self.focus_id)


def lexicalize_relationship(edge: tuple[str, str, str]) -> str:
    """One grammatical sentence for a (source name, type, target name) edge."""
    source, rel_type, target = edge
    verb = relationship_lexicon().get(rel_type, "is related to")
    return f"{source} {verb} {target}."


def _scalar_values(ctx: RealizeContext) -> dict[str, str]:
    return {
        "entity_count": str(ctx.entity_count),
        "edge_count": str(ctx.edge_count),
        "focus_name": ctx.focus_name,
    }


def _ttp_label(technique_id: str, name: str) -> str:
    return f"{name} ({technique_id})" if technique_id else name


def _expand_block(name: str, ctx: RealizeContext, dicts: list[SectionDict],
                  timeline: Optional[list[TimelineEntry]],
                  vulns: Optional[list[VulnRecord]]) -> list[Block]:
    by_id = {d.entity_id: d for d in dicts}

    if name == "entity_blocks":
        return [Paragraph(" ".join(d.overview)) for d in dicts if d.overview]

    if name == "focus_overview":
        focus = by_id.get(ctx.focus_id or "")
        if focus is None or not focus.overview:
            return []
        return [Paragraph(" ".join(focus.overview))]

    if name == "relationship_sentences":
        sentences = [
            lexicalize_relationship((ctx.names.get(s, s), rel, ctx.names.get(t, t)))
            for s, rel, t in ctx.rendered_edges
        ]
        if not sentences:
            return []
        return [Paragraph(" ".join(sentences))]

    if name == "ioc_list":
        seen: list[tuple[str, str]] = []
        for d in dicts:
            for ioc in d.iocs:
                if ioc not in seen:
                    seen.append(ioc)
        seen.sort()
        return [Bullets(tuple(f"{kind}: {value}" for kind, value in seen))] if seen else []

    if name == "ttp_list":
        seen_ttps: list[tuple[str, str]] = []
        for d in dicts:
            for ttp in d.ttps:
                if ttp not in seen_ttps:
                    seen_ttps.append(ttp)
        seen_ttps.sort()
        items = tuple(_ttp_label(tid, tname) for tid, tname in seen_ttps)
        return [Bullets(items)] if items else []

    if name == "stats_list":
        focus = by_id.get(ctx.focus_id or "")
        source = focus if focus is not None else (dicts[0] if dicts else None)
        if source is None or not source.stats:
            return []
        items = tuple(f"{key.replace('_', ' ')}: {value}"
                      for key, value in source.stats.items())
        return [Bullets(items)]

    if name == "resources_list":
        focus = by_id.get(ctx.focus_id or "")
        source = focus if focus is not None else (dicts[0] if dicts else None)
        if source is None or not source.useful_resources:
            return []
        items = tuple(f"{label}: {url}" for label, url in source.useful_resources)
        return [Bullets(items)]

    if name == "timeline_list":
        if not timeline:
            return []
        items = tuple(
            f"{date_str(entry.timestamp)}: {entry.description}"
            for entry in timeline
        )
        return [Bullets(items)]

    if name == "vulnerability_tables":
        if not vulns:
            return []
        blocks: list[Block] = []
        for record in vulns:
            score = f"{record.cvss_score:.1f}" if record.cvss_score is not None \
                else "not available"
            rows = (
                ("CVE", record.cve_id),
                ("CVSS score", score),
                ("Summary", record.summary or "not available"),
                ("Mitigations", "; ".join(record.mitigations) or "none listed"),
                ("Vulnerable configurations",
                 "; ".join(record.vulnerable_configurations) or "none listed"),
            )
            blocks.append(Table(header=("Property", "Value"), rows=rows))
        return blocks

    raise RealizationError(f"no expansion for placeholder {{{name}}}")


def realize(spec: TemplateSpec, dicts: list[SectionDict],
            timeline: Optional[list[TimelineEntry]] = None,
            vulns: Optional[list[VulnRecord]] = None,
            ctx: Optional[RealizeContext] = None) -> ReportDocument:
    """Fill the template's slots, producing a structured report document."""
    if (timeline is not None) != (spec.report_type == "timeline"):
        raise RealizationError("timeline input is exclusive to timeline reports")
    if (vulns is not None) != (spec.report_type == "vulnerability"):
        raise RealizationError("vulnerability input is exclusive to vulnerability reports")
    ctx = ctx or RealizeContext()

    scalars = _scalar_values(ctx)

    def fill_scalars(pattern: str, where: str) -> str:
        def sub(match):
            key = match.group(1)
            if key not in scalars:
                raise RealizationError(f"unfilled placeholder {{{key}}} in {where}")
            return scalars[key]
        return PLACEHOLDER_RE.sub(sub, pattern)

    title = fill_scalars(spec.title_pattern, "title")

    sections: list[tuple[str, tuple[Block, ...]]] = []
    for heading, body in spec.sections:
        blocks: list[Block] = []
        for chunk in body.split("\n\n"):
            chunk = chunk.strip()
            if not chunk:
                continue
            match = PLACEHOLDER_RE.fullmatch(chunk)
            if match and match.group(1) in BLOCK_PLACEHOLDERS:
                blocks.extend(_expand_block(match.group(1), ctx, dicts,
                                            timeline, vulns))
            else:
                blocks.append(Paragraph(fill_scalars(chunk, f"section {heading!r}")))
        if not blocks:
            blocks = [Paragraph(NO_DATA)]
        sections.append((heading, tuple(blocks)))

    return ReportDocument(
        report_type=spec.report_type,
        title=title,
        sections=tuple(sections),
        generated_at=datetime.now(timezone.utc),
        provenance=ctx.provenance,
    )


def render_text(doc: ReportDocument) -> str:
    """Stable plain-text markup: # headings, - bullets, | tables."""
    lines: list[str] = []
    if doc.title:
        lines.append(f"# {doc.title}")
        lines.append("")
    for heading, blocks in doc.sections:
        lines.append(f"## {heading}")
        lines.append("")
        for block in blocks:
            if isinstance(block, Paragraph):
                lines.append(block.text)
            elif isinstance(block, Bullets):
                lines.extend(f"- {item}" for item in block.items)
            else:
                lines.append("| " + " | ".join(block.header) + " |")
                lines.append("| " + " | ".join("---" for _ in block.header) + " |")
                for row in block.rows:
                    lines.append("| " + " | ".join(row) + " |")
            lines.append("")
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"
