"""Content selection: pick entities for a report and build their sections.

Every selected entity gets a six-key section dictionary (overview,
relationships, stats, useful resources, IOCs, TTPs). The routing helpers
here are the single source of truth for what a report may say about an
entity; fact extraction reuses them, which keeps template-stage recall at
1.0 by construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Optional

from .graph import EntityGraph
from .stix import StixObject

if TYPE_CHECKING:
    from .kb import KnowledgeBase
    from .templates import TemplateSpec

REPORT_TYPES = ("overview", "subject", "timeline", "vulnerability")

FOCUS_REQUIRED = {"subject", "vulnerability"}
SUBJECT_FOCUS_TYPES = {"threat-actor", "intrusion-set"}

# Rendering order for mixed-type entity lists (focus always sorts first).
TYPE_PRIORITY = (
    "threat-actor", "intrusion-set", "campaign", "malware", "tool",
    "attack-pattern", "vulnerability", "infrastructure", "course-of-action",
    "indicator", "identity", "report",
    "ipv4-addr", "ipv6-addr", "domain-name", "url", "file", "email-addr",
)

TYPE_LABELS = {
    "threat-actor": "threat actor",
    "intrusion-set": "intrusion set",
    "attack-pattern": "attack pattern",
    "course-of-action": "course of action",
    "ipv4-addr": "IPv4 address",
    "ipv6-addr": "IPv6 address",
    "domain-name": "domain name",
    "email-addr": "email address",
    "url": "URL",
}

CVE_RE = re.compile(r"CVE-\d{4}-\d{4,}", re.IGNORECASE)
IPV4_RE = re.compile(r"\b(?:\d{1,3}\.){3}\d{1,3}\b")
HASH_RE = re.compile(r"\b[0-9a-fA-F]{32}(?:[0-9a-fA-F]{8})?(?:[0-9a-fA-F]{24})?\b")
DOMAIN_RE = re.compile(r"\b(?:[a-z0-9-]+\.)+[a-z]{2,}\b", re.IGNORECASE)

IOC_SYNTAX = {
    "ipv4": IPV4_RE,
    "domain": DOMAIN_RE,
    "url": re.compile(r"https?://\S+"),
    "md5": re.compile(r"\b[0-9a-fA-F]{32}\b"),
    "sha1": re.compile(r"\b[0-9a-fA-F]{40}\b"),
    "sha256": re.compile(r"\b[0-9a-fA-F]{64}\b"),
    "cve": CVE_RE,
}


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class ReportType:
    kind: str
    focus_id: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in REPORT_TYPES:
            raise SelectionError(f"unknown report type {self.kind!r}")
        if self.kind in FOCUS_REQUIRED and not self.focus_id:
            raise SelectionError(f"{self.kind} reports require a focus entity")
        if self.kind not in FOCUS_REQUIRED and self.focus_id:
            raise SelectionError(f"{self.kind} reports do not take a focus entity")


@dataclass
class SectionDict:
    entity_id: str
    overview: list[str] = field(default_factory=list)
    relationships: list[tuple[str, str, str]] = field(default_factory=list)
    stats: dict[str, int] = field(default_factory=dict)
    useful_resources: list[tuple[str, str]] = field(default_factory=list)
    iocs: list[tuple[str, str]] = field(default_factory=list)
    ttps: list[tuple[str, str]] = field(default_factory=list)

    KEYS = ("overview", "relationships", "stats", "useful_resources", "iocs", "ttps")

    def as_dict(self) -> dict:
        """Exactly the six content keys; the owning entity id stays separate."""
        return {
            "overview": list(self.overview),
            "relationships": [list(r) for r in self.relationships],
            "stats": dict(self.stats),
            "useful_resources": [list(r) for r in self.useful_resources],
            "iocs": [list(r) for r in self.iocs],
            "ttps": [list(r) for r in self.ttps],
        }


@dataclass(frozen=True)
class TimelineEntry:
    timestamp: datetime
    entity_id: str
    description: str

    def sort_key(self) -> tuple:
        return (self.timestamp, self.entity_id, self.description)


@dataclass(frozen=True)
class VulnRecord:
    cve_id: str
    summary: str
    cvss_score: Optional[float]
    mitigations: tuple[str, ...] = ()
    vulnerable_configurations: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.cvss_score is not None and not 0.0 <= self.cvss_score <= 10.0:
            raise SelectionError(f"CVSS score out of range: {self.cvss_score}")
        if not CVE_RE.fullmatch(self.cve_id):
            raise SelectionError(f"not a CVE identifier: {self.cve_id}")


# -- shared routing helpers (also used by fact extraction) ----------------

def type_label(stix_type: str) -> str:
    return TYPE_LABELS.get(stix_type, stix_type)


def _article(label: str) -> str:
    if label.lower().startswith(("ipv4", "ipv6")):
        return "an"
    return "an" if label[0].lower() in "aeiou" else "a"


def date_str(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%d")


def entity_attributes(obj: StixObject) -> list[tuple[str, str]]:
    """(predicate, canonical value) pairs a report may state about an entity."""
    attrs: list[tuple[str, str]] = [("name", obj.display_name())]
    attrs.append(("type", type_label(obj.type)))
    description = obj.properties.get("description")
    if description:
        attrs.append(("description", str(description)))
    for alias in obj.properties.get("aliases") or []:
        attrs.append(("alias", str(alias)))
    if obj.created is not None:
        attrs.append(("created", date_str(obj.created)))
    first_seen = obj.properties.get("first_seen")
    if first_seen:
        attrs.append(("first_seen", str(first_seen)[:10]))
    return attrs


def attribute_sentence(name: str, predicate: str, value: str, stix_type: str) -> Optional[str]:
    if predicate == "name":
        return None
    if predicate == "type":
        return f"{name} is {_article(value)} {value}."
    if predicate == "description":
        return value if value.endswith(".") else value + "."
    if predicate == "alias":
        return f"It is also known as {value}."
    if predicate == "created":
        return f"It was first recorded on {value}."
    if predicate == "first_seen":
        return f"It was first seen on {value}."
    return f"Its {predicate} is {value}."


def iocs_from_object(obj: StixObject) -> list[tuple[str, str]]:
    """Extract (kind, value) IOC pairs from an observable or indicator."""
    out: list[tuple[str, str]] = []
    if obj.type == "ipv4-addr":
        out.append(("ipv4", str(obj.properties.get("value", ""))))
    elif obj.type == "domain-name":
        out.append(("domain", str(obj.properties.get("value", ""))))
    elif obj.type == "url":
        out.append(("url", str(obj.properties.get("value", ""))))
    elif obj.type == "file":
        hashes = obj.properties.get("hashes") or {}
        for algo, kind in (("MD5", "md5"), ("SHA-1", "sha1"), ("SHA-256", "sha256")):
            if algo in hashes:
                out.append((kind, str(hashes[algo])))
    elif obj.type == "indicator":
        pattern = str(obj.properties.get("pattern", ""))
        for kind, regex in (("ipv4", IPV4_RE), ("cve", CVE_RE)):
            for match in regex.findall(pattern):
                out.append((kind, match))
        if not out:
            for match in re.findall(r"'([^']+)'", pattern):
                if DOMAIN_RE.fullmatch(match):
                    out.append(("domain", match))
    return [(k, v) for k, v in out if v and IOC_SYNTAX[k].fullmatch(v)]


_ROUTING_CONFIG = None


def _routing():
    # Routing rules live in the versioned config file so deployments can
    # tune them without code changes.
    global _ROUTING_CONFIG
    if _ROUTING_CONFIG is None:
        from .config import load_config
        _ROUTING_CONFIG = load_config()
    return _ROUTING_CONFIG


def routes_to_iocs(obj: StixObject) -> bool:
    return obj.type in _routing().ioc_route_types


def routes_to_ttps(obj: StixObject) -> bool:
    return obj.type in _routing().ttp_route_types


def ttp_reference(obj: StixObject) -> tuple[str, str]:
    """(technique id, name) for an attack-pattern entity."""
    technique_id = ""
    for ref in obj.properties.get("external_references") or []:
        if ref.get("source_name") == "mitre-attack" and ref.get("external_id"):
            technique_id = ref["external_id"]
            break
    return (technique_id, obj.display_name())


def useful_resources(obj: StixObject) -> list[tuple[str, str]]:
    out = []
    for ref in obj.properties.get("external_references") or []:
        if ref.get("url"):
            out.append((ref.get("source_name", "reference"), ref["url"]))
    return out


def graph_as_of(graph: EntityGraph) -> Optional[datetime]:
    """Deterministic evaluation instant: the newest timestamp in the graph."""
    stamps = []
    for obj in graph.nodes.values():
        for ts in (obj.created, obj.modified):
            if ts is not None:
                stamps.append(ts)
    return max(stamps) if stamps else None


# -- operations -----------------------------------------------------------

def select_template(rt: ReportType) -> "TemplateSpec":
    from .templates import load_template
    return load_template(rt.kind)


def select_entities(graph: EntityGraph, spec: "TemplateSpec",
                    focus_id: Optional[str] = None) -> list[str]:
    """Entities passing the template's type filter, deterministic order."""
    if not graph.nodes:
        raise SelectionError("nothing to report: graph is empty")
    if spec.entity_filter in ("focus-neighborhood", "focus-vulnerabilities"):
        if not focus_id or focus_id not in graph.nodes:
            raise SelectionError(f"focus entity not in graph: {focus_id}")

    if spec.entity_filter == "all":
        chosen = set(graph.nodes)
    elif spec.entity_filter == "timestamped":
        chosen = {
            i for i, obj in graph.nodes.items()
            if obj.created is not None or obj.modified is not None
            or obj.properties.get("first_seen")
        }
    elif spec.entity_filter == "focus-neighborhood":
        chosen = {focus_id}
        for edge in graph.incident_edges(focus_id):
            chosen.add(edge.source)
            chosen.add(edge.target)
    elif spec.entity_filter == "focus-vulnerabilities":
        chosen = {focus_id}
        vulns = set()
        for edge in graph.incident_edges(focus_id):
            for end in (edge.source, edge.target):
                if graph.nodes[end].type == "vulnerability":
                    vulns.add(end)
        chosen |= vulns
        for vuln in vulns:
            for edge in graph.incident_edges(vuln):
                for end in (edge.source, edge.target):
                    if graph.nodes[end].type == "course-of-action":
                        chosen.add(end)
    else:
        raise SelectionError(f"unknown entity filter {spec.entity_filter!r}")

    if not chosen:
        raise SelectionError("nothing to report: selection is empty")

    def order(entity_id: str) -> tuple:
        obj = graph.nodes[entity_id]
        try:
            priority = TYPE_PRIORITY.index(obj.type)
        except ValueError:
            priority = len(TYPE_PRIORITY)
        is_focus = 0 if entity_id == focus_id else 1
        return (is_focus, priority, entity_id)

    return sorted(chosen, key=order)


def selected_edges(graph: EntityGraph, selected: list[str]):
    """Graph edges with both endpoints selected, deterministic order."""
    chosen = set(selected)
    return [e for e in graph.sorted_edges()
            if e.source in chosen and e.target in chosen]


def build_section_dict(entity_id: str, kb: "KnowledgeBase",
                       graph: Optional[EntityGraph] = None,
                       as_of: Optional[datetime] = None) -> SectionDict:
    """Populate the six fixed sections for one entity.

    When a graph is given, relationships are limited to the graph's edges
    (the report scope); otherwise the full KB neighborhood is used.
    """
    if graph is not None and entity_id in graph.nodes:
        obj = graph.nodes[entity_id]
    else:
        record = kb.get_entity(entity_id)
        if record is None:
            raise KeyError(f"unknown entity: {entity_id}")
        obj = record.object

    section = SectionDict(entity_id=entity_id)
    name = obj.display_name()
    for predicate, value in entity_attributes(obj):
        sentence = attribute_sentence(name, predicate, value, obj.type)
        if sentence:
            section.overview.append(sentence)

    if graph is not None:
        neighbor_items = []
        for edge in graph.incident_edges(entity_id):
            if edge.source == entity_id:
                neighbor_items.append((edge.relationship_type, "outgoing",
                                       graph.nodes[edge.target]))
            else:
                neighbor_items.append((edge.relationship_type, "incoming",
                                       graph.nodes[edge.source]))
    else:
        neighbor_items = [(rel, direction, record.object)
                          for rel, direction, record in kb.neighbors(entity_id)]

    sightings = 0
    for rel_type, direction, neighbor in neighbor_items:
        if rel_type == "sighted":
            sightings += 1
        if routes_to_iocs(neighbor):
            section.iocs.extend(iocs_from_object(neighbor))
            continue
        section.relationships.append((rel_type, direction, neighbor.id))
        if routes_to_ttps(neighbor):
            section.ttps.append(ttp_reference(neighbor))
    # Self-descriptive observables carry their own IOC value.
    if routes_to_iocs(obj):
        section.iocs.extend(iocs_from_object(obj))

    section.useful_resources = useful_resources(obj)

    last_touch = obj.modified or obj.created
    days_stale = 0
    if as_of is not None and last_touch is not None:
        days_stale = max(0, (as_of - last_touch).days)
    section.stats = {
        "neighbors": len(neighbor_items),
        "iocs": len(section.iocs),
        "sightings": sightings,
        "days_since_last_update": days_stale,
    }
    return section


def build_timeline(entity_ids: list[str], kb: "KnowledgeBase") -> list[TimelineEntry]:
    """Merged per-entity histories, chronological, ties broken by entity id."""
    entries: list[TimelineEntry] = []
    for entity_id in entity_ids:
        for event in kb.history(entity_id):
            entries.append(TimelineEntry(
                timestamp=event.timestamp,
                entity_id=entity_id,
                description=event.detail if event.detail.endswith(".")
                else event.detail + ".",
            ))
    entries.sort(key=TimelineEntry.sort_key)
    return entries


def _vuln_record(obj: StixObject, mitigations: list[str]) -> Optional[VulnRecord]:
    cve_id = None
    if obj.name and CVE_RE.fullmatch(obj.name):
        cve_id = obj.name
    else:
        for ref in obj.properties.get("external_references") or []:
            ext = ref.get("external_id", "")
            if CVE_RE.fullmatch(ext):
                cve_id = ext
                break
    if cve_id is None:
        return None
    score = obj.properties.get("x_cvss_score")
    return VulnRecord(
        cve_id=cve_id,
        summary=str(obj.properties.get("description", "")),
        cvss_score=float(score) if score is not None else None,
        mitigations=tuple(mitigations),
        vulnerable_configurations=tuple(
            str(c) for c in obj.properties.get("x_vulnerable_configurations") or []
        ),
    )


def collect_vulnerabilities(focus_id: str, kb: "KnowledgeBase",
                            graph: Optional[EntityGraph] = None) -> list[VulnRecord]:
    """One record per vulnerability linked to the focus, worst CVSS first."""

    def neighbor_objs(entity_id: str) -> list[StixObject]:
        if graph is not None:
            out = []
            for edge in graph.incident_edges(entity_id):
                other = edge.target if edge.source == entity_id else edge.source
                out.append(graph.nodes[other])
            return out
        return [record.object for _, _, record in kb.neighbors(entity_id)]

    records = []
    for neighbor in neighbor_objs(focus_id):
        if neighbor.type != "vulnerability":
            continue
        mitigations = sorted(
            other.display_name() for other in neighbor_objs(neighbor.id)
            if other.type == "course-of-action"
        )
        record = _vuln_record(neighbor, mitigations)
        if record is not None:
            records.append(record)

    def order(r: VulnRecord) -> tuple:
        missing = r.cvss_score is None
        return (missing, -(r.cvss_score or 0.0), r.cve_id)

    records.sort(key=order)
    return records
