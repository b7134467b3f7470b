"""STIX 2.1 bundle parsing and validation.

Bundles are parsed into immutable typed objects. Unknown object types are
kept opaquely so real-world feeds do not abort ingestion; dangling
relationship references are reported as diagnostics, never as fatal errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterable, Optional

ENTITY_TYPES = frozenset({
    "threat-actor", "intrusion-set", "campaign", "malware", "attack-pattern",
    "vulnerability", "infrastructure", "indicator", "tool",
    "course-of-action", "identity", "report",
})

OBSERVABLE_TYPES = frozenset({
    "ipv4-addr", "ipv6-addr", "domain-name", "file", "url", "email-addr",
})

EDGE_TYPES = frozenset({"relationship", "sighting"})

KNOWN_TYPES = ENTITY_TYPES | OBSERVABLE_TYPES | EDGE_TYPES


class StixParseError(ValueError):
    """Raised for syntactically invalid bundle JSON; carries a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class StixValidationError(ValueError):
    """Raised when a bundle violates a structural invariant."""


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


@dataclass(frozen=True)
class StixObject:
    id: str
    type: str
    created: Optional[datetime] = None
    modified: Optional[datetime] = None
    name: Optional[str] = None
    properties: dict[str, Any] = field(default_factory=dict)

    @property
    def is_relationship(self) -> bool:
        return self.type == "relationship"

    @property
    def is_sighting(self) -> bool:
        return self.type == "sighting"

    @property
    def is_edge(self) -> bool:
        return self.type in EDGE_TYPES

    @property
    def source_ref(self) -> Optional[str]:
        if self.type == "relationship":
            return self.properties.get("source_ref")
        if self.type == "sighting":
            return self.properties.get("sighting_of_ref")
        return None

    @property
    def target_ref(self) -> Optional[str]:
        if self.type == "relationship":
            return self.properties.get("target_ref")
        if self.type == "sighting":
            refs = self.properties.get("where_sighted_refs") or []
            return refs[0] if refs else None
        return None

    @property
    def relationship_type(self) -> Optional[str]:
        if self.type == "relationship":
            return self.properties.get("relationship_type")
        if self.type == "sighting":
            return "sighted"
        return None

    def display_name(self) -> str:
        if self.name:
            return self.name
        # Observables usually carry a value instead of a name.
        value = self.properties.get("value")
        if value:
            return str(value)
        return self.id

    def to_dict(self) -> dict[str, Any]:
        raw: dict[str, Any] = {"type": self.type, "id": self.id}
        if self.created is not None:
            raw["created"] = format_timestamp(self.created)
        if self.modified is not None:
            raw["modified"] = format_timestamp(self.modified)
        if self.name is not None:
            raw["name"] = self.name
        raw.update(self.properties)
        return raw


@dataclass(frozen=True)
class Diagnostic:
    level: str
    code: str
    message: str
    object_id: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"level": self.level, "code": self.code, "message": self.message}
        if self.object_id:
            out["object_id"] = self.object_id
        return out


@dataclass(frozen=True)
class StixBundle:
    objects: tuple[StixObject, ...]
    source_label: str = ""
    diagnostics: tuple[Diagnostic, ...] = ()

    def by_id(self, object_id: str) -> Optional[StixObject]:
        return self._index.get(object_id)

    @property
    def _index(self) -> dict[str, StixObject]:
        # Cached lazily on the frozen instance.
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {obj.id: obj for obj in self.objects}
            object.__setattr__(self, "_index_cache", idx)
        return idx

    @property
    def entities(self) -> tuple[StixObject, ...]:
        return tuple(o for o in self.objects if not o.is_edge)

    @property
    def relationships(self) -> tuple[StixObject, ...]:
        return tuple(o for o in self.objects if o.is_edge)


def _parse_object(raw: dict[str, Any], diagnostics: list[Diagnostic]) -> StixObject:
    obj_type = raw.get("type", "")
    obj_id = raw.get("id", "")
    if not obj_id or not obj_type:
        raise StixValidationError(f"object missing id or type: {raw!r}")
    if not obj_id.startswith(obj_type + "--"):
        raise StixValidationError(
            f"id prefix does not match type: id={obj_id!r} type={obj_type!r}"
        )
    if obj_type not in KNOWN_TYPES:
        diagnostics.append(Diagnostic(
            level="warning", code="unknown-type",
            message=f"unrecognized STIX type {obj_type!r} preserved opaquely",
            object_id=obj_id,
        ))

    created = parse_timestamp(raw["created"]) if "created" in raw else None
    modified = parse_timestamp(raw["modified"]) if "modified" in raw else None
    if created is not None and modified is not None and created > modified:
        raise StixValidationError(f"created after modified for {obj_id}")

    if obj_type == "relationship":
        for key in ("source_ref", "target_ref", "relationship_type"):
            if not raw.get(key):
                raise StixValidationError(f"relationship {obj_id} missing {key}")

    skip = {"type", "id", "created", "modified", "name", "spec_version"}
    props = {k: v for k, v in raw.items() if k not in skip}
    return StixObject(
        id=obj_id, type=obj_type, created=created, modified=modified,
        name=raw.get("name"), properties=props,
    )


def parse_bundle(text: str, source_label: str = "") -> StixBundle:
    """Parse a STIX 2.1 bundle document.

    Dangling relationship references and unknown types become diagnostics;
    malformed JSON and duplicate ids are fatal.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StixParseError(exc.msg, exc.pos) from exc
    if not isinstance(raw, dict):
        raise StixValidationError("bundle document must be a JSON object")

    raw_objects = raw.get("objects", [])
    diagnostics: list[Diagnostic] = []
    objects: list[StixObject] = []
    seen: set[str] = set()
    for entry in raw_objects:
        obj = _parse_object(entry, diagnostics)
        if obj.id in seen:
            raise StixValidationError(f"duplicate id in bundle: {obj.id}")
        seen.add(obj.id)
        objects.append(obj)

    for obj in objects:
        if not obj.is_edge:
            continue
        for ref in (obj.source_ref, obj.target_ref):
            if ref and ref not in seen:
                diagnostics.append(Diagnostic(
                    level="warning", code="dangling-ref",
                    message=f"{obj.type} {obj.id} references missing object {ref}",
                    object_id=obj.id,
                ))

    return StixBundle(
        objects=tuple(objects),
        source_label=source_label,
        diagnostics=tuple(diagnostics),
    )


def serialize_bundle(bundle: StixBundle) -> str:
    payload = {
        "type": "bundle",
        "id": "bundle--00000000-0000-4000-8000-000000000000",
        "objects": [obj.to_dict() for obj in bundle.objects],
    }
    return json.dumps(payload, indent=2, sort_keys=False)


def load_bundle_file(path: str, source_label: str = "") -> StixBundle:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    label = source_label or path
    return parse_bundle(text, source_label=label)


def dangling_refs(bundle: StixBundle) -> list[str]:
    return [d.object_id or "" for d in bundle.diagnostics if d.code == "dangling-ref"]


def diagnostics_jsonl(diagnostics: Iterable[Diagnostic]) -> str:
    return "\n".join(json.dumps(d.to_dict(), sort_keys=True) for d in diagnostics)
