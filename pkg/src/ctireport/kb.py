"""Embedded knowledge base for entities, relationships, and provenance.

Storage is an append-only JSON-lines log plus a meta file; indexes are
rebuilt in memory on open. Ingestion is all-or-nothing: lines are buffered
and appended in a single write, so a failed ingest leaves the log untouched.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .stix import (
    StixBundle,
    StixObject,
    format_timestamp,
    parse_timestamp,
)

KB_FORMAT_VERSION = 1

EVENT_KINDS = ("created", "modified", "sighted", "related")


class KbError(RuntimeError):
    pass


@dataclass(frozen=True)
class KbRecord:
    object: StixObject
    first_ingested: datetime
    last_updated: datetime
    sources: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "object": self.object.to_dict(),
            "first_ingested": format_timestamp(self.first_ingested),
            "last_updated": format_timestamp(self.last_updated),
            "sources": list(self.sources),
        }


@dataclass(frozen=True, order=True)
class HistoryEvent:
    timestamp: datetime
    kind: str
    detail: str
    entity_id: str = field(compare=False, default="")

    def to_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "timestamp": format_timestamp(self.timestamp),
            "kind": self.kind,
            "detail": self.detail,
        }


def _events_for_object(obj: StixObject) -> list[HistoryEvent]:
    events: list[HistoryEvent] = []
    name = obj.display_name()
    if obj.created is not None:
        events.append(HistoryEvent(
            entity_id=obj.id, timestamp=obj.created, kind="created",
            detail=f"{name} was created",
        ))
    if obj.modified is not None and obj.modified != obj.created:
        events.append(HistoryEvent(
            entity_id=obj.id, timestamp=obj.modified, kind="modified",
            detail=f"{name} was modified",
        ))
    return events


class KnowledgeBase:
    """File-backed store with upsert semantics and an append-only event log.

    Layout: ``<root>/log.jsonl`` holds record and event lines,
    ``<root>/meta.json`` holds the format version and counters.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._records: dict[str, KbRecord] = {}
        self._edges: dict[str, StixObject] = {}  # relationship/sighting objects by id
        self._events: set[HistoryEvent] = set()
        self._load()

    # -- persistence ------------------------------------------------------

    @property
    def log_path(self) -> Path:
        return self.root / "log.jsonl"

    @property
    def meta_path(self) -> Path:
        return self.root / "meta.json"

    def _load(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                self._apply(json.loads(line))

    def _apply(self, entry: dict) -> None:
        kind = entry.get("kind")
        if kind == "record":
            obj = _object_from_dict(entry["object"])
            record = KbRecord(
                object=obj,
                first_ingested=parse_timestamp(entry["first_ingested"]),
                last_updated=parse_timestamp(entry["last_updated"]),
                sources=tuple(entry["sources"]),
            )
            if obj.is_edge:
                self._edges[obj.id] = obj
            self._records[obj.id] = record
        elif kind == "event":
            self._events.add(HistoryEvent(
                entity_id=entry["entity_id"],
                timestamp=parse_timestamp(entry["timestamp"]),
                kind=entry["event_kind"],
                detail=entry["detail"],
            ))

    def _append_lines(self, lines: list[str]) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        try:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write("".join(lines))
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise KbError(f"knowledge base write failed: {exc}") from exc
        self._write_meta()

    def _write_meta(self) -> None:
        meta = {
            "version": KB_FORMAT_VERSION,
            "records": len(self._records),
            "events": len(self._events),
        }
        self.meta_path.write_text(json.dumps(meta, indent=2), encoding="utf-8")

    # -- ingestion --------------------------------------------------------

    def ingest(self, bundle: StixBundle) -> list[str]:
        """Upsert every bundle object; returns the stored ids.

        Re-ingesting the same bundle merges sources and leaves record and
        event counts unchanged.
        """
        now = datetime.now(timezone.utc)
        label = bundle.source_label or "unlabeled"

        new_records: dict[str, KbRecord] = {}
        new_events: list[HistoryEvent] = []
        stored_ids: list[str] = []

        for obj in bundle.objects:
            stored_ids.append(obj.id)
            existing = self._records.get(obj.id)
            if existing is None:
                record = KbRecord(
                    object=obj, first_ingested=now, last_updated=now,
                    sources=(label,),
                )
            else:
                sources = existing.sources
                if label not in sources:
                    sources = sources + (label,)
                record = replace(existing, object=obj, last_updated=now,
                                 sources=sources)
            new_records[obj.id] = record

            def _name(ref: Optional[str]) -> Optional[str]:
                if not ref:
                    return None
                other = bundle.by_id(ref)
                if other is not None:
                    return other.display_name()
                record = self._records.get(ref)
                return record.object.display_name() if record else None

            if not obj.is_edge:
                new_events.extend(_events_for_object(obj))
            elif obj.is_sighting:
                ref = obj.properties.get("sighting_of_ref")
                subject = _name(ref)
                observer = _name(obj.target_ref)
                if ref and subject:
                    detail = (f"{subject} was sighted by {observer}"
                              if observer else f"{subject} was sighted")
                    new_events.append(HistoryEvent(
                        entity_id=ref, timestamp=obj.created or now,
                        kind="sighted", detail=detail,
                    ))
            elif obj.is_relationship:
                rel = obj.relationship_type or "related-to"
                src, tgt = obj.source_ref, obj.target_ref
                src_name, tgt_name = _name(src), _name(tgt)
                if src and src_name and tgt_name:
                    new_events.append(HistoryEvent(
                        entity_id=src, timestamp=obj.created or now,
                        kind="related",
                        detail=f"{src_name} established a {rel} "
                               f"relationship with {tgt_name}",
                    ))

        lines = []
        for record in new_records.values():
            entry = {"kind": "record", **record.to_dict()}
            lines.append(json.dumps(entry, sort_keys=True) + "\n")
        fresh_events = [e for e in new_events if e not in self._events]
        for event in fresh_events:
            entry = {
                "kind": "event",
                "entity_id": event.entity_id,
                "timestamp": format_timestamp(event.timestamp),
                "event_kind": event.kind,
                "detail": event.detail,
            }
            lines.append(json.dumps(entry, sort_keys=True) + "\n")

        self._append_lines(lines)
        self._records.update(new_records)
        for obj_id, record in new_records.items():
            if record.object.is_edge:
                self._edges[obj_id] = record.object
        self._events.update(fresh_events)
        self._write_meta()
        return stored_ids

    # -- queries ----------------------------------------------------------

    def get_entity(self, entity_id: str) -> Optional[KbRecord]:
        record = self._records.get(entity_id)
        if record is None or record.object.is_edge:
            return None
        return record

    def neighbors(self, entity_id: str) -> list[tuple[str, str, KbRecord]]:
        """All stored edges incident to entity_id, both directions.

        Ordered by (relationship_type, neighbor id).
        """
        if self.get_entity(entity_id) is None:
            raise KeyError(f"unknown entity: {entity_id}")
        found: list[tuple[str, str, KbRecord]] = []
        for edge in self._edges.values():
            rel = edge.relationship_type or "related-to"
            if edge.source_ref == entity_id and edge.target_ref:
                other = self.get_entity(edge.target_ref)
                if other is not None:
                    found.append((rel, "outgoing", other))
            elif edge.target_ref == entity_id and edge.source_ref:
                other = self.get_entity(edge.source_ref)
                if other is not None:
                    found.append((rel, "incoming", other))
        found.sort(key=lambda item: (item[0], item[2].object.id))
        return found

    def history(self, entity_id: str) -> list[HistoryEvent]:
        if self.get_entity(entity_id) is None:
            raise KeyError(f"unknown entity: {entity_id}")
        events = [e for e in self._events if e.entity_id == entity_id]
        events.sort(key=lambda e: (e.timestamp, e.kind, e.detail))
        return events

    def query_by_type(self, stix_type: str) -> list[KbRecord]:
        records = [
            r for r in self._records.values()
            if r.object.type == stix_type and not r.object.is_edge
        ]
        records.sort(key=lambda r: r.object.id)
        return records

    def entity_ids(self) -> list[str]:
        return sorted(i for i, r in self._records.items() if not r.object.is_edge)

    def type_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for record in self._records.values():
            counts[record.object.type] = counts.get(record.object.type, 0) + 1
        return dict(sorted(counts.items()))


def _object_from_dict(raw: dict) -> StixObject:
    skip = {"type", "id", "created", "modified", "name", "spec_version"}
    return StixObject(
        id=raw["id"],
        type=raw["type"],
        created=parse_timestamp(raw["created"]) if "created" in raw else None,
        modified=parse_timestamp(raw["modified"]) if "modified" in raw else None,
        name=raw.get("name"),
        properties={k: v for k, v in raw.items() if k not in skip},
    )
