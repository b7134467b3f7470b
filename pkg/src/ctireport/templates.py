"""Report templates as data files.

A template file declares the report type, a title pattern, an entity-type
filter, and an ordered list of ``[[section:NAME]]`` blocks whose bodies mix
literal text with ``{placeholder}`` slots. Placeholders are validated at
load time against the registry below; an unknown placeholder is a template
bug and rejects the file.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

# Scalar slots interpolate into a paragraph; block slots must stand alone
# on their own line and expand to lists/tables/paragraph groups.
SCALAR_PLACEHOLDERS = frozenset({"entity_count", "edge_count", "focus_name"})
BLOCK_PLACEHOLDERS = frozenset({
    "entity_blocks", "relationship_sentences", "focus_overview",
    "ioc_list", "ttp_list", "stats_list", "resources_list",
    "timeline_list", "vulnerability_tables",
})

PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")
SECTION_RE = re.compile(r"^\[\[section:(.+)\]\]$")


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class TemplateSpec:
    report_type: str
    title_pattern: str
    entity_filter: str
    sections: tuple[tuple[str, str], ...]  # (heading, body pattern)


def _validate_pattern(pattern: str, where: str) -> None:
    for name in PLACEHOLDER_RE.findall(pattern):
        if name not in SCALAR_PLACEHOLDERS and name not in BLOCK_PLACEHOLDERS:
            raise TemplateError(f"unknown placeholder {{{name}}} in {where}")
    # Reject stray braces that are not well-formed placeholders.
    stripped = PLACEHOLDER_RE.sub("", pattern)
    if "{" in stripped or "}" in stripped:
        raise TemplateError(f"malformed placeholder braces in {where}")


def parse_template(text: str, source: str = "<template>") -> TemplateSpec:
    header: dict[str, str] = {}
    sections: list[tuple[str, list[str]]] = []
    current: Optional[list[str]] = None

    for line in text.splitlines():
        match = SECTION_RE.match(line.strip())
        if match:
            current = []
            sections.append((match.group(1), current))
            continue
        if current is None:
            if not line.strip():
                continue
            if ":" not in line:
                raise TemplateError(f"bad header line in {source}: {line!r}")
            key, value = line.split(":", 1)
            header[key.strip()] = value.strip()
        else:
            current.append(line)

    for key in ("report_type", "title", "filter"):
        if key not in header:
            raise TemplateError(f"template {source} missing {key!r} header")
    if not sections:
        raise TemplateError(f"template {source} declares no sections")

    _validate_pattern(header["title"], f"{source} title")
    compiled = []
    for heading, lines in sections:
        body = "\n".join(lines).strip()
        _validate_pattern(body, f"{source} section {heading!r}")
        compiled.append((heading, body))

    return TemplateSpec(
        report_type=header["report_type"],
        title_pattern=header["title"],
        entity_filter=header["filter"],
        sections=tuple(compiled),
    )


def _read_resource(filename: str) -> str:
    return resources.files("ctireport").joinpath("templates", filename).read_text("utf-8")


def load_template(report_type: str, path: Optional[str | Path] = None) -> TemplateSpec:
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    else:
        text = _read_resource(f"{report_type}.txt")
        source = f"{report_type}.txt"
    spec = parse_template(text, source)
    if spec.report_type != report_type:
        raise TemplateError(
            f"template {source} declares type {spec.report_type!r}, "
            f"expected {report_type!r}"
        )
    return spec


_LEXICON_CACHE: Optional[dict[str, str]] = None


def relationship_lexicon() -> dict[str, str]:
    global _LEXICON_CACHE
    if _LEXICON_CACHE is None:
        _LEXICON_CACHE = json.loads(_read_resource("lexicon.json"))
    return _LEXICON_CACHE
