"""Template file parsing and validation."""

import pytest

from ctireport.templates import (
    TemplateError,
    load_template,
    parse_template,
    relationship_lexicon,
)

GOOD = """\
report_type: overview
title: Report on {focus_name}
filter: all

[[section:Overview]]
{entity_blocks}

[[section:Stats]]
This graph has {entity_count} entities.
"""


def test_parse_template_structure():
    spec = parse_template(GOOD, source="good")
    assert spec.title_pattern == "Report on {focus_name}"
    assert spec.entity_filter == "all"
    assert [h for h, _ in spec.sections] == ["Overview", "Stats"]


def test_unknown_placeholder_rejected():
    with pytest.raises(TemplateError, match="unknown placeholder"):
        parse_template(GOOD.replace("{entity_blocks}", "{mystery_slot}"))


def test_stray_brace_rejected():
    with pytest.raises(TemplateError):
        parse_template(GOOD.replace("{entity_blocks}", "{entity_blocks"))


def test_builtin_templates_load(index):
    for kind in ("overview", "subject", "timeline", "vulnerability"):
        spec = load_template(kind)
        assert spec.report_type == kind
        assert spec.sections


def test_load_template_from_path(tmp_path):
    path = tmp_path / "custom.txt"
    path.write_text(GOOD, encoding="utf-8")
    spec = load_template("overview", path=path)
    assert [h for h, _ in spec.sections] == ["Overview", "Stats"]


def test_lexicon_has_fallback_semantics():
    lexicon = relationship_lexicon()
    assert lexicon["uses"] == "uses"
    assert lexicon["attributed-to"] == "is attributed to"
    assert "made-up-type" not in lexicon  # realization falls back
