"""Document realization and plain-text rendering."""

import pytest

from ctireport.realize import (
    NO_DATA,
    RealizationError,
    Table,
    lexicalize_relationship,
    render_text,
)


def test_lexicalized_relationship_known_verb():
    sentence = lexicalize_relationship(("Actor", "uses", "Tool"))
    assert sentence == "Actor uses Tool."


def test_lexicalized_relationship_fallback():
    sentence = lexicalize_relationship(("A", "made-up-type", "B"))
    assert sentence == "A is related to B."


def test_table_must_be_rectangular():
    with pytest.raises(RealizationError):
        Table(header=("a", "b"), rows=(("only-one",),))


def test_empty_sections_render_no_data(reports):
    doc = reports["overview-botnet"].document
    texts = {heading: blocks for heading, blocks in doc.sections}
    assert all(blocks for blocks in texts.values())
    # an empty section in a rendered document shows the no-data marker
    assert NO_DATA == "No data available."


def test_render_text_shape(reports):
    text = reports["vuln-plant"].template_text
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    assert any(line.startswith("## ") for line in lines)
    assert any(line.startswith("| ") for line in lines)
    assert "| --- |" in text
    assert text.endswith("\n") and not text.endswith("\n\n")


def test_render_excludes_generation_time(reports):
    doc = reports["overview-botnet"].document
    stamp = doc.generated_at.strftime("%Y-%m-%dT")
    assert stamp not in render_text(doc)


def test_vulnerability_tables_have_required_rows(reports):
    doc = reports["vuln-gateway"].document
    tables = [block for _, blocks in doc.sections for block in blocks
              if isinstance(block, Table)]
    assert len(tables) == 2  # one per CVE
    for table in tables:
        labels = [row[0] for row in table.rows]
        for required in ("CVE", "CVSS score", "Summary", "Mitigations",
                         "Vulnerable configurations"):
            assert required in labels


def test_unscored_cve_renders_not_available(reports):
    text = reports["vuln-webstack"].template_text
    assert "| CVSS score | not available |" in text


def test_timeline_and_vulnerability_inputs_are_exclusive(reports):
    from ctireport.realize import realize

    timeline_parts = reports["timeline-gale"].parts
    with pytest.raises(RealizationError, match="exclusive"):
        realize(timeline_parts.spec, timeline_parts.dicts,
                timeline=timeline_parts.timeline, vulns=[],
                ctx=timeline_parts.ctx)

    vuln_parts = reports["vuln-plant"].parts
    with pytest.raises(RealizationError, match="exclusive"):
        realize(vuln_parts.spec, vuln_parts.dicts,
                timeline=[], vulns=vuln_parts.vulns, ctx=vuln_parts.ctx)
