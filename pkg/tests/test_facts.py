"""Fact extraction, matching, and the precision/recall/F1 formulas."""

import pytest

from ctireport.facts import (
    Fact,
    MatchCounts,
    canonical,
    extract_facts,
    f1,
    f1_from_scores,
    make_fact,
    match_facts,
    precision,
    recall,
)


def test_canonical_form():
    assert canonical("  Sand   Viper\tCrew ") == "sand viper crew"
    assert canonical("CVE-2017-0144") == "cve-2017-0144"


def test_fact_kind_validated():
    with pytest.raises(ValueError):
        Fact(subject="a", predicate="b", object="c", kind="rumor")


def test_match_counts_on_simple_text():
    facts = {
        make_fact("Asprox", "type", "malware"),
        make_fact("Asprox", "uses", "Botnet", kind="relation"),
    }
    counts = match_facts(facts, "Asprox is a malware. Asprox uses Botnet.")
    assert (counts.tp, counts.fp, counts.fn) == (2, 0, 0)


def test_relation_fact_requires_subject_and_object():
    facts = {make_fact("Asprox", "uses", "Botnet", kind="relation")}
    counts = match_facts(facts, "Something uses Botnet.")
    assert counts.fn == 1


def test_detected_artifacts_count_as_false_positives():
    counts = match_facts(set(), "Traffic went to 203.0.113.200 yesterday.")
    assert counts.fp == 1
    assert recall(counts) is None  # tp=0, fn=0, fp>0: undefined, never zero


def test_artifact_covered_by_fact_is_not_fp():
    facts = {make_fact("infra", "ipv4", "203.0.113.200", kind="ioc")}
    counts = match_facts(facts, "Traffic went to 203.0.113.200 yesterday.")
    assert (counts.tp, counts.fp) == (1, 0)


def test_known_name_hallucination_detected():
    counts = match_facts(set(), "We suspect Emotet was involved.",
                         known_names=("Emotet",))
    assert counts.fp == 1


def test_substring_coverage_handles_nested_artifacts():
    # a domain inside a URL fact and a name inside a longer technique name
    facts = {
        make_fact("actor", "resource profile",
                  "https://intel.example.org/profiles/x"),
        make_fact("Spearphishing Attachment", "technique",
                  "Spearphishing Attachment"),
    }
    text = ("See https://intel.example.org/profiles/x for the "
            "Spearphishing Attachment technique.")
    counts = match_facts(facts, text, known_names=("Phishing",))
    assert counts.fp == 0


def test_all_zero_counts_score_one():
    counts = MatchCounts(tp=0, fp=0, fn=0)
    assert precision(counts) == 1.0
    assert recall(counts) == 1.0
    assert f1(counts) == 1.0


def test_undefined_scores_are_none_not_zero():
    assert precision(MatchCounts(tp=0, fp=0, fn=3)) is None
    assert recall(MatchCounts(tp=0, fp=2, fn=0)) is None
    assert f1(MatchCounts(tp=0, fp=2, fn=0)) is None


def test_formula_values():
    counts = MatchCounts(tp=8, fp=2, fn=2)
    assert precision(counts) == pytest.approx(0.8)
    assert recall(counts) == pytest.approx(0.8)
    assert f1(counts) == pytest.approx(0.8)


def test_f1_headline_oracle():
    """Frozen: f1(precision=1.000, recall=0.993) = 0.996 to 3 decimals."""
    assert round(f1_from_scores(1.000, 0.993), 3) == 0.996


def test_extract_facts_mirrors_template(kb, index, reports):
    """A template without a slot contributes no facts for that slot."""
    result = reports["overview-botnet"]
    facts = extract_facts(result.parts.graph, result.parts.spec, kb=kb)
    assert facts == result.facts
    # the overview template has no resources slot, so no resource facts
    assert not any(f.predicate.startswith("resource") for f in facts)


def test_template_stage_recall_perfect_by_construction(reports):
    for name, result in reports.items():
        assert result.metrics["recall"] == 1.0, name
        assert result.metrics["fp"] == 0, name
