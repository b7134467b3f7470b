"""Golden-file comparison for all fixture reports.

Regenerate after intentional template or fixture changes with
``python3 scripts/make_golden.py`` and review the diff.
"""

from .conftest import GOLDEN


def test_template_reports_match_golden_files(index, reports):
    for entry in index["reports"]:
        expected = (GOLDEN / f"{entry['name']}.txt").read_text(encoding="utf-8")
        assert reports[entry["name"]].template_text == expected, entry["name"]
