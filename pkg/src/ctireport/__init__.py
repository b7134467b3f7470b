"""Deterministic CTI report generation from STIX 2.1 graphs.

Pipeline: parse bundles into an entity graph, select content per report
type, realize a template-stage report, optionally rewrite it behind a
fact-preservation gate, and score the result with fact precision/recall/F1
and SLOR fluency metrics.
"""

__version__ = "0.1.0"
