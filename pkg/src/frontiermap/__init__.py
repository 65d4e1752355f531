"""Corpus frontier mapping and evidence-grounded hypothesis generation.

The pipeline turns an embedded document corpus into a cosine kNN
similarity graph, scores per-document sparsity across several
neighborhood scales, extracts gap regions and cluster-pair bridge
targets, freezes everything into an immutable content-addressed
snapshot, builds provenance-annotated evidence packs, runs an audited
generation workflow against a pluggable text generator, and evaluates
the output with a leakage-controlled retrospective benchmark plus
human-calibration statistics.
"""

__version__ = "0.1.0"
