"""auginspect: generate, score, and hand-inspect synthetically augmented text data.

The pipeline is: load a labeled corpus, apply seeded text transformations that
record a replayable edit ledger, compute per-instance quality scores, then run
an inspection session (directly, over HTTP, or through the bundled web UI)
where a human accepts or rejects instances one by one or in provenance groups.
"""

__version__ = "0.1.0"
