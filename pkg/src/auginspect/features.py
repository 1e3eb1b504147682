"""Feature provenance: linguistic features of the original, pre-transform text.

Features come from a closed registry. `amr:` features are extracted from the
relations of an ingested semantic graph; `rule:` features are rule-based
detectors over the raw text so the feature pane still works for instances
without graph annotations. Feature keys attach to original instances only;
generated texts join the feature groups of their parent.

Extraction rules (the full table):

  amr:negation      an edge with role :polarity and constant target "-"
  amr:location      any edge with role :location
  amr:named_entity  any edge with role :name
  amr:quantity      any edge with role :quant, or any numeric constant target
  amr:time          any edge with role :time
  amr:imperative    root concept is a predicate sense (ends in -01..-99) and
                    the root carries :mode imperative
  amr:question      the root carries :mode interrogative

  rule:negation         a token in {not, n't, never, no} (or ending in n't)
  rule:contains_number  a digit run anywhere in the text
  rule:question         trimmed text ends with '?'
  rule:all_caps_word    an alphabetic token of length >= 2 in all caps
  rule:contains_emoji   any emoji codepoint
  rule:long_sentence    more than 25 word tokens
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .amr import AmrGraph
from .corpus import Dataset, ORIGINAL
from .textutils import contains_emoji, tokens


@dataclass(frozen=True)
class Feature:
    key: str
    display: str


REGISTRY: tuple[Feature, ...] = (
    Feature("amr:negation", "Contains a negation"),
    Feature("amr:location", "Has a description of a location"),
    Feature("amr:named_entity", "Mentions a named entity"),
    Feature("amr:quantity", "Mentions a quantity"),
    Feature("amr:time", "Has a description of a time"),
    Feature("amr:imperative", "Is phrased as a command"),
    Feature("amr:question", "Is phrased as a question"),
    Feature("rule:negation", "Contains a negation word"),
    Feature("rule:contains_number", "Contains a number"),
    Feature("rule:question", "Ends with a question mark"),
    Feature("rule:all_caps_word", "Contains an all-caps word"),
    Feature("rule:contains_emoji", "Contains an emoji"),
    Feature("rule:long_sentence", "Is longer than 25 words"),
)

_BY_KEY = {f.key: f for f in REGISTRY}

_SENSE_CONCEPT = re.compile(r"-\d\d$")
_NEGATION_TOKENS = {"not", "n't", "never", "no"}


def feature_registry() -> dict[str, str]:
    """The closed key -> display mapping, as exported to the UI."""
    return {f.key: f.display for f in REGISTRY}


def display_for(key: str) -> str:
    feature = _BY_KEY.get(key)
    return feature.display if feature else key


def export_registry(path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(feature_registry(), indent=2, ensure_ascii=False) + "\n", "utf-8"
    )


def _is_numeric_constant(target: str) -> bool:
    try:
        float(target)
    except ValueError:
        return False
    return True


def extract_features(graph: AmrGraph) -> set[str]:
    """Map graph relations to feature keys; pure and deterministic."""
    found: set[str] = set()
    for src, role, target in graph.edges:
        if role == ":polarity" and target == "-":
            found.add("amr:negation")
        elif role == ":location":
            found.add("amr:location")
        elif role == ":name":
            found.add("amr:named_entity")
        elif role == ":quant":
            found.add("amr:quantity")
        elif role == ":time":
            found.add("amr:time")
        elif role == ":mode" and src == graph.root:
            if target == "imperative" and _SENSE_CONCEPT.search(graph.nodes[graph.root]):
                found.add("amr:imperative")
            elif target == "interrogative":
                found.add("amr:question")
        if target not in graph.nodes and _is_numeric_constant(target):
            found.add("amr:quantity")
    return found


def fallback_features(text: str) -> set[str]:
    """Rule-based detectors used when no graph is available for an instance."""
    found: set[str] = set()
    words = tokens(text)
    for word in words:
        lower = word.lower()
        if lower in _NEGATION_TOKENS or lower.endswith("n't") or lower.endswith("n’t"):
            found.add("rule:negation")
        if len(word) >= 2 and word.isalpha() and word.isupper():
            found.add("rule:all_caps_word")
    if re.search(r"\d", text):
        found.add("rule:contains_number")
    if text.rstrip().endswith("?"):
        found.add("rule:question")
    if contains_emoji(text):
        found.add("rule:contains_emoji")
    if len(words) > 25:
        found.add("rule:long_sentence")
    return found


def compute_feature_sets(
    dataset: Dataset, graphs: dict[str, AmrGraph] | None = None
) -> dict[str, frozenset[str]]:
    """Feature sets for every original instance: graph rules where a graph
    exists, text rules otherwise, so the feature pane is never undefined."""
    graphs = graphs or {}
    sets: dict[str, frozenset[str]] = {}
    for inst in dataset.instances:
        if inst.origin != ORIGINAL:
            continue
        if inst.id in graphs:
            sets[inst.id] = frozenset(extract_features(graphs[inst.id]))
        else:
            sets[inst.id] = frozenset(fallback_features(inst.text))
    return sets
