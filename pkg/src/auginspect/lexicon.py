"""Lexical resources for the swap transforms.

The file format is sectioned UTF-8 text: a `[section]` header followed by
either `word: cand1, cand2` lines (map sections) or one entry per line (list
sections). Missing or empty sections fall back to the bundled defaults, so a
partial lexicon file only has to override what it cares about. WordNet-style
data files are also accepted; they supply the taxonomy sections (synonyms,
hypernyms, hyponyms) and the rest comes from the defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import wordnet

MAP_SECTIONS = ("synonyms", "hypernyms", "hyponyms", "contractions", "qwerty_adjacent", "homoglyphs")
LIST_SECTIONS = ("names", "locations", "neutral_emoji")


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    synonyms: dict[str, tuple[str, ...]]
    hypernyms: dict[str, tuple[str, ...]]
    hyponyms: dict[str, tuple[str, ...]]
    names: tuple[str, ...]
    locations: tuple[str, ...]
    neutral_emoji: tuple[str, ...]
    contractions: dict[str, str]  # contraction -> expansion
    qwerty_adjacent: dict[str, tuple[str, ...]]
    homoglyphs: dict[str, tuple[str, ...]]
    expansions: dict[str, str] = field(default_factory=dict)  # derived inverse

    def __post_init__(self) -> None:
        for section in MAP_SECTIONS + LIST_SECTIONS:
            value = getattr(self, section)
            if not value:
                raise LexiconError(f"empty required section [{section}]")
        inverse: dict[str, str] = {}
        for contraction, expansion in self.contractions.items():
            if expansion in inverse:
                raise LexiconError(
                    f"contractions not injective: {expansion!r} maps back to both "
                    f"{inverse[expansion]!r} and {contraction!r}"
                )
            inverse[expansion] = contraction
        object.__setattr__(self, "expansions", inverse)


def _parse_sections(text: str, source: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in MAP_SECTIONS + LIST_SECTIONS:
                raise LexiconError(f"{source}:{lineno}: unknown section [{name}]")
            current = name
            sections.setdefault(name, [])
            continue
        if current is None:
            raise LexiconError(f"{source}:{lineno}: entry before any [section] header")
        if current in MAP_SECTIONS and ":" not in line:
            raise LexiconError(f"{source}:{lineno}: expected 'key: candidates' in [{current}]")
        sections[current].append(line)
    return sections


def _build_map(lines: list[str], section: str, source: str) -> dict[str, tuple[str, ...]]:
    table: dict[str, tuple[str, ...]] = {}
    for line in lines:
        key, _, rest = line.partition(":")
        key = key.strip()
        candidates = tuple(c.strip() for c in rest.split(",") if c.strip())
        if not key or not candidates:
            raise LexiconError(f"{source}: [{section}] entry {line!r} has an empty side")
        table[key] = candidates
    return table


def _build_contractions(lines: list[str], source: str) -> dict[str, str]:
    table: dict[str, str] = {}
    for line in lines:
        key, _, rest = line.partition(":")
        key, value = key.strip(), rest.strip()
        if not key or not value:
            raise LexiconError(f"{source}: [contractions] entry {line!r} has an empty side")
        table[key] = value
    return table


def _from_sections(sections: dict[str, list[str]], source: str) -> dict:
    parts: dict = {}
    for section, lines in sections.items():
        if not lines:
            continue
        if section == "contractions":
            parts[section] = _build_contractions(lines, source)
        elif section in MAP_SECTIONS:
            parts[section] = _build_map(lines, section, source)
        else:
            parts[section] = tuple(lines)
    return parts


def _default_parts() -> dict:
    text = resources.files("auginspect.data").joinpath("default_lexicon.txt").read_text("utf-8")
    return _from_sections(_parse_sections(text, "default_lexicon.txt"), "default_lexicon.txt")


def load_lexicon(path: str | Path | None = None) -> Lexicon:
    """Load a lexicon file, filling gaps from the bundled defaults."""
    defaults = _default_parts()
    if path is None:
        return Lexicon(**defaults)

    path = Path(path)
    if not path.exists():
        raise LexiconError(f"no such lexicon file: {path}")
    if wordnet.looks_like_wordnet(path):
        parts = {k: v for k, v in wordnet.import_wordnet_data(path).items() if v}
    else:
        parts = _from_sections(_parse_sections(path.read_text("utf-8"), path.name), path.name)
    merged = {**defaults, **parts}
    return Lexicon(**merged)
