"""Importer for WordNet-style data files (data.noun, data.verb, ...).

Only the taxonomy content is taken: words sharing a synset become synonyms,
'@'/'@i' pointers yield hypernyms and '~'/'~i' pointers yield hyponyms.
Multi-word entries (underscores) are skipped since the transforms replace
single tokens.
"""

from __future__ import annotations

import re
from pathlib import Path

_DATA_LINE = re.compile(r"^\d{8} \d\d [nvasr] ")


class WordNetError(ValueError):
    pass


def looks_like_wordnet(path: str | Path) -> bool:
    """Cheap sniff: any of the first 100 lines matches the data-line shape."""
    try:
        with open(path, encoding="utf-8", errors="replace") as fh:
            for _, line in zip(range(100), fh):
                if _DATA_LINE.match(line):
                    return True
    except OSError:
        return False
    return False


def _parse_synset(line: str, lineno: int) -> tuple[str, list[str], list[tuple[str, str]]]:
    parts = line.split()
    try:
        offset = parts[0]
        w_cnt = int(parts[3], 16)
        words = [parts[4 + 2 * i].lower() for i in range(w_cnt)]
        idx = 4 + 2 * w_cnt
        p_cnt = int(parts[idx])
        pointers = []
        for i in range(p_cnt):
            sym = parts[idx + 1 + 4 * i]
            target = parts[idx + 2 + 4 * i]
            pointers.append((sym, target))
    except (IndexError, ValueError) as exc:
        raise WordNetError(f"line {lineno}: malformed synset line ({exc})") from None
    return offset, words, pointers


def import_wordnet_data(path: str | Path) -> dict[str, dict[str, tuple[str, ...]]]:
    """Parse one WordNet data file into synonym/hypernym/hyponym maps."""
    synsets: dict[str, list[str]] = {}
    pointer_table: dict[str, list[tuple[str, str]]] = {}
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not _DATA_LINE.match(line):
                continue  # license header and blank lines
            offset, words, pointers = _parse_synset(line, lineno)
            synsets[offset] = words
            pointer_table[offset] = pointers

    synonyms: dict[str, set[str]] = {}
    hypernyms: dict[str, set[str]] = {}
    hyponyms: dict[str, set[str]] = {}

    def single_words(offset: str) -> list[str]:
        return [w for w in synsets.get(offset, ()) if "_" not in w]

    for offset, words in synsets.items():
        usable = [w for w in words if "_" not in w]
        for w in usable:
            others = [o for o in usable if o != w]
            if others:
                synonyms.setdefault(w, set()).update(others)
        for sym, target in pointer_table[offset]:
            if sym in ("@", "@i"):
                related = hypernyms
            elif sym in ("~", "~i"):
                related = hyponyms
            else:
                continue
            targets = single_words(target)
            if not targets:
                continue
            for w in usable:
                related.setdefault(w, set()).update(t for t in targets if t != w)

    def freeze(table: dict[str, set[str]]) -> dict[str, tuple[str, ...]]:
        return {w: tuple(sorted(c)) for w, c in sorted(table.items()) if c}

    return {
        "synonyms": freeze(synonyms),
        "hypernyms": freeze(hypernyms),
        "hyponyms": freeze(hyponyms),
    }
