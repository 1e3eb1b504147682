"""Shared text helpers: word tokenization, case matching, emoji detection."""

from __future__ import annotations

import re

# Words are maximal runs of letters/digits (no underscore), optionally joined
# by an apostrophe so contractions like "don't" stay one token.
WORD_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*", re.UNICODE)


def word_spans(text: str) -> list[tuple[int, int, str]]:
    """Return (start, end, token) for every word token, in codepoint offsets."""
    return [(m.start(), m.end(), m.group()) for m in WORD_RE.finditer(text)]


def tokens(text: str) -> list[str]:
    return [m.group() for m in WORD_RE.finditer(text)]


def match_case(template: str, word: str) -> str:
    """Shape `word` to mimic the casing of `template`."""
    if len(template) > 1 and template.isupper():
        return word.upper()
    if template[:1].isupper():
        return word[:1].upper() + word[1:]
    return word


_EMOJI_RANGES = (
    (0x1F000, 0x1F0FF),
    (0x1F300, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2B00, 0x2BFF),
    (0x1F1E6, 0x1F1FF),
)


def is_emoji(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def contains_emoji(text: str) -> bool:
    return any(is_emoji(ch) for ch in text)
