"""Rule-based grammar checking.

A fixed, deterministic rule set stands in for an external grammar service;
rule ids follow the LanguageTool naming convention so a real client could be
swapped in behind the same GrammarReport shape. The score is
max(0, 1 - error_count / max(word_count, 1)), which is exactly 1.0 when no
rule fires.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from .textutils import is_emoji, word_spans


@dataclass(frozen=True)
class GrammarError:
    rule: str
    start: int
    end: int
    message: str


@dataclass(frozen=True)
class GrammarReport:
    errors: tuple[GrammarError, ...]

    @property
    def error_count(self) -> int:
        return len(self.errors)


_SPACE_BEFORE_PUNCT = re.compile(r"\s+([,.;:?!])")
_CONTRACTION_GAP = re.compile(r"[A-Za-z] '[A-Za-z]|[A-Za-z]' (?:t|s|re|ve|ll|d|m)\b")
_TERMINALS = ".!?…"


def _is_non_latin_letter(ch: str) -> bool:
    if not ch.isalpha() or ord(ch) < 128:
        return False
    return "LATIN" not in unicodedata.name(ch, "")


def check_grammar(text: str) -> GrammarReport:
    errors: list[GrammarError] = []
    spans = word_spans(text)

    prev_token = None
    prev_span = None
    for start, end, token in spans:
        lower = token.lower()
        if prev_token is not None and lower == prev_token and token.isalpha():
            errors.append(GrammarError(
                "ENGLISH_WORD_REPEAT_RULE", prev_span[0], end,
                f"repeated word {token!r}"))
        prev_token, prev_span = lower, (start, end)

        has_latin = any(ch.isalpha() and ord(ch) < 128 for ch in token)
        non_latin = [i for i, ch in enumerate(token) if _is_non_latin_letter(ch)]
        if has_latin and non_latin:
            errors.append(GrammarError(
                "MIXED_SCRIPT_TOKEN", start, end,
                f"token {token!r} mixes Latin and non-Latin letters"))

        if token.isalpha() and len(token) >= 3 and not token.isupper():
            mid_uppers = [i for i, ch in enumerate(token) if i > 0 and ch.isupper()]
            if len(mid_uppers) == 1 and token[:mid_uppers[0]].islower():
                errors.append(GrammarError(
                    "UPPERCASE_MID_WORD", start, end,
                    f"unexpected capital inside {token!r}"))

    for match in _SPACE_BEFORE_PUNCT.finditer(text):
        errors.append(GrammarError(
            "COMMA_PARENTHESIS_WHITESPACE", match.start(), match.end(),
            f"space before {match.group(1)!r}"))

    if text.count('"') % 2 == 1:
        errors.append(GrammarError(
            "UNPAIRED_BRACKETS", 0, len(text), "odd number of double quotes"))
    depth = 0
    unmatched = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            if depth == 0:
                unmatched += 1
            else:
                depth -= 1
    if depth or unmatched:
        errors.append(GrammarError(
            "UNPAIRED_BRACKETS", 0, len(text), "unbalanced parentheses"))

    for match in _CONTRACTION_GAP.finditer(text):
        errors.append(GrammarError(
            "APOSTROPHE_SPACE", match.start(), match.end(),
            "stray space around an apostrophe"))

    # trailing emoji are fine; check the terminator of the text proper
    trimmed = text.rstrip()
    while trimmed and (is_emoji(trimmed[-1]) or trimmed[-1].isspace()):
        trimmed = trimmed[:-1].rstrip()
    if len(spans) >= 2 and trimmed:
        last = trimmed[-1]
        if last in "\"')":
            body = trimmed.rstrip("\"')")
            last = body[-1] if body else last
        if last not in _TERMINALS:
            errors.append(GrammarError(
                "PUNCTUATION_PARAGRAPH_END", max(len(trimmed) - 1, 0), len(trimmed),
                "multi-word text lacks terminal punctuation"))

    errors.sort(key=lambda e: (e.start, e.end, e.rule))
    return GrammarReport(errors=tuple(errors))


def grammaticality(text: str) -> tuple[GrammarReport, float]:
    report = check_grammar(text)
    word_count = len(word_spans(text))
    score = max(0.0, 1.0 - report.error_count / max(word_count, 1))
    return report, score
