"""The 20 text transformations, with a replayable edit ledger per generated text.

Every application of a transform produces a TransformRecord: the seed it ran
with plus an ordered list of non-overlapping EditSpans (codepoint offsets into
the pre-edit text). Replaying the spans reconstructs the generated text
byte-exact, which is what makes grouping by transformation provenance and
highlighting of edited regions trustworthy.

All transforms are pure functions of (kind, text, seed, lexicon). A transform
that cannot apply (e.g. RemoveNeutralEmoji on emoji-free text) raises
TransformNotApplicable so generation can resample a different kind.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import string
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from .corpus import Dataset, GENERATED, LabeledInstance
from .lexicon import Lexicon
from .textutils import match_case, word_spans


class TransformKind(str, Enum):
    ChangeHypernym = "ChangeHypernym"
    ChangeHyponym = "ChangeHyponym"
    ChangeLocation = "ChangeLocation"
    ChangeName = "ChangeName"
    ChangeNumber = "ChangeNumber"
    ChangeSynonym = "ChangeSynonym"
    RandomSwap = "RandomSwap"
    RandomSwapQwerty = "RandomSwapQwerty"
    ContractContractions = "ContractContractions"
    ExpandContractions = "ExpandContractions"
    InsertPunctuationMarks = "InsertPunctuationMarks"
    HomoglyphSwap = "HomoglyphSwap"
    WordDeletion = "WordDeletion"
    RandomCharDel = "RandomCharDel"
    RandomCharInsert = "RandomCharInsert"
    RandomCharSubst = "RandomCharSubst"
    RandomCharSwap = "RandomCharSwap"
    RandomInsertion = "RandomInsertion"
    AddNeutralEmoji = "AddNeutralEmoji"
    RemoveNeutralEmoji = "RemoveNeutralEmoji"

    @property
    def category(self) -> str:
        return CATEGORIES[self]


CATEGORIES: dict[TransformKind, str] = {
    TransformKind.ChangeHypernym: "Swap",
    TransformKind.ChangeHyponym: "Swap",
    TransformKind.ChangeLocation: "Swap",
    TransformKind.ChangeName: "Swap",
    TransformKind.ChangeNumber: "Swap",
    TransformKind.ChangeSynonym: "Swap",
    TransformKind.RandomSwap: "Swap",
    TransformKind.RandomSwapQwerty: "Swap",
    TransformKind.ContractContractions: "Punctuation",
    TransformKind.ExpandContractions: "Punctuation",
    TransformKind.InsertPunctuationMarks: "Punctuation",
    TransformKind.HomoglyphSwap: "Typos",
    TransformKind.WordDeletion: "Typos",
    TransformKind.RandomCharDel: "Typos",
    TransformKind.RandomCharInsert: "Typos",
    TransformKind.RandomCharSubst: "Typos",
    TransformKind.RandomCharSwap: "Typos",
    TransformKind.RandomInsertion: "Text Insert",
    TransformKind.AddNeutralEmoji: "Emojis",
    TransformKind.RemoveNeutralEmoji: "Emojis",
}

ALL_KINDS: tuple[TransformKind, ...] = tuple(TransformKind)

PUNCTUATION_MARKS = (".", ",", ";", "?", "!", ":")


class TransformNotApplicable(Exception):
    """The transform has no usable site in this text; try another kind."""


class LedgerError(ValueError):
    """An edit record does not match the text it claims to edit."""


@dataclass(frozen=True)
class EditSpan:
    """One replacement: text[start:end] (== before) becomes after."""

    start: int
    end: int
    before: str
    after: str

    def __post_init__(self) -> None:
        if not (0 <= self.start <= self.end):
            raise LedgerError(f"bad span offsets [{self.start},{self.end})")
        if self.end - self.start != len(self.before):
            raise LedgerError("span width disagrees with 'before' length")


@dataclass(frozen=True)
class TransformRecord:
    kind: TransformKind
    seed: int
    edits: tuple[EditSpan, ...]

    def __post_init__(self) -> None:
        prev_end = 0
        for edit in self.edits:
            if edit.start < prev_end:
                raise LedgerError("edits overlap or are out of order")
            prev_end = edit.end


@dataclass(frozen=True)
class ProvenanceChain:
    parent_id: str
    records: tuple[TransformRecord, ...]

    def kinds(self) -> set[TransformKind]:
        return {r.kind for r in self.records}


def apply_edits(text: str, edits: Sequence[EditSpan]) -> str:
    """Apply ordered non-overlapping edits, verifying each 'before' snapshot."""
    parts: list[str] = []
    cursor = 0
    for edit in edits:
        if edit.end > len(text):
            raise LedgerError(f"edit [{edit.start},{edit.end}) beyond text length {len(text)}")
        actual = text[edit.start:edit.end]
        if actual != edit.before:
            raise LedgerError(
                f"corrupted ledger: expected {edit.before!r} at [{edit.start},{edit.end}), found {actual!r}"
            )
        parts.append(text[cursor:edit.start])
        parts.append(edit.after)
        cursor = edit.end
    parts.append(text[cursor:])
    return "".join(parts)


def replay(chain: ProvenanceChain, original_text: str) -> str:
    """Reproduce the generated text by folding the chain over the original."""
    text = original_text
    for record in chain.records:
        text = apply_edits(text, record.edits)
    return text


def _edit_mapping(text: str, edits: Sequence[EditSpan]) -> list[tuple[int, int, int, int]]:
    """(old_start, old_end, new_start, new_end) per edit, in order."""
    mapping = []
    out_len = 0
    cursor = 0
    for edit in edits:
        out_len += edit.start - cursor
        new_start = out_len
        out_len += len(edit.after)
        mapping.append((edit.start, edit.end, new_start, out_len))
        cursor = edit.end
    return mapping


def _map_position(mapping: list[tuple[int, int, int, int]], pos: int) -> int:
    delta = 0
    for old_s, old_e, new_s, new_e in mapping:
        if pos <= old_s:
            break
        if pos >= old_e:
            delta += (new_e - new_s) - (old_e - old_s)
        else:
            return min(new_s + (pos - old_s), new_e)
    return pos + delta


def _merge_spans(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(spans):
        if end <= start:
            continue
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def replay_with_highlights(
    chain: ProvenanceChain, original_text: str
) -> tuple[str, list[tuple[int, int]]]:
    """Replay a chain and return the edited regions mapped into the final text."""
    text = original_text
    spans: list[tuple[int, int]] = []
    for record in chain.records:
        mapping = _edit_mapping(text, record.edits)
        text = apply_edits(text, record.edits)
        spans = [(_map_position(mapping, s), _map_position(mapping, e)) for s, e in spans]
        spans.extend((new_s, new_e) for _, _, new_s, new_e in mapping if new_e > new_s)
        spans = _merge_spans(spans)
    return text, spans


# --- per-kind edit builders ------------------------------------------------

def _pick_lexicon_swap(
    text: str, rng: random.Random, table: dict[str, tuple[str, ...]]
) -> list[EditSpan]:
    eligible = []
    for start, end, token in word_spans(text):
        candidates = table.get(token.lower())
        if candidates and any(c.lower() != token.lower() for c in candidates):
            eligible.append((start, end, token, candidates))
    if not eligible:
        raise TransformNotApplicable("no token has replacement candidates")
    start, end, token, candidates = eligible[rng.randrange(len(eligible))]
    usable = [c for c in candidates if c.lower() != token.lower()]
    replacement = match_case(token, usable[rng.randrange(len(usable))])
    return [EditSpan(start, end, token, replacement)]


def _pick_wordlist_swap(text: str, rng: random.Random, words: tuple[str, ...]) -> list[EditSpan]:
    vocabulary = set(words)
    eligible = [
        (s, e, tok) for s, e, tok in word_spans(text) if tok.lower() in vocabulary
    ]
    if not eligible:
        raise TransformNotApplicable("no token found in the word list")
    start, end, token = eligible[rng.randrange(len(eligible))]
    usable = [w for w in words if w != token.lower()]
    if not usable:
        raise TransformNotApplicable("word list has no alternative")
    replacement = match_case(token, usable[rng.randrange(len(usable))])
    return [EditSpan(start, end, token, replacement)]


def _change_number(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    numeric = [(s, e, tok) for s, e, tok in word_spans(text) if tok.isdigit()]
    if not numeric:
        raise TransformNotApplicable("text has no numbers")
    start, end, token = numeric[rng.randrange(len(numeric))]
    replacement = token
    while replacement == token:
        replacement = "".join(rng.choice(string.digits) for _ in token)
        if len(token) == 1 and replacement == token:  # keep the loop short
            replacement = string.digits[(int(token) + 1 + rng.randrange(9)) % 10]
    return [EditSpan(start, end, token, replacement)]


def _random_swap(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    spans = word_spans(text)
    if len(spans) < 2:
        raise TransformNotApplicable("need at least two words to swap")
    i, j = sorted(rng.sample(range(len(spans)), 2))
    (s1, e1, t1), (s2, e2, t2) = spans[i], spans[j]
    return [EditSpan(s1, e1, t1, t2), EditSpan(s2, e2, t2, t1)]


def _qwerty_swap(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    table = lexicon.qwerty_adjacent
    positions = [i for i, ch in enumerate(text) if ch.lower() in table]
    if not positions:
        raise TransformNotApplicable("no character has a QWERTY neighbor")
    i = positions[rng.randrange(len(positions))]
    ch = text[i]
    neighbor = rng.choice(table[ch.lower()])
    replacement = neighbor.upper() if ch.isupper() else neighbor
    return [EditSpan(i, i + 1, ch, replacement)]


def _phrase_occurrences(text: str, phrase: str) -> list[tuple[int, int]]:
    pattern = re.escape(phrase).replace("'", "['’]")
    return [
        (m.start(), m.end())
        for m in re.finditer(rf"(?<![^\W_]){pattern}(?![^\W_])", text, re.IGNORECASE)
    ]


def _contract(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    sites = []
    for expansion, contraction in sorted(lexicon.expansions.items()):
        for start, end in _phrase_occurrences(text, expansion):
            sites.append((start, end, contraction))
    if not sites:
        raise TransformNotApplicable("no expandable phrase found")
    start, end, contraction = sites[rng.randrange(len(sites))]
    before = text[start:end]
    return [EditSpan(start, end, before, match_case(before, contraction))]


def _expand(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    sites = []
    for contraction, expansion in sorted(lexicon.contractions.items()):
        for start, end in _phrase_occurrences(text, contraction):
            sites.append((start, end, expansion))
    if not sites:
        raise TransformNotApplicable("no contraction found")
    start, end, expansion = sites[rng.randrange(len(sites))]
    before = text[start:end]
    return [EditSpan(start, end, before, match_case(before, expansion))]


def _insert_punctuation(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    spans = word_spans(text)
    if not spans:
        raise TransformNotApplicable("no word boundary to insert at")
    _, end, _ = spans[rng.randrange(len(spans))]
    mark = rng.choice(PUNCTUATION_MARKS)
    return [EditSpan(end, end, "", " " + mark)]


def _homoglyph(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    table = lexicon.homoglyphs
    positions = [i for i, ch in enumerate(text) if ch in table]
    if not positions:
        raise TransformNotApplicable("no character has a homoglyph")
    i = positions[rng.randrange(len(positions))]
    ch = text[i]
    return [EditSpan(i, i + 1, ch, rng.choice(table[ch]))]


def _word_deletion(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    spans = word_spans(text)
    if len(spans) < 2:
        raise TransformNotApplicable("deleting the only word would empty the text")
    idx = rng.randrange(len(spans))
    start, end, _ = spans[idx]
    if idx < len(spans) - 1:
        while end < len(text) and text[end] == " ":
            end += 1
    else:
        while start > 0 and text[start - 1] == " ":
            start -= 1
    return [EditSpan(start, end, text[start:end], "")]


def _char_del(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    positions = [i for i, ch in enumerate(text) if not ch.isspace()]
    if len(positions) < 2:
        raise TransformNotApplicable("too little text to delete from")
    i = positions[rng.randrange(len(positions))]
    return [EditSpan(i, i + 1, text[i], "")]


def _char_insert(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    i = rng.randrange(len(text) + 1)
    return [EditSpan(i, i, "", rng.choice(string.ascii_lowercase))]


def _char_subst(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    positions = [i for i, ch in enumerate(text) if not ch.isspace()]
    if not positions:
        raise TransformNotApplicable("no character to substitute")
    i = positions[rng.randrange(len(positions))]
    ch = text[i]
    replacement = ch
    while replacement == ch:
        replacement = rng.choice(string.ascii_lowercase)
    return [EditSpan(i, i + 1, ch, replacement)]


def _char_swap(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    positions = [
        i
        for i in range(len(text) - 1)
        if not text[i].isspace() and not text[i + 1].isspace() and text[i] != text[i + 1]
    ]
    if not positions:
        raise TransformNotApplicable("no adjacent character pair to swap")
    i = positions[rng.randrange(len(positions))]
    pair = text[i:i + 2]
    return [EditSpan(i, i + 2, pair, pair[1] + pair[0])]


def _random_insertion(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    spans = word_spans(text)
    if not spans:
        raise TransformNotApplicable("no word boundary to insert at")
    vocabulary = sorted({tok.lower() for _, _, tok in spans})
    word = vocabulary[rng.randrange(len(vocabulary))]
    _, end, _ = spans[rng.randrange(len(spans))]
    return [EditSpan(end, end, "", " " + word)]


def _add_emoji(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    emoji = rng.choice(lexicon.neutral_emoji)
    return [EditSpan(len(text), len(text), "", " " + emoji)]


def _remove_emoji(text: str, rng: random.Random, lexicon: Lexicon) -> list[EditSpan]:
    sites: list[tuple[int, int]] = []
    for emoji in lexicon.neutral_emoji:
        start = text.find(emoji)
        while start != -1:
            sites.append((start, start + len(emoji)))
            start = text.find(emoji, start + 1)
    if not sites:
        raise TransformNotApplicable("text has no neutral emoji")
    start, end = sorted(sites)[rng.randrange(len(sites))]
    if start > 0 and text[start - 1] == " ":
        start -= 1
    if not text[:start].strip() and not text[end:].strip():
        raise TransformNotApplicable("removing the emoji would empty the text")
    return [EditSpan(start, end, text[start:end], "")]


_BUILDERS: dict[TransformKind, Callable[[str, random.Random, Lexicon], list[EditSpan]]] = {
    TransformKind.ChangeHypernym: lambda t, r, lx: _pick_lexicon_swap(t, r, lx.hypernyms),
    TransformKind.ChangeHyponym: lambda t, r, lx: _pick_lexicon_swap(t, r, lx.hyponyms),
    TransformKind.ChangeSynonym: lambda t, r, lx: _pick_lexicon_swap(t, r, lx.synonyms),
    TransformKind.ChangeLocation: lambda t, r, lx: _pick_wordlist_swap(t, r, lx.locations),
    TransformKind.ChangeName: lambda t, r, lx: _pick_wordlist_swap(t, r, lx.names),
    TransformKind.ChangeNumber: _change_number,
    TransformKind.RandomSwap: _random_swap,
    TransformKind.RandomSwapQwerty: _qwerty_swap,
    TransformKind.ContractContractions: _contract,
    TransformKind.ExpandContractions: _expand,
    TransformKind.InsertPunctuationMarks: _insert_punctuation,
    TransformKind.HomoglyphSwap: _homoglyph,
    TransformKind.WordDeletion: _word_deletion,
    TransformKind.RandomCharDel: _char_del,
    TransformKind.RandomCharInsert: _char_insert,
    TransformKind.RandomCharSubst: _char_subst,
    TransformKind.RandomCharSwap: _char_swap,
    TransformKind.RandomInsertion: _random_insertion,
    TransformKind.AddNeutralEmoji: _add_emoji,
    TransformKind.RemoveNeutralEmoji: _remove_emoji,
}


def apply_transform(
    kind: TransformKind, text: str, lexicon: Lexicon, seed: int
) -> tuple[str, TransformRecord]:
    """Apply one transform; the returned record replays to the returned text.

    Labels are never touched here: generated instances copy their parent's
    label, and judging whether it still fits is the inspector's job.
    """
    if not text:
        raise TransformNotApplicable("empty text")
    rng = random.Random(seed)
    edits = _BUILDERS[kind](text, rng, lexicon)
    edits.sort(key=lambda e: (e.start, e.end))
    record = TransformRecord(kind=kind, seed=seed, edits=tuple(edits))
    return apply_edits(text, record.edits), record


# --- dataset-level generation ----------------------------------------------

@dataclass(frozen=True)
class GenerationPolicy:
    kinds: tuple[TransformKind, ...] = ALL_KINDS
    per_original: int = 1
    chain_length: int = 1
    max_resamples: int = 10


@dataclass
class GenerationResult:
    pairs: list[tuple[LabeledInstance, ProvenanceChain]]
    skipped: list[tuple[str, str]]  # (original id, reason)

    def kind_counts(self) -> dict[TransformKind, int]:
        counts = {kind: 0 for kind in ALL_KINDS}
        for _, chain in self.pairs:
            for record in chain.records:
                counts[record.kind] += 1
        return counts


def derive_seed(global_seed: int, instance_id: str, ordinal: int) -> int:
    digest = hashlib.sha256(f"{global_seed}\x1f{instance_id}\x1f{ordinal}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def generate(dataset: Dataset, policy: GenerationPolicy, seed: int, lexicon: Lexicon) -> GenerationResult:
    """Generate transformed instances for every original, deterministically.

    Per-original randomness is derived from (seed, instance id), so the output
    is stable regardless of dataset ordering or parallel scheduling. When a
    chosen transform is not applicable, a different kind is resampled up to
    policy.max_resamples times before the original is skipped with a report
    entry.
    """
    pairs: list[tuple[LabeledInstance, ProvenanceChain]] = []
    skipped: list[tuple[str, str]] = []
    for orig in dataset.originals():
        for ordinal in range(1, policy.per_original + 1):
            rng = random.Random(derive_seed(seed, orig.id, ordinal))
            text = orig.text
            records: list[TransformRecord] = []
            for _ in range(policy.chain_length):
                remaining = list(policy.kinds)
                applied = False
                for _ in range(policy.max_resamples):
                    if not remaining:
                        break
                    kind = remaining.pop(rng.randrange(len(remaining)))
                    app_seed = rng.getrandbits(63)
                    try:
                        text, record = apply_transform(kind, text, lexicon, app_seed)
                    except TransformNotApplicable:
                        continue
                    records.append(record)
                    applied = True
                    break
                if not applied:
                    break  # keep whatever the chain produced so far
            if not records:
                skipped.append((orig.id, "no transform applicable"))
                continue
            chain = ProvenanceChain(parent_id=orig.id, records=tuple(records))
            inst = LabeledInstance(
                id=f"{orig.id}-g{ordinal}",
                text=text,
                label=orig.label,
                origin=GENERATED,
                parent_id=orig.id,
            )
            pairs.append((inst, chain))
    return GenerationResult(pairs=pairs, skipped=skipped)


# --- ledger (de)serialization ----------------------------------------------

def record_to_dict(record: TransformRecord) -> dict:
    return {
        "kind": record.kind.value,
        "seed": record.seed,
        "edits": [
            {"start": e.start, "end": e.end, "before": e.before, "after": e.after}
            for e in record.edits
        ],
    }


def record_from_dict(data: dict) -> TransformRecord:
    try:
        kind = TransformKind(data["kind"])
        edits = tuple(
            EditSpan(e["start"], e["end"], e["before"], e["after"]) for e in data["edits"]
        )
        return TransformRecord(kind=kind, seed=int(data["seed"]), edits=edits)
    except (KeyError, ValueError, TypeError) as exc:
        raise LedgerError(f"malformed transform record: {exc}") from None


def chain_to_dict(instance_id: str, chain: ProvenanceChain) -> dict:
    return {
        "id": instance_id,
        "parent_id": chain.parent_id,
        "records": [record_to_dict(r) for r in chain.records],
    }


def chain_from_dict(data: dict) -> tuple[str, ProvenanceChain]:
    try:
        chain = ProvenanceChain(
            parent_id=data["parent_id"],
            records=tuple(record_from_dict(r) for r in data["records"]),
        )
        return data["id"], chain
    except KeyError as exc:
        raise LedgerError(f"ledger row missing field {exc}") from None


def write_ledger(path, pairs: Iterable[tuple[LabeledInstance, ProvenanceChain]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst, chain in pairs:
            fh.write(json.dumps(chain_to_dict(inst.id, chain), ensure_ascii=False) + "\n")


def read_ledger(path) -> dict[str, ProvenanceChain]:
    chains: dict[str, ProvenanceChain] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                instance_id, chain = chain_from_dict(json.loads(line))
            except json.JSONDecodeError as exc:
                raise LedgerError(f"ledger line {lineno}: invalid JSON ({exc})") from None
            chains[instance_id] = chain
    return chains
