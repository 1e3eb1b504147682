"""LLM-based assistive labeling behind a pluggable provider.

A provider turns a prompt into raw text; the engine builds the prompt, parses
the label off the first line, recomputes the consistency flag (never trusted
from the provider), and caches verdicts on disk keyed by content so repeated
runs are free and replayable offline. The stub provider answers from a rules
file (`substring => label`, first match wins, `*` matches anything), which
keeps the whole inspection workflow runnable with no network at all.

Prompt template (fixed, temperature 0 for the remote provider):

    You are labeling texts for a classification dataset.
    Choose exactly one label from this list: {labels}.
    Reply with the label on the first line, then one sentence explaining
    your choice.

    Text: {text}
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .corpus import LabeledInstance

PROMPT_TEMPLATE = (
    "You are labeling texts for a classification dataset.\n"
    "Choose exactly one label from this list: {labels}.\n"
    "Reply with the label on the first line, then one sentence explaining your choice.\n"
    "\n"
    "Text: {text}"
)
PROMPT_VERSION = "v1"


class GuidanceError(Exception):
    """Guidance could not be produced; inspection continues without it."""


class GuidanceUnavailable(GuidanceError):
    """Provider unreachable after retries."""


class UnparseableResponse(GuidanceError):
    """Provider responded with something that maps to no label."""


@dataclass(frozen=True)
class LlmVerdict:
    instance_id: str
    predicted_label: str
    explanation: str
    consistent: bool
    provider: str


@dataclass(frozen=True)
class GuidanceResult:
    instance_id: str
    verdict: LlmVerdict | None = None
    error: str | None = None


class LlmProvider(Protocol):
    name: str

    def complete(self, prompt: str) -> str: ...


class StubProvider:
    """Deterministic offline provider driven by substring rules."""

    def __init__(self, rules: Sequence[tuple[str, str]]):
        self.name = "stub"
        self.rules = list(rules)
        self.calls = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "StubProvider":
        rules = []
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=>" not in line:
                raise GuidanceError(f"{path}:{lineno}: expected 'substring => label'")
            pattern, _, label = line.partition("=>")
            rules.append((pattern.strip(), label.strip()))
        if not rules:
            raise GuidanceError(f"{path}: no rules")
        return cls(rules)

    def complete(self, prompt: str) -> str:
        self.calls += 1
        text = prompt.rsplit("Text: ", 1)[-1]
        for pattern, label in self.rules:
            if pattern == "*" or pattern.lower() in text.lower():
                why = "No rule matched." if pattern == "*" else f"The text contains {pattern!r}."
                return f"{label}\n{why}"
        raise UnparseableResponse("no stub rule matched and no default rule is set")


class RemoteProvider:
    """Chat-completion-style HTTP provider. The API key comes from the
    environment only; it is never written to any session file."""

    def __init__(
        self,
        url: str,
        model: str = "gpt-3.5-turbo",
        api_key: str | None = None,
        timeout: float = 30.0,
        retries: int = 3,
    ):
        self.name = f"remote:{model}"
        self.url = url
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.retries = retries

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                response = httpx.post(self.url, json=payload, headers=headers, timeout=self.timeout)
                if response.status_code >= 500:
                    raise GuidanceUnavailable(f"server error {response.status_code}")
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, GuidanceUnavailable, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(0.5 * 2**attempt)
        raise GuidanceUnavailable(f"provider unreachable: {last_error}")


class GuidanceCache:
    """Content-addressed on-disk verdict store; writes are serialized."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text("utf-8"))
        except (json.JSONDecodeError, OSError):
            return None

    def put(self, key: str, value: dict) -> None:
        with self._lock:
            path = self._path(key)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(value, ensure_ascii=False), "utf-8")


def cache_key(provider_name: str, text: str, label_set: Sequence[str]) -> str:
    blob = "\x1f".join([provider_name, PROMPT_VERSION, text, *label_set])
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def normalize_label(raw: str, label_set: Sequence[str]) -> str | None:
    """Map the first response line onto a label, case-insensitively."""
    first = raw.strip().splitlines()[0] if raw.strip() else ""
    cleaned = first.strip().strip(".,:;!\"'").strip()
    for label in label_set:
        if cleaned.lower() == label.lower():
            return label
    return None


def predict(
    instance: LabeledInstance,
    label_set: Sequence[str],
    provider: LlmProvider,
    cache: GuidanceCache | None = None,
) -> LlmVerdict:
    """One verdict; consistency is recomputed from the instance's stored label."""
    key = cache_key(provider.name, instance.text, label_set)
    cached = cache.get(key) if cache else None
    if cached is not None:
        return LlmVerdict(
            instance_id=instance.id,
            predicted_label=cached["predicted_label"],
            explanation=cached["explanation"],
            consistent=cached["predicted_label"] == instance.label,
            provider=cached["provider"],
        )

    prompt = PROMPT_TEMPLATE.format(labels=", ".join(label_set), text=instance.text)
    raw = provider.complete(prompt)
    label = normalize_label(raw, label_set)
    if label is None:
        raise UnparseableResponse(f"response does not name a label: {raw!r}")
    lines = raw.strip().splitlines()
    explanation = " ".join(line.strip() for line in lines[1:]).strip()
    if cache:
        cache.put(key, {"predicted_label": label, "explanation": explanation, "provider": provider.name})
    return LlmVerdict(
        instance_id=instance.id,
        predicted_label=label,
        explanation=explanation,
        consistent=label == instance.label,
        provider=provider.name,
    )


def predict_batch(
    instances: Sequence[LabeledInstance],
    label_set: Sequence[str],
    provider: LlmProvider,
    cache: GuidanceCache | None = None,
    concurrency: int = 4,
) -> list[GuidanceResult]:
    """Bounded-concurrency batch; partial failures never fail the batch."""
    if not instances:
        return []

    def one(instance: LabeledInstance) -> GuidanceResult:
        try:
            return GuidanceResult(instance.id, verdict=predict(instance, label_set, provider, cache))
        except GuidanceError as exc:
            return GuidanceResult(instance.id, error=f"guidance unavailable: {exc}")

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        return list(pool.map(one, instances))
