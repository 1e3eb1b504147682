from pathlib import Path

import pytest

from auginspect.corpus import LabeledInstance
from auginspect.guidance import (
    GuidanceCache,
    GuidanceUnavailable,
    PROMPT_TEMPLATE,
    RemoteProvider,
    StubProvider,
    UnparseableResponse,
    cache_key,
    normalize_label,
    predict,
    predict_batch,
)

DATA_DIR = Path(__file__).parent / "data"
LABELS = ("negative", "positive")


@pytest.fixture
def stub():
    return StubProvider.from_file(DATA_DIR / "stub_rules.txt")


def test_stub_rule_match(stub):
    inst = LabeledInstance("i1", "ends up being surprisingly dull", "negative")
    verdict = predict(inst, LABELS, stub)
    assert verdict.predicted_label == "negative"
    assert verdict.consistent is True
    assert "dull" in verdict.explanation


def test_inconsistent_prediction(stub):
    inst = LabeledInstance("i2", "ends up being surprisingly dull", "positive")
    verdict = predict(inst, LABELS, stub)
    assert verdict.predicted_label == "negative"
    assert verdict.consistent is False


def test_default_rule(stub):
    inst = LabeledInstance("i3", "completely unmatched words here", "positive")
    verdict = predict(inst, LABELS, stub)
    assert verdict.predicted_label == "positive"


def test_label_normalization():
    assert normalize_label("Positive.", LABELS) == "positive"
    assert normalize_label("  NEGATIVE\nbecause reasons", LABELS) == "negative"
    assert normalize_label('"positive"', LABELS) == "positive"
    assert normalize_label("mixed feelings", LABELS) is None
    assert normalize_label("", LABELS) is None


def test_unparseable_response_rejected():
    class Weird:
        name = "weird"

        def complete(self, prompt):
            return "seven out of ten"

    inst = LabeledInstance("i", "text", "positive")
    with pytest.raises(UnparseableResponse):
        predict(inst, LABELS, Weird())


def test_cache_avoids_repeat_calls(tmp_path, stub):
    cache = GuidanceCache(tmp_path / "cache")
    instances = [
        LabeledInstance(f"i{k}", f"a dull text number {k}", "negative") for k in range(10)
    ]
    first = predict_batch(instances, LABELS, stub, cache)
    assert stub.calls == 10
    assert all(r.verdict is not None for r in first)

    extra = instances + [
        LabeledInstance(f"n{k}", f"a great text number {k}", "positive") for k in range(5)
    ]
    second = predict_batch(extra, LABELS, stub, cache)
    assert stub.calls == 15  # 10 served from cache, exactly 5 new calls
    assert [r.instance_id for r in second] == [i.id for i in extra]


def test_cache_recomputes_consistency(tmp_path, stub):
    cache = GuidanceCache(tmp_path / "cache")
    inst_neg = LabeledInstance("a", "a dull evening", "negative")
    inst_pos = LabeledInstance("b", "a dull evening", "positive")
    first = predict(inst_neg, LABELS, stub, cache)
    second = predict(inst_pos, LABELS, stub, cache)  # cache hit on same text
    assert stub.calls == 1
    assert first.consistent is True
    assert second.consistent is False


def test_provider_down_degrades_per_instance(tmp_path):
    class Down:
        name = "down"

        def complete(self, prompt):
            raise GuidanceUnavailable("connection refused")

    instances = [LabeledInstance(f"i{k}", f"text {k} here", "positive") for k in range(15)]
    results = predict_batch(instances, LABELS, Down(), GuidanceCache(tmp_path))
    assert len(results) == 15
    assert all(r.verdict is None for r in results)
    assert all("guidance unavailable" in r.error for r in results)


def test_empty_batch(stub):
    assert predict_batch([], LABELS, stub) == []


def test_prompt_contains_labels_and_text(stub):
    prompt = PROMPT_TEMPLATE.format(labels=", ".join(LABELS), text="sample text")
    assert "negative, positive" in prompt
    assert prompt.endswith("Text: sample text")


def test_cache_key_sensitivity():
    base = cache_key("stub", "text", LABELS)
    assert cache_key("stub", "text", LABELS) == base
    assert cache_key("other", "text", LABELS) != base
    assert cache_key("stub", "texts", LABELS) != base
    assert cache_key("stub", "text", ("a", "b")) != base


def test_remote_provider_retries_then_fails(monkeypatch):
    import httpx

    attempts = []

    def fake_post(url, **kwargs):
        attempts.append(url)
        raise httpx.ConnectError("boom")

    monkeypatch.setattr(httpx, "post", fake_post)
    monkeypatch.setattr("time.sleep", lambda s: None)
    provider = RemoteProvider("http://localhost:1/v1/chat", retries=3)
    with pytest.raises(GuidanceUnavailable):
        provider.complete("prompt")
    assert len(attempts) == 3


def test_remote_provider_parses_chat_response(monkeypatch):
    import httpx

    def fake_post(url, **kwargs):
        assert kwargs["json"]["temperature"] == 0
        return httpx.Response(
            200,
            json={"choices": [{"message": {"content": "positive\nLooks nice."}}]},
            request=httpx.Request("POST", url),
        )

    monkeypatch.setattr(httpx, "post", fake_post)
    provider = RemoteProvider("http://example/v1/chat")
    inst = LabeledInstance("i", "lovely stuff", "positive")
    verdict = predict(inst, LABELS, provider)
    assert verdict.predicted_label == "positive"
    assert verdict.explanation == "Looks nice."
    assert verdict.consistent is True
