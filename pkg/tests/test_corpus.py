import json

import pytest

from auginspect.corpus import (
    CorpusError,
    Dataset,
    GENERATED,
    LabeledInstance,
    load_dataset,
    merge_generated,
    save_dataset,
)


def test_load_jsonl(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text('{"text": "the event is beautiful to see", "label": "positive"}\n')
    ds = load_dataset(path, label_set=("negative", "positive"))
    assert len(ds) == 1
    assert ds.label_set == ("negative", "positive")

    path.write_text(
        '{"text": "the event is beautiful to see", "label": "positive"}\n'
        '{"text": "ends up being surprisingly dull", "label": "negative"}\n'
    )
    ds = load_dataset(path)
    assert ds.label_set == ("negative", "positive")  # inferred, sorted
    assert ds.instances[0].id == "000000"
    assert ds.instances[0].text == "the event is beautiful to see"


def test_load_single_class_rejected(tmp_path):
    path = tmp_path / "one.jsonl"
    path.write_text('{"text": "a", "label": "x"}\n{"text": "b", "label": "x"}\n')
    with pytest.raises(CorpusError, match="label set"):
        load_dataset(path)


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    with pytest.raises(CorpusError, match="empty dataset"):
        load_dataset(path)


def test_load_malformed_row_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"text": "ok", "label": "a"}\n{oops}\n')
    with pytest.raises(CorpusError, match="bad.jsonl:2"):
        load_dataset(path)


def test_load_missing_field_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"text": "ok", "label": "a"}\n{"text": "no label"}\n')
    with pytest.raises(CorpusError, match=":2"):
        load_dataset(path)


def test_load_csv_and_tsv(tmp_path):
    csv_path = tmp_path / "data.csv"
    csv_path.write_text("text,label\nhello there,a\nbye now,b\n")
    ds = load_dataset(csv_path)
    assert [i.text for i in ds.instances] == ["hello there", "bye now"]

    tsv_path = tmp_path / "data.tsv"
    tsv_path.write_text("text\tlabel\nhello there\ta\nbye, now\tb\n")
    ds = load_dataset(tsv_path)
    assert ds.instances[1].text == "bye, now"


def test_load_csv_missing_column(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("text,sentiment\nhello,a\n")
    with pytest.raises(CorpusError, match="label"):
        load_dataset(path)


def test_unknown_format(tmp_path):
    path = tmp_path / "data.xyz"
    path.write_text("x")
    with pytest.raises(CorpusError, match="format"):
        load_dataset(path)
    with pytest.raises(CorpusError, match="unknown format"):
        load_dataset(path, format="parquet")


def test_scale_row_count(tmp_path):
    rows = [
        {"text": f"tweet number {i} about something", "label": "hate" if i % 3 else "none"}
        for i in range(763)
    ]
    path = tmp_path / "hate.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    ds = load_dataset(path)
    assert len(ds) == 763


def test_ids_preserved_when_present(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(
        '{"id": "a7", "text": "one", "label": "x"}\n{"text": "two", "label": "y"}\n'
    )
    ds = load_dataset(path)
    assert [i.id for i in ds.instances] == ["a7", "000001"]


def test_round_trip(tmp_path, corpus100):
    out = tmp_path / "copy.jsonl"
    save_dataset(corpus100, out)
    again = load_dataset(out, name=corpus100.name)
    assert again == corpus100


def test_round_trip_with_generated(tmp_path, tiny_dataset):
    gen = LabeledInstance("g1", "made up text", "positive", GENERATED, "000000")
    merged = merge_generated(tiny_dataset, [gen])
    out = tmp_path / "merged.jsonl"
    save_dataset(merged, out)
    again = load_dataset(out, name=merged.name)
    assert again == merged


def test_merge_generated(tiny_dataset):
    gen = [
        LabeledInstance(f"g{i}", f"text {i}", "positive", GENERATED, "000000")
        for i in range(3)
    ]
    merged = merge_generated(tiny_dataset, gen)
    assert len(merged) == 6
    assert merged.instances[:3] == tiny_dataset.instances  # originals untouched

    # associative over disjoint batches
    step = merge_generated(merge_generated(tiny_dataset, gen[:1]), gen[1:])
    assert step == merged


def test_merge_empty_is_identity(tiny_dataset):
    assert merge_generated(tiny_dataset, []) == tiny_dataset


def test_merge_dangling_parent(tiny_dataset):
    bad = LabeledInstance("g1", "text", "positive", GENERATED, "missing")
    with pytest.raises(CorpusError, match="dangling parent_id"):
        merge_generated(tiny_dataset, [bad])


def test_merge_id_collision(tiny_dataset):
    bad = LabeledInstance("000001", "text", "positive", GENERATED, "000000")
    with pytest.raises(CorpusError, match="collision"):
        merge_generated(tiny_dataset, [bad])


def test_instance_invariants():
    with pytest.raises(CorpusError, match="empty"):
        LabeledInstance("i", "   ", "x")
    with pytest.raises(CorpusError, match="parent_id"):
        LabeledInstance("i", "text", "x", GENERATED, None)
    with pytest.raises(CorpusError, match="parent_id"):
        LabeledInstance("i", "text", "x", "original", "p")


def test_dataset_invariants():
    a = LabeledInstance("a", "text", "x")
    with pytest.raises(CorpusError, match="duplicate"):
        Dataset("d", ("x", "y"), (a, a))
    with pytest.raises(CorpusError, match="not in label set"):
        Dataset("d", ("y", "z"), (a,))
    with pytest.raises(CorpusError, match="duplicate labels"):
        Dataset("d", ("x", "x"), (a,))
