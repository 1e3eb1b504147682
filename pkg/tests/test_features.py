from auginspect.amr import parse_penman
from auginspect.corpus import Dataset, GENERATED, LabeledInstance
from auginspect.features import (
    REGISTRY,
    compute_feature_sets,
    display_for,
    extract_features,
    fallback_features,
    feature_registry,
)


def test_registry_keys_unique_and_displayed():
    keys = [f.key for f in REGISTRY]
    assert len(keys) == len(set(keys))
    assert all(f.display for f in REGISTRY)
    assert feature_registry()["amr:location"] == "Has a description of a location"


def test_negation_rule():
    graph = parse_penman("(s / see-01 :polarity - :ARG0 (i / i))")
    assert extract_features(graph) == {"amr:negation"}


def test_positive_polarity_is_not_negation():
    graph = parse_penman("(s / see-01 :polarity + :ARG0 (i / i))")
    assert extract_features(graph) == set()


def test_location_rule():
    graph = parse_penman("(e / event :location (c / city))")
    assert extract_features(graph) == {"amr:location"}
    assert display_for("amr:location") == "Has a description of a location"


def test_no_matching_roles():
    graph = parse_penman("(r / run-02 :ARG0 (d / dog))")
    assert extract_features(graph) == set()


def test_extract_is_pure():
    graph = parse_penman("(s / see-01 :polarity - :time (n / now))")
    assert extract_features(graph) == extract_features(graph)


def test_fallback_negation():
    assert fallback_features("I do not like stand-up.") == {"rule:negation"}
    assert "rule:negation" in fallback_features("I don't like it either")
    assert "rule:negation" in fallback_features("never again")


def test_fallback_number():
    assert fallback_features("I saw 3 movies") == {"rule:contains_number"}


def test_fallback_empty():
    assert fallback_features("") == set()


def test_fallback_question_caps_emoji_length():
    assert "rule:question" in fallback_features("is this any good?")
    assert "rule:all_caps_word" in fallback_features("this is AWFUL stuff")
    assert "rule:contains_emoji" in fallback_features("fine movie 🌀")
    long_text = " ".join(["word"] * 26)
    assert "rule:long_sentence" in fallback_features(long_text)
    assert "rule:long_sentence" not in fallback_features(" ".join(["word"] * 25))


def test_fallback_keys_in_registry():
    texts = ["I don't KNOW why? 🌀 42", " ".join(["w"] * 30)]
    registry = set(feature_registry())
    for text in texts:
        assert fallback_features(text) <= registry


def test_compute_feature_sets_prefers_graphs():
    originals = (
        LabeledInstance("a", "no graph here, not one", "x"),
        LabeledInstance("b", "has a graph", "y"),
    )
    generated = (LabeledInstance("b-g1", "has a grph", "y", GENERATED, "b"),)
    ds = Dataset("d", ("x", "y"), originals + generated)
    graphs = {"b": parse_penman("(h / have-03 :location (c / city))")}
    sets = compute_feature_sets(ds, graphs)
    assert set(sets) == {"a", "b"}  # originals only
    assert sets["a"] == {"rule:negation"}
    assert sets["b"] == {"amr:location"}
