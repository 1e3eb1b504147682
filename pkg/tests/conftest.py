import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from auginspect.corpus import Dataset, GENERATED, LabeledInstance, load_dataset
from auginspect.lexicon import load_lexicon
from auginspect.session import Session
from auginspect.transforms import TransformKind, apply_transform, ProvenanceChain

settings.register_profile(
    "ci", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("ci")

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="session")
def corpus100():
    return load_dataset(DATA_DIR / "corpus100.jsonl", name="corpus100")


@pytest.fixture
def tiny_dataset():
    return Dataset(
        name="tiny",
        label_set=("negative", "positive"),
        instances=(
            LabeledInstance("000000", "the event is beautiful to see", "positive"),
            LabeledInstance("000001", "ends up being surprisingly dull", "negative"),
            LabeledInstance("000002", "I don't like this at all.", "negative"),
        ),
    )


def make_planted_flip_dataset() -> tuple[Dataset, list[str]]:
    """30 instances, two well-separated vocabularies, 5 labels flipped."""
    fruit = [
        "the apple pie tastes sweet", "fresh banana bread smells great",
        "ripe cherry jam on toast", "juicy orange slices for breakfast",
        "sweet grape juice in a glass", "baked apple crumble with cream",
        "banana smoothie with honey", "cherry tart from the oven",
        "orange marmalade on bread", "grape jelly sandwich for lunch",
        "apple cider in autumn", "banana pancakes with syrup",
        "cherry pie cooling on the sill", "orange zest in the cake",
        "grape harvest in the vineyard",
    ]
    machine = [
        "the engine roars with power", "gearbox oil needs changing",
        "piston rings wear down fast", "turbo spool under heavy load",
        "crankshaft balance keeps it smooth", "engine mounts absorb vibration",
        "gearbox ratios suit the track", "piston heads run very hot",
        "turbo lag on old models", "crankshaft bearings need oil",
        "engine tuning takes patience", "gearbox whine at high speed",
        "piston failure ruins the block", "turbo boost gauge reads high",
        "crankshaft pulley drives the belt",
    ]
    instances = []
    flipped = []
    for i, text in enumerate(fruit):
        label = "fruit"
        if i < 3:
            label = "machine"
            flipped.append(f"f{i:02d}")
        instances.append(LabeledInstance(f"f{i:02d}", text, label))
    for i, text in enumerate(machine):
        label = "machine"
        if i < 2:
            label = "fruit"
            flipped.append(f"m{i:02d}")
        instances.append(LabeledInstance(f"m{i:02d}", text, label))
    return Dataset("planted", ("fruit", "machine"), tuple(instances)), flipped


@pytest.fixture
def planted_flip_dataset():
    return make_planted_flip_dataset()


_SCALE_SUBJECTS = {
    "positive": ["the garden", "this song", "her painting", "the bakery", "our trip",
                 "the festival", "that novel", "the sunrise", "his speech", "the recipe"],
    "negative": ["the traffic", "this bill", "the delay", "that argument", "the leak",
                 "our printer", "the outage", "this queue", "the paperwork", "the noise"],
}
_SCALE_PREDICATES = {
    "positive": ["made everyone smile", "was a pure delight", "felt warm and alive",
                 "deserves real praise", "turned out wonderful", "kept us cheering",
                 "works like a charm", "brightened the whole day"],
    "negative": ["ruined the afternoon", "was a complete mess", "kept getting worse",
                 "wasted three hours", "left everyone annoyed", "failed again today",
                 "drags on forever", "makes no sense at all"],
}


def make_scale_dataset(n: int = 763, seed: int = 9) -> Dataset:
    """A deterministic two-class dataset of the hate-speech corpus size."""
    rng = random.Random(seed)
    instances = []
    for i in range(n):
        label = "positive" if i % 2 == 0 else "negative"
        text = f"{rng.choice(_SCALE_SUBJECTS[label])} {rng.choice(_SCALE_PREDICATES[label])}"
        if rng.random() < 0.3:
            text += f" {rng.randrange(2, 99)} times"
        instances.append(LabeledInstance(f"{i:06d}", text, label))
    return Dataset("scale", ("negative", "positive"), tuple(instances))


def build_figure_session(clock=None):
    """Session with a 37-member RandomCharSubst group and a disjoint 24-member
    amr:location feature group, for the inspection-statistics scenarios."""
    lexicon = load_lexicon()
    originals = []
    pairs = []
    for i in range(37):
        orig = LabeledInstance(f"s{i:02d}", f"the number {i} movie was good fun", "positive")
        originals.append(orig)
        text, record = apply_transform(TransformKind.RandomCharSubst, orig.text, lexicon, seed=100 + i)
        chain = ProvenanceChain(orig.id, (record,))
        pairs.append((LabeledInstance(f"{orig.id}-g1", text, orig.label, GENERATED, orig.id), chain))
    features = {}
    for i in range(24):
        orig = LabeledInstance(f"l{i:02d}", f"a quiet trip to the old harbor {i}", "positive")
        originals.append(orig)
        features[orig.id] = frozenset({"amr:location"})
        text, record = apply_transform(TransformKind.WordDeletion, orig.text, lexicon, seed=200 + i)
        chain = ProvenanceChain(orig.id, (record,))
        pairs.append((LabeledInstance(f"{orig.id}-g1", text, orig.label, GENERATED, orig.id), chain))
    dataset = Dataset(
        "figures",
        ("negative", "positive"),
        tuple(originals) + tuple(p[0] for p in pairs),
    )
    chains = {inst.id: chain for inst, chain in pairs}
    kwargs = {"clock": clock} if clock else {}
    return Session(dataset, chains, features=features, **kwargs)


@pytest.fixture
def figure_session():
    return build_figure_session()


def brute_force_group_counts(session: Session, key) -> tuple[int, int]:
    """Independent recomputation of (inspected, high_quality) from raw marks."""
    members = session.members_of(key)
    inspected = 0
    high = 0
    for member in members:
        mark = session.marks.get(member)
        if mark is not None and mark.state.value != "unmarked":
            inspected += 1
            if mark.state.value == "high_quality":
                high += 1
    return inspected, high
