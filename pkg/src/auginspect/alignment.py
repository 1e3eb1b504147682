"""Label alignment via confident learning over out-of-sample probabilities.

The original instances are split into stratified folds; a bag-of-words
logistic classifier trained on the remaining folds predicts each held-out
original. Generated instances are never training data: each one is scored by
the fold model under which its parent was held out. An instance's alignment
score is the out-of-sample probability of its GIVEN label (self-confidence).

The confident joint counts instance (given label i) into C[i][j] when its
probability for class j reaches that class's threshold t_j (the mean
self-confidence of class j), taking the argmax among qualifying classes.
Instances counted off the diagonal are flagged as likely label issues.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.linear_model import LogisticRegression

from .corpus import Dataset, ORIGINAL
from .ngram import lm_tokens


class AlignmentError(ValueError):
    pass


@dataclass
class ConfidentJoint:
    labels: tuple[str, ...]
    matrix: list[list[int]]  # matrix[given][suggested]
    thresholds: list[float]
    issues: frozenset[str]


def _stratified_folds(dataset: Dataset, folds: int, seed: int) -> dict[str, int]:
    """Deterministic fold index per original id, stratified by label."""
    by_label: dict[str, list[str]] = {label: [] for label in dataset.label_set}
    for inst in dataset.originals():
        by_label[inst.label].append(inst.id)
    assignment: dict[str, int] = {}
    for label in dataset.label_set:
        ids = sorted(by_label[label])
        if len(ids) < folds:
            raise AlignmentError(
                f"class {label!r} has {len(ids)} originals; needs >= {folds} for {folds}-fold scoring"
            )
        random.Random((seed, label).__repr__()).shuffle(ids)
        for position, inst_id in enumerate(ids):
            assignment[inst_id] = position % folds
    return assignment


def out_of_sample_probabilities(
    dataset: Dataset, folds: int = 5, seed: int = 0
) -> dict[str, np.ndarray]:
    """Out-of-sample class probabilities (label_set order) for every instance."""
    if folds < 2:
        raise AlignmentError("folds must be >= 2")
    originals = dataset.originals()
    present = {i.label for i in originals}
    if len(present) < 2:
        raise AlignmentError("degenerate dataset: fewer than 2 classes present")

    fold_of = _stratified_folds(dataset, folds, seed)
    label_index = {label: i for i, label in enumerate(dataset.label_set)}

    heirs: dict[str, list] = {}  # fold -> instances scored by that fold's model
    for inst in dataset.instances:
        fold = fold_of[inst.id if inst.origin == ORIGINAL else inst.parent_id]
        heirs.setdefault(fold, []).append(inst)

    probs: dict[str, np.ndarray] = {}
    n_classes = len(dataset.label_set)
    for fold in range(folds):
        train = [i for i in originals if fold_of[i.id] != fold]
        test = heirs.get(fold, [])
        if not test:
            continue
        vectorizer = CountVectorizer(analyzer=lambda text: lm_tokens(text))
        x_train = vectorizer.fit_transform([i.text for i in train])
        y_train = np.array([label_index[i.label] for i in train])
        model = LogisticRegression(C=1.0, max_iter=1000)
        model.fit(x_train, y_train)
        x_test = vectorizer.transform([i.text for i in test])
        fold_probs = model.predict_proba(x_test)
        for row, inst in enumerate(test):
            full = np.zeros(n_classes)
            for column, cls in enumerate(model.classes_):
                full[cls] = fold_probs[row, column]
            probs[inst.id] = full
    return probs


def confident_joint(
    probs: dict[str, np.ndarray],
    given_labels: dict[str, str],
    label_set: tuple[str, ...],
) -> ConfidentJoint:
    """Thresholds and counting from probabilities, per the rule in the module docstring."""
    label_index = {label: i for i, label in enumerate(label_set)}
    n = len(label_set)

    sums = np.zeros(n)
    counts = np.zeros(n)
    for inst_id, p in probs.items():
        j = label_index[given_labels[inst_id]]
        sums[j] += p[j]
        counts[j] += 1
    thresholds = [float(sums[j] / counts[j]) if counts[j] else float("inf") for j in range(n)]

    matrix = [[0] * n for _ in range(n)]
    issues: set[str] = set()
    for inst_id in sorted(probs):
        p = probs[inst_id]
        given = label_index[given_labels[inst_id]]
        qualifying = [j for j in range(n) if p[j] >= thresholds[j]]
        if not qualifying:
            continue
        suggested = max(qualifying, key=lambda j: (p[j], -j))
        matrix[given][suggested] += 1
        if suggested != given:
            issues.add(inst_id)
    return ConfidentJoint(
        labels=tuple(label_set),
        matrix=matrix,
        thresholds=thresholds,
        issues=frozenset(issues),
    )


def alignment_scores(
    dataset: Dataset, folds: int = 5, seed: int = 0
) -> tuple[dict[str, float], ConfidentJoint]:
    """Per-instance alignment (self-confidence of the given label) plus the joint."""
    probs = out_of_sample_probabilities(dataset, folds=folds, seed=seed)
    label_index = {label: i for i, label in enumerate(dataset.label_set)}
    given = {inst.id: inst.label for inst in dataset.instances}
    scores = {
        inst_id: float(p[label_index[given[inst_id]]]) for inst_id, p in probs.items()
    }
    joint = confident_joint(probs, given, dataset.label_set)
    return scores, joint
