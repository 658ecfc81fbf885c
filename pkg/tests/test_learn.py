from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from groupevo.errors import InputError
from groupevo.evochain import TARGET_CLASSES, SequenceInstance
from groupevo.ged import EventType
from groupevo.learn import (
    N_CLASSES,
    ClassifierKind,
    ClassifierSpec,
    cross_validate,
    format_report,
    make_dataset,
    per_class_scores,
    predict,
    stratified_folds,
    train,
    weighted_f,
    write_report,
)
from groupevo.learn.models import RandomForest, default_forest_features
from groupevo.learn.tree import GainRatioTree

E = EventType
PAIR = [e for e in EventType if e.is_pair_event]
KINDS = [k.value for k in ClassifierKind]


def separable(n=600, seed=0):
    """Label = f(event_10, size_t0); every other feature is noise."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        sizes = tuple(int(s) for s in rng.integers(3, 25, size=4))
        events = tuple(PAIR[i] for i in rng.integers(0, len(PAIR), size=3))
        big = sizes[-1] >= 12
        code = (PAIR.index(events[-1]) + (2 if big else 0)) % N_CLASSES
        out.append(SequenceInstance(sizes, events, TARGET_CLASSES[code]))
    return out


def labelled(counts):
    insts = []
    for cls, n in counts.items():
        for i in range(n):
            insts.append(SequenceInstance((3 + i % 5, 4, 5, 6), (E.CONTINUING, E.GROWING, PAIR[i % 5]), cls))
    return insts


# -- weighted F ----------------------------------------------------------------


def test_majority_confusion_by_hand():
    c = np.zeros((6, 6), dtype=int)
    c[:, 0] = [60, 10, 10, 10, 5, 5]
    p, r, f, s = per_class_scores(c)
    assert p[0] == pytest.approx(0.6) and r[0] == 1.0
    assert f[0] == pytest.approx(0.75, abs=1e-12)
    assert weighted_f(c) == pytest.approx(0.45, abs=1e-12)


def test_identity_is_one_and_zero_support_has_no_weight():
    assert weighted_f(np.eye(6, dtype=int) * 7) == 1.0
    c = np.diag([5, 0, 3, 0, 0, 2])
    assert weighted_f(c) == 1.0
    with pytest.raises(InputError):
        weighted_f(np.zeros((6, 6), dtype=int))


@settings(max_examples=300, deadline=None)
@given(arrays(np.int64, (6, 6), elements=st.integers(0, 20)))
def test_weighted_f_bounds(c):
    if c.sum() == 0:
        return
    value = weighted_f(c)
    assert 0.0 <= value <= 1.0 + 1e-12
    diagonal = not (c - np.diag(np.diag(c))).any()
    assert (abs(value - 1.0) < 1e-12) == diagonal


# -- cross-validation -------------------------------------------------------


def test_majority_baseline_cross_validated():
    counts = {E.CONTINUING: 60, E.SHRINKING: 10, E.GROWING: 10, E.SPLITTING: 10, E.MERGING: 5, E.DISSOLVING: 5}
    report = cross_validate(make_dataset(labelled(counts)), ClassifierSpec("baseline", {}, 3))
    assert report.weighted_f == pytest.approx(0.45, abs=1e-12)
    assert report.confusion.sum(axis=1).tolist() == [60, 10, 10, 10, 5, 5]
    assert report.confusion[:, 1:].sum() == 0


@pytest.mark.parametrize("kind", ["tree", "forest"])
def test_separable_data(kind):
    ds = make_dataset(separable())
    report = cross_validate(ds, ClassifierSpec(kind, {}, 11))
    assert report.weighted_f >= 0.95


def test_tree_learns_one_feature_mapping():
    rng = np.random.default_rng(2)
    insts = []
    for _ in range(200):
        ev = PAIR[int(rng.integers(0, 5))]
        sizes = tuple(int(s) for s in rng.integers(3, 30, size=4))
        insts.append(SequenceInstance(sizes, (E.GROWING, E.CONTINUING, ev), TARGET_CLASSES[PAIR.index(ev)]))
    assert cross_validate(make_dataset(insts), ClassifierSpec("tree")).weighted_f == 1.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 40), min_size=6, max_size=6), st.integers(2, 10), st.integers(0, 2**32))
def test_stratified_folds_balanced(counts, folds, seed):
    y = np.repeat(np.arange(6), counts)
    np.random.default_rng(seed).shuffle(y)
    assignment = stratified_folds(y, folds, seed)
    for c in range(6):
        per_fold = np.bincount(assignment[y == c], minlength=folds)
        assert per_fold.max() - per_fold.min() <= 1
        assert np.all(np.abs(per_fold - counts[c] / folds) < 1)
    sizes = np.bincount(assignment, minlength=folds)
    assert sizes.max() - sizes.min() <= 1


def test_cross_validate_errors():
    ds = make_dataset(labelled({E.CONTINUING: 5}))
    with pytest.raises(InputError):
        cross_validate(ds, ClassifierSpec("baseline"), folds=10)
    with pytest.raises(InputError):
        make_dataset([])


@pytest.mark.parametrize("kind", KINDS)
def test_reports_reproducible(kind):
    ds = make_dataset(separable(150, seed=4))
    a = cross_validate(ds, ClassifierSpec(kind, {}, 99))
    b = cross_validate(ds, ClassifierSpec(kind, {}, 99))
    assert np.array_equal(a.confusion, b.confusion)
    assert a.weighted_f == b.weighted_f
    assert format_report(a) == format_report(b)
    assert a.confusion.sum() == len(ds)


# -- models -------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(10, 120))
def test_tree_fits_functional_data_exactly(seed, n):
    rng = np.random.default_rng(seed)
    X = np.column_stack([rng.integers(0, 6, n), rng.integers(0, 7, n), rng.integers(3, 15, n)]).astype(float)
    y = ((X[:, 0] * 3 + X[:, 1] * 5 + X[:, 2]) % 6).astype(int)
    # a numeric threshold cannot isolate a single instance when leaves need two
    tree = GainRatioTree(6, np.array([False, True, False]), min_leaf=1).fit(X, y)
    assert np.array_equal(tree.predict(X), y)


def test_forest_feature_count():
    assert default_forest_features(7) == 3


def test_single_tree_forest_is_bagged_tree():
    ds = make_dataset(separable(400, seed=8))
    train_idx, held = np.arange(300), np.arange(300, 400)
    X, y = ds.X[train_idx], ds.y[train_idx]
    forest = RandomForest(ds.categorical, trees=1, features=ds.n_features, seed=5).fit(X, y)
    rng = forest.tree_rng(0)
    sample = forest.bootstrap(rng, len(y))
    tree = GainRatioTree(N_CLASSES, ds.categorical).fit(X[sample], y[sample])
    agree = np.mean(forest.predict_proba(ds.X[held]).argmax(1) == tree.predict(ds.X[held]))
    assert agree >= 0.95


def test_knn_uses_nearest_training_point():
    insts = [
        SequenceInstance((3, 3, 3, 3), (E.CONTINUING,) * 3, E.CONTINUING),
        SequenceInstance((20, 20, 20, 20), (E.CONTINUING,) * 3, E.SHRINKING),
        SequenceInstance((3, 3, 3, 3), (E.GROWING,) * 3, E.GROWING),
    ]
    model = train(make_dataset(insts), ClassifierSpec("knn"))
    probe = SequenceInstance((4, 4, 4, 4), (E.CONTINUING,) * 3, E.CONTINUING)
    assert predict(model, probe)[0] is E.CONTINUING
    probe = SequenceInstance((18, 19, 20, 20), (E.CONTINUING,) * 3, E.CONTINUING)
    assert predict(model, probe)[0] is E.SHRINKING


def test_bayes_handles_unseen_event():
    insts = labelled({E.CONTINUING: 12, E.SHRINKING: 12})
    model = train(make_dataset(insts), ClassifierSpec("bayes"))
    probe = SequenceInstance((4, 4, 5, 6), (E.MERGING, E.MERGING, E.MERGING), E.CONTINUING)
    label, proba = predict(model, probe)
    assert label in (E.CONTINUING, E.SHRINKING)
    assert proba.sum() == pytest.approx(1.0)


def test_tree_unseen_category_routes_to_majority_child():
    insts = [SequenceInstance((5, 5, 5, 5), (E.CONTINUING, E.CONTINUING, e), l) for e, l in
             [(E.GROWING, E.GROWING)] * 6 + [(E.SHRINKING, E.SHRINKING)] * 3]
    model = train(make_dataset(insts), ClassifierSpec("tree"))
    probe = SequenceInstance((5, 5, 5, 5), (E.CONTINUING, E.CONTINUING, E.MERGING), E.CONTINUING)
    assert predict(model, probe)[0] is E.GROWING


def test_prediction_ties_go_to_first_class():
    insts = labelled({E.SHRINKING: 3, E.GROWING: 3})
    model = train(make_dataset(insts), ClassifierSpec("baseline"))
    assert predict(model, insts[0])[0] is E.SHRINKING


def test_spec_validation():
    with pytest.raises(InputError):
        ClassifierSpec("tree", {"trees": 5})
    with pytest.raises(InputError):
        ClassifierSpec("knn", {"k": 0})
    with pytest.raises(ValueError):
        ClassifierSpec("svm")


def test_pruned_tree_is_smaller():
    rng = np.random.default_rng(0)
    insts = separable(300, seed=1)
    noisy = [SequenceInstance(i.sizes, i.events, TARGET_CLASSES[int(rng.integers(0, 6))]) if rng.random() < 0.3 else i for i in insts]
    ds = make_dataset(noisy)
    full = train(ds, ClassifierSpec("tree"))
    pruned = train(ds, ClassifierSpec("tree", {"prune": True}))
    assert pruned.estimator.n_leaves() < full.estimator.n_leaves()


def test_report_files(tmp_path):
    report = cross_validate(make_dataset(separable(100)), ClassifierSpec("tree"))
    out = tmp_path / "report.csv"
    write_report(report, out)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "class,precision,recall,f,support"
    assert [l.split(",")[0] for l in lines[1:]] == [c.value for c in TARGET_CLASSES] + ["weighted"]
    assert lines[-1].endswith(",100")
    confusion = (tmp_path / "report_confusion.csv").read_text(encoding="utf-8").splitlines()
    assert len(confusion) == 7
