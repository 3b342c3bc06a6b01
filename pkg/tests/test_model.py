import json

import numpy as np
import pytest

from lexcf.data import (
    CATEGORICAL,
    CONTINUOUS,
    FeatureSchema,
    generate_synthetic,
    split_dataset,
)
from lexcf.errors import ConfigError, ModelFormatError, TrainingError
from lexcf.model import (
    FixedLinearModel,
    LearnerConfig,
    kfold_indices,
    load_model,
    sample_search_space,
    save_model,
    train_logistic,
    train_model,
    train_random_forest,
    tune_random_search,
)

from conftest import make_dataset, numeric_schema


def _separable_dataset():
    # one feature, classes split cleanly at 5
    schema = numeric_schema(1)
    rows = [[float(v)] for v in (0, 1, 2, 3, 4, 6, 7, 8, 9, 10)]
    labels = [0] * 5 + [1] * 5
    return make_dataset(schema, rows, labels)


def test_logistic_learns_separable_problem():
    ds = _separable_dataset()
    model = train_logistic(ds, LearnerConfig("logistic", {"epochs": 2000}))
    assert model.accuracy(ds) == 1.0
    assert model.predict_proba((0.0,)) < 0.5 <= model.predict_proba((10.0,))


def test_logistic_l2_shrinks_weights():
    ds = _separable_dataset()
    plain = train_logistic(ds, LearnerConfig("logistic", {"epochs": 500}))
    ridge = train_logistic(ds, LearnerConfig("logistic", {"epochs": 500, "l2": 0.5}))
    assert np.abs(ridge.weights).sum() < np.abs(plain.weights).sum()


def test_logistic_rejects_single_class():
    schema = numeric_schema(1)
    ds = make_dataset(schema, [[1.0], [2.0]], [1, 1])
    with pytest.raises(TrainingError):
        train_logistic(ds, LearnerConfig("logistic"))


def test_logistic_rejects_bad_hyperparameters():
    ds = _separable_dataset()
    with pytest.raises(ConfigError):
        train_logistic(ds, LearnerConfig("logistic", {"learning_rate": -1.0}))
    with pytest.raises(ConfigError):
        train_logistic(ds, LearnerConfig("logistic", {"epochs": 0}))


def test_class_threshold_is_closed_at_half():
    schema = numeric_schema(1)
    model = FixedLinearModel(schema, {}, intercept=0.0)
    assert model.predict_proba((3.0,)) == 0.5
    assert model.predict_class((3.0,)) == 1


def test_fixed_linear_monotone_and_categorical_guard():
    schema = (
        FeatureSchema("x", CONTINUOUS),
        FeatureSchema("k", CATEGORICAL, categories=("a", "b")),
    )
    model = FixedLinearModel(schema, {"x": 2.0}, intercept=-1.0)
    lo = model.predict_proba((0.0, "a"))
    hi = model.predict_proba((5.0, "a"))
    assert lo < hi
    # category token never moves the score
    assert model.predict_proba((5.0, "b")) == hi
    with pytest.raises(ConfigError):
        FixedLinearModel(schema, {"k": 1.0})


def _memorizable_dataset():
    # 10 distinct rows, each duplicated 4x so every bootstrap almost surely
    # contains every row
    rng = np.random.default_rng(0)
    base = rng.uniform(0.0, 1.0, size=(10, 3))
    labels = rng.integers(0, 2, size=10)
    if labels.sum() in (0, 10):
        labels[0] = 1 - labels[0]
    rows, ys = [], []
    for r in range(10):
        for _ in range(4):
            rows.append(list(base[r]))
            ys.append(int(labels[r]))
    return make_dataset(numeric_schema(3), rows, ys)


def test_random_forest_memorizes_training_data():
    ds = _memorizable_dataset()
    model = train_random_forest(
        ds, LearnerConfig("random_forest", {"ntree": 30, "mtry": 3}, seed=11)
    )
    assert model.accuracy(ds) == 1.0


def test_random_forest_probability_is_vote_fraction():
    ds = _memorizable_dataset()
    model = train_random_forest(ds, LearnerConfig("random_forest", {"ntree": 7}, seed=1))
    probas = model.predict_proba_batch([inst.values for inst in ds])
    votes = probas * 7
    assert np.allclose(votes, np.round(votes))
    assert np.all((0.0 <= probas) & (probas <= 1.0))


def test_random_forest_deterministic_per_seed():
    ds = generate_synthetic(80, seed=2, n_continuous=4)
    cfg = LearnerConfig("random_forest", {"ntree": 20}, seed=5)
    rows = [inst.values for inst in ds]
    a = train_random_forest(ds, cfg).predict_proba_batch(rows)
    b = train_random_forest(ds, cfg).predict_proba_batch(rows)
    assert np.array_equal(a, b)
    c = train_random_forest(
        ds, LearnerConfig("random_forest", {"ntree": 20}, seed=6)
    ).predict_proba_batch(rows)
    assert not np.array_equal(a, c)


def test_random_forest_respects_max_depth():
    ds = generate_synthetic(60, seed=3, n_continuous=4)
    model = train_random_forest(
        ds, LearnerConfig("random_forest", {"ntree": 5, "max_depth": 1}, seed=0)
    )
    for tree in model.trees:
        # a depth-1 tree has at most 3 nodes: root plus two leaves
        assert len(tree.feature) <= 3


def test_random_forest_mtry_bounds():
    ds = _memorizable_dataset()
    with pytest.raises(ConfigError):
        train_random_forest(ds, LearnerConfig("random_forest", {"mtry": 0}))
    with pytest.raises(ConfigError):
        train_random_forest(ds, LearnerConfig("random_forest", {"mtry": 99}))


def test_random_forest_handles_categorical_via_onehot():
    schema = (
        FeatureSchema("x", CONTINUOUS),
        FeatureSchema("k", CATEGORICAL, categories=("a", "b")),
    )
    rows = [[0.1, "a"], [0.2, "a"], [0.3, "b"], [0.4, "b"]] * 5
    labels = [0, 0, 1, 1] * 5
    ds = make_dataset(schema, rows, labels)
    model = train_random_forest(ds, LearnerConfig("random_forest", {"ntree": 15}, seed=2))
    assert model.accuracy(ds) == 1.0


def test_train_model_dispatch():
    ds = _separable_dataset()
    model = train_model(ds, LearnerConfig("logistic", {"epochs": 50}))
    assert model.learner_name == "logistic"
    with pytest.raises(ConfigError):
        train_model(ds, LearnerConfig("gradient_boost"))


def test_kfold_indices_partition():
    folds = kfold_indices(20, 3, seed=1)
    assert len(folds) == 3
    seen = []
    for tr, val in folds:
        assert not set(tr.tolist()) & set(val.tolist())
        seen.extend(val.tolist())
    assert sorted(seen) == list(range(20))


def test_sample_search_space_deterministic_and_bounded():
    space = {"b": ("int", 1, 5), "a": ("float", 0.0, 1.0)}
    trials = sample_search_space("logistic", space, 6, seed=4)
    again = sample_search_space("logistic", space, 6, seed=4)
    assert trials == again
    for t in trials:
        assert 1 <= t.params["b"] <= 5
        assert 0.0 <= t.params["a"] <= 1.0
    assert [t.seed for t in trials] == [4, 5, 6, 7, 8, 9]


def test_tune_random_search_picks_better_config():
    ds = generate_synthetic(90, seed=8, n_continuous=4)
    # one absurd trial (epochs 1) and sane ones; search must not return it
    space = {"epochs": ("int", 1, 400), "learning_rate": ("float", 0.1, 0.5)}
    best = tune_random_search("logistic", ds, space, n_trials=6, seed=2)
    trials = sample_search_space("logistic", space, 6, seed=2)
    folds = kfold_indices(len(ds), 3, seed=2)
    from lexcf.model import cross_val_accuracy

    scores = [cross_val_accuracy(ds, t, folds) for t in trials]
    expected = trials[int(np.argmax(scores))]
    assert best == expected
    with pytest.raises(ConfigError):
        tune_random_search("logistic", ds, space, n_trials=0)


def test_model_save_load_roundtrip(tmp_path):
    ds = _memorizable_dataset()
    for maker, cfg in (
        (train_random_forest, LearnerConfig("random_forest", {"ntree": 9}, seed=3)),
        (train_logistic, LearnerConfig("logistic", {"epochs": 60})),
    ):
        model = maker(ds, cfg)
        path = tmp_path / ("%s.json" % cfg.learner)
        save_model(model, str(path))
        loaded = load_model(str(path))
        rows = [inst.values for inst in ds]
        assert np.array_equal(
            model.predict_proba_batch(rows), loaded.predict_proba_batch(rows)
        )
        assert [f.name for f in loaded.schema] == [f.name for f in model.schema]


def test_load_model_rejects_corruption(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(str(path))

    path.write_text(json.dumps({"format": "something-else"}), encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(str(path))

    ds = _separable_dataset()
    model = train_logistic(ds, LearnerConfig("logistic", {"epochs": 10}))
    good = tmp_path / "good.json"
    save_model(model, str(good))
    payload = json.loads(good.read_text(encoding="utf-8"))

    bad_version = dict(payload, format_version=99)
    path.write_text(json.dumps(bad_version), encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(str(path))

    bad_print = dict(payload, schema_fingerprint="0" * 16)
    path.write_text(json.dumps(bad_print), encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(str(path))

    bad_learner = dict(payload, learner="mystery")
    path.write_text(json.dumps(bad_learner), encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(str(path))

    missing = {k: v for k, v in payload.items() if k != "params"}
    path.write_text(json.dumps(missing), encoding="utf-8")
    with pytest.raises(ModelFormatError):
        load_model(str(path))


def test_split_then_train_end_to_end():
    ds = generate_synthetic(240, seed=12, n_continuous=5, n_categorical=1)
    train, test = split_dataset(ds, test_cap=60, seed=12)
    model = train_model(train, LearnerConfig("random_forest", {"ntree": 40}, seed=1))
    assert model.accuracy(test) > 0.7
