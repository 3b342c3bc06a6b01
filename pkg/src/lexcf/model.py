"""Black-box classifiers over raw feature space.

Two built-in learners (logistic regression, random forest) plus a
fixed-weight linear model for deterministic tests. All models expose
batched probability prediction; the optimizer never sees encodings,
only raw values.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .data import CATEGORICAL, FeatureSchema, schema_fingerprint
from .errors import ConfigError, ModelFormatError, TrainingError

MODEL_FORMAT = "lexcf-model"
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class LearnerConfig:
    """Learner name, hyperparameters, and training seed."""

    learner: str
    params: dict = field(default_factory=dict)
    seed: int = 0


class Model:
    """Interface consumed by the optimizer: probabilities for the positive class.

    predict_class is positive exactly when the probability reaches 0.5;
    the target interval for counterfactuals is closed at 0.5.
    """

    learner_name = "abstract"
    schema = ()

    def predict_proba_batch(self, rows):
        raise NotImplementedError

    def predict_proba(self, values):
        return float(self.predict_proba_batch([values])[0])

    def predict_class_batch(self, rows):
        return (self.predict_proba_batch(rows) >= 0.5).astype(int)

    def predict_class(self, values):
        return int(self.predict_proba(values) >= 0.5)

    def accuracy(self, dataset):
        preds = self.predict_class_batch([inst.values for inst in dataset.instances])
        return float(np.mean(preds == dataset.labels()))


class _Encoder:
    """One-hot encoding for categoricals, min-max scaling for numerics.

    Fitted on training data; constant numeric columns encode to 0.
    """

    def __init__(self, columns):
        # columns: per feature either ("num", lo, hi) or ("cat", categories)
        self.columns = columns
        self.width = sum(1 if c[0] == "num" else len(c[1]) for c in columns)

    @classmethod
    def fit(cls, train):
        columns = []
        for i, feat in enumerate(train.schema):
            if feat.kind == CATEGORICAL:
                columns.append(("cat", tuple(feat.categories)))
            else:
                vals = [inst.values[i] for inst in train.instances]
                columns.append(("num", float(min(vals)), float(max(vals))))
        return cls(columns)

    def transform(self, rows):
        out = np.zeros((len(rows), self.width))
        col = 0
        for j, spec in enumerate(self.columns):
            if spec[0] == "num":
                lo, hi = spec[1], spec[2]
                vals = np.array([row[j] for row in rows], dtype=float)
                if hi > lo:
                    out[:, col] = (vals - lo) / (hi - lo)
                col += 1
            else:
                tokens = [row[j] for row in rows]
                for k, cat in enumerate(spec[1]):
                    out[:, col + k] = [1.0 if t == cat else 0.0 for t in tokens]
                col += len(spec[1])
        return out

    def to_spec(self):
        return [list(c) for c in self.columns]

    @classmethod
    def from_spec(cls, spec):
        columns = []
        for entry in spec:
            if entry[0] == "num":
                columns.append(("num", float(entry[1]), float(entry[2])))
            else:
                columns.append(("cat", tuple(entry[1])))
        return cls(columns)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _check_binary(train):
    labels = set(train.labels().tolist())
    if len(labels) < 2:
        raise TrainingError("training set contains a single class: %r" % sorted(labels))


class LogisticModel(Model):
    """Logistic regression fitted by full-batch gradient descent."""

    learner_name = "logistic"

    def __init__(self, schema, encoder, weights, bias):
        self.schema = tuple(schema)
        self.encoder = encoder
        self.weights = np.asarray(weights, dtype=float)
        self.bias = float(bias)

    def predict_proba_batch(self, rows):
        X = self.encoder.transform(rows)
        return _sigmoid(X @ self.weights + self.bias)

    def to_params(self):
        return {
            "encoder": self.encoder.to_spec(),
            "weights": self.weights.tolist(),
            "bias": self.bias,
        }

    @classmethod
    def from_params(cls, schema, params):
        return cls(
            schema,
            _Encoder.from_spec(params["encoder"]),
            params["weights"],
            params["bias"],
        )


def train_logistic(train, cfg):
    """Deterministic full-batch gradient descent; L2 on weights, not bias."""
    _check_binary(train)
    defaults = {"learning_rate": 0.1, "epochs": 500, "l2": 0.0}
    params = {**defaults, **cfg.params}
    lr = float(params["learning_rate"])
    epochs = int(params["epochs"])
    l2 = float(params["l2"])
    if lr <= 0 or epochs < 1 or l2 < 0:
        raise ConfigError("bad logistic hyperparameters: %r" % params)
    encoder = _Encoder.fit(train)
    X = encoder.transform([inst.values for inst in train.instances])
    y = train.labels().astype(float)
    n = len(y)
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        err = _sigmoid(X @ w + b) - y
        w -= lr * (X.T @ err / n + l2 * w)
        b -= lr * float(err.mean())
    return LogisticModel(train.schema, encoder, w, b)


class _Tree:
    """One CART tree in flat arrays; leaves have feature index -1."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.int64)

    def predict(self, X):
        pos = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[pos] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            nodes = pos[idx]
            go_left = X[idx, self.feature[nodes]] <= self.threshold[nodes]
            pos[idx] = np.where(go_left, self.left[nodes], self.right[nodes])
            active[idx] = self.feature[pos[idx]] >= 0
        return self.value[pos]


def _best_split(X, y, idx, feats, min_leaf):
    """Lowest weighted-Gini split among midpoint thresholds; ties keep the
    first feature in sampled order and the lowest threshold."""
    n = len(idx)
    best = None
    for f in feats:
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        cs = col[order]
        ys = y[idx][order].astype(float)
        cum_pos = np.cumsum(ys)
        total_pos = cum_pos[-1]
        sizes_l = np.arange(1, n, dtype=float)
        sizes_r = n - sizes_l
        valid = cs[1:] != cs[:-1]
        if min_leaf > 1:
            valid = valid & (sizes_l >= min_leaf) & (sizes_r >= min_leaf)
        if not valid.any():
            continue
        pos_l = cum_pos[:-1]
        pos_r = total_pos - pos_l
        with np.errstate(invalid="ignore"):
            gini_l = 1.0 - (pos_l / sizes_l) ** 2 - ((sizes_l - pos_l) / sizes_l) ** 2
            gini_r = 1.0 - (pos_r / sizes_r) ** 2 - ((sizes_r - pos_r) / sizes_r) ** 2
        score = (sizes_l * gini_l + sizes_r * gini_r) / n
        score[~valid] = np.inf
        k = int(np.argmin(score))
        if best is None or score[k] < best[0]:
            best = (score[k], int(f), 0.5 * (cs[k] + cs[k + 1]))
    return best


def _grow_tree(X, y, rng, mtry, max_depth, min_leaf):
    d = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(np.arange(len(y)), 0, root)]
    while stack:
        idx, depth, slot = stack.pop()
        ys = y[idx]
        pos = int(ys.sum())
        value[slot] = 1 if 2 * pos > len(ys) else 0
        if pos == 0 or pos == len(ys) or len(ys) < 2 * min_leaf:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        feats = rng.choice(d, size=min(mtry, d), replace=False)
        split = _best_split(X, y, idx, feats, min_leaf)
        if split is None:
            continue
        _, f, thr = split
        go_left = X[idx, f] <= thr
        feature[slot] = f
        threshold[slot] = thr
        left_slot = new_node()
        right_slot = new_node()
        left[slot] = left_slot
        right[slot] = right_slot
        stack.append((idx[~go_left], depth + 1, right_slot))
        stack.append((idx[go_left], depth + 1, left_slot))
    return _Tree(feature, threshold, left, right, value)


class RandomForestModel(Model):
    """Bagged CART trees; probability is the fraction of positive votes."""

    learner_name = "random_forest"

    def __init__(self, schema, encoder, trees):
        self.schema = tuple(schema)
        self.encoder = encoder
        self.trees = trees

    def predict_proba_batch(self, rows):
        X = self.encoder.transform(rows)
        votes = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict(X)
        return votes / len(self.trees)

    def to_params(self):
        return {
            "encoder": self.encoder.to_spec(),
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in self.trees
            ],
        }

    @classmethod
    def from_params(cls, schema, params):
        trees = [
            _Tree(t["feature"], t["threshold"], t["left"], t["right"], t["value"])
            for t in params["trees"]
        ]
        return cls(schema, _Encoder.from_spec(params["encoder"]), trees)


def train_random_forest(train, cfg):
    """CART with Gini splits, bootstrap samples, per-node feature subsets."""
    _check_binary(train)
    d_raw = len(train.schema)
    defaults = {"ntree": 100, "mtry": None, "max_depth": None, "min_leaf": 1}
    params = {**defaults, **cfg.params}
    ntree = int(params["ntree"])
    if ntree < 1:
        raise ConfigError("ntree must be >= 1")
    encoder = _Encoder.fit(train)
    X = encoder.transform([inst.values for inst in train.instances])
    y = train.labels()
    d = X.shape[1]
    mtry = params["mtry"]
    if mtry is None:
        mtry = max(1, int(np.sqrt(d)))
    mtry = int(mtry)
    if mtry < 1 or mtry > max(d_raw, d):
        raise ConfigError("mtry %d outside [1, %d]" % (mtry, max(d_raw, d)))
    max_depth = params["max_depth"]
    if max_depth is not None:
        max_depth = int(max_depth)
    min_leaf = max(1, int(params["min_leaf"]))
    n = len(y)
    trees = []
    for t in range(ntree):
        rng = np.random.default_rng(np.random.SeedSequence([int(cfg.seed), t]))
        sample = rng.integers(0, n, size=n)
        trees.append(_grow_tree(X[sample], y[sample], rng, mtry, max_depth, min_leaf))
    return RandomForestModel(train.schema, encoder, trees)


class FixedLinearModel(Model):
    """Sigmoid of a fixed linear score over raw numeric features.

    Used as a deterministic oracle in tests: with non-negative weights the
    probability is monotone non-decreasing in every weighted feature.
    """

    learner_name = "fixed_linear"

    def __init__(self, schema, weights, intercept=0.0):
        self.schema = tuple(schema)
        for feat in self.schema:
            if feat.kind == CATEGORICAL and weights.get(feat.name, 0.0) != 0.0:
                raise ConfigError(
                    "fixed linear model cannot weight categorical feature %r" % feat.name
                )
        self.weights = {f.name: float(weights.get(f.name, 0.0)) for f in self.schema}
        self.intercept = float(intercept)

    def predict_proba_batch(self, rows):
        score = np.full(len(rows), self.intercept)
        for j, feat in enumerate(self.schema):
            w = self.weights[feat.name]
            if w == 0.0 or feat.kind == CATEGORICAL:
                continue
            score += w * np.array([row[j] for row in rows], dtype=float)
        return _sigmoid(score)

    def to_params(self):
        return {"weights": self.weights, "intercept": self.intercept}

    @classmethod
    def from_params(cls, schema, params):
        return cls(schema, params["weights"], params.get("intercept", 0.0))


_LEARNERS = {
    "logistic": (train_logistic, LogisticModel),
    "random_forest": (train_random_forest, RandomForestModel),
}


def train_model(train, cfg):
    if cfg.learner not in _LEARNERS:
        raise ConfigError(
            "unknown learner %r (have: %s)" % (cfg.learner, ", ".join(sorted(_LEARNERS)))
        )
    return _LEARNERS[cfg.learner][0](train, cfg)


def default_search_space(learner, train):
    """Hyperparameter ranges used by random search when none are given."""
    if learner == "random_forest":
        return {
            "ntree": ("int", 50, 500),
            "mtry": ("int", 1, len(train.schema)),
            "max_depth": ("int", 2, 20),
            "min_leaf": ("int", 1, 5),
        }
    if learner == "logistic":
        return {
            "learning_rate": ("float", 0.01, 1.0),
            "epochs": ("int", 100, 1000),
            "l2": ("float", 0.0, 0.1),
        }
    raise ConfigError("no search space for learner %r" % learner)


def sample_search_space(learner, space, n_trials, seed):
    """Deterministic list of trial configs; parameter order is alphabetical."""
    rng = np.random.default_rng(seed)
    trials = []
    for t in range(n_trials):
        params = {}
        for name in sorted(space):
            kind, lo, hi = space[name]
            if kind == "int":
                params[name] = int(rng.integers(int(lo), int(hi) + 1))
            else:
                params[name] = float(rng.uniform(lo, hi))
        trials.append(LearnerConfig(learner, params, seed=int(seed) + t))
    return trials


def kfold_indices(n, k, seed):
    """Seeded permutation cut into k near-equal folds; returns (train, val) pairs."""
    order = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(order, k)
    pairs = []
    for i in range(k):
        rest = [folds[j] for j in range(k) if j != i]
        pairs.append((np.concatenate(rest), folds[i]))
    return pairs


def _subset(train, indices):
    from .data import Dataset

    return Dataset(train.schema, [train.instances[int(i)] for i in indices], role="train")


def cross_val_accuracy(train, cfg, folds):
    scores = []
    for tr_idx, val_idx in folds:
        model = train_model(_subset(train, tr_idx), cfg)
        scores.append(model.accuracy(_subset(train, val_idx)))
    return float(np.mean(scores))


def tune_random_search(learner, train, space=None, n_trials=10, seed=0):
    """Pick the trial config with the best 3-fold CV accuracy; ties keep the
    first-sampled trial."""
    if n_trials < 1:
        raise ConfigError("n_trials must be >= 1")
    if space is None:
        space = default_search_space(learner, train)
    trials = sample_search_space(learner, space, n_trials, seed)
    folds = kfold_indices(len(train), 3, seed)
    best_cfg = None
    best_score = -1.0
    for cfg in trials:
        score = cross_val_accuracy(train, cfg, folds)
        if score > best_score:
            best_cfg, best_score = cfg, score
    return best_cfg


def save_model(model, path):
    """Write a model as a self-describing JSON container."""
    payload = {
        "format": MODEL_FORMAT,
        "format_version": MODEL_FORMAT_VERSION,
        "learner": model.learner_name,
        "schema_fingerprint": schema_fingerprint(model.schema),
        "schema": [
            [f.name, f.kind, bool(f.actionable), list(f.categories)] for f in model.schema
        ],
        "params": model.to_params(),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle)


_LOADERS = {
    "logistic": LogisticModel,
    "random_forest": RandomForestModel,
    "fixed_linear": FixedLinearModel,
}


def load_model(path):
    """Read a JSON model container; corrupt files and unknown versions fail."""
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError("corrupt model file %s: %s" % (path, exc)) from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError("%s is not a model container" % path)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            "unsupported model format version %r" % payload.get("format_version")
        )
    try:
        learner = payload["learner"]
        schema = tuple(
            FeatureSchema(name, kind, bool(act), tuple(cats))
            for name, kind, act, cats in payload["schema"]
        )
        params = payload["params"]
        fingerprint = payload["schema_fingerprint"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError("corrupt model file %s: %s" % (path, exc)) from None
    if schema_fingerprint(schema) != fingerprint:
        raise ModelFormatError("schema fingerprint mismatch in %s" % path)
    if learner not in _LOADERS:
        raise ModelFormatError("unknown learner %r in %s" % (learner, path))
    try:
        return _LOADERS[learner].from_params(schema, params)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError("corrupt model file %s: %s" % (path, exc)) from None
