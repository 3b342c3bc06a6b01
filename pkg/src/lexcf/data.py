"""Dataset ingestion, schemas, splitting, and training-set statistics.

Feature values live in raw space throughout: continuous and integer
features as floats, categorical features as strings. Models do their own
encoding; everything else (objectives, constraints, mutation) works on
the raw values defined here.
"""

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError, DataError, ParseError, SchemaError

CONTINUOUS = "continuous"
INTEGER = "integer"
CATEGORICAL = "categorical"
FEATURE_KINDS = (CONTINUOUS, INTEGER, CATEGORICAL)

NEGATIVE = 0
POSITIVE = 1

DEFAULT_MISSING_TOKENS = ("", "NA", "?")

# Non-actionable feature lists shipped with the package, keyed by a short
# dataset handle. Referenced from dataset config files via `non_actionable:
# preset:<name>`.
PRESET_NON_ACTIONABLE = {
    "adult": (
        "age",
        "education",
        "marital_status",
        "relationship",
        "race",
        "sex",
        "native_country",
    ),
    "compas": ("age", "age_cat", "race", "sex"),
    "diabetes": ("age", "pregnancies"),
    "fico": ("externalRiskEstimate",),
    "german_credit": ("age", "sex"),
}


@dataclass(frozen=True)
class FeatureSchema:
    """Declaration of a single feature: name, kind, mutability, categories."""

    name: str
    kind: str
    actionable: bool = True
    categories: tuple = ()

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise SchemaError("unknown feature kind %r for %r" % (self.kind, self.name))
        if self.kind == CATEGORICAL and not self.categories:
            raise SchemaError("categorical feature %r needs categories" % self.name)
        if self.kind != CATEGORICAL and self.categories:
            raise SchemaError("numeric feature %r must not declare categories" % self.name)
        object.__setattr__(self, "categories", tuple(self.categories))

    @property
    def is_numeric(self):
        return self.kind in (CONTINUOUS, INTEGER)


@dataclass(frozen=True)
class Instance:
    """One row: a tuple of raw feature values plus an optional class label."""

    values: tuple
    label: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class FeatureStats:
    """Per-feature training statistics: numeric bounds or observed categories."""

    lower: float = 0.0
    upper: float = 0.0
    categories: tuple = ()

    @property
    def range(self):
        return self.upper - self.lower


class Dataset:
    """An immutable collection of schema-valid instances."""

    def __init__(self, schema, instances, role="train"):
        self.schema = tuple(schema)
        names = [f.name for f in self.schema]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names in schema")
        self.instances = tuple(instances)
        self.role = role
        for inst in self.instances:
            if len(inst.values) != len(self.schema):
                raise SchemaError(
                    "instance has %d values, schema has %d features"
                    % (len(inst.values), len(self.schema))
                )
        labels = {inst.label for inst in self.instances if inst.label is not None}
        if not labels <= {NEGATIVE, POSITIVE}:
            raise DataError("labels must be binary (0/1), got %r" % sorted(labels))

    def __len__(self):
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def feature_index(self, name):
        for i, f in enumerate(self.schema):
            if f.name == name:
                return i
        raise SchemaError("no feature named %r" % name)

    def labels(self):
        return np.array([inst.label for inst in self.instances])


def parse_value(raw, feature, row_index):
    """Parse one CSV cell for its declared feature kind."""
    if feature.kind == CATEGORICAL:
        if raw not in feature.categories:
            raise ParseError(
                "row %d: value %r not among declared categories of %r"
                % (row_index, raw, feature.name)
            )
        return raw
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(
            "row %d: cannot parse %r as numeric for %r" % (row_index, raw, feature.name)
        ) from None
    if feature.kind == INTEGER:
        if value != int(value):
            raise ParseError(
                "row %d: non-integral value %r for integer feature %r"
                % (row_index, raw, feature.name)
            )
        value = float(int(value))
    return value


def load_dataset(
    path,
    schema,
    class_column,
    positive_label,
    missing_tokens=DEFAULT_MISSING_TOKENS,
    role="train",
):
    """Read a CSV with a header row into a Dataset.

    Rows containing a missing token in any column are dropped. The header
    must contain exactly the schema's feature names plus the class column.
    The class column is mapped to 0/1 via positive_label; more than two
    distinct class tokens is an error.
    """
    schema = tuple(schema)
    missing = set(missing_tokens)
    expected = {f.name for f in schema} | {class_column}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("empty file: %s" % path) from None
        header = [h.strip() for h in header]
        if set(header) != expected:
            unknown = sorted(set(header) - expected)
            absent = sorted(expected - set(header))
            raise SchemaError(
                "header mismatch in %s (unknown: %s, missing: %s)"
                % (path, unknown, absent)
            )
        col_of = {name: header.index(name) for name in header}
        feature_cols = [col_of[f.name] for f in schema]
        class_col = col_of[class_column]

        instances = []
        class_tokens = set()
        for row_index, row in enumerate(reader):
            if len(row) != len(header):
                raise DataError(
                    "row %d: expected %d cells, got %d" % (row_index, len(header), len(row))
                )
            cells = [c.strip() for c in row]
            if any(c in missing for c in cells):
                continue
            values = tuple(
                parse_value(cells[col], feat, row_index)
                for col, feat in zip(feature_cols, schema)
            )
            token = cells[class_col]
            class_tokens.add(token)
            label = POSITIVE if token == positive_label else NEGATIVE
            instances.append(Instance(values, label))
    if len(class_tokens) > 2:
        raise DataError(
            "class column %r has %d distinct values; binary labels required"
            % (class_column, len(class_tokens))
        )
    return Dataset(schema, instances, role=role)


def split_dataset(ds, test_cap=500, seed=0, fraction=1.0 / 3.0):
    """Split into (train, test) with a seeded unstratified shuffle.

    An integer test_cap caps the test size at min(test_cap, floor(fraction *
    n)); a float test_cap is itself used as the fraction. The cap rule keeps
    a fixed 500-row test pool for large datasets while smaller ones fall
    back to a one-third split.
    """
    n = len(ds)
    if n < 2:
        raise ConfigError("cannot split a dataset of %d instances" % n)
    if isinstance(test_cap, float) and not test_cap.is_integer():
        if not 0.0 < test_cap < 1.0:
            raise ConfigError("fractional test_cap must lie in (0, 1)")
        test_n = int(math.floor(test_cap * n))
    else:
        cap = int(test_cap)
        if cap < 1:
            raise ConfigError("test_cap must be positive")
        if cap >= n:
            raise ConfigError("test_cap %d >= dataset size %d" % (cap, n))
        test_n = min(cap, int(math.floor(fraction * n)))
    test_n = max(1, test_n)
    order = np.random.default_rng(seed).permutation(n)
    test_idx = set(order[:test_n].tolist())
    train = [ds.instances[i] for i in range(n) if i not in test_idx]
    test = [ds.instances[i] for i in sorted(test_idx)]
    return (
        Dataset(ds.schema, train, role="train"),
        Dataset(ds.schema, test, role="test"),
    )


def compute_feature_stats(train):
    """Per-feature min/max (numeric) or observed categories (categorical).

    Computed from the training split only; the bounds define both the Gower
    normalizer and the feasibility box for mutation.
    """
    if len(train) == 0:
        raise DataError("cannot compute stats on an empty training set")
    stats = []
    for i, feat in enumerate(train.schema):
        column = [inst.values[i] for inst in train.instances]
        if feat.kind == CATEGORICAL:
            observed = [c for c in feat.categories if c in set(column)]
            stats.append(FeatureStats(categories=tuple(observed)))
        else:
            stats.append(FeatureStats(lower=float(min(column)), upper=float(max(column))))
    return tuple(stats)


def generate_synthetic(n, seed, n_continuous=8, n_integer=0, n_categorical=0):
    """Deterministic linearly-informative binary dataset for desk-scale tests.

    Continuous features are uniform on [0, 10], integers uniform on
    {0..10}, categoricals drawn from three tokens. The label thresholds a
    random linear score at its median, so both classes are always well
    represented.
    """
    if n < 2:
        raise ConfigError("synthetic dataset needs n >= 2")
    if n_continuous + n_integer + n_categorical < 1:
        raise ConfigError("at least one feature required")
    rng = np.random.default_rng(seed)
    schema = []
    schema.extend(FeatureSchema("num%d" % i, CONTINUOUS) for i in range(n_continuous))
    schema.extend(FeatureSchema("int%d" % i, INTEGER) for i in range(n_integer))
    tokens = ("a", "b", "c")
    schema.extend(
        FeatureSchema("cat%d" % i, CATEGORICAL, categories=tokens)
        for i in range(n_categorical)
    )

    cont = rng.uniform(0.0, 10.0, size=(n, n_continuous))
    ints = rng.integers(0, 11, size=(n, n_integer)).astype(float)
    cats = rng.integers(0, len(tokens), size=(n, n_categorical))

    w_cont = rng.normal(0.0, 1.0, size=n_continuous)
    w_int = rng.normal(0.0, 1.0, size=n_integer)
    w_cat = rng.normal(0.0, 1.0, size=(n_categorical, len(tokens)))

    score = cont @ w_cont + ints @ w_int
    for j in range(n_categorical):
        score = score + w_cat[j][cats[:, j]]
    labels = (score > np.median(score)).astype(int)

    instances = []
    for r in range(n):
        # plain floats keep instances JSON-serializable downstream
        values = [float(v) for v in cont[r]]
        values += [float(v) for v in ints[r]]
        values += [tokens[c] for c in cats[r]]
        instances.append(Instance(tuple(values), int(labels[r])))
    return Dataset(tuple(schema), instances, role="train")


def schema_fingerprint(schema):
    """Stable hash of feature names, kinds, and categories."""
    payload = [[f.name, f.kind, list(f.categories)] for f in schema]
    blob = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class DatasetConfig:
    """Parsed dataset config file: schema plus ingestion and split settings."""

    csv_path: str
    class_column: str
    positive_label: str
    schema: tuple
    missing_tokens: tuple = DEFAULT_MISSING_TOKENS
    test_cap: float = 500
    split_seed: int = 0
    name: str = "dataset"
    synthetic: dict | None = field(default=None)


def _resolve_non_actionable(spec):
    if spec is None:
        return ()
    if isinstance(spec, str):
        if spec.startswith("preset:"):
            key = spec.split(":", 1)[1]
            if key not in PRESET_NON_ACTIONABLE:
                raise ConfigError(
                    "unknown non-actionable preset %r (have: %s)"
                    % (key, ", ".join(sorted(PRESET_NON_ACTIONABLE)))
                )
            return PRESET_NON_ACTIONABLE[key]
        raise ConfigError("non_actionable must be a list or 'preset:<name>'")
    return tuple(spec)


def load_dataset_config(path):
    """Parse a YAML dataset config into a DatasetConfig."""
    with open(path, encoding="utf-8") as handle:
        raw = yaml.safe_load(handle)
    if not isinstance(raw, dict):
        raise ConfigError("dataset config %s is not a mapping" % path)
    try:
        features = raw["features"]
        class_column = raw["class_column"]
        positive_label = str(raw["positive_label"])
    except KeyError as exc:
        raise ConfigError("dataset config missing key: %s" % exc) from None
    non_actionable = set(_resolve_non_actionable(raw.get("non_actionable")))
    schema = []
    for entry in features:
        name = entry["name"]
        schema.append(
            FeatureSchema(
                name=name,
                kind=entry["kind"],
                actionable=entry.get("actionable", name not in non_actionable),
                categories=tuple(entry.get("categories", ())),
            )
        )
    declared = {f.name for f in schema}
    unknown = non_actionable - declared
    if unknown:
        raise ConfigError("non_actionable names not in schema: %s" % sorted(unknown))
    csv_path = raw.get("csv", "")
    if csv_path and not os.path.isabs(csv_path):
        csv_path = os.path.join(os.path.dirname(os.path.abspath(path)), csv_path)
    return DatasetConfig(
        csv_path=csv_path,
        class_column=class_column,
        positive_label=positive_label,
        schema=tuple(schema),
        missing_tokens=tuple(raw.get("missing_tokens", DEFAULT_MISSING_TOKENS)),
        test_cap=raw.get("test_cap", 500),
        split_seed=int(raw.get("split_seed", 0)),
        name=raw.get("name", os.path.splitext(os.path.basename(path))[0]),
        synthetic=raw.get("synthetic"),
    )


def load_configured_dataset(cfg):
    """Materialize the dataset a DatasetConfig points at.

    A `synthetic:` block generates data in-process (the declared schema
    must match the generator's layout); otherwise the CSV is read.
    """
    if cfg.synthetic is not None:
        syn = cfg.synthetic
        ds = generate_synthetic(
            n=int(syn.get("n", 300)),
            seed=int(syn.get("seed", 0)),
            n_continuous=int(syn.get("continuous", 8)),
            n_integer=int(syn.get("integer", 0)),
            n_categorical=int(syn.get("categorical", 0)),
        )
        if [(f.name, f.kind) for f in ds.schema] != [(f.name, f.kind) for f in cfg.schema]:
            raise ConfigError("declared schema does not match synthetic layout")
        return Dataset(cfg.schema, ds.instances, role="train")
    if not cfg.csv_path:
        raise ConfigError("dataset config has neither csv nor synthetic source")
    return load_dataset(
        cfg.csv_path,
        cfg.schema,
        cfg.class_column,
        cfg.positive_label,
        missing_tokens=cfg.missing_tokens,
    )
