import numpy as np
import pytest

from lexcf.data import (
    CATEGORICAL,
    CONTINUOUS,
    INTEGER,
    Dataset,
    FeatureSchema,
    Instance,
    compute_feature_stats,
    generate_synthetic,
    load_configured_dataset,
    load_dataset,
    load_dataset_config,
    parse_value,
    schema_fingerprint,
    split_dataset,
)
from lexcf.errors import ConfigError, DataError, ParseError, SchemaError

from conftest import make_dataset, numeric_schema


def test_schema_rejects_bad_kind():
    with pytest.raises(SchemaError):
        FeatureSchema("x", "ordinal")


def test_schema_categorical_needs_categories():
    with pytest.raises(SchemaError):
        FeatureSchema("x", CATEGORICAL)
    with pytest.raises(SchemaError):
        FeatureSchema("x", CONTINUOUS, categories=("a",))


def test_parse_value_kinds():
    cont = FeatureSchema("c", CONTINUOUS)
    intf = FeatureSchema("i", INTEGER)
    catf = FeatureSchema("k", CATEGORICAL, categories=("a", "b"))
    assert parse_value("2.5", cont, 0) == 2.5
    assert parse_value("3", intf, 0) == 3.0
    assert parse_value("a", catf, 0) == "a"
    with pytest.raises(ParseError):
        parse_value("2.5", intf, 4)
    with pytest.raises(ParseError):
        parse_value("oops", cont, 4)
    with pytest.raises(ParseError):
        parse_value("z", catf, 4)


def test_dataset_rejects_nonbinary_labels():
    schema = numeric_schema(1)
    with pytest.raises(DataError):
        Dataset(schema, [Instance((1.0,), 2)])


def test_dataset_rejects_wrong_width():
    schema = numeric_schema(2)
    with pytest.raises(SchemaError):
        Dataset(schema, [Instance((1.0,), 0)])


def _write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


BASIC_SCHEMA = (
    FeatureSchema("age", INTEGER),
    FeatureSchema("income", CONTINUOUS),
    FeatureSchema("job", CATEGORICAL, categories=("clerk", "coder")),
)


def test_load_dataset_roundtrip(tmp_path):
    path = _write_csv(
        tmp_path / "d.csv",
        "age,income,job,outcome\n30,50.5,clerk,good\n41,61.0,coder,bad\n",
    )
    ds = load_dataset(path, BASIC_SCHEMA, "outcome", "good")
    assert len(ds) == 2
    assert ds.instances[0].values == (30.0, 50.5, "clerk")
    assert ds.instances[0].label == 1
    assert ds.instances[1].label == 0


def test_load_dataset_header_order_free(tmp_path):
    path = _write_csv(
        tmp_path / "d.csv",
        "outcome,job,income,age\ngood,coder,10.0,25\n",
    )
    ds = load_dataset(path, BASIC_SCHEMA, "outcome", "good")
    # values come back in schema order regardless of column order
    assert ds.instances[0].values == (25.0, 10.0, "coder")


def test_load_dataset_header_mismatch(tmp_path):
    path = _write_csv(tmp_path / "d.csv", "age,income,outcome\n30,5.0,good\n")
    with pytest.raises(SchemaError):
        load_dataset(path, BASIC_SCHEMA, "outcome", "good")
    path2 = _write_csv(
        tmp_path / "e.csv",
        "age,income,job,extra,outcome\n30,5.0,clerk,x,good\n",
    )
    with pytest.raises(SchemaError):
        load_dataset(path2, BASIC_SCHEMA, "outcome", "good")


def test_load_dataset_drops_missing_rows(tmp_path):
    path = _write_csv(
        tmp_path / "d.csv",
        "age,income,job,outcome\n30,?,clerk,good\n40,4.0,coder,bad\n,5.0,clerk,good\n",
    )
    ds = load_dataset(path, BASIC_SCHEMA, "outcome", "good")
    assert len(ds) == 1
    assert ds.instances[0].values == (40.0, 4.0, "coder")


def test_load_dataset_too_many_classes(tmp_path):
    path = _write_csv(
        tmp_path / "d.csv",
        "age,income,job,outcome\n30,1.0,clerk,good\n31,1.0,clerk,bad\n32,1.0,clerk,ugly\n",
    )
    with pytest.raises(DataError):
        load_dataset(path, BASIC_SCHEMA, "outcome", "good")


def _trivial_dataset(n):
    schema = numeric_schema(1)
    return make_dataset(schema, [[float(i)] for i in range(n)], [i % 2 for i in range(n)])


@pytest.mark.parametrize(
    "n,cap,expected_test,expected_train",
    [
        # small datasets are configured with the one-third fraction, large
        # ones with the flat 500-instance cap
        (522, 1.0 / 3.0, 174, 348),
        (392, 1.0 / 3.0, 130, 262),
        (9871, 500, 500, 9371),
        (30162, 500, 500, 29662),
        (1501, 500, 500, 1001),  # the cap binds exactly at the regime edge
    ],
)
def test_split_sizes_match_cap_and_third(n, cap, expected_test, expected_train):
    train, test = split_dataset(_trivial_dataset(n), test_cap=cap, seed=0)
    assert len(test) == expected_test
    assert len(train) == expected_train


def test_split_float_cap_is_fraction():
    train, test = split_dataset(_trivial_dataset(450), test_cap=1.0 / 3.0, seed=0)
    assert len(test) == 150
    assert len(train) == 300


def test_split_partition_and_order():
    ds = _trivial_dataset(40)
    train, test = split_dataset(ds, test_cap=10, seed=3)
    train_vals = [inst.values[0] for inst in train]
    test_vals = [inst.values[0] for inst in test]
    assert sorted(train_vals + test_vals) == [float(i) for i in range(40)]
    assert not set(train_vals) & set(test_vals)
    # both sides preserve the original row order
    assert train_vals == sorted(train_vals)
    assert test_vals == sorted(test_vals)


def test_split_deterministic():
    ds = _trivial_dataset(60)
    a = split_dataset(ds, test_cap=15, seed=9)
    b = split_dataset(ds, test_cap=15, seed=9)
    c = split_dataset(ds, test_cap=15, seed=10)
    assert [i.values for i in a[1]] == [i.values for i in b[1]]
    assert [i.values for i in a[1]] != [i.values for i in c[1]]


def test_split_rejects_bad_caps():
    ds = _trivial_dataset(10)
    with pytest.raises(ConfigError):
        split_dataset(ds, test_cap=10)
    with pytest.raises(ConfigError):
        split_dataset(ds, test_cap=0)
    with pytest.raises(ConfigError):
        split_dataset(ds, test_cap=1.5)


def test_compute_feature_stats():
    schema = (
        FeatureSchema("x", CONTINUOUS),
        FeatureSchema("k", CATEGORICAL, categories=("a", "b", "c")),
    )
    ds = make_dataset(schema, [[1.0, "c"], [4.0, "a"], [2.5, "c"]], [0, 1, 0])
    stats = compute_feature_stats(ds)
    assert stats[0].lower == 1.0 and stats[0].upper == 4.0
    assert stats[0].range == 3.0
    # observed categories only, kept in declared order
    assert stats[1].categories == ("a", "c")


def test_generate_synthetic_balanced_and_deterministic():
    ds = generate_synthetic(100, seed=5, n_continuous=3, n_integer=2, n_categorical=1)
    assert len(ds) == 100
    assert len(ds.schema) == 6
    labels = ds.labels()
    assert labels.sum() == 50  # median threshold splits an even n in half
    again = generate_synthetic(100, seed=5, n_continuous=3, n_integer=2, n_categorical=1)
    assert [i.values for i in ds] == [i.values for i in again]
    other = generate_synthetic(100, seed=6, n_continuous=3, n_integer=2, n_categorical=1)
    assert [i.values for i in ds] != [i.values for i in other]


def test_generate_synthetic_integer_values_are_integral():
    ds = generate_synthetic(30, seed=1, n_continuous=0, n_integer=3)
    for inst in ds:
        for v in inst.values:
            assert v == int(v)
            assert 0.0 <= v <= 10.0


def test_schema_fingerprint_sensitivity():
    a = (FeatureSchema("x", CONTINUOUS), FeatureSchema("y", INTEGER))
    b = (FeatureSchema("x", CONTINUOUS), FeatureSchema("y", CONTINUOUS))
    c = (FeatureSchema("x", CONTINUOUS), FeatureSchema("y", INTEGER))
    fa, fb, fc = map(schema_fingerprint, (a, b, c))
    assert fa == fc
    assert fa != fb
    assert len(fa) == 16 and all(ch in "0123456789abcdef" for ch in fa)


def test_fingerprint_ignores_actionability():
    a = (FeatureSchema("x", CONTINUOUS, actionable=True),)
    b = (FeatureSchema("x", CONTINUOUS, actionable=False),)
    assert schema_fingerprint(a) == schema_fingerprint(b)


DATASET_YAML = """
name: toy
csv: toy.csv
class_column: outcome
positive_label: good
non_actionable: [age]
features:
  - {name: age, kind: integer}
  - {name: income, kind: continuous}
  - {name: job, kind: categorical, categories: [clerk, coder]}
test_cap: 2
split_seed: 4
"""


def test_load_dataset_config(tmp_path):
    cfg_path = tmp_path / "toy.yaml"
    cfg_path.write_text(DATASET_YAML, encoding="utf-8")
    _write_csv(
        tmp_path / "toy.csv",
        "age,income,job,outcome\n30,5.0,clerk,good\n40,6.0,coder,bad\n"
        "50,7.0,clerk,bad\n60,8.0,coder,good\n",
    )
    cfg = load_dataset_config(str(cfg_path))
    assert cfg.name == "toy"
    assert cfg.test_cap == 2
    assert cfg.split_seed == 4
    by_name = {f.name: f for f in cfg.schema}
    assert not by_name["age"].actionable
    assert by_name["income"].actionable
    ds = load_configured_dataset(cfg)
    assert len(ds) == 4
    assert ds.instances[0].values == (30.0, 5.0, "clerk")


def test_dataset_config_preset(tmp_path):
    text = DATASET_YAML.replace("non_actionable: [age]", "non_actionable: preset:german_credit")
    text = text.replace("- {name: income, kind: continuous}", "- {name: sex, kind: categorical, categories: [f, m]}")
    cfg_path = tmp_path / "toy.yaml"
    cfg_path.write_text(text, encoding="utf-8")
    cfg = load_dataset_config(str(cfg_path))
    by_name = {f.name: f for f in cfg.schema}
    assert not by_name["age"].actionable
    assert not by_name["sex"].actionable
    assert by_name["job"].actionable


def test_dataset_config_unknown_preset(tmp_path):
    text = DATASET_YAML.replace("preset:german_credit", "preset:nonesuch").replace(
        "non_actionable: [age]", "non_actionable: preset:nonesuch"
    )
    cfg_path = tmp_path / "bad.yaml"
    cfg_path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_dataset_config(str(cfg_path))


def test_dataset_config_unknown_non_actionable_name(tmp_path):
    text = DATASET_YAML.replace("non_actionable: [age]", "non_actionable: [height]")
    cfg_path = tmp_path / "bad.yaml"
    cfg_path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_dataset_config(str(cfg_path))


SYNTH_YAML = """
name: synth
class_column: label
positive_label: "1"
synthetic: {n: 40, seed: 3, continuous: 2, integer: 1}
features:
  - {name: num0, kind: continuous}
  - {name: num1, kind: continuous}
  - {name: int0, kind: integer, actionable: false}
"""


def test_configured_synthetic_dataset(tmp_path):
    cfg_path = tmp_path / "synth.yaml"
    cfg_path.write_text(SYNTH_YAML, encoding="utf-8")
    cfg = load_dataset_config(str(cfg_path))
    ds = load_configured_dataset(cfg)
    assert len(ds) == 40
    # actionability comes from the declared schema, not the generator
    assert not ds.schema[2].actionable


def test_configured_synthetic_schema_mismatch(tmp_path):
    text = SYNTH_YAML.replace("{n: 40, seed: 3, continuous: 2, integer: 1}",
                              "{n: 40, seed: 3, continuous: 3, integer: 0}")
    cfg_path = tmp_path / "synth.yaml"
    cfg_path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_configured_dataset(load_dataset_config(str(cfg_path)))
