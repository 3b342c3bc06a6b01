"""Experimental protocol: point-of-interest sampling, paired runs across
strategies and validity variants, aggregation, and report files.

Raw per-point records are persisted line-delimited before any
aggregation; every table can be recomputed from them alone.
"""

import csv
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import yaml

from .data import (
    NEGATIVE,
    compute_feature_stats,
    load_configured_dataset,
    load_dataset_config,
    split_dataset,
)
from .ea import STRATEGIES, STRATEGY_ORDERINGS, EAConfig, run_paired
from .errors import ConfigError, InvariantViolation
from .model import LearnerConfig, train_model, tune_random_search
from .objectives import EvalContext
from .selection import FIRST_BETTER, SECOND_BETTER, lex_compare, pareto_dominates

BASE = "base"
RESILIENT = "resilient"
VARIANTS = (BASE, RESILIENT)

OBJECTIVE_NAMES = ("o1_validity", "o2_distance", "o3_sparsity", "o4_plausibility")

LEX_STRATEGIES = ("lex1", "lex2")


@dataclass
class ExperimentConfig:
    dataset: object  # DatasetConfig
    learner: str = "random_forest"
    learner_params: dict = None
    tune_trials: int = 0
    max_pois: int = 50
    variants: tuple = VARIANTS
    strategies: tuple = STRATEGIES
    master_seed: int = 0
    output_dir: str = ""
    ea: EAConfig = None
    debug: bool = False

    def __post_init__(self):
        if self.max_pois < 1:
            raise ConfigError("max_pois must be >= 1")
        if self.learner_params is None:
            self.learner_params = {}
        if self.ea is None:
            self.ea = EAConfig()
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise ConfigError("unknown validity variants: %s" % bad)
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ConfigError("unknown strategies: %s" % bad)


@dataclass
class ExperimentReport:
    dataset_id: str
    master_seed: int
    strategies: tuple
    variants: tuple
    theta: float
    poi_count: int
    records: tuple
    aggregates: dict
    model_info: dict


def stable_seed(*parts):
    """63-bit seed from a stable hash of the joined parts."""
    blob = ":".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big") & ((1 << 63) - 1)


def sample_points_of_interest(model, test, max_n, rng):
    """Draw test instances without replacement, keeping those the model
    predicts negative, until max_n keepers or the pool runs dry."""
    if len(test) == 0:
        return []
    preds = model.predict_class_batch([inst.values for inst in test.instances])
    pois = []
    for idx in rng.permutation(len(test)):
        if preds[idx] == NEGATIVE:
            pois.append(test.instances[idx])
            if len(pois) == max_n:
                break
    return pois


def valid_fraction(solutions):
    """Fraction of solutions whose validity objective is at or below zero;
    None for an empty list."""
    if not solutions:
        return None
    vectors = [getattr(s, "objectives", s) for s in solutions]
    return sum(1 for v in vectors if v[0] <= 0) / len(vectors)


def compare_pareto(lex_solutions, par_solutions):
    """Win-loss-tie over all cross pairs under Pareto dominance."""
    if not lex_solutions or not par_solutions:
        return None
    w = l = t = 0
    for a in lex_solutions:
        for b in par_solutions:
            if pareto_dominates(a, b):
                w += 1
            elif pareto_dominates(b, a):
                l += 1
            else:
                t += 1
    return (w, l, t)


def compare_lex(lex_solutions, par_solutions, ordering, theta):
    """Win-loss-tie over all cross pairs under lexicographic comparison;
    ties require all four objectives exactly equal."""
    if not lex_solutions or not par_solutions:
        return None
    w = l = t = 0
    for a in lex_solutions:
        for b in par_solutions:
            outcome = lex_compare(a, b, ordering, theta)
            if outcome == FIRST_BETTER:
                w += 1
            elif outcome == SECOND_BETTER:
                l += 1
            else:
                t += 1
    return (w, l, t)


def _record(poi_index, variant, strategy, result):
    return {
        "poi": poi_index,
        "variant": variant,
        "strategy": strategy,
        "generations": result.generations_executed,
        "solutions": [
            {"values": list(c.values), "objectives": list(c.objectives)}
            for c in result.solutions
        ],
    }


def aggregate_records(records, strategies, variants, theta):
    """Pure fold from raw records to every table cell.

    Validity cells carry pooled (micro) fractions plus the mean of per-point
    fractions (macro). Cross-strategy cells are computed per point only when
    all three strategies returned solutions there; skipped points are
    counted.
    """
    by_cell = {}
    for rec in records:
        by_cell.setdefault((rec["variant"], rec["strategy"]), {})[rec["poi"]] = rec

    aggregates = {
        "validity": {},
        "objective_means": {},
        "wlt_pareto": {},
        "wlt_lex": {},
        "pairs": {},
        "skipped": {},
        "generations": {},
    }
    for variant in variants:
        aggregates["validity"][variant] = {}
        aggregates["objective_means"][variant] = {}
        pois = sorted(
            {rec["poi"] for rec in records if rec["variant"] == variant}
        )
        for strategy in strategies:
            cell = by_cell.get((variant, strategy), {})
            pooled = [
                tuple(sol["objectives"])
                for poi in pois
                for sol in cell.get(poi, {"solutions": []})["solutions"]
            ]
            per_poi = [
                valid_fraction([tuple(s["objectives"]) for s in cell[poi]["solutions"]])
                for poi in pois
                if poi in cell and cell[poi]["solutions"]
            ]
            aggregates["validity"][variant][strategy] = {
                "returned": len(pooled),
                "pois": len(pois),
                "valid": sum(1 for v in pooled if v[0] <= 0),
                "micro": valid_fraction(pooled),
                "macro": float(np.mean(per_poi)) if per_poi else None,
            }
            aggregates["objective_means"][variant][strategy] = (
                [float(np.mean([v[j] for v in pooled])) for j in range(4)]
                if pooled
                else None
            )

        gens = {}
        for poi in pois:
            counts = {
                s: by_cell.get((variant, s), {}).get(poi, {}).get("generations")
                for s in STRATEGIES
                if (variant, s) in by_cell and poi in by_cell[(variant, s)]
            }
            gens[poi] = counts
            if len(set(counts.values())) > 1:
                raise InvariantViolation(
                    "generation budgets differ at poi %d: %r" % (poi, counts)
                )
        aggregates["generations"][variant] = gens

        aggregates["wlt_pareto"][variant] = {}
        aggregates["wlt_lex"][variant] = {}
        aggregates["pairs"][variant] = {}
        usable = [
            poi
            for poi in pois
            if all(
                (variant, s) in by_cell
                and poi in by_cell[(variant, s)]
                and by_cell[(variant, s)][poi]["solutions"]
                for s in STRATEGIES
            )
        ]
        aggregates["skipped"][variant] = len(pois) - len(usable)
        for lex_strategy in LEX_STRATEGIES:
            if lex_strategy not in strategies or "par" not in strategies:
                continue
            totals_p = [0, 0, 0]
            totals_l = [0, 0, 0]
            pairs = 0
            for poi in usable:
                lex_sols = [
                    tuple(s["objectives"])
                    for s in by_cell[(variant, lex_strategy)][poi]["solutions"]
                ]
                par_sols = [
                    tuple(s["objectives"])
                    for s in by_cell[(variant, "par")][poi]["solutions"]
                ]
                pairs += len(lex_sols) * len(par_sols)
                wp = compare_pareto(lex_sols, par_sols)
                wl = compare_lex(
                    lex_sols, par_sols, STRATEGY_ORDERINGS[lex_strategy], theta
                )
                for j in range(3):
                    totals_p[j] += wp[j]
                    totals_l[j] += wl[j]
            aggregates["pairs"][variant][lex_strategy] = pairs
            aggregates["wlt_pareto"][variant][lex_strategy] = (
                tuple(totals_p) if pairs else None
            )
            aggregates["wlt_lex"][variant][lex_strategy] = (
                tuple(totals_l) if pairs else None
            )
    return aggregates


def _build_model(cfg, train):
    params = dict(cfg.learner_params)
    if cfg.tune_trials > 0:
        tuned = tune_random_search(
            cfg.learner,
            train,
            n_trials=cfg.tune_trials,
            seed=stable_seed(cfg.master_seed, "tune"),
        )
        params = {**tuned.params, **params}
    learner_cfg = LearnerConfig(
        cfg.learner, params, seed=stable_seed(cfg.master_seed, "train")
    )
    return train_model(train, learner_cfg), learner_cfg


def _poi_worker(cfg, model, train, stats, pois, dataset_id):
    def run_one(index):
        poi = pois[index]
        seed = stable_seed(cfg.master_seed, dataset_id, index)
        out = []
        for variant in cfg.variants:
            resilient = variant == RESILIENT
            ctx = EvalContext(poi, model, train, stats, resilience=resilient)
            base = replace(cfg.ea, resilience=resilient, seed=seed, debug=cfg.debug)
            results = run_paired(ctx, base)
            for strategy, result in zip(STRATEGIES, results):
                out.append(_record(index, variant, strategy, result))
        return out

    return run_one


def run_experiment(cfg):
    """Train the model, sample points of interest, run every strategy and
    variant on each, and fold the raw records into report aggregates."""
    dataset = load_configured_dataset(cfg.dataset)
    train, test = split_dataset(
        dataset, cfg.dataset.test_cap, cfg.dataset.split_seed
    )
    stats = compute_feature_stats(train)
    model, learner_cfg = _build_model(cfg, train)
    dataset_id = cfg.dataset.name

    rng = np.random.default_rng(stable_seed(cfg.master_seed, dataset_id, "poi-sample"))
    pois = sample_points_of_interest(model, test, cfg.max_pois, rng)

    run_one = _poi_worker(cfg, model, train, stats, pois, dataset_id)
    threads = int(os.environ.get("LEXCF_THREADS", "1") or "1")
    if threads > 1 and len(pois) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(run_one, range(len(pois))))
    else:
        chunks = [run_one(i) for i in range(len(pois))]
    records = [rec for chunk in chunks for rec in chunk]

    if cfg.output_dir:
        os.makedirs(cfg.output_dir, exist_ok=True)
        write_records(records, os.path.join(cfg.output_dir, "records.ndjson"))

    aggregates = aggregate_records(records, cfg.strategies, cfg.variants, cfg.ea.theta)
    return ExperimentReport(
        dataset_id=dataset_id,
        master_seed=cfg.master_seed,
        strategies=tuple(cfg.strategies),
        variants=tuple(cfg.variants),
        theta=cfg.ea.theta,
        poi_count=len(pois),
        records=tuple(records),
        aggregates=aggregates,
        model_info={
            "learner": learner_cfg.learner,
            "params": learner_cfg.params,
            "train_rows": len(train),
            "test_rows": len(test),
            "train_accuracy": model.accuracy(train),
        },
    )


def write_records(records, path):
    with open(path, "w", encoding="utf-8") as handle:
        for rec in records:
            handle.write(json.dumps(rec, sort_keys=True))
            handle.write("\n")


def read_records(path):
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _write_table(path_base, fmt, header, rows):
    if fmt == "csv":
        with open(path_base + ".csv", "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
        return path_base + ".csv"
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("| " + " | ".join("---" for _ in header) + " |")
    for row in rows:
        lines.append("| " + " | ".join(str(c) for c in row) + " |")
    with open(path_base + ".md", "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    return path_base + ".md"


def _fmt_pct(fraction):
    return "" if fraction is None else "%.1f%%" % (100.0 * fraction)


def _validity_rows(report):
    rows = []
    agg = report.aggregates["validity"]
    for variant in report.variants:
        row = [variant]
        for strategy in report.strategies:
            cell = agg[variant][strategy]
            if cell["returned"] == 0:
                row.append("")
            else:
                mean_count = cell["returned"] / cell["pois"]
                row.append("%.2f (%s)" % (mean_count, _fmt_pct(cell["micro"])))
        for strategy in report.strategies:
            row.append(_fmt_pct(agg[variant][strategy]["macro"]))
        rows.append(row)
    return rows


def _objective_rows(report):
    rows = []
    agg = report.aggregates["objective_means"]
    for variant in report.variants:
        for j, name in enumerate(OBJECTIVE_NAMES):
            row = [variant, name]
            for strategy in report.strategies:
                means = agg[variant][strategy]
                row.append("" if means is None else "%.6f" % means[j])
            rows.append(row)
    return rows


def _wlt_rows(report, key, lex_cols):
    rows = []
    agg = report.aggregates[key]
    for variant in report.variants:
        row = [variant]
        for strategy in lex_cols:
            wlt = agg[variant].get(strategy)
            row.append("" if wlt is None else "%d; %d; %d" % tuple(wlt))
        rows.append(row)
    return rows


def emit_report(report, fmt, out_dir):
    """Write the four table files in the requested format; returns paths."""
    if fmt not in ("csv", "markdown"):
        raise ConfigError("format must be csv or markdown, not %r" % fmt)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    header = (
        ["variant"]
        + list(report.strategies)
        + ["%s_macro" % s for s in report.strategies]
    )
    rows = _validity_rows(report) if report.poi_count else []
    paths.append(_write_table(os.path.join(out_dir, "validity"), fmt, header, rows))

    header = ["variant", "objective"] + list(report.strategies)
    rows = _objective_rows(report) if report.poi_count else []
    paths.append(_write_table(os.path.join(out_dir, "objectives"), fmt, header, rows))

    lex_cols = [s for s in LEX_STRATEGIES if s in report.strategies]
    for key, stem in (("wlt_pareto", "pareto_wlt"), ("wlt_lex", "lex_wlt")):
        rows = _wlt_rows(report, key, lex_cols) if report.poi_count else []
        header = ["variant"] + list(lex_cols)
        paths.append(_write_table(os.path.join(out_dir, stem), fmt, header, rows))
    return paths


def write_meta(report, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    meta = {
        "dataset": report.dataset_id,
        "master_seed": report.master_seed,
        "strategies": list(report.strategies),
        "variants": list(report.variants),
        "theta": report.theta,
        "poi_count": report.poi_count,
        "empty": report.poi_count == 0,
        "pairs": report.aggregates["pairs"],
        "skipped": report.aggregates["skipped"],
        "model": report.model_info,
    }
    path = os.path.join(out_dir, "meta.json")
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)
    return path


def load_experiment_config(path):
    """Parse a YAML experiment config; the dataset reference is resolved
    relative to the config file."""
    with open(path, encoding="utf-8") as handle:
        raw = yaml.safe_load(handle)
    if not isinstance(raw, dict):
        raise ConfigError("experiment config %s is not a mapping" % path)
    if "dataset" not in raw:
        raise ConfigError("experiment config needs a dataset reference")
    ds_ref = raw["dataset"]
    if not os.path.isabs(ds_ref):
        ds_ref = os.path.join(os.path.dirname(os.path.abspath(path)), ds_ref)
    dataset = load_dataset_config(ds_ref)

    ea_raw = raw.get("ea", {})
    if not isinstance(ea_raw, dict):
        raise ConfigError("ea section must be a mapping")
    ea_cfg = EAConfig(**ea_raw)

    variants = []
    for v in raw.get("variants", ["base", "resilient"]):
        token = str(v).lower()
        if token in ("base", "without", "off", "false"):
            variants.append(BASE)
        elif token in ("resilient", "with", "on", "true"):
            variants.append(RESILIENT)
        else:
            raise ConfigError("unknown validity variant %r" % v)

    return ExperimentConfig(
        dataset=dataset,
        learner=raw.get("learner", "random_forest"),
        learner_params=raw.get("learner_params", {}) or {},
        tune_trials=int(raw.get("tune_trials", 0)),
        max_pois=int(raw.get("max_pois", 50)),
        variants=tuple(dict.fromkeys(variants)),
        strategies=tuple(raw.get("strategies", list(STRATEGIES))),
        master_seed=int(raw.get("master_seed", 0)),
        output_dir=raw.get("output_dir", ""),
        ea=ea_cfg,
        debug=bool(raw.get("debug", False)),
    )
