"""
The four objectives, and the resilience extension
=================================================

Everything the search minimizes, computed by hand on tiny inputs, plus
a univariate resilience walk shown step by step.
"""

import numpy as np

from lexcf import (
    EvalContext,
    FeatureSchema,
    LearnerConfig,
    compute_feature_stats,
    generate_synthetic,
    gower_dist,
    obj_distance,
    obj_plausibility,
    obj_sparsity,
    obj_validity,
    resilience_scores,
    resilience_step,
    split_dataset,
    train_model,
)
from lexcf.data import CATEGORICAL, CONTINUOUS
from lexcf.objectives import evaluate_with_report

# ------------------------------------------------------------------ Gower
# numeric features compare as range-normalized absolute difference,
# categorical ones as a plain inequality indicator
schema = (
    FeatureSchema("income", CONTINUOUS),
    FeatureSchema("housing", CATEGORICAL, categories=("own", "rent")),
)
from lexcf.data import FeatureStats

stats = (FeatureStats(lower=0.0, upper=10.0), FeatureStats(categories=("own", "rent")))
print("numeric  |3-8|/10      ->", gower_dist(schema, stats, 3.0, 8.0, 0))
print("category own vs rent   ->", gower_dist(schema, stats, "own", "rent", 1))
print("category own vs own    ->", gower_dist(schema, stats, "own", "own", 1))

# ------------------------------------------------- the objective vector
# o1 validity: distance of the predicted probability below the 0.5 target
print("\nvalidity at p=0.35 ->", obj_validity(0.35))
print("validity at p=0.50 ->", obj_validity(0.50))

ds = generate_synthetic(300, seed=1, n_continuous=3)
train, _ = split_dataset(ds, test_cap=1.0 / 3.0, seed=1)
tstats = compute_feature_stats(train)
x_pt = train.instances[0].values
x_cf = (x_pt[0] + 2.0, x_pt[1], x_pt[2])

# o2 mean Gower to the point of interest, o3 changed-feature count,
# o4 min mean Gower to any training row
print("distance    ->", obj_distance(x_cf, x_pt, train.schema, tstats))
print("sparsity    ->", obj_sparsity(x_cf, x_pt, train.schema))
print("plausibility->", obj_plausibility(x_cf, train, train.schema, tstats))

# ------------------------------------------------------ resilience walk
# a recommendation is resilient when overshooting it keeps the positive
# class: walk each changed numeric feature toward its bound in tenths
# and count how many pushed values stay positive
print("\nstep toward upper bound 100 from 50 ->", resilience_step(50.0, 0.0, 100.0, False))
print("integer step rounding               ->", resilience_step(4.0, 0.0, 5.0, True))

model = train_model(train, LearnerConfig("random_forest", {"ntree": 30}, seed=2))
negatives = [
    inst.values for inst in train.instances if model.predict_class(inst.values) == 0
]


def flip_one_feature(x_pt):
    # walk each feature toward each bound until the prediction flips
    for j, st in enumerate(tstats):
        for target in (st.upper, st.lower):
            for frac in np.linspace(0.1, 1.0, 10):
                v = x_pt[j] + float(frac) * (target - x_pt[j])
                x = x_pt[:j] + (v,) + x_pt[j + 1 :]
                if model.predict_class(x) == 1:
                    return x
    return None


x_pt, x_cf = next(
    (p, c) for p, c in ((p, flip_one_feature(p)) for p in negatives) if c is not None
)

report = resilience_scores(x_cf, x_pt, model, train.schema, tstats)
for f in report.features:
    print(
        "feature %d: step %+0.2f, %d/%d pushed values stay valid, score %.2f"
        % (f.index, f.step, f.steps_successful, f.steps_max, f.score)
    )
print("mean resilience ->", report.mean)

# under the resilient variant a valid candidate scores 0 - mean, so more
# resilient counterfactuals sort strictly better
ctx = EvalContext(x_pt, model, train, tstats, resilience=True)
vec, _ = evaluate_with_report(x_cf, ctx)
print("extended validity objective ->", vec.o1)
