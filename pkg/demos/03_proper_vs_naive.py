"""Honest and optimistic evaluation of a selection-plus-ridge pipeline.

The naive protocol selects predictors once on the full dataset and only
cross-validates the ridge fit; the proper protocol repeats the selection
inside every leave-one-out fold so the holdout never influences it.  With a
real planted signal the full-data selection is simply better informed and the
naive estimate drifts upward; the per-fold audit confirms the proper run
never touched a holdout row before predicting it.

Run: python3 demos/03_proper_vs_naive.py
"""

import warnings

from itcridge import (
    ITCConfig,
    KMeansConfig,
    PipelineSpec,
    SynthConfig,
    generate_synthetic,
    naive_loo_cv,
    proper_loo_cv,
    subseed,
)


def evaluate(delta: float, seed: int):
    cfg = SynthConfig(m=60, n=500, n_informative=20, delta=delta, seed=seed)
    dataset, _ = generate_synthetic(cfg)
    spec = PipelineSpec(
        itc=ITCConfig(kmeans=KMeansConfig(k=2, seed=subseed(seed, "kmeans")))
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        naive = naive_loo_cv(dataset, spec)
        proper = proper_loo_cv(dataset, spec)
    return naive, proper


print("planted signal (delta = 2), seeds 0-4:")
print(f"{'seed':>6}  {'naive %':>8}  {'proper %':>9}  {'gap':>6}  audit")
for seed in range(5):
    naive, proper = evaluate(2.0, seed)
    print(f"{seed:>6}  {naive.correct_pct:>8.2f}  {proper.correct_pct:>9.2f}  "
          f"{naive.correct_pct - proper.correct_pct:>+6.2f}  "
          f"clean={proper.audit_clean}")
print()
print("protocols:", repr(naive.protocol), "vs", repr(proper.protocol))
print()

print("pure-noise response (delta = 0), seeds 0-2:")
print(f"{'seed':>6}  {'naive %':>8}  {'proper %':>9}  {'gap':>6}")
for seed in range(3):
    naive, proper = evaluate(0.0, seed)
    print(f"{seed:>6}  {naive.correct_pct:>8.2f}  {proper.correct_pct:>9.2f}  "
          f"{naive.correct_pct - proper.correct_pct:>+6.2f}")
print()
print("Without signal both protocols hover around chance and neither direction")
print("is systematic: the thinning loop clusters predictors without ever seeing")
print("the response, so full-data selection has nothing response-specific to leak.")
