"""Reproduce the ablation ordering on a synthetic benchmark.

Generates the desk-scale corpus (16-d embeddings, 10 ambiguous labels
with 3 senses each, 30-turn cases), replays every case under the full
model and the two ablations, and prints the resulting accuracies and
mean final gold confidences.  Expected ordering: full > fewer_particles
> no_kalman.

Run:  python3 demos/benchmark_ablations.py [--quick]
"""

import argparse
import time

import numpy as np

from sensetrack.engine import SessionConfig
from sensetrack.harness import (
    SyntheticSpec,
    aggregate,
    generate_synthetic,
    run_case,
)

parser = argparse.ArgumentParser()
parser.add_argument(
    "--quick", action="store_true",
    help="3 labels / 1 case each instead of the full 50-case benchmark",
)
args = parser.parse_args()

spec = SyntheticSpec()
if args.quick:
    spec = SyntheticSpec(n_labels=3, cases_per_label=1)

rng = np.random.default_rng(42)
store, inventory, cases = generate_synthetic(spec, rng)
cfg = SessionConfig(dim=spec.dim, seed=7)
print(f"{len(cases)} cases, {len(store)} vectors, dim {spec.dim}\n")

for mode in ("full", "no_kalman", "fewer_particles"):
    t0 = time.time()
    results = [run_case(c, store, inventory, cfg, mode) for c in cases]
    bundle = aggregate(results)
    print(
        f"{mode:>16s}: accuracy {bundle['accuracy']:.3f}  "
        f"mean final gold confidence {bundle['mean_final_gold_confidence']:.3f}  "
        f"({time.time() - t0:.0f}s)"
    )

print("\nper-turn mean gold confidence (full mode):")
results = [run_case(c, store, inventory, cfg, "full") for c in cases[:10]]
bundle = aggregate(results)
for i, m in enumerate(bundle["per_turn_mean"]):
    print(f"  turn {i:2d}  {'#' * int(m * 40):<40s} {m:.2f}")
