"""Acquire a word sense that is missing from the inventory.

The session is created with the gold sense deliberately removed, so no
inventory candidate can explain the conversation.  Particles hypothesize
a brand-new sense seeded from what the conversation is about; its
confidence starts at exactly zero (the ramp gates it off at t=0) and
grows as the inventory senses keep failing to fit.

Run:  python3 demos/new_sense_discovery.py
"""

import numpy as np

from sensetrack.engine import Session, SessionConfig, Utterance
from sensetrack.harness import SyntheticSpec, generate_synthetic

spec = SyntheticSpec(n_labels=1, cases_per_label=1)
rng = np.random.default_rng(42)
store, inventory, cases = generate_synthetic(spec, rng)
case = cases[0]

# withhold the sense the conversation is actually about
holdout = inventory.without_sense(case.target_label, case.gold_sense)
print(
    f"target {case.target_label!r}: gold sense {case.gold_sense!r} removed, "
    f"{holdout.n_senses(case.target_label)} decoys remain\n"
)

session = Session(
    SessionConfig(dim=spec.dim, seed=7), store, holdout, [case.target_label]
)

for utt in case.turns:
    session.process_turn(utt)
    rep = session.confidence(case.target_label)
    new_mass = sum(c for sid, c in rep.per_sense.items() if sid.startswith("new@"))
    inv_mass = 1.0 - new_mass
    print(
        f"  t={utt.t:2d}  inventory {'#' * int(inv_mass * 30):<30s}"
        f"  new {'#' * int(new_mass * 30):<30s} {new_mass:.2f}"
    )

best = session.best_assignments()
print(f"\nbest assignment: {best}")
if best.get(case.target_label, "").startswith("new@"):
    print("the spawned sense won: the engine invented the missing meaning")
