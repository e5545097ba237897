"""Walk through one conversation and watch the interpretation sharpen.

A tiny hand-made vocabulary: "mouse" can be a rodent or a pointing
device.  One speaker keeps talking about cables and clicks; the engine's
confidence in the device sense should climb turn by turn, and the best
particle's assignment should settle on it.

Run:  python3 demos/track_conversation.py
"""

import numpy as np

from sensetrack.engine import Session, SessionConfig, Utterance
from sensetrack.vectors import VectorStore, inventory_from_store


def unit(*xs):
    v = np.array(xs, dtype=float)
    return v / np.linalg.norm(v)


# 6-d toy embedding: first three axes "animal-ish", last three "computer-ish"
vectors = {
    "mouse#rodent": unit(1.0, 0.8, 0.6, 0.0, 0.0, 0.0),
    "mouse#device": unit(0.0, 0.0, 0.1, 1.0, 0.8, 0.6),
    "cheese":       unit(0.9, 1.0, 0.4, 0.0, 0.1, 0.0),
    "tail":         unit(0.7, 0.6, 1.0, 0.0, 0.0, 0.1),
    "cable":        unit(0.0, 0.1, 0.0, 0.9, 1.0, 0.5),
    "click":        unit(0.1, 0.0, 0.0, 0.7, 0.9, 1.0),
    "screen":       unit(0.0, 0.0, 0.2, 1.0, 0.6, 0.9),
}

store = VectorStore(vectors, dim=6)
inventory = inventory_from_store(store)

# a shorter observation leash than the benchmark default: with only six
# dimensions the landmarks otherwise sharpen right past the context
session = Session(
    SessionConfig(dim=6, seed=0, lambda_w=0.7),
    store, inventory, target_labels=["mouse"],
)

transcript = [
    ("other", "mouse cable click"),
    ("own", "screen cable"),
    ("other", "mouse screen click"),
    ("other", "cable click screen"),
    ("other", "mouse cable screen"),
    ("other", "click screen cable"),
]

print("tracking 'mouse' (rodent vs device)\n")
rep = session.confidence("mouse")
start = "  ".join(f"{sid}={c:.2f}" for sid, c in sorted(rep.per_sense.items()))
print(f"  start (uniform prior)      ->  {start}")

for t, (role, text) in enumerate(transcript):
    session.process_turn(Utterance(role, text.split(), t))
    rep = session.confidence("mouse")
    bars = "  ".join(
        f"{sid}={conf:.2f}" for sid, conf in sorted(rep.per_sense.items())
    )
    print(f"  t={t} {role:>5s} \"{text}\"  ->  {bars}")

print(f"\nbest assignment: {session.best_assignments()}")
