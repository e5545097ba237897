"""Online tracking of conversation context and word-sense interpretation.

A particle filter over word-embedding space: each particle carries a
context vector and a private map of per-sense landmark distributions,
updated with per-axis Kalman filters in hyperspherical coordinates.
"""

from .engine import (
    ConfidenceReport,
    Session,
    SessionConfig,
    Utterance,
    create_session,
)
from .vectors import (
    SenseInventory,
    VectorStore,
    inventory_from_store,
    load_sense_inventory,
    load_vectors,
    utterance_mean,
)

__all__ = [
    "ConfidenceReport",
    "Session",
    "SessionConfig",
    "Utterance",
    "create_session",
    "SenseInventory",
    "VectorStore",
    "inventory_from_store",
    "load_sense_inventory",
    "load_vectors",
    "utterance_mean",
]

__version__ = "0.1.0"
