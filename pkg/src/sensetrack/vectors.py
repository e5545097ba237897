"""Word vector store, sense inventory, and utterance averaging.

Vectors are read from the classic text interchange format: a header line
``<count> <dim>`` followed by one ``<label> <f1> ... <fdim>`` row per word.
A label containing ``#`` denotes a specific sense of an ambiguous base
label, e.g. ``mac#macbook`` and ``mac#mcdonalds`` are two senses of ``mac``.
"""

from __future__ import annotations

import math

import numpy as np


class VectorLoadError(ValueError):
    """Malformed embedding file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyUtteranceError(ValueError):
    """No token of the utterance resolves to a vector."""


class VectorStore:
    """Immutable exact-match lookup from label to embedding vector."""

    def __init__(self, vectors: dict[str, np.ndarray], dim: int):
        if dim <= 0:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self._vectors = vectors

    def __len__(self):
        return len(self._vectors)

    def __contains__(self, label):
        return label in self._vectors

    def get(self, label: str) -> np.ndarray:
        return self._vectors[label]

    def labels(self):
        return list(self._vectors.keys())

    def scaled(self, factor: float) -> "VectorStore":
        """A copy with every vector multiplied by a positive constant."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return VectorStore(
            {k: v * factor for k, v in self._vectors.items()}, self.dim
        )

    def unit_scale(self) -> float:
        """The store's length unit: power-of-two bracket of the mean norm.

        Noise magnitudes are expressed in this unit, so globally rescaling
        the embeddings rescales the noise with them and leaves all angular
        quantities untouched.  Snapping to a power of two keeps the unit
        exactly proportional under power-of-two rescaling (and exactly 1.0
        for unit-norm embeddings).
        """
        norms = [float(np.linalg.norm(v)) for v in self._vectors.values()]
        mean = float(np.mean(norms)) if norms else 1.0
        return float(2.0 ** (math.frexp(mean)[1] - 1))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self._vectors)} {self.dim}\n")
            for label, vec in self._vectors.items():
                coords = " ".join(repr(float(x)) for x in vec)
                fh.write(f"{label} {coords}\n")


def load_vectors(path) -> VectorStore:
    """Parse a text embedding file into a VectorStore.

    Raises VectorLoadError naming the line on a malformed header, a
    dimension mismatch, a duplicate label, a non-finite value, or a
    zero vector.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise VectorLoadError("header must be '<count> <dim>'", line=1)
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise VectorLoadError("header must contain two integers", line=1)
        if count < 0 or dim <= 0:
            raise VectorLoadError("header count/dim out of range", line=1)

        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            fields = raw.rstrip("\n").split(" ")
            if len(fields) != dim + 1:
                raise VectorLoadError(
                    f"expected {dim} values, got {len(fields) - 1}", line=lineno
                )
            label = fields[0]
            if label in vectors:
                raise VectorLoadError(f"duplicate label {label!r}", line=lineno)
            try:
                vec = np.array([float(x) for x in fields[1:]], dtype=float)
            except ValueError:
                raise VectorLoadError("unparseable float value", line=lineno)
            if not np.all(np.isfinite(vec)):
                raise VectorLoadError("non-finite value", line=lineno)
            if not np.any(vec != 0.0):
                raise VectorLoadError("zero vector", line=lineno)
            vectors[label] = vec

    if len(vectors) != count:
        raise VectorLoadError(
            f"header declared {count} rows, file has {len(vectors)}", line=1
        )
    return VectorStore(vectors, dim)


def split_sense_label(label: str) -> tuple[str, str]:
    """``mac#macbook`` -> (``mac``, ``macbook``); plain labels get sense ''."""
    if "#" in label:
        base, sense = label.split("#", 1)
        return base, sense
    return label, ""


class SenseInventory:
    """Ordered map from base label to its candidate sense vectors."""

    def __init__(self, entries: dict[str, list[tuple[str, np.ndarray]]]):
        for label, senses in entries.items():
            if not senses:
                raise ValueError(f"label {label!r} has zero senses")
            ids = [sid for sid, _ in senses]
            if len(ids) != len(set(ids)):
                raise ValueError(f"duplicate sense ids under label {label!r}")
        self.entries = entries

    def __contains__(self, label):
        return label in self.entries

    def labels(self):
        return list(self.entries.keys())

    def senses(self, label: str) -> list[tuple[str, np.ndarray]]:
        return self.entries[label]

    def n_senses(self, label: str) -> int:
        return len(self.entries[label])

    def is_ambiguous(self, label: str) -> bool:
        return label in self.entries and len(self.entries[label]) > 1

    def sense_mean(self, label: str) -> np.ndarray:
        vecs = [v for _, v in self.entries[label]]
        return np.mean(vecs, axis=0)

    def without_sense(self, label: str, sense_id: str) -> "SenseInventory":
        """A copy with one sense removed (used for held-out evaluation)."""
        entries = dict(self.entries)
        kept = [(sid, v) for sid, v in entries[label] if sid != sense_id]
        if len(kept) == len(entries[label]):
            raise KeyError(f"no sense {sense_id!r} under {label!r}")
        entries[label] = kept
        return SenseInventory(entries)


def inventory_from_store(store: VectorStore) -> SenseInventory:
    """Group every store row by base label into a SenseInventory."""
    entries: dict[str, list[tuple[str, np.ndarray]]] = {}
    for label in store.labels():
        base, sense = split_sense_label(label)
        entries.setdefault(base, []).append((sense, store.get(label)))
    return SenseInventory(entries)


def load_sense_inventory(path, store: VectorStore) -> SenseInventory:
    """Build an inventory from the labels of an embedding-format file.

    The file's rows name which labels (and senses, via ``base#sense``)
    participate; the vectors themselves are resolved from ``store``, so a
    row naming a label absent from the store is an error.  Passing the
    same path used for the store simply groups the whole vocabulary.
    """
    entries: dict[str, list[tuple[str, np.ndarray]]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if len(header.split()) != 2:
            raise VectorLoadError("header must be '<count> <dim>'", line=1)
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            label = raw.split(" ", 1)[0]
            if label not in store:
                raise VectorLoadError(
                    f"sense row {label!r} has no vector in the store", line=lineno
                )
            base, sense = split_sense_label(label)
            entries.setdefault(base, []).append((sense, store.get(label)))
    return SenseInventory(entries)


def utterance_mean(
    tokens, store: VectorStore, inventory: SenseInventory | None = None
) -> np.ndarray:
    """Arithmetic mean of the resolved tokens' vectors.

    Tokens absent from the store (and inventory) are skipped.  An
    ambiguous label contributes the mean of its sense vectors: which
    sense is in play is a per-particle matter decided elsewhere, not at
    averaging time.
    """
    resolved = []
    for tok in tokens:
        if inventory is not None and tok in inventory:
            if inventory.is_ambiguous(tok):
                resolved.append(inventory.sense_mean(tok))
            else:
                resolved.append(inventory.senses(tok)[0][1])
        elif tok in store:
            resolved.append(store.get(tok))
    if not resolved:
        raise EmptyUtteranceError(f"no resolvable token in {tokens!r}")
    return np.mean(resolved, axis=0)
