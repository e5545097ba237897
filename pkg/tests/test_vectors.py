import numpy as np
import pytest

from sensetrack.vectors import (
    EmptyUtteranceError,
    VectorLoadError,
    VectorStore,
    inventory_from_store,
    load_sense_inventory,
    load_vectors,
    split_sense_label,
    utterance_mean,
)


def write(tmp_path, text, name="emb.txt"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


GOOD = "3 4\na 1 0 0 0\nb 0 1 0 0\nc 0.5 0.5 0 1\n"


class TestLoadVectors:
    def test_good_file(self, tmp_path):
        store = load_vectors(write(tmp_path, GOOD))
        assert len(store) == 3 and store.dim == 4
        assert np.array_equal(store.get("a"), [1, 0, 0, 0])

    def test_malformed_header(self, tmp_path):
        with pytest.raises(VectorLoadError) as e:
            load_vectors(write(tmp_path, "3\na 1 0 0 0\n"))
        assert e.value.line == 1

    def test_dimension_mismatch_names_line(self, tmp_path):
        with pytest.raises(VectorLoadError) as e:
            load_vectors(write(tmp_path, "2 4\na 1 0 0 0\nb 1 0 0\n"))
        assert e.value.line == 3

    def test_duplicate_label(self, tmp_path):
        with pytest.raises(VectorLoadError, match="duplicate"):
            load_vectors(write(tmp_path, "2 2\nbank 1 0\nbank 0 1\n"))

    def test_non_finite(self, tmp_path):
        with pytest.raises(VectorLoadError, match="non-finite"):
            load_vectors(write(tmp_path, "1 2\na nan 1\n"))

    def test_zero_vector(self, tmp_path):
        with pytest.raises(VectorLoadError, match="zero"):
            load_vectors(write(tmp_path, "1 2\na 0 0\n"))

    def test_count_mismatch(self, tmp_path):
        with pytest.raises(VectorLoadError):
            load_vectors(write(tmp_path, "5 2\na 1 0\n"))

    def test_save_round_trip(self, tmp_path):
        store = load_vectors(write(tmp_path, GOOD))
        out = tmp_path / "copy.txt"
        store.save(out)
        again = load_vectors(out)
        for label in store.labels():
            assert np.array_equal(store.get(label), again.get(label))


def test_split_sense_label():
    assert split_sense_label("mac#macbook") == ("mac", "macbook")
    assert split_sense_label("plain") == ("plain", "")


class TestInventory:
    def test_grouping(self, tmp_path):
        text = "3 2\nmac#macbook 1 0\nmac#mcdonalds 0 1\nplain 1 1\n"
        store = load_vectors(write(tmp_path, text))
        inv = inventory_from_store(store)
        assert inv.n_senses("mac") == 2
        assert inv.is_ambiguous("mac") and not inv.is_ambiguous("plain")
        assert inv.senses("plain")[0][0] == ""

    def test_load_from_file(self, tmp_path):
        store = load_vectors(
            write(tmp_path, "2 2\nmac#macbook 1 0\nmac#mcdonalds 0 1\n")
        )
        inv = load_sense_inventory(write(tmp_path, "2 2\nmac#macbook 1 0\nmac#mcdonalds 0 1\n", "inv.txt"), store)
        assert inv.n_senses("mac") == 2

    def test_missing_vector(self, tmp_path):
        store = load_vectors(write(tmp_path, "1 2\nmac#macbook 1 0\n"))
        inv_file = write(tmp_path, "1 2\nmac#store 1 0\n", "inv.txt")
        with pytest.raises(VectorLoadError, match="mac#store"):
            load_sense_inventory(inv_file, store)

    def test_without_sense(self, tmp_path):
        store = load_vectors(
            write(tmp_path, "2 2\nmac#macbook 1 0\nmac#mcdonalds 0 1\n")
        )
        inv = inventory_from_store(store)
        smaller = inv.without_sense("mac", "macbook")
        assert smaller.n_senses("mac") == 1
        assert inv.n_senses("mac") == 2  # original untouched
        with pytest.raises(KeyError):
            inv.without_sense("mac", "nope")

    def test_sense_mean(self, tmp_path):
        store = load_vectors(
            write(tmp_path, "2 2\nmac#a 1 0\nmac#b 0 1\n")
        )
        inv = inventory_from_store(store)
        assert np.allclose(inv.sense_mean("mac"), [0.5, 0.5])


class TestUtteranceMean:
    def setup_method(self):
        self.store = VectorStore(
            {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])}, 2
        )

    def test_single_token(self):
        assert np.array_equal(utterance_mean(["a"], self.store), [1, 0])

    def test_two_tokens(self):
        assert np.allclose(utterance_mean(["a", "b"], self.store), [0.5, 0.5])

    def test_unknown_skipped(self):
        assert np.array_equal(utterance_mean(["a", "zzz"], self.store), [1, 0])

    def test_all_unknown(self):
        with pytest.raises(EmptyUtteranceError):
            utterance_mean(["x", "y"], self.store)

    def test_permutation_invariant(self):
        m1 = utterance_mean(["a", "b", "a"], self.store)
        m2 = utterance_mean(["b", "a", "a"], self.store)
        assert np.array_equal(m1, m2)

    def test_repeated_token_exact(self):
        assert np.array_equal(utterance_mean(["b"] * 7, self.store), [0, 1])

    def test_ambiguous_contributes_sense_mean(self):
        store = VectorStore(
            {"mac#x": np.array([1.0, 0.0]), "mac#y": np.array([0.0, 1.0])}, 2
        )
        inv = inventory_from_store(store)
        m = utterance_mean(["mac"], store, inv)
        assert np.allclose(m, [0.5, 0.5])
