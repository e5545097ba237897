"""Replay cases, evaluation modes, metrics, and a synthetic corpus builder.

Two tasks are supported: interpretation estimation (all candidate senses
known up front) and new-interpretation acquisition (the gold sense is
withheld from the session and must be recreated by spawned hypotheses).
Ablations: ``no_kalman`` freezes landmark distributions, ``fewer_particles``
halves the particle multiplier.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import OTHER, ConfidenceReport, Session, SessionConfig, Utterance
from .geometry import from_nsphere
from .vectors import SenseInventory, VectorStore, inventory_from_store

MODES = ("full", "no_kalman", "fewer_particles", "new_interpretation")
DEFAULT_TURN_CAP = 30
MAJORITY_THRESHOLD = 0.5


@dataclass
class ReplayCase:
    case_id: str
    target_label: str
    gold_sense: str
    turns: list[Utterance]
    human_confidence: list[tuple[int, float]] | None = None

    def validate(self, turn_cap: int = DEFAULT_TURN_CAP):
        if not self.turns:
            raise ValueError(f"case {self.case_id}: no turns")
        if self.target_label not in self.turns[0].tokens:
            raise ValueError(
                f"case {self.case_id}: first turn must mention {self.target_label!r}"
            )
        if len(self.turns) > turn_cap:
            raise ValueError(
                f"case {self.case_id}: {len(self.turns)} turns exceeds cap {turn_cap}"
            )
        if self.human_confidence is not None:
            for t, c in self.human_confidence:
                if not 0.0 <= c <= 1.0:
                    raise ValueError(f"case {self.case_id}: confidence {c} out of range")

    def to_dict(self):
        return {
            "case_id": self.case_id,
            "target_label": self.target_label,
            "gold_sense": self.gold_sense,
            "turns": [
                {"role": u.role, "tokens": list(u.tokens), "t": u.t} for u in self.turns
            ],
            "human_confidence": (
                [[t, c] for t, c in self.human_confidence]
                if self.human_confidence is not None
                else None
            ),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            case_id=d["case_id"],
            target_label=d["target_label"],
            gold_sense=d["gold_sense"],
            turns=[Utterance(u["role"], list(u["tokens"]), int(u["t"])) for u in d["turns"]],
            human_confidence=(
                [(int(t), float(c)) for t, c in d["human_confidence"]]
                if d.get("human_confidence") is not None
                else None
            ),
        )


def save_cases(cases, path):
    with open(path, "w", encoding="utf-8") as fh:
        for case in cases:
            fh.write(json.dumps(case.to_dict()) + "\n")


def load_cases(path, turn_cap: int = DEFAULT_TURN_CAP) -> list[ReplayCase]:
    cases = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            case = ReplayCase.from_dict(json.loads(line))
            case.validate(turn_cap)
            cases.append(case)
    return cases


@dataclass
class RunResult:
    case_id: str
    mode: str
    initial_gold_confidence: float
    trajectory: list[tuple[int, dict[str, float]]]  # (turn, per-sense confidences)
    gold_trajectory: list[float]
    final_gold_confidence: float
    correct: bool
    human_final: float | None = None


class LocalDriver:
    """Run a session in-process; the HTTP test driver mirrors this surface."""

    def __init__(self, cfg, store, inventory, targets):
        self.session = Session(cfg, store, inventory, targets)

    def process_turn(self, utt: Utterance):
        self.session.process_turn(utt)

    def confidence(self, label: str) -> dict[str, float]:
        return dict(self.session.confidence(label).per_sense)

    def snapshot(self) -> dict:
        return self.session.snapshot()


def mode_config(cfg: SessionConfig, mode: str) -> SessionConfig:
    if mode == "no_kalman":
        return replace(cfg, kalman_enabled=False)
    if mode == "fewer_particles":
        return replace(cfg, particle_multiplier=max(1, cfg.particle_multiplier // 2))
    return replace(cfg)


def _angular_distance(u: np.ndarray, v: np.ndarray) -> float:
    cu = u / np.linalg.norm(u)
    cv = v / np.linalg.norm(v)
    return float(np.arccos(np.clip(np.dot(cu, cv), -1.0, 1.0)))


def _matched_new_senses(snapshot: dict, inventory: SenseInventory, label, gold_sense):
    """Spawned sense ids whose landmark mean sits nearest the held-out gold.

    A spawned sense counts as gold only if, among every inventory sense
    vector (the held-out gold included), the gold vector is the closest
    direction to the spawned landmark's mean.  Each group is represented
    by its best-scoring particle.
    """
    gold_vec = None
    others = []
    for sid, vec in inventory.senses(label):
        if sid == gold_sense:
            gold_vec = vec
        else:
            others.append(vec)
    if gold_vec is None:
        raise KeyError(f"gold sense {gold_sense!r} not in inventory")

    best_by_sid: dict[str, tuple[float, list[float]]] = {}
    for p in snapshot["particles"]:
        sid = p["spawned"].get(label)
        if sid is None:
            continue
        for land in p["landmarks"].get(label, []):
            if land["sense_id"] == sid:
                prev = best_by_sid.get(sid)
                if prev is None or p["score"] > prev[0]:
                    best_by_sid[sid] = (p["score"], land["mean"])
    matched = set()
    for sid, (_, mean) in best_by_sid.items():
        direction = from_nsphere(np.array(mean))
        d_gold = _angular_distance(direction, gold_vec)
        if all(d_gold <= _angular_distance(direction, v) for v in others):
            matched.add(sid)
    return matched


def run_case(
    case: ReplayCase,
    store: VectorStore,
    inventory: SenseInventory,
    cfg: SessionConfig,
    mode: str = "full",
    driver_factory=LocalDriver,
    turn_cap: int = DEFAULT_TURN_CAP,
    ablation: str | None = None,
) -> RunResult:
    """Replay one case; ``ablation`` stacks no_kalman / fewer_particles on
    top of the new_interpretation task."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if ablation is not None and ablation not in ("no_kalman", "fewer_particles"):
        raise ValueError(f"unknown ablation {ablation!r}")
    case.validate(turn_cap)
    run_cfg = mode_config(cfg, mode)
    if ablation is not None:
        run_cfg = mode_config(run_cfg, ablation)
    session_inventory = inventory
    if mode == "new_interpretation":
        session_inventory = inventory.without_sense(case.target_label, case.gold_sense)
    driver = driver_factory(run_cfg, store, session_inventory, [case.target_label])

    def gold_conf(per_sense):
        if mode != "new_interpretation":
            return per_sense.get(case.gold_sense, 0.0)
        matched = _matched_new_senses(
            driver.snapshot(), inventory, case.target_label, case.gold_sense
        )
        return sum(c for sid, c in per_sense.items() if sid in matched)

    initial = driver.confidence(case.target_label)
    initial_gold = (
        initial.get(case.gold_sense, 0.0) if mode != "new_interpretation" else 0.0
    )
    trajectory = []
    gold_traj = []
    for utt in case.turns:
        driver.process_turn(utt)
        if utt.role == OTHER:
            per_sense = driver.confidence(case.target_label)
            trajectory.append((utt.t, per_sense))
            gold_traj.append(gold_conf(per_sense))
    final = gold_traj[-1] if gold_traj else initial_gold
    human_final = (
        case.human_confidence[-1][1] if case.human_confidence else None
    )
    return RunResult(
        case_id=case.case_id,
        mode=mode,
        initial_gold_confidence=initial_gold,
        trajectory=trajectory,
        gold_trajectory=gold_traj,
        final_gold_confidence=final,
        correct=final > MAJORITY_THRESHOLD,
        human_final=human_final,
    )


def aggregate(results: list[RunResult]) -> dict:
    """Per-turn mean/variance of gold confidence, accuracy, optional P/R/F1."""
    if not results:
        raise ValueError("no results to aggregate")
    max_len = max(len(r.gold_trajectory) for r in results)
    per_turn_mean = []
    per_turn_var = []
    for i in range(max_len):
        vals = [r.gold_trajectory[i] for r in results if len(r.gold_trajectory) > i]
        per_turn_mean.append(float(np.mean(vals)))
        per_turn_var.append(float(np.var(vals)))
    accuracy = sum(1 for r in results if r.correct) / len(results)
    bundle = {
        "n_cases": len(results),
        "accuracy": accuracy,
        "mean_final_gold_confidence": float(
            np.mean([r.final_gold_confidence for r in results])
        ),
        "per_turn_mean": per_turn_mean,
        "per_turn_var": per_turn_var,
    }
    with_human = [r for r in results if r.human_final is not None]
    if with_human:
        tp = sum(
            1
            for r in with_human
            if r.correct and r.human_final > MAJORITY_THRESHOLD
        )
        fp = sum(
            1
            for r in with_human
            if r.correct and r.human_final <= MAJORITY_THRESHOLD
        )
        fn = sum(
            1
            for r in with_human
            if not r.correct and r.human_final > MAJORITY_THRESHOLD
        )
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        bundle.update({"precision": precision, "recall": recall, "f1": f1})
    return bundle


def write_metrics(bundle: dict, json_path, csv_path=None):
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(bundle, fh, indent=2)
        fh.write("\n")
    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["turn", "mean", "variance"])
            for i, (m, v) in enumerate(
                zip(bundle["per_turn_mean"], bundle["per_turn_var"])
            ):
                writer.writerow([i, m, v])


# -- synthetic corpus ---------------------------------------------------


@dataclass
class SyntheticSpec:
    """Knobs of the generated benchmark corpus."""

    dim: int = 16
    n_labels: int = 10
    senses_per_label: int = 3
    context_words_per_sense: int = 12
    n_noise_words: int = 30
    cases_per_label: int = 5
    case_turns: int = 30
    tokens_per_turn: int = 3
    noise: float = 0.05             # probability a content slot becomes a noise word
    min_separation_deg: float = 75.0
    cone_deg: float = 10.0
    target_mention_period: int = 2  # target label said every this-many turns

    def __post_init__(self):
        if self.senses_per_label < 2:
            raise ValueError("need at least 2 senses per label")
        if self.dim < 3:
            raise ValueError("dim must be >= 3")


class SeparationError(ValueError):
    """Could not place that many senses with the requested angular separation."""


def _random_unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def _sense_vectors(rng, dim, count, min_sep_rad, attempts=2000):
    chosen: list[np.ndarray] = []
    tries = 0
    while len(chosen) < count:
        v = _random_unit(rng, dim)
        if all(
            math.acos(float(np.clip(np.dot(v, u), -1, 1))) >= min_sep_rad
            for u in chosen
        ):
            chosen.append(v)
            tries = 0
        else:
            tries += 1
            if tries > attempts:
                raise SeparationError(
                    f"cannot fit {count} directions {math.degrees(min_sep_rad):.0f} deg apart in dim {dim}"
                )
    return chosen


def _cone_sample(rng, center, max_angle_rad):
    """Unit vector within max_angle_rad of center."""
    angle = max_angle_rad * math.sqrt(rng.random())
    w = rng.normal(size=center.size)
    w = w - np.dot(w, center) * center
    w = w / np.linalg.norm(w)
    return math.cos(angle) * center + math.sin(angle) * w


def generate_synthetic(
    spec: SyntheticSpec, rng: np.random.Generator
) -> tuple[VectorStore, SenseInventory, list[ReplayCase]]:
    """Build a deterministic desk-scale corpus: store, inventory, and cases.

    Each ambiguous label gets well-separated sense directions; each sense
    gets a pool of context words inside a cone around it.  Case turns
    sample words from the gold sense's cone, with occasional noise tokens
    and periodic mentions of the ambiguous label itself.
    """
    vectors: dict[str, np.ndarray] = {}
    sep = math.radians(spec.min_separation_deg)
    cone = math.radians(spec.cone_deg)
    pools: dict[tuple[int, int], list[str]] = {}
    for i in range(spec.n_labels):
        senses = _sense_vectors(rng, spec.dim, spec.senses_per_label, sep)
        for j, sv in enumerate(senses):
            vectors[f"L{i}#s{j}"] = sv
            pool = []
            for k in range(spec.context_words_per_sense):
                word = f"L{i}.s{j}.w{k}"
                vectors[word] = _cone_sample(rng, sv, cone)
                pool.append(word)
            pools[(i, j)] = pool
    noise_words = []
    for k in range(spec.n_noise_words):
        word = f"noise{k}"
        vectors[word] = _random_unit(rng, spec.dim)
        noise_words.append(word)

    store = VectorStore(vectors, spec.dim)
    inventory = inventory_from_store(store)

    cases = []
    for i in range(spec.n_labels):
        label = f"L{i}"
        for c in range(spec.cases_per_label):
            gold_j = c % spec.senses_per_label
            pool = pools[(i, gold_j)]
            turns = []
            for t in range(spec.case_turns):
                tokens = []
                if t == 0 or t % spec.target_mention_period == 0:
                    tokens.append(label)
                for _ in range(spec.tokens_per_turn):
                    if spec.noise > 0 and rng.random() < spec.noise:
                        tokens.append(noise_words[rng.integers(len(noise_words))])
                    else:
                        tokens.append(pool[rng.integers(len(pool))])
                turns.append(Utterance(OTHER, tokens, t))
            cases.append(
                ReplayCase(
                    case_id=f"L{i}-case{c}",
                    target_label=label,
                    gold_sense=f"s{gold_j}",
                    turns=turns,
                )
            )
    for case in cases:
        case.validate(max(DEFAULT_TURN_CAP, spec.case_turns))
    return store, inventory, cases


# -- parameter sweep ----------------------------------------------------


def grid_sweep(
    grid: dict[str, list],
    base_cfg: SessionConfig,
    store,
    inventory,
    cases,
    mode: str = "full",
) -> list[dict]:
    """Exhaustive grid over config fields; returns one metrics row per combo."""
    names = list(grid.keys())
    rows = []

    def rec(idx, acc):
        if idx == len(names):
            cfg = replace(base_cfg, **acc)
            results = [run_case(c, store, inventory, cfg, mode) for c in cases]
            bundle = aggregate(results)
            rows.append({**acc, "accuracy": bundle["accuracy"],
                         "mean_final_gold_confidence": bundle["mean_final_gold_confidence"]})
            return
        for value in grid[names[idx]]:
            rec(idx + 1, {**acc, names[idx]: value})

    rec(0, {})
    return rows
