"""The four-step update cycle tracking context and word interpretation.

A session holds M particles.  An own utterance nudges every particle's
context toward the utterance mean.  An other's utterance is treated as an
observation: particles branch over the candidate senses of each ambiguous
token, the chosen landmarks receive Kalman updates at a point between the
context and the sense vector, the context is nudged again, and the
population is weighted and resampled back to M.  A particle may also
branch into a hypothesis that an ambiguous label carries a sense not in
the inventory at all, seeded from recently used landmarks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .geometry import (
    DiagonalGaussian,
    TWO_PI,
    from_nsphere,
    gaussian_noise,
    mahalanobis,
    kl_divergence,
    to_nsphere,
    to_nsphere_batch,
)
from .particles import (
    InterpretationDomain,
    Particle,
    SenseGaussian,
    copy_domain,
    domain_find,
    kalman_observe,
    normalize_weights,
    systematic_resample,
)
from .vectors import SenseInventory, VectorStore, utterance_mean

OWN = "own"
OTHER = "other"


class OutOfOrderError(ValueError):
    """Utterance time index went backwards."""


class UnknownLabelError(KeyError):
    """A target label is missing from the sense inventory."""


@dataclass
class SessionConfig:
    """Tunable constants of the update cycle.

    lambda_u / lambda_z: pull of own / other's utterance means on the
    context.  lambda_w: pull of the sense vector (vs the context) on the
    landmark observation point.  sigma_*: stds of the corresponding
    Gaussian perturbations.  t_alpha: how many turns a landmark stays
    "recent" for re-observation and weighting.  eta_tau / gamma_tau: time
    constants of the staleness discount and of the ramp that admits
    new-interpretation hypotheses.  lambda_w2 scales the novelty penalty.
    """

    dim: int
    lambda_u: float = 0.5
    lambda_z: float = 0.3
    lambda_w: float = 0.9
    sigma_u: float = 0.0
    sigma_z: float = 0.08
    sigma_w: float = 0.02
    t_alpha: int = 1
    epsilon: float = 1e-6
    lambda_w2: float = 0.02
    eta_tau: float = 0.5
    gamma_tau: float = 240.0
    particle_multiplier: int = 20
    obs_var0: float = 4.0
    seed: int = 0
    kalman_enabled: bool = True
    max_branch_factor: int = 64
    min_obs_var: float = 3.0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        for name in ("lambda_u", "lambda_z", "lambda_w"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        for name in ("sigma_u", "sigma_z", "sigma_w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.t_alpha < 1 or self.particle_multiplier < 1:
            raise ValueError("t_alpha and particle_multiplier must be positive")
        for name in ("epsilon", "eta_tau", "gamma_tau", "obs_var0", "min_obs_var"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lambda_w2 < 0:
            raise ValueError("lambda_w2 must be nonnegative")
        if self.max_branch_factor < 1:
            raise ValueError("max_branch_factor must be >= 1")

    @property
    def obs_var(self) -> float:
        """Observation variance of the Kalman update, derived from sigma_w."""
        return max(self.sigma_w * self.sigma_w, self.min_obs_var)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class Utterance:
    role: str          # OWN or OTHER
    tokens: list[str]
    t: int

    def __post_init__(self):
        if self.role not in (OWN, OTHER):
            raise ValueError(f"role must be '{OWN}' or '{OTHER}'")
        if not self.tokens:
            raise ValueError("tokens must be non-empty")


@dataclass
class ConfidenceReport:
    label: str
    per_sense: dict[str, float]
    time: int


def gamma_ramp(t: int, tau: float) -> float:
    """Monotone ramp from 0 at t=0 toward 1; gates new-interpretation mass."""
    return 1.0 - math.exp(-t / tau)


def staleness(age: int, tau: float) -> float:
    """Discount of a landmark last updated ``age`` turns ago; 1 when fresh."""
    return math.exp(-age / tau)


class Session:
    """One tracked conversation.  Externally serialized: one turn at a time."""

    def __init__(
        self,
        cfg: SessionConfig,
        store: VectorStore,
        inventory: SenseInventory,
        target_labels,
        _init_particles: bool = True,
    ):
        self.cfg = cfg
        self.store = store
        self.inventory = inventory
        self.targets = list(target_labels)
        for label in self.targets:
            if label not in inventory:
                raise UnknownLabelError(f"target label {label!r} not in inventory")
        total_senses = sum(inventory.n_senses(l) for l in self.targets)
        if total_senses == 0:
            raise UnknownLabelError("target labels carry no senses")
        self.m = cfg.particle_multiplier * total_senses
        # sigma_* are in units of the store's typical vector length, so a
        # global rescale of the embeddings rescales the noise along with them
        self.noise_unit = store.unit_scale()
        self.turn = -1
        self.last_seen: dict[str, int] = {}
        self.rng = np.random.default_rng(cfg.seed)
        self.last_weight_records: list[dict] = []
        if _init_particles:
            self.particles = [self._fresh_particle() for _ in range(self.m)]

    # -- initialization -------------------------------------------------

    def _initial_context(self) -> np.ndarray:
        vecs = []
        for label in self.targets:
            vecs.extend(v for _, v in self.inventory.senses(label))
        return np.mean(vecs, axis=0)

    def _fresh_particle(self) -> Particle:
        domain: InterpretationDomain = {}
        var0 = np.full(self.cfg.dim - 1, self.cfg.obs_var0)
        for label in self.targets:
            domain[label] = [
                SenseGaussian(sid, DiagonalGaussian(to_nsphere(vec), var0.copy()))
                for sid, vec in self.inventory.senses(label)
            ]
        return Particle(
            context=self._initial_context(),
            domain=domain,
            weight=1.0 / self.m,
        )

    def _ensure_landmarks(self, p: Particle, label: str):
        if label in p.domain:
            return
        var0 = np.full(self.cfg.dim - 1, self.cfg.obs_var0)
        p.domain[label] = [
            SenseGaussian(sid, DiagonalGaussian(to_nsphere(vec), var0.copy()))
            for sid, vec in self.inventory.senses(label)
        ]

    # -- the four steps -------------------------------------------------

    def process_turn(self, utt: Utterance):
        """Dispatch one utterance; own turns touch only the context."""
        if utt.t < self.turn:
            raise OutOfOrderError(f"turn {utt.t} after turn {self.turn}")
        if utt.role == OWN:
            self._step1_own(utt)
        else:
            self._step2_observe(utt)
            self._step3_other(utt)
            self._step4_resample(utt.t)
        self.turn = utt.t

    def _context_update(self, rate: float, std: float, vbar: np.ndarray):
        # one batched draw for the whole population
        std = std * self.noise_unit
        if std > 0.0:
            noise = self.rng.normal(0.0, std, size=(len(self.particles), self.cfg.dim))
        else:
            noise = np.zeros((len(self.particles), self.cfg.dim))
        for i, p in enumerate(self.particles):
            p.context = (1.0 - rate) * p.context + rate * vbar + noise[i]

    def _step1_own(self, utt: Utterance):
        vbar = utterance_mean(utt.tokens, self.store, self.inventory)
        self._context_update(self.cfg.lambda_u, self.cfg.sigma_u, vbar)

    def _step2_observe(self, utt: Utterance):
        t = utt.t
        present = []
        for tok in utt.tokens:
            if tok in self.inventory and tok not in present:
                present.append(tok)
        for tok in present:
            self.last_seen[tok] = t
        window = [
            l for l, ts in self.last_seen.items() if t - ts <= self.cfg.t_alpha
        ]
        ambiguous_now = [l for l in present if self.inventory.n_senses(l) > 1]

        population = self.particles
        for label in ambiguous_now:
            factor = self.inventory.n_senses(label) + (1 if label in self.targets else 0)
            if len(population) * factor > self.m * self.cfg.max_branch_factor:
                population = self._interim_resample(population, t)
            for p in population:
                self._ensure_landmarks(p, label)
            # branches laid out in per-sense blocks: a near-uniform systematic
            # resample then keeps the sense mix instead of stride-aliasing it
            branched = []
            contexts = np.array([p.context for p in population])
            for sid, vec in self.inventory.senses(label):
                obs = self._batch_observation_points(contexts, vec)
                for i, p in enumerate(population):
                    q = p.branch()
                    if label in q.spawned:
                        self._drop_new_sense(q, label)
                    q.assignments[label] = sid
                    self._observe_sense(q, label, sid, obs[i], t)
                    branched.append(q)
            if label in self.targets:
                for p in population:
                    if label in p.spawned:
                        # the carried new sense stays a live candidate
                        sid = p.spawned[label]
                        q = p.branch()
                        q.assignments[label] = sid
                        obs = self._batch_observation_points(
                            q.context[None, :],
                            self._sense_vector(q, label, sid)[None, :],
                        )
                        self._observe_sense(q, label, sid, obs[0], t)
                        branched.append(q)
                    else:
                        branched.append(self._spawn_new_sense(p, label, t))
            population = branched

        # words still inside the time window keep getting observed, so an
        # utterance can sharpen landmarks mentioned shortly before it
        for label in window:
            if label in ambiguous_now:
                continue  # the branch above already observed the chosen sense
            if self.inventory.n_senses(label) == 1:
                sid, vec = self.inventory.senses(label)[0]
                contexts = np.array([p.context for p in population])
                obs = self._batch_observation_points(contexts, vec)
                for i, p in enumerate(population):
                    self._ensure_landmarks(p, label)
                    self._observe_sense(p, label, sid, obs[i], t)
            else:
                chosen = [p for p in population if label in p.assignments]
                if not chosen:
                    continue
                contexts = np.array([p.context for p in chosen])
                vecs = np.array(
                    [self._sense_vector(p, label, p.assignments[label]) for p in chosen]
                )
                obs = self._batch_observation_points(contexts, vecs)
                for i, p in enumerate(chosen):
                    self._observe_sense(p, label, p.assignments[label], obs[i], t)
        self.particles = population

    def _drop_new_sense(self, p: Particle, label: str):
        """Abandon the new-interpretation hypothesis when re-committing to
        an inventory sense; the dynamic landmark goes with it."""
        sid = p.spawned.pop(label)
        p.domain[label] = [sg for sg in p.domain[label] if sg.sense_id != sid]

    def _sense_vector(self, p: Particle, label: str, sense_id: str) -> np.ndarray:
        """Euclidean direction of a sense; a spawned sense uses its own mean."""
        for sid, vec in self.inventory.senses(label):
            if sid == sense_id:
                return vec
        land = domain_find(p.domain, label, sense_id)
        # reconstruct at corpus magnitude, not unit norm, so the mixture
        # with the context lands at the same angle under a global rescale
        return from_nsphere(land.dist.mean) * self.noise_unit

    def _observation_noise(self, count: int) -> np.ndarray:
        std = self.cfg.sigma_w * self.noise_unit
        if std > 0.0:
            return self.rng.normal(0.0, std, size=(count, self.cfg.dim))
        return np.zeros((count, self.cfg.dim))

    def _batch_observation_points(self, contexts: np.ndarray, vecs) -> np.ndarray:
        """Angle coordinates of the observation point for each particle row."""
        lw = self.cfg.lambda_w
        points = (1.0 - lw) * contexts + lw * np.asarray(vecs, dtype=float)
        points = points + self._observation_noise(len(contexts))
        dead = ~points.any(axis=1)
        if dead.any():
            # a cancelled-out point degenerates to the sense direction
            v = np.broadcast_to(np.asarray(vecs, dtype=float), points.shape)
            points[dead] = v[dead]
        return to_nsphere_batch(points)

    def _observe_sense(self, p: Particle, label: str, sense_id: str, obs: np.ndarray, t: int):
        senses = p.domain[label]
        for i, sg in enumerate(senses):
            if sg.sense_id == sense_id:
                if self.cfg.kalman_enabled:
                    obs_var = np.full(self.cfg.dim - 1, self.cfg.obs_var)
                    updated = kalman_observe(sg, obs, obs_var, t)
                else:
                    # ablation: distribution parameters stay frozen
                    updated = SenseGaussian(sg.sense_id, sg.dist, t, sg.is_new)
                # landmark lists may be shared between branches: replace, never mutate
                p.domain[label] = senses[:i] + [updated] + senses[i + 1 :]
                return
        raise KeyError(f"no sense {sense_id!r} under label {label!r}")

    def _spawn_new_sense(self, p: Particle, label: str, t: int) -> Particle:
        """Branch hypothesizing an inventory-unknown sense for ``label``.

        Its landmark starts at the angle-space average of the recently
        updated landmarks together with the particle's own context
        direction (the hypothesis: "this word means whatever we are
        currently talking about").
        """
        if label in p.spawned:
            raise ValueError(f"particle already carries a new sense for {label!r}")
        q = p.branch()
        recent = [
            sg
            for senses in q.domain.values()
            for sg in senses
            if sg.last_update is not None and t - sg.last_update <= self.cfg.t_alpha
        ]
        points = [sg.dist.mean for sg in recent] + [to_nsphere(q.context)]
        mean = np.mean(points, axis=0)
        # azimuth averaged on the circle so points straddling the seam behave
        sines = np.mean([math.sin(pt[-1]) for pt in points])
        cosines = np.mean([math.cos(pt[-1]) for pt in points])
        mean[-1] = np.remainder(math.atan2(sines, cosines), TWO_PI)
        if recent:
            variance = np.mean([sg.dist.variance for sg in recent], axis=0)
        else:
            variance = np.full(self.cfg.dim - 1, self.cfg.obs_var0)
        sid = f"new@{t}"
        q.domain[label] = q.domain[label] + [
            SenseGaussian(sid, DiagonalGaussian(mean, variance), last_update=t, is_new=True)
        ]
        q.assignments[label] = sid
        q.spawned[label] = sid
        return q

    def _step3_other(self, utt: Utterance):
        vbar = utterance_mean(utt.tokens, self.store, self.inventory)
        self._context_update(self.cfg.lambda_z, self.cfg.sigma_z, vbar)

    def _step4_resample(self, t: int):
        records = []
        for p in self.particles:
            w = self.compute_weight_new(p, t) if p.spawned else self.compute_weight(p, t)
            p.weight = w
            p.score = w
            records.append(
                {"assignments": dict(p.assignments), "spawned": dict(p.spawned), "weight": w}
            )
        self.last_weight_records = records
        total = sum(p.weight for p in self.particles)
        if total <= 0.0:
            # degeneracy: no particle expresses evidence; fall back to uniform
            for p in self.particles:
                p.weight = 1.0 / len(self.particles)
            if len(self.particles) != self.m:
                self.particles = systematic_resample(self.particles, self.m, self.rng)
        else:
            normalize_weights(self.particles)
            self.particles = systematic_resample(self.particles, self.m, self.rng)

    def _interim_resample(self, population, t):
        """Cap branch explosion mid-step by an early weighted resample."""
        for p in population:
            w = self.compute_weight_new(p, t) if p.spawned else self.compute_weight(p, t)
            p.weight = w
        total = sum(p.weight for p in population)
        if total <= 0.0:
            for p in population:
                p.weight = 1.0 / len(population)
        else:
            normalize_weights(population)
        return systematic_resample(population, self.m, self.rng)

    # -- weighting ------------------------------------------------------

    def _window_landmarks(self, p: Particle, t: int):
        return [
            sg
            for senses in p.domain.values()
            for sg in senses
            if sg.last_update is not None and t - sg.last_update <= self.cfg.t_alpha
        ]

    def compute_weight(self, p: Particle, t: int) -> float:
        """Fitness of a particle: closeness of recent landmarks to its context.

        Negative log of the staleness-discounted mean Mahalanobis distance,
        clamped below at zero so it can act as resampling mass.
        """
        lands = self._window_landmarks(p, t)
        if not lands:
            return 0.0
        x_ang = to_nsphere(p.context)
        acc = 0.0
        for sg in lands:
            eta = staleness(t - sg.last_update, self.cfg.eta_tau)
            acc += eta * mahalanobis(sg.dist, x_ang)
        w = -math.log(acc / len(lands) + self.cfg.epsilon)
        return max(0.0, w)

    def compute_weight_new(self, p: Particle, t: int) -> float:
        """Fitness of a new-interpretation particle.

        The base fitness gains a novelty bonus: the mean KL divergence of
        the existing senses from the hypothesized one (near-duplicates are
        strongly suppressed), the whole gated by the early-conversation ramp.
        """
        w = self.compute_weight(p, t)
        for label, sid in p.spawned.items():
            new_land = domain_find(p.domain, label, sid)
            existing = [
                sg for sg in p.domain[label] if sg.sense_id != sid and not sg.is_new
            ]
            if not existing:
                continue  # maximal novelty: no penalty term
            kl = np.mean(
                [kl_divergence(sg.dist, new_land.dist) for sg in existing]
            )
            w = w + self.cfg.lambda_w2 * math.log(kl + self.cfg.epsilon)
        w = gamma_ramp(t, self.cfg.gamma_tau) * w
        return max(0.0, w)

    # -- read-out -------------------------------------------------------

    def confidence(self, label: str) -> ConfidenceReport:
        """Normalized per-sense confidence from the best score in each group.

        Particles are grouped by the sense they currently attribute to the
        label; each group is represented by its largest raw fitness.  With
        no assignments yet, the uniform prior over the inventory senses is
        reported.
        """
        if label not in self.inventory:
            raise UnknownLabelError(f"label {label!r} not in inventory")
        groups: dict[str, float] = {}
        for p in self.particles:
            sid = p.assignments.get(label)
            if sid is None:
                continue
            if sid not in groups or p.score > groups[sid]:
                groups[sid] = p.score
        if not groups:
            sids = [sid for sid, _ in self.inventory.senses(label)]
            uniform = 1.0 / len(sids)
            return ConfidenceReport(label, {sid: uniform for sid in sids}, self.turn)
        total = sum(groups.values())
        if total <= 0.0:
            uniform = 1.0 / len(groups)
            per_sense = {sid: uniform for sid in groups}
        else:
            per_sense = {sid: v / total for sid, v in groups.items()}
        return ConfidenceReport(label, per_sense, self.turn)

    def best_estimate(self) -> tuple[np.ndarray, InterpretationDomain]:
        """Deep copy of the highest-scoring particle's context and domain."""
        best = max(
            range(len(self.particles)), key=lambda i: (self.particles[i].score, -i)
        )
        p = self.particles[best]
        return p.context.copy(), copy_domain(p.domain)

    def best_assignments(self) -> dict[str, str]:
        """Sense choice per target label of the highest-scoring particle."""
        best = max(
            range(len(self.particles)), key=lambda i: (self.particles[i].score, -i)
        )
        return dict(self.particles[best].assignments)

    # -- snapshots ------------------------------------------------------

    def snapshot(self) -> dict:
        """JSON-ready state, including the RNG position, for exact resume."""
        return {
            "config": self.cfg.to_dict(),
            "targets": list(self.targets),
            "turn": self.turn,
            "last_seen": dict(self.last_seen),
            "rng_state": _encode_rng_state(self.rng.bit_generator.state),
            "particles": [
                {
                    "weight": p.weight,
                    "score": p.score,
                    "context": [float(x) for x in p.context],
                    "assignments": dict(p.assignments),
                    "spawned": dict(p.spawned),
                    "landmarks": {
                        label: [
                            {
                                "sense_id": sg.sense_id,
                                "mean": [float(x) for x in sg.dist.mean],
                                "variance": [float(x) for x in sg.dist.variance],
                                "last_update": sg.last_update,
                                "is_new": sg.is_new,
                            }
                            for sg in senses
                        ]
                        for label, senses in p.domain.items()
                    },
                }
                for p in self.particles
            ],
        }

    @classmethod
    def from_snapshot(
        cls, snap: dict, store: VectorStore, inventory: SenseInventory
    ) -> "Session":
        cfg = SessionConfig.from_dict(snap["config"])
        session = cls(cfg, store, inventory, snap["targets"], _init_particles=False)
        session.turn = snap["turn"]
        session.last_seen = {k: int(v) for k, v in snap["last_seen"].items()}
        session.rng.bit_generator.state = _decode_rng_state(snap["rng_state"])
        session.particles = []
        for rec in snap["particles"]:
            domain: InterpretationDomain = {}
            for label, senses in rec["landmarks"].items():
                domain[label] = [
                    SenseGaussian(
                        s["sense_id"],
                        DiagonalGaussian(
                            np.array(s["mean"]), np.array(s["variance"])
                        ),
                        s["last_update"],
                        s["is_new"],
                    )
                    for s in senses
                ]
            session.particles.append(
                Particle(
                    context=np.array(rec["context"]),
                    domain=domain,
                    weight=rec["weight"],
                    score=rec["score"],
                    assignments=dict(rec["assignments"]),
                    spawned=dict(rec["spawned"]),
                )
            )
        return session


def _encode_rng_state(state):
    """The PCG64 state dict is already JSON-safe (python json handles big ints)."""
    return state


def _decode_rng_state(state):
    # json round-trips the PCG64 state dict unchanged apart from key order
    return state


def create_session(
    cfg: SessionConfig,
    store: VectorStore,
    inventory: SenseInventory,
    target_labels,
) -> Session:
    return Session(cfg, store, inventory, target_labels)
