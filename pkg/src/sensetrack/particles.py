"""Particle representation, Kalman landmark update, and resampling.

Each particle owns a context vector plus a private map from word label to
candidate sense distributions (its landmarks).  Landmark posteriors are
maintained per axis in angle space with an identity observation model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, DiagonalGaussian, _gaussian_unchecked


class WeightDegeneracyError(ValueError):
    """Every particle weight is zero; nothing to normalize."""


@dataclass
class SenseGaussian:
    """One landmark: the existence distribution of one sense of one label."""

    sense_id: str
    dist: DiagonalGaussian
    last_update: int | None = None   # turn of the latest Kalman update; None = never
    is_new: bool = False             # created dynamically during the conversation

    def copy(self):
        return SenseGaussian(self.sense_id, self.dist.copy(), self.last_update, self.is_new)


# label -> ordered senses; particles each own a private one of these
InterpretationDomain = dict[str, list[SenseGaussian]]


def copy_domain(domain: InterpretationDomain) -> InterpretationDomain:
    return {label: [sg.copy() for sg in senses] for label, senses in domain.items()}


def domain_find(domain: InterpretationDomain, label: str, sense_id: str) -> SenseGaussian:
    for sg in domain[label]:
        if sg.sense_id == sense_id:
            return sg
    raise KeyError(f"no sense {sense_id!r} under label {label!r}")


@dataclass
class Particle:
    """One joint hypothesis: context, private landmark map, sense choices."""

    context: np.ndarray
    domain: InterpretationDomain
    weight: float = 0.0
    score: float = 0.0               # last raw fitness, survives resampling
    assignments: dict[str, str] = field(default_factory=dict)
    spawned: dict[str, str] = field(default_factory=dict)  # label -> new sense id

    @property
    def spawned_new(self) -> bool:
        return bool(self.spawned)

    def copy(self):
        return Particle(
            context=self.context.copy(),
            domain=copy_domain(self.domain),
            weight=self.weight,
            score=self.score,
            assignments=dict(self.assignments),
            spawned=dict(self.spawned),
        )

    def branch(self):
        """Cheap copy sharing landmark lists; writers must replace, not mutate.

        The engine's observation path always swaps in fresh SenseGaussian
        objects and fresh lists, so shared structure is never written to.
        """
        return Particle(
            context=self.context.copy(),
            domain=dict(self.domain),
            weight=self.weight,
            score=self.score,
            assignments=dict(self.assignments),
            spawned=dict(self.spawned),
        )


def kalman_observe(
    land: SenseGaussian, obs: np.ndarray, obs_var: np.ndarray, t: int
) -> SenseGaussian:
    """Per-axis Kalman update of a landmark from an angle-space observation.

    Identity observation model: gain k = var / (var + obs_var), mean moves
    by k times the wrapped innovation, variance shrinks by (1 - k).  With
    n observations the variance decays like obs_var / n, so obs_var sets
    how fast a landmark sharpens over a conversation.
    """
    prior = land.dist
    innovation = obs - prior.mean
    w = innovation[-1] % TWO_PI
    if w > np.pi:
        w -= TWO_PI
    innovation[-1] = w
    gain = prior.variance / (prior.variance + obs_var)
    mean = prior.mean + gain * innovation
    mean[-1] = mean[-1] % TWO_PI
    variance = (1.0 - gain) * prior.variance
    return SenseGaussian(
        sense_id=land.sense_id,
        dist=_gaussian_unchecked(mean, variance),
        last_update=t,
        is_new=land.is_new,
    )


def normalize_weights(particles: list[Particle]) -> None:
    """Scale weights in place to sum to 1, preserving ratios."""
    total = sum(p.weight for p in particles)
    if total <= 0.0:
        raise WeightDegeneracyError("all particle weights are zero")
    for p in particles:
        p.weight /= total


def systematic_resample(
    particles: list[Particle], m: int, rng: np.random.Generator
) -> list[Particle]:
    """Low-variance resampling to exactly ``m`` deep-copied survivors.

    One uniform draw places m evenly spaced pointers over the cumulative
    weights, so the expected multiplicity of particle i is m * w_i and a
    zero-weight particle can never be selected.
    """
    if m < 1:
        raise ValueError("target count must be >= 1")
    weights = np.array([p.weight for p in particles])
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0  # guard against float drift at the top stratum
    positions = (rng.random() + np.arange(m)) / m
    indices = np.searchsorted(cumulative, positions, side="right")
    indices = np.minimum(indices, len(particles) - 1)
    out = []
    for i in indices:
        q = particles[i].copy()
        q.weight = 1.0 / m
        out.append(q)
    return out
