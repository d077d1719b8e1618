"""Scalar-input Gaussian radial basis function bank."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RbfNetwork:
    centers: tuple
    widths: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.centers)
        w = tuple(float(v) for v in self.widths)
        if len(w) == 1 and len(c) > 1:
            w = w * len(c)
        if not c:
            raise ValueError("network needs at least one neuron")
        if len(w) != len(c):
            raise ValueError("one width per center required")
        if not all(math.isfinite(v) for v in c):
            raise ValueError("centers must be finite")
        if not all(v > 0 for v in w):
            raise ValueError("widths must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)

    @property
    def n(self) -> int:
        return len(self.centers)

    @classmethod
    def uniform(cls, centers, width: float) -> "RbfNetwork":
        return cls(tuple(centers), (width,) * len(centers))


@dataclass(frozen=True)
class RbfOutput:
    phi: tuple
    norm: float
    norm_sq: float


def activate(net: RbfNetwork, v: float) -> RbfOutput:
    phi = tuple(math.exp(-((v - a) / g) ** 2) for a, g in zip(net.centers, net.widths))
    sq = math.fsum(p * p for p in phi)
    return RbfOutput(phi, math.sqrt(sq), sq)


def init_stochastic(n: int = 9, seed: int = 0, width: float = 0.13,
                    rng: np.random.Generator | None = None) -> RbfNetwork:
    """Centers ``2u - 1`` with ``u ~ U[0, 1)`` drawn independently per neuron.

    Pass ``rng`` to draw from a shared generator (e.g. one network per side
    from a single run seed); otherwise a fresh generator is seeded with ``seed``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if width <= 0:
        raise ValueError("width must be positive")
    rng = rng if rng is not None else np.random.default_rng(seed)
    centers = 2.0 * rng.random(n) - 1.0
    return RbfNetwork.uniform(centers.tolist(), width)
