"""Random sparse polynomials for tests and benchmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .poly import Polynomial


@dataclass(frozen=True)
class GenSpec:
    nx: int
    deg_max: int
    card: int
    seed: int = 0

    def __post_init__(self):
        for name in ("nx", "deg_max", "card"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed}")


def _composition(rng: np.random.Generator, total: int, parts: int) -> np.ndarray:
    """Uniform weak composition of ``total`` into ``parts`` (stars and bars)."""
    bars = np.sort(rng.choice(total + parts - 1, size=parts - 1, replace=False))
    edges = np.concatenate(([-1], bars, [total + parts - 1]))
    return np.diff(edges) - 1


def generate_random_pol(spec: GenSpec) -> Polynomial:
    """Polynomial with exactly ``spec.card`` monomials and degree ``spec.deg_max``.

    Each row draws its total degree uniformly from ``0..deg_max`` and splits
    it uniformly among the variables. If no row reaches ``deg_max``, one
    randomly chosen row is redrawn at full degree. Coefficients are i.i.d.
    standard normal. Duplicate rows are kept.
    """
    rng = np.random.default_rng(spec.seed)
    degrees = rng.integers(0, spec.deg_max, size=spec.card, endpoint=True)
    powers = np.array([_composition(rng, int(d), spec.nx) for d in degrees], dtype=np.int64)
    if not np.any(degrees == spec.deg_max):
        i = int(rng.integers(spec.card))
        powers[i] = _composition(rng, spec.deg_max, spec.nx)
    coefs = rng.standard_normal(spec.card)
    return Polynomial(powers, coefs)
