"""Shape parameters and permutation vectors for the tiling family.

Each construction level i contributes one positive length parameter p_i
(lattice step along axis i) and, for i >= 2, one permutation of the colors
{0, ..., i-1} applied to the level-(i-1) mesh before lifting.

The shape-optimal parameters form a ray kappa * p_star with

    p_1 = 1,   p_2 = sqrt(1/3),   p_j = sqrt(2/3) / (j - 1)   for j >= 3,

independent of the ambient dimension.  ``optimal_params`` returns the
kappa = 1 representative; ``scale`` produces the rest of the ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class ParamVector:
    """Strictly positive length parameters p = (p_1, ..., p_d)."""

    p: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if len(self.p) < 1:
            raise ValueError("parameter vector needs dimension >= 1")
        for i, v in enumerate(self.p):
            if not (v > 0.0) or not math.isfinite(v):
                raise ValueError(f"p_{i + 1} = {v} must be strictly positive and finite")

    @property
    def d(self) -> int:
        return len(self.p)

    def product(self) -> float:
        return math.prod(self.p)

    def __iter__(self):
        return iter(self.p)

    def __len__(self) -> int:
        return len(self.p)

    def __getitem__(self, i: int) -> float:
        return self.p[i]


@dataclass(frozen=True)
class PermutationVector:
    """One color permutation per construction level i = 2..d.

    ``perms[i - 2]`` is the permutation applied to the level-(i-1) colors
    {0, ..., i-1} right before lifting to level i.
    """

    d: int
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        perms = tuple(tuple(int(x) for x in perm) for perm in self.perms)
        object.__setattr__(self, "perms", perms)
        if len(perms) != self.d - 1:
            raise ValueError(
                f"need {self.d - 1} permutations for levels 2..{self.d}, got {len(perms)}"
            )
        for i, perm in enumerate(perms, start=2):
            if sorted(perm) != list(range(i)):
                raise ValueError(f"level-{i} entry {perm} is not a permutation of 0..{i - 1}")

    @classmethod
    def identity(cls, d: int) -> "PermutationVector":
        return cls(d, tuple(tuple(range(i)) for i in range(2, d + 1)))

    def level(self, i: int) -> tuple[int, ...]:
        """Permutation used when lifting to level i (2 <= i <= d)."""
        if not 2 <= i <= self.d:
            raise ValueError(f"level {i} out of range 2..{self.d}")
        return self.perms[i - 2]

    def is_identity(self) -> bool:
        return all(perm == tuple(range(len(perm))) for perm in self.perms)


def optimal_params(d: int) -> ParamVector:
    """Shape-optimal parameters (kappa = 1 representative) for dimension d >= 2."""
    if d < 2:
        raise ValueError(f"optimal parameters are defined for d >= 2, got d = {d}")
    p = [1.0, math.sqrt(1.0 / 3.0)]
    p += [math.sqrt(2.0 / 3.0) / (j - 1) for j in range(3, d + 1)]
    return ParamVector(tuple(p))


def scale(p: ParamVector, kappa: float) -> ParamVector:
    """Componentwise rescaling by kappa > 0; stays on the same optimality ray."""
    if not (kappa > 0.0) or not math.isfinite(kappa):
        raise ValueError(f"scale factor must be strictly positive and finite, got {kappa}")
    return ParamVector(tuple(kappa * v for v in p.p))


def oeis_denominators(n: int) -> list[int]:
    """First n denominators of (kappa * p_j)^2 at kappa = 2**-0.5 on the optimal ray.

    The squares 1/2, 1/6, 1/(3*(j-1)^2) are unit fractions; the denominators
    are 2, 6, then 3*(j-1)^2.  Values are recovered by rounding 2 / p_j^2 so
    the returned integers are tied to the actual floating parameters.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    denominators = []
    for j in range(1, n + 1):
        if j == 1:
            pj = 1.0
        elif j == 2:
            pj = math.sqrt(1.0 / 3.0)
        else:
            pj = math.sqrt(2.0 / 3.0) / (j - 1)
        denominators.append(round(2.0 / (pj * pj)))
    return denominators


def as_param_vector(p: "ParamVector | Sequence[float] | Iterable[float]") -> ParamVector:
    """Coerce a sequence of positive reals into a ParamVector."""
    if isinstance(p, ParamVector):
        return p
    return ParamVector(tuple(p))
