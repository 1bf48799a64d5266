"""
Exact evolution of the classical walk that steps left with probability p0
at the origin and p elsewhere. Laid out like the quantum engine: the mass
at time n covers [-n, n], row i being position x = i - n.
"""
import dataclasses
import logging

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

MASS_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class ClassicalField:
    p0: float
    q0: float
    p: float
    q: float

    def __post_init__(self):
        for name in ("p0", "q0", "p", "q"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must be a probability, got {value}.")
        if abs(self.p0 + self.q0 - 1) > 1e-12 or abs(self.p + self.q - 1) > 1e-12:
            raise ValueError(
                f"Left and right probabilities must sum to 1, got "
                f"p0+q0={self.p0 + self.q0}, p+q={self.p + self.q}."
            )

    @classmethod
    def from_left(cls, p0: float, p: float) -> "ClassicalField":
        """ Builds the field from the left-step probabilities alone. """
        return cls(p0, 1 - p0, p, 1 - p)

    def left_probabilities(self, positions: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(positions) == 0, self.p0, self.p)


@dataclasses.dataclass(frozen=True, eq=False)
class ClassicalDistribution:
    time: int
    mass: np.ndarray

    def __post_init__(self):
        assert self.mass.shape == (2 * self.time + 1,)
        self.mass.setflags(write=False)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(-self.time, self.time + 1)

    def mass_at(self, x: int) -> float:
        if abs(x) > self.time:
            return 0.0
        return float(self.mass[x + self.time])

    def to_series(self) -> pd.Series:
        return pd.Series(
            self.mass, index=pd.Index(self.positions, name="position"), name="mass"
        )


def initial_distribution() -> ClassicalDistribution:
    return ClassicalDistribution(0, np.ones(1))


def _advance(mass: np.ndarray, left: np.ndarray) -> np.ndarray:
    advanced = np.zeros(len(mass) + 2)
    moved_left = left * mass
    advanced[:-2] += moved_left
    advanced[2:] += mass - moved_left
    return advanced


def classical_step(dist: ClassicalDistribution, field: ClassicalField) -> ClassicalDistribution:
    """ mass(x) <- p_{x+1} mass(x+1) + q_{x-1} mass(x-1) """
    left = field.left_probabilities(dist.positions)
    mass = _advance(dist.mass, left)
    assert abs(mass.sum() - dist.mass.sum()) <= MASS_TOL, "Mass was not conserved."
    return ClassicalDistribution(dist.time + 1, mass)


def classical_run(field: ClassicalField, n: int) -> ClassicalDistribution:
    if n < 0:
        raise ValueError(f"Number of steps must be non-negative, got {n}.")
    dist = initial_distribution()
    for _ in range(n):
        dist = classical_step(dist, field)
    return dist


def classical_return(field: ClassicalField, n: int) -> float:
    """ p_n^(c)(0), the mass at the origin after n steps from δ₀ """
    return classical_run(field, n).mass_at(0)


def classical_returns(field: ClassicalField, steps: int) -> pd.Series:
    """ p_n^(c)(0) for n = 0, ..., steps in one pass. """
    if steps < 0:
        raise ValueError(f"Number of steps must be non-negative, got {steps}.")
    returns = np.zeros(steps + 1)
    dist = initial_distribution()
    returns[0] = 1.0
    for t in range(steps):
        dist = classical_step(dist, field)
        returns[t + 1] = dist.mass_at(0)
    log.debug("Classical walk %s ran %d steps", field, steps)
    return pd.Series(returns, index=pd.Index(np.arange(steps + 1), name="n"), name="p_return")
