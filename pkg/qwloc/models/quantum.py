"""
State-vector evolution of the two-state walk on the integer line.

The state at time n lives on the window [-n, n]; row i of the amplitude
array is position x = i - n, column 0 the left chirality and column 1 the
right chirality.
"""
import dataclasses
import logging
import typing

import numpy as np
import pandas as pd

from qwloc.coins import Chirality, CoinField, FieldKind

log = logging.getLogger(__name__)

NORM_TOL = 1e-12
INITIAL_QUBIT = np.array([1, 1j], dtype=np.complex128) / np.sqrt(2)
SQRT_HALF = 1 / np.sqrt(2)


@dataclasses.dataclass(frozen=True, eq=False)
class WalkState:
    time: int
    amplitudes: np.ndarray

    def __post_init__(self):
        assert self.amplitudes.shape == (2 * self.time + 1, 2), (
            f"Amplitudes of shape {self.amplitudes.shape} do not cover "
            f"the window [-{self.time}, {self.time}]."
        )
        self.amplitudes.setflags(write=False)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(-self.time, self.time + 1)

    def amplitude_at(self, x: int) -> np.ndarray:
        """ Ψ_n(x) as [left, right]; zero outside the window. """
        if abs(x) > self.time:
            return np.zeros(2, dtype=np.complex128)
        return self.amplitudes[x + self.time].copy()


@dataclasses.dataclass(frozen=True, eq=False)
class Distribution:
    time: int
    probabilities: pd.Series

    @property
    def support(self) -> pd.Series:
        return self.probabilities[self.probabilities.gt(0)]


def initial_state() -> WalkState:
    """ The walker at the origin with qubit [1/√2, i/√2]. """
    return WalkState(0, INITIAL_QUBIT.reshape(1, 2).copy())


def _advance(amplitudes: np.ndarray, coins: np.ndarray) -> np.ndarray:
    """ One step: rotate each chirality with its local coin, then move the
        top component left and the bottom component right. Both arrays
        cover the same window; the result is two positions wider. """
    rotated = np.einsum("xij,xj->xi", coins, amplitudes)
    advanced = np.zeros((len(amplitudes) + 2, 2), dtype=np.complex128)
    left, right = Chirality.LEFT.value, Chirality.RIGHT.value
    advanced[:-2, left] = rotated[:, left]
    advanced[2:, right] = rotated[:, right]
    return advanced


def step(state: WalkState, field: CoinField) -> WalkState:
    """ Ψ_{n+1}(x) = P_{x+1} Ψ_n(x+1) + Q_{x-1} Ψ_n(x-1)

    The input state is left untouched.
    """
    coins = field.matrices(state.positions)
    return WalkState(state.time + 1, _advance(state.amplitudes, coins))


def _evolve(field: CoinField, steps: int) -> typing.Iterator[np.ndarray]:
    """ Yields the amplitude arrays of times 0, ..., steps.

    Non-custom fields step with √2 U and halve the running state exactly
    every second step, so the rounding of 1/√2 never compounds.
    """
    exact = field.kind is not FieldKind.CUSTOM
    coins = field.matrices(np.arange(-steps, steps + 1), normalized=not exact)
    amplitudes = initial_state().amplitudes
    yield amplitudes
    for t in range(steps):
        amplitudes = _advance(amplitudes, coins[steps - t : steps + t + 1])
        if not exact:
            yield amplitudes
        elif t % 2:
            amplitudes *= 0.5
            yield amplitudes
        else:
            yield amplitudes * SQRT_HALF


def run(field: CoinField, n: int) -> WalkState:
    """ Evolves the initial state through `n` steps of `field`. """
    if n < 0:
        raise ValueError(f"Number of steps must be non-negative, got {n}.")
    *_, amplitudes = _evolve(field, n)
    log.debug("Ran %d steps of a %s field", n, field.kind.value)
    return WalkState(n, amplitudes)


def return_probability(state: WalkState) -> float:
    """ p_n(0) = |Ψ_n^(L)(0)|^2 + |Ψ_n^(R)(0)|^2 """
    return float(np.sum(np.abs(state.amplitude_at(0)) ** 2))


def distribution(state: WalkState) -> Distribution:
    """ P(X_n = x) over the whole window, parity-empty sites included. """
    probabilities = pd.Series(
        np.sum(np.abs(state.amplitudes) ** 2, axis=1),
        index=pd.Index(state.positions, name="position"),
        name="probability",
    )
    return Distribution(state.time, probabilities)


def trace(field: CoinField, steps: int) -> pd.DataFrame:
    """ Records the origin in a single pass over `steps` steps.

    Returns
    -------
    trace : pd.DataFrame
        indexed by time n with the complex origin amplitudes `psi_left` and
        `psi_right`, the return probability `p_return` and the total `norm`
    """
    if steps < 0:
        raise ValueError(f"Number of steps must be non-negative, got {steps}.")
    origin = np.zeros((steps + 1, 2), dtype=np.complex128)
    norms = np.zeros(steps + 1)
    for t, amplitudes in enumerate(_evolve(field, steps)):
        origin[t] = amplitudes[t]
        norms[t] = np.sum(np.abs(amplitudes) ** 2)

    result = pd.DataFrame(
        data={
            "psi_left": origin[:, 0],
            "psi_right": origin[:, 1],
            "p_return": np.sum(np.abs(origin) ** 2, axis=1),
            "norm": norms,
        },
        index=pd.Index(np.arange(steps + 1), name="n"),
    )
    drift = np.abs(result.norm - 1).max()
    if drift > NORM_TOL:
        log.warning("Norm drifted by %.3e over %d steps", drift, steps)
    return result


def return_probabilities(field: CoinField, steps: int) -> pd.Series:
    """ p_n(0) for n = 0, ..., steps """
    return trace(field, steps).p_return
