"""
Brute-force path sums of the walk: the full-lattice sums Ξ_n(l, m), the
first-passage sums of the absorbed Hadamard walk and the origin excursion
matrices Ξ*_n. Exponential in n; meant as an independent oracle for the
evolution and series engines.

A path is a bit string (bit t set means step t went right). Products are
accumulated with the newest step's matrix on the left, so "QP₀" means P₀
first, then Q.
"""
import dataclasses
import functools
import logging
import typing

import numpy as np
import pandas as pd

from qwloc.coins import HADAMARD, CoinField, make_coin_eq22, split
from qwloc.models.quantum import INITIAL_QUBIT

log = logging.getLogger(__name__)

MAX_ORACLE_STEPS = 14

_HADAMARD_SPLIT = split(HADAMARD)
P = _HADAMARD_SPLIT.p_part
Q = _HADAMARD_SPLIT.q_part
R = np.array([[1, -1], [0, 0]], dtype=np.complex128) / np.sqrt(2)
S = np.array([[0, 0], [1, 1]], dtype=np.complex128) / np.sqrt(2)
BASIS = {"p": P, "q": Q, "r": R, "s": S}


@dataclasses.dataclass(frozen=True, eq=False)
class PathMatrix:
    """ A sum of path products together with the shape of the paths. """

    entries: np.ndarray
    n: int
    l: typing.Optional[int] = None
    m: typing.Optional[int] = None
    terms: int = 0

    def __post_init__(self):
        self.entries.setflags(write=False)

    def apply(self, vector: np.ndarray = INITIAL_QUBIT) -> np.ndarray:
        return self.entries @ vector


@dataclasses.dataclass(frozen=True)
class BasisCoefficients:
    """ Coordinates of a 2x2 matrix in the orthonormal basis P, Q, R, S. """

    p: complex
    q: complex
    r: complex
    s: complex

    def reconstruct(self) -> np.ndarray:
        return self.p * P + self.q * Q + self.r * R + self.s * S


def basis_expand(matrix) -> BasisCoefficients:
    """ ⟨B|M⟩ = tr(B* M) for B in P, Q, R, S. """
    entries = matrix.entries if isinstance(matrix, PathMatrix) else np.asarray(matrix)
    return BasisCoefficients(
        *(complex(np.trace(b.conj().T @ entries)) for b in BASIS.values())
    )


def _walk(
    n: int,
    start: int,
    splits: typing.Callable[[int], typing.Tuple[np.ndarray, np.ndarray]],
    admissible: typing.Callable[[int, int], bool],
) -> typing.Iterator[typing.Tuple[int, int, np.ndarray]]:
    """ Depth-first enumeration of the n-step paths from `start`.

    `admissible(t, x)` is asked for every site x reached at time t and
    prunes the branch when False. Yields (bits, final position, product).
    """
    stack = [(0, 0, start, np.eye(2, dtype=np.complex128))]
    while stack:
        t, bits, x, product = stack.pop()
        if t == n:
            yield bits, x, product
            continue
        p_part, q_part = splits(x)
        if admissible(t + 1, x + 1):
            stack.append((t + 1, bits | (1 << t), x + 1, q_part @ product))
        if admissible(t + 1, x - 1):
            stack.append((t + 1, bits, x - 1, p_part @ product))


def path_word(bits: int, n: int) -> str:
    """ Writes a path as its product word, newest step first: "PPQ" is
        right, then left, then left. """
    return "".join("Q" if bits >> t & 1 else "P" for t in reversed(range(n)))


def _check_size(n: int):
    if n > MAX_ORACLE_STEPS:
        raise ValueError(
            f"Path enumeration is capped at {MAX_ORACLE_STEPS} steps, got {n}."
        )


def _field_splits(field: CoinField):
    @functools.lru_cache(maxsize=None)
    def splits(x: int):
        coin_split = split(field.coin_at(x))
        return coin_split.p_part, coin_split.q_part

    return splits


def _hadamard_splits(x: int):
    return P, Q


def xi(n: int, l: int, field: CoinField) -> PathMatrix:
    """ Ξ_n(l, m): the sum over the C(n, l) paths from the origin with l
        left steps and m = n - l right steps. """
    if not 0 <= l <= n:
        raise ValueError(f"Need 0 <= l <= n, got l={l}, n={n}.")
    _check_size(n)
    m = n - l

    def admissible(t, x):
        return (t - x) // 2 <= l and (t + x) // 2 <= m

    total = np.zeros((2, 2), dtype=np.complex128)
    terms = 0
    for _, _, product in _walk(n, 0, _field_splits(field), admissible):
        total += product
        terms += 1
    return PathMatrix(total, n, l, m, terms)


def _first_passage_admissible(n: int, sign: int):
    def admissible(t, x):
        if t == n:
            return x == 0
        return 1 <= sign * x <= n - t

    return admissible


def first_passage_paths(n: int, m: int) -> typing.List[typing.Tuple[int, np.ndarray]]:
    """ All paths of the absorbed Hadamard walk from m that first reach 0
        at time n, as (bits, product). """
    if m == 0:
        raise ValueError("The walk must start away from the absorbing site 0.")
    _check_size(n)
    if n < abs(m) or (n - m) % 2:
        return []
    sign = 1 if m > 0 else -1
    return [
        (bits, product)
        for bits, _, product in _walk(
            n, m, _hadamard_splits, _first_passage_admissible(n, sign)
        )
    ]


@functools.lru_cache(maxsize=None)
def _first_passage_sum(n: int, m: int) -> PathMatrix:
    paths = first_passage_paths(n, m)
    total = np.zeros((2, 2), dtype=np.complex128)
    for _, product in paths:
        total += product
    log.debug("Ξ_%d from %d: %d paths", n, m, len(paths))
    return PathMatrix(total, n, terms=len(paths))


def xi_first_passage_plus(n: int, m: int) -> PathMatrix:
    """ Ξ_n^(∞,m): paths from m >= 1 staying in {1, 2, ...} until they
        first hit 0 at time n. Zero when no such path exists. """
    if m < 1:
        raise ValueError(f"The plus side starts at m >= 1, got {m}.")
    return _first_passage_sum(n, m)


def xi_first_passage_minus(n: int, m: int) -> PathMatrix:
    """ Ξ_n^(-∞,m): mirror of xi_first_passage_plus for m <= -1. """
    if m > -1:
        raise ValueError(f"The minus side starts at m <= -1, got {m}.")
    return _first_passage_sum(n, m)


def first_passage_coefficients(m: int, n_max: int) -> pd.DataFrame:
    """ p, q, r, s coordinates of Ξ_n^(±∞,m) for n = 1..n_max. """
    rows = [basis_expand(_first_passage_sum(n, m)) for n in range(1, n_max + 1)]
    return pd.DataFrame(
        [dataclasses.astuple(row) for row in rows],
        columns=list(BASIS),
        index=pd.Index(np.arange(1, n_max + 1), name="n"),
    )


@functools.lru_cache(maxsize=None)
def xi_star(n: int, omega: float) -> PathMatrix:
    """ Ξ*_n = Ξ_{n-1}^(∞,1) Q₀ + Ξ_{n-1}^(-∞,-1) P₀, the sum over the
        excursions from the origin that first return at time n. """
    if n < 2:
        raise ValueError(f"An excursion takes at least 2 steps, got {n}.")
    if n % 2:
        return PathMatrix(np.zeros((2, 2), dtype=np.complex128), n)
    origin = split(make_coin_eq22(omega))
    plus = xi_first_passage_plus(n - 1, 1)
    minus = xi_first_passage_minus(n - 1, -1)
    entries = plus.entries @ origin.q_part + minus.entries @ origin.p_part
    return PathMatrix(entries, n, terms=plus.terms + minus.terms)


def compositions(n: int) -> typing.Iterator[typing.Tuple[int, ...]]:
    """ Ordered tuples of positive integers summing to n. """
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            yield (first,) + rest


def excursion_amplitude(n: int, omega: float) -> np.ndarray:
    """ Ψ_{2n}(0) as the sum over compositions (a_1, ..., a_k) of n of
        Ξ*_{2a_k} ... Ξ*_{2a_1} φ*. """
    if n < 1:
        raise ValueError(f"Half-time must be at least 1, got {n}.")
    total = np.zeros(2, dtype=np.complex128)
    for parts in compositions(n):
        amplitude = INITIAL_QUBIT
        for a in parts:
            amplitude = xi_star(2 * a, omega).entries @ amplitude
        total += amplitude
    return total
