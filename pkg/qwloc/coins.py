"""
Coin operators of the two-state walk on the line and their split into the
left-moving part P_x and the right-moving part Q_x.
"""
import dataclasses
import enum
import types
import typing

import numpy as np

TWO_PI = 2 * np.pi
UNITARY_TOL = 1e-12


def normalize_angle(omega: float) -> float:
    """ Reduces an angle in radians to [0, 2π). """
    reduced = float(np.mod(omega, TWO_PI))
    # np.mod of a tiny negative number rounds up to exactly 2π
    return 0.0 if reduced >= TWO_PI else reduced


class Chirality(enum.Enum):
    LEFT = 0
    RIGHT = 1


@dataclasses.dataclass(frozen=True)
class CoinMatrix:
    """ The 2x2 matrix [[a, b], [c, d]] applied to the chirality. """

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_array(cls, array) -> "CoinMatrix":
        array = np.asarray(array, dtype=np.complex128)
        if array.shape != (2, 2):
            raise ValueError(f"Coin must be a 2x2 matrix, got shape {array.shape}.")
        return cls(*(complex(v) for v in array.ravel()))

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.complex128)

    def unitarity_error(self) -> float:
        """ max |U U^† - I| over the four entries """
        u = self.to_array()
        return float(np.abs(u @ u.conj().T - np.eye(2)).max())

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        return self.unitarity_error() <= tol

    def perturbed(self, delta: complex) -> "CoinMatrix":
        """ Returns a copy with `delta` added to the top-left entry. """
        return dataclasses.replace(self, a=self.a + delta)


def _eq22_array(omega: float) -> np.ndarray:
    phase = np.exp(1j * normalize_angle(omega))
    return np.array([[1, phase], [np.conj(phase), -1]], dtype=np.complex128)


def _eq21_array(omega: float) -> np.ndarray:
    phase = np.exp(1j * normalize_angle(omega))
    return np.array([[phase, 1], [1, -np.conj(phase)]], dtype=np.complex128)


def make_coin_eq22(omega: float) -> CoinMatrix:
    """ (1/√2) [[1, e^{iω}], [e^{-iω}, -1]]; ω = 0 is the Hadamard gate. """
    return CoinMatrix.from_array(_eq22_array(omega) / np.sqrt(2))


def make_coin_eq21(omega: float) -> CoinMatrix:
    """ (1/√2) [[e^{iω}, 1], [1, -e^{-iω}]]; ω = 0 is the Hadamard gate. """
    return CoinMatrix.from_array(_eq21_array(omega) / np.sqrt(2))


HADAMARD = make_coin_eq22(0.0)


@dataclasses.dataclass(frozen=True, eq=False)
class CoinSplit:
    """ U = P + Q where P keeps the top row (move left) and Q the bottom
        row (move right). """

    p_part: np.ndarray
    q_part: np.ndarray

    def __post_init__(self):
        self.p_part.setflags(write=False)
        self.q_part.setflags(write=False)


def split(coin: CoinMatrix) -> CoinSplit:
    """ Divides a unitary coin into its left-moving and right-moving parts.

    Parameters
    ----------
    coin : CoinMatrix
        must be unitary to within UNITARY_TOL

    Returns
    -------
    coin_split : CoinSplit
        P = [[a, b], [0, 0]] and Q = [[0, 0], [c, d]]
    """
    if not coin.is_unitary():
        raise ValueError(
            f"Cannot split a non-unitary coin (error {coin.unitarity_error():.3e})."
        )
    u = coin.to_array()
    p_part = np.zeros((2, 2), dtype=np.complex128)
    q_part = np.zeros((2, 2), dtype=np.complex128)
    p_part[0] = u[0]
    q_part[1] = u[1]
    return CoinSplit(p_part, q_part)


class FieldKind(enum.Enum):
    EQ22 = "eq22"
    EQ21 = "eq21"
    HADAMARD = "hadamard"
    CUSTOM = "custom"


@dataclasses.dataclass(frozen=True, eq=False)
class CoinField:
    """ A position-indexed family of coins {U_x}.

    The EQ22/EQ21 kinds put the ω-coin at the origin and the Hadamard coin
    everywhere else. CUSTOM fields read the coin from `coins`, falling back
    to `default` when one is given.
    """

    kind: FieldKind
    omega: float = 0.0
    coins: typing.Mapping[int, CoinMatrix] = dataclasses.field(
        default_factory=lambda: types.MappingProxyType({})
    )
    default: typing.Optional[CoinMatrix] = None

    @classmethod
    def eq22(cls, omega: float) -> "CoinField":
        return cls(FieldKind.EQ22, normalize_angle(omega))

    @classmethod
    def eq21(cls, omega: float) -> "CoinField":
        return cls(FieldKind.EQ21, normalize_angle(omega))

    @classmethod
    def hadamard(cls) -> "CoinField":
        return cls(FieldKind.HADAMARD)

    @classmethod
    def custom(
        cls,
        coins: typing.Mapping[int, CoinMatrix],
        default: typing.Optional[CoinMatrix] = None,
    ) -> "CoinField":
        return cls(
            FieldKind.CUSTOM,
            coins=types.MappingProxyType(dict(coins)),
            default=default,
        )

    @property
    def origin_coin(self) -> CoinMatrix:
        if self.kind is FieldKind.EQ22:
            return make_coin_eq22(self.omega)
        if self.kind is FieldKind.EQ21:
            return make_coin_eq21(self.omega)
        if self.kind is FieldKind.HADAMARD:
            return HADAMARD
        return self.coin_at(0)

    def coin_at(self, x: int) -> CoinMatrix:
        if self.kind is FieldKind.CUSTOM:
            if x in self.coins:
                return self.coins[x]
            if self.default is None:
                raise KeyError(f"Custom coin field has no coin at position {x}.")
            return self.default
        return self.origin_coin if x == 0 else HADAMARD

    def with_perturbed_origin(self, delta: complex) -> "CoinField":
        """ Custom copy of this field whose origin coin is off by `delta`
            (a non-unitary negative control when delta != 0). """
        if self.kind is FieldKind.CUSTOM:
            coins = dict(self.coins)
            coins[0] = self.coin_at(0).perturbed(delta)
            return CoinField.custom(coins, default=self.default)
        return CoinField.custom(
            {0: self.origin_coin.perturbed(delta)}, default=HADAMARD
        )

    def matrices(self, positions: np.ndarray, normalized: bool = True) -> np.ndarray:
        """ Stacks the coins at `positions` into an array of shape (len, 2, 2).

        With `normalized=False` the EQ22, EQ21 and Hadamard kinds return √2 U,
        whose entries are ±1 and unit phases.
        """
        positions = np.asarray(positions)
        if self.kind is FieldKind.CUSTOM:
            if not normalized:
                raise ValueError("Custom coin fields have no unnormalised form.")
            return np.array(
                [self.coin_at(int(x)).to_array() for x in positions],
                dtype=np.complex128,
            ).reshape(len(positions), 2, 2)
        table = np.broadcast_to(_eq22_array(0.0), (len(positions), 2, 2)).copy()
        table[positions == 0] = _UNNORMALIZED[self.kind](self.omega)
        return table / np.sqrt(2) if normalized else table


_UNNORMALIZED = {
    FieldKind.EQ22: _eq22_array,
    FieldKind.EQ21: _eq21_array,
    FieldKind.HADAMARD: _eq22_array,
}


def coin_at(field: CoinField, x: int) -> CoinMatrix:
    """ Returns the coin of `field` at position `x`. """
    return field.coin_at(x)


# Coin models selectable by name. Each builder takes ω; the Hadamard walk
# ignores it.
MODELS: typing.Dict[str, typing.Callable[[float], CoinField]] = {
    "eq22": CoinField.eq22,
    "eq21": CoinField.eq21,
    "hadamard": lambda omega=0.0: CoinField.hadamard(),
}


def get_field(model: str, omega: float = 0.0) -> CoinField:
    """ Builds the coin field of a registered model.

    Parameters
    ----------
    model : str
        key in the MODELS dict
    omega : float
        angle of the origin coin in radians

    Returns
    -------
    field : CoinField
    """
    if not model in MODELS:
        raise KeyError(f"No coin model '{model}' is registered.")
    return MODELS[model](omega)
