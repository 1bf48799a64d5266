"""
Truncated formal power series and the generating functions of the walk
built from them.

ω-independent series (√(1+z⁴), r*, Z, λ₊, the composition sums) live in a
sympy polynomial ring over QQ; the cos ω / sin ω scalars only enter in the
last combination step, which moves the coefficients to a ring over RR.
"""
import dataclasses
import functools
import logging
import math
import numbers
import typing
from fractions import Fraction

import numpy as np
import pandas as pd
from sympy import Rational
from sympy.discrete.convolutions import convolution
from sympy.polys.domains import QQ, RR
from sympy.polys.ring_series import rs_mul, rs_pow, rs_series_inversion, rs_trunc
from sympy.polys.rings import PolyElement, ring

from qwloc.theory import exact_trig, params

log = logging.getLogger(__name__)

EXACT_RING, _ = ring("z", QQ)
FLOAT_RING, _ = ring("z", RR)

Coefficient = typing.Union[Fraction, float]


def _ring_for(values: typing.Iterable) -> typing.Any:
    if all(isinstance(value, numbers.Rational) for value in values):
        return EXACT_RING
    return FLOAT_RING


def _to_domain(value, target):
    if target == EXACT_RING:
        value = Fraction(value)
        return QQ(value.numerator, value.denominator)
    return RR(float(value))


def _from_domain(value, target) -> Coefficient:
    if target == EXACT_RING:
        return Fraction(int(value.numerator), int(value.denominator))
    return float(value)


def _fraction(value) -> Fraction:
    """ sympy Rational or integer to Fraction """
    if isinstance(value, Rational):
        return Fraction(int(value.p), int(value.q))
    return Fraction(int(value))


def _poly(coefficients: typing.Sequence) -> PolyElement:
    target = _ring_for(coefficients)
    return target.from_dict(
        {(k,): _to_domain(c, target) for k, c in enumerate(coefficients) if c != 0}
    )


class Series:
    """ Σ_{k=0}^{order} c_k z^k, times an optional factor √2^{sqrt2_power}.

    The √2 factor keeps series such as λ₊ = (…)/(√2 z) exact. Arithmetic
    between two series truncates to the smaller order; mixing an exact and
    a float series gives a float series.
    """

    __slots__ = ("poly", "order", "sqrt2_power")

    def __init__(self, poly: PolyElement, order: int, sqrt2_power: int = 0):
        if order < 0:
            raise ValueError(f"Order must be non-negative, got {order}.")
        self.order = int(order)
        self.poly = rs_trunc(poly, poly.ring.gens[0], self.order + 1)
        self.sqrt2_power = int(sqrt2_power)

    @classmethod
    def from_coefficients(cls, coefficients: typing.Sequence[Coefficient], sqrt2_power: int = 0) -> "Series":
        if not len(coefficients):
            raise ValueError("A series needs at least its constant term.")
        return cls(_poly(coefficients), len(coefficients) - 1, sqrt2_power)

    @classmethod
    def polynomial(cls, coefficients: typing.Sequence[Coefficient], order: int) -> "Series":
        """ Pads or truncates `coefficients` to the given order. """
        return cls(_poly(coefficients[: order + 1]), order)

    @classmethod
    def monomial(cls, power: int, order: int, value: Coefficient = Fraction(1)) -> "Series":
        return cls.polynomial([0] * power + [value], order)

    @property
    def ring(self):
        return self.poly.ring

    @property
    def z(self) -> PolyElement:
        return self.ring.gens[0]

    @property
    def coefficients(self) -> typing.Tuple[Coefficient, ...]:
        """ c_0..c_order without the √2 factor """
        zero = self.ring.domain.zero
        return tuple(
            _from_domain(self.poly.get((k,), zero), self.ring) for k in range(self.order + 1)
        )

    @property
    def scale(self):
        """ √2^{sqrt2_power}, exact when the power is even """
        if self.sqrt2_power % 2 == 0:
            return Fraction(2) ** (self.sqrt2_power // 2)
        return math.sqrt(2) ** self.sqrt2_power

    def __getitem__(self, k: int) -> Coefficient:
        if not 0 <= k <= self.order:
            raise IndexError(f"Coefficient {k} is beyond order {self.order}.")
        value = _from_domain(self.poly.get((k,), self.ring.domain.zero), self.ring)
        return value if self.sqrt2_power == 0 else value * self.scale

    def __len__(self) -> int:
        return self.order + 1

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def __repr__(self) -> str:
        root = f" * √2^{self.sqrt2_power}" if self.sqrt2_power else ""
        return f"Series({self.poly}{root}, order={self.order})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return list(self) == list(other)

    def _in(self, target) -> PolyElement:
        return self.poly if self.ring == target else self.poly.set_ring(target)

    def _aligned(self, other: "Series") -> typing.Tuple[PolyElement, PolyElement, int, int]:
        """ Brings both series to a common ring, order and √2 power. """
        target = EXACT_RING if self.ring == other.ring == EXACT_RING else FLOAT_RING
        a, b = self._in(target), other._in(target)
        diff = self.sqrt2_power - other.sqrt2_power
        if diff % 2:
            raise ValueError(
                "Cannot add series whose √2 factors differ by an odd power."
            )
        if diff > 0:
            a = a * 2 ** (diff // 2)
        elif diff < 0:
            b = b * 2 ** (-diff // 2)
        return a, b, min(self.order, other.order), min(self.sqrt2_power, other.sqrt2_power)

    def _lift(self, value) -> "Series":
        return Series.polynomial([value], self.order)

    def _scaled(self, value) -> "Series":
        target = self.ring if self.ring == _ring_for([value]) else FLOAT_RING
        return Series(self._in(target) * _to_domain(value, target), self.order, self.sqrt2_power)

    def __add__(self, other) -> "Series":
        if isinstance(other, numbers.Number):
            other = self._lift(other)
        if not isinstance(other, Series):
            return NotImplemented
        a, b, order, power = self._aligned(other)
        return Series(a + b, order, power)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(-self.poly, self.order, self.sqrt2_power)

    def __sub__(self, other) -> "Series":
        if isinstance(other, numbers.Number):
            other = self._lift(other)
        if not isinstance(other, Series):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Series":
        return (-self) + other

    def __mul__(self, other) -> "Series":
        if isinstance(other, numbers.Number):
            return self._scaled(other)
        if not isinstance(other, Series):
            return NotImplemented
        target = EXACT_RING if self.ring == other.ring == EXACT_RING else FLOAT_RING
        order = min(self.order, other.order)
        product = rs_mul(self._in(target), other._in(target), target.gens[0], order + 1)
        return Series(product, order, self.sqrt2_power + other.sqrt2_power)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Series":
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"Only non-negative integer powers are supported, got {k}.")
        if k == 0:
            return self._lift(1)
        return Series(rs_pow(self.poly, k, self.z, self.order + 1), self.order, k * self.sqrt2_power)

    def reciprocal(self) -> "Series":
        if not self.poly.get((0,)):
            raise ZeroDivisionError("Series with vanishing constant term is not invertible.")
        inverse = rs_series_inversion(self.poly, self.z, self.order + 1)
        return Series(inverse, self.order, -self.sqrt2_power)

    def __truediv__(self, other) -> "Series":
        if isinstance(other, numbers.Number):
            if other == 0:
                raise ZeroDivisionError("Division of a series by zero.")
            return self._scaled(Fraction(1) / other if isinstance(other, numbers.Rational) else 1 / other)
        if not isinstance(other, Series):
            return NotImplemented
        return self * other.reciprocal()

    def divide_by_z(self) -> "Series":
        """ S/z, one order shorter; S must have no constant term. """
        if self.poly.get((0,)):
            raise ValueError(
                f"Series has constant term {self.coefficients[0]}; dividing by z "
                "leaves a pole at z = 0."
            )
        if self.order == 0:
            raise ValueError("Dividing an order-0 series by z leaves nothing.")
        shifted = self.ring.from_dict({(k - 1,): c for (k,), c in self.poly.items()})
        return Series(shifted, self.order - 1, self.sqrt2_power)

    def sqrt(self) -> "Series":
        """ Square root with constant term 1 (or a positive float), from the
            coefficient recursion of result² = self. """
        if self.sqrt2_power % 2:
            raise ValueError("Square root of an odd √2 power is not supported.")
        a = self.coefficients
        if a[0] == 1:
            b0 = a[0]
        elif isinstance(a[0], float) and a[0] > 0:
            b0 = math.sqrt(a[0])
        else:
            raise ValueError(
                f"Square root needs constant term 1 or a positive float, got {a[0]}."
            )
        b = [b0]
        for n in range(1, len(a)):
            acc = a[n]
            for k in range(1, n):
                acc -= b[k] * b[n - k]
            b.append(acc / (2 * b0))
        return Series.from_coefficients(b, self.sqrt2_power // 2)

    def to_numpy(self) -> np.ndarray:
        return np.array([float(c) for c in self])


# ---------------------------------------------------------------------------
# ω-independent series

@functools.lru_cache(maxsize=None)
def sqrt_one_plus_z4(order: int) -> Series:
    """ (1 + z⁴)^{1/2}: the coefficient of z^{4m} is the binomial C(1/2, m). """
    if order < 0:
        raise ValueError(f"Order must be non-negative, got {order}.")
    coefficients = [Fraction(0)] * (order + 1)
    binomial = Fraction(1)
    for m in range(order // 4 + 1):
        if m:
            binomial *= (Fraction(1, 2) - (m - 1)) / m
        coefficients[4 * m] = binomial
    return Series.from_coefficients(coefficients)


@functools.lru_cache(maxsize=None)
def z_series(order: int) -> Series:
    """ Z = -1 - z² + √(1+z⁴), the generating function of the origin
        first-return weights, Σ r*_n z^{n+1}. """
    return sqrt_one_plus_z4(order) - Series.polynomial([1, 0, 1], order)


def r_star_series(order: int) -> Series:
    """ Σ_{n≥1} r*_n z^n = (-1 - z² + √(1+z⁴)) / z

    Only r*_1 = -1 and r*_{4m-1} are non-zero.
    """
    if order < 1:
        raise ValueError(f"Order must be at least 1, got {order}.")
    return z_series(order + 1).divide_by_z()


def lambda_series(branch: str, order: int) -> Series:
    """ λ± = (-1 + z² ± √(1+z⁴)) / (√2 z)

    λ₊ is a power series; λ₋ has a pole at z = 0 and raises ValueError.
    """
    if branch not in ("+", "-"):
        raise KeyError(f"Unknown branch '{branch}', expected '+' or '-'.")
    root = sqrt_one_plus_z4(order + 1)
    numerator = Series.polynomial([-1, 0, 1], order + 1)
    numerator = numerator + root if branch == "+" else numerator - root
    shifted = numerator.divide_by_z()
    return Series(shifted.poly, shifted.order, sqrt2_power=-1)


def lambda_plus_series(order: int) -> Series:
    return lambda_series("+", order)


def first_passage_gf(m: int, order: int) -> typing.Tuple[Series, Series]:
    """ Generating functions of the absorbed Hadamard walk started at m.

    Parameters
    ----------
    m : int
        starting site, m != 0
    order : int
        truncation order

    Returns
    -------
    (p, r) : tuple of Series
        for m >= 1: p^(∞,m) = zλ₊^{m-1} and r^(∞,m) = ((-1+√(1+z⁴))/z)λ₊^{m-1}
    (q, s) : tuple of Series
        for m <= -1: q^(-∞,m) = zλ₋^{m+1} and s^(-∞,m) = ((1-√(1+z⁴))/z)λ₋^{m+1},
        using λ₊λ₋ = -1 so that λ₋^{m+1} = (-λ₊)^{|m|-1}
    """
    if m == 0:
        raise ValueError("The walk must start away from the absorbing site 0.")
    power = abs(m) - 1
    lam = lambda_plus_series(order)
    if m < 0:
        lam = -lam
    carried = lam ** power
    z = Series.monomial(1, order)
    tail = (sqrt_one_plus_z4(order + 1) - 1).divide_by_z()
    if m < 0:
        tail = -tail
    return z * carried, tail * carried


# ---------------------------------------------------------------------------
# Origin amplitudes

@functools.lru_cache(maxsize=4)
def composition_table(n: int) -> typing.Tuple[Series, ...]:
    """ T^(k) for k = 0..n, series in w = z² whose coefficient of w^j is
        Σ over compositions (a_1..a_k) of j of Π r*_{2a_i - 1}.

    Built by the convolution recurrence T^(k) = T^(k-1) * x with
    x_a = r*_{2a-1}.
    """
    r_star = r_star_series(max(2 * n - 1, 1))
    x = [0] + [Rational(v.numerator, v.denominator) for v in (r_star[2 * a - 1] for a in range(1, n + 1))]
    # sympy only keeps plain ints and non-integer Rationals on the exact path
    x = [int(v) if v == int(v) else v for v in x]
    row = [1]
    table = [Series.polynomial([Fraction(1)], n)]
    for _ in range(n):
        row = [int(v) if v == int(v) else v for v in convolution(row, x)[: n + 1]]
        table.append(Series.polynomial([_fraction(v) for v in row], n))
    log.debug("Built composition table up to n=%d", n)
    return tuple(table)


def prop31_amplitudes(omega: float, n: int) -> np.ndarray:
    """ Ψ_{2j}(0) for j = 0..n from the composition sum

        Ψ_{2j}(0) = Σ_k T^(k)_j [Σ± w±^L u±^k,  -i Σ± w±^R u±^k] / √2

    with u± = γ±/2, w±^L = (1-μ±)/C±², w±^R = μ±(1-μ±)/C±². The k = 0 term
    is the initial qubit.

    Returns
    -------
    amplitudes : np.ndarray
        complex array of shape (n + 1, 2)
    """
    if n < 0:
        raise ValueError(f"Half-time must be non-negative, got {n}.")
    prm = params(omega)
    table = np.array([series.to_numpy() for series in composition_table(n)])
    k = np.arange(n + 1)
    u_plus = prm.u_plus ** k
    u_minus = prm.u_minus ** k
    (l_plus, l_minus), (r_plus, r_minus) = prm.left_weights, prm.right_weights
    left = (l_plus * u_plus + l_minus * u_minus) / np.sqrt(2)
    right = -1j * (r_plus * u_plus + r_minus * u_minus) / np.sqrt(2)
    return np.stack([table.T @ left, table.T @ right], axis=1)


def prop31_amplitude(omega: float, n: int) -> np.ndarray:
    """ Ψ_{2n}(0) as [left, right] from the composition sum. """
    if n < 1:
        raise ValueError(f"Half-time must be at least 1, got {n}.")
    return prop31_amplitudes(omega, n)[n]


@dataclasses.dataclass(frozen=True)
class AmplitudeSeries:
    """ Σ Ψ_n(0) z^n split into real and imaginary parts of each chirality. """

    omega: float
    l_re: Series
    l_im: Series
    r_re: Series
    r_im: Series

    @property
    def order(self) -> int:
        return self.l_re.order

    def amplitude(self, n: int) -> np.ndarray:
        return np.array(
            [
                complex(self.l_re[n], self.l_im[n]),
                complex(self.r_re[n], self.r_im[n]),
            ]
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            data={
                "l_re": self.l_re.to_numpy(),
                "l_im": self.l_im.to_numpy(),
                "r_re": self.r_re.to_numpy(),
                "r_im": self.r_im.to_numpy(),
            },
            index=pd.Index(np.arange(self.order + 1), name="n"),
        )
        frame["p_return"] = (frame ** 2).sum(axis=1)
        return frame


@functools.lru_cache(maxsize=None)
def _z_square(order: int) -> Series:
    z = z_series(order)
    return z * z


def origin_gf(omega: float, order: int) -> AmplitudeSeries:
    """ Expands the four origin generating functions to z^order.

    With Z = -1 - z² + √(1+z⁴) and D = √2 (2 + 2Z cos ω + Z²):
    L,Re = R,Im = (2 + Z cos ω)/D, L,Im = (1 + sin ω) Z/D and
    R,Re = -(1 - sin ω) Z/D.
    """
    if order < 0:
        raise ValueError(f"Order must be non-negative, got {order}.")
    cos_w, sin_w = exact_trig(omega)
    z = z_series(order)
    denominator = (2 + 2 * cos_w * z + _z_square(order)) * math.sqrt(2)
    inverse = denominator.reciprocal()
    real_part = (2 + cos_w * z) * inverse
    return AmplitudeSeries(
        omega=omega,
        l_re=real_part,
        l_im=(1 + sin_w) * z * inverse,
        r_re=-(1 - sin_w) * z * inverse,
        r_im=real_part,
    )


def origin_gf_explicit(omega: float, order: int) -> AmplitudeSeries:
    """ The same generating functions from their rationalised forms over
        Δ = 3 - 2cos ω + 2(1-cos ω)² z² + (3 - 2cos ω) z⁴. """
    if order < 0:
        raise ValueError(f"Order must be non-negative, got {order}.")
    cos_w, sin_w = exact_trig(omega)
    root = sqrt_one_plus_z4(order)
    poly = functools.partial(Series.polynomial, order=order)
    delta = poly([3 - 2 * cos_w, 0, 2 * (1 - cos_w) ** 2, 0, 3 - 2 * cos_w])
    inverse = (delta * (2 * math.sqrt(2))).reciprocal()
    real_numerator = (
        poly([4 - 3 * cos_w, 0, 2 * (1 - cos_w) ** 2, 0, 2 - cos_w])
        + (2 - cos_w) * poly([1, 0, 1]) * root
    )
    imag_numerator = poly([1, 0, 2 * (1 - cos_w), 0, 1]) + poly([-1, 0, 1]) * root
    real_part = real_numerator * inverse
    return AmplitudeSeries(
        omega=omega,
        l_re=real_part,
        l_im=-(1 + sin_w) * imag_numerator * inverse,
        r_re=(1 - sin_w) * imag_numerator * inverse,
        r_im=real_part,
    )


# ---------------------------------------------------------------------------
# Classical comparator

def classical_gf(p0, q0, p, q, order: int) -> Series:
    """ f(z) = {1 - (p0/p + q0/q)(1 - √(1 - 4pqz²))/2}^{-1}

    The coefficients are the return probabilities of the classical walk
    that steps left with probability p0 at the origin and p elsewhere.
    Pass Fractions for exact coefficients.
    """
    if not (0 < p < 1 and 0 < q < 1):
        raise ValueError(f"Need p, q in (0, 1), got p={p}, q={q}.")
    if abs(p + q - 1) > 1e-12 or abs(p0 + q0 - 1) > 1e-12:
        raise ValueError("Left and right probabilities must sum to 1.")
    if not (0 <= p0 <= 1 and 0 <= q0 <= 1):
        raise ValueError(f"Need p0, q0 in [0, 1], got p0={p0}, q0={q0}.")
    one = Fraction(1) if isinstance(p, (int, Fraction)) and isinstance(q, (int, Fraction)) else 1.0
    root = Series.polynomial([one, 0, -4 * p * q], order).sqrt()
    first_return = (1 - root) * ((p0 / p + q0 / q) / 2)
    return (1 - first_return).reciprocal()
