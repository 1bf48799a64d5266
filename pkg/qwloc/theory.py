"""
Closed-form scalars of the inhomogeneous walk: the eigen-data of the
excursion matrix, the localization limit c(ω), the oscillation angle θ₀
and the asymptotic return laws of the comparison walks.
"""
import dataclasses
import typing

import numpy as np
from scipy import integrate

from qwloc.coins import normalize_angle

EXPECTED_C_UNIFORM = (25 - 7 * np.sqrt(5)) / 25
_SNAP_TOL = 1e-15


def exact_trig(omega: float) -> typing.Tuple[float, float]:
    """ (cos ω, sin ω) with exact values at integer multiples of π/2. """
    omega = normalize_angle(omega)
    quarter = omega / (np.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < _SNAP_TOL:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k % 4]
    return float(np.cos(omega)), float(np.sin(omega))


@dataclasses.dataclass(frozen=True)
class TheoryParams:
    """ Scalars derived from ω.

    γ± are the eigenvalues of [[-e^{-iω}, 1], [-1, -e^{iω}]], μ± and C±
    fix the decomposition of the initial qubit over its eigenvectors, c is
    the localization limit and (sin θ₀, cos θ₀) the oscillation of the
    origin amplitudes.
    """

    omega: float
    gamma_plus: complex
    gamma_minus: complex
    mu_plus: float
    mu_minus: float
    C_plus: float
    C_minus: float
    c: float
    sin_theta0: float
    cos_theta0: float

    @property
    def degenerate(self) -> bool:
        """ At ω = 0 the amplitude prefactors vanish and θ₀ carries no
            information. """
        return self.c == 0

    @property
    def u_plus(self) -> complex:
        return self.gamma_plus / 2

    @property
    def u_minus(self) -> complex:
        return self.gamma_minus / 2

    @property
    def left_weights(self) -> typing.Tuple[float, float]:
        """ (1-μ±)/C±², summing to 1 """
        return (
            (1 - self.mu_plus) / self.C_plus ** 2,
            (1 - self.mu_minus) / self.C_minus ** 2,
        )

    @property
    def right_weights(self) -> typing.Tuple[float, float]:
        """ μ±(1-μ±)/C±², summing to -1 """
        w_plus, w_minus = self.left_weights
        return self.mu_plus * w_plus, self.mu_minus * w_minus


def params(omega: float) -> TheoryParams:
    omega = normalize_angle(omega)
    cos_w, sin_w = exact_trig(omega)
    root = np.sqrt(1 + sin_w ** 2)
    c_plus_sq = 2 * ((1 + sin_w ** 2) - sin_w * root)
    c_minus_sq = 2 * ((1 + sin_w ** 2) + sin_w * root)
    assert c_plus_sq > 0 and c_minus_sq > 0, f"C± degenerate at ω={omega}"
    return TheoryParams(
        omega=omega,
        gamma_plus=complex(-cos_w, root),
        gamma_minus=complex(-cos_w, -root),
        mu_plus=sin_w - root,
        mu_minus=sin_w + root,
        C_plus=float(np.sqrt(c_plus_sq)),
        C_minus=float(np.sqrt(c_minus_sq)),
        c=localization_constant(omega),
        sin_theta0=(2 - cos_w) * root / (3 - 2 * cos_w),
        cos_theta0=-((1 - cos_w) ** 2) / (3 - 2 * cos_w),
    )


def localization_constant(omega):
    """ c(ω) = (2(1 - cos ω) / (3 - 2 cos ω))^2, the limit of p_{2n}(0).

    Accepts a scalar or an array of angles.
    """
    if np.ndim(omega) == 0:
        cos_w, _ = exact_trig(float(omega))
    else:
        cos_w = np.cos(np.asarray(omega, dtype=float))
    return (2 * (1 - cos_w) / (3 - 2 * cos_w)) ** 2


def expected_c_uniform() -> float:
    """ E[c(ω)] for ω uniform on [0, 2π) """
    return float(EXPECTED_C_UNIFORM)


def expected_c_quadrature(points: int = 10_000, omega_max: float = 2 * np.pi) -> float:
    """ Trapezoid estimate of (1/ω_max) ∫_0^{ω_max} c(ω) dω. """
    grid = np.linspace(0, omega_max, points + 1)
    return float(integrate.trapezoid(localization_constant(grid), grid) / omega_max)


def weight_identities(omega: float) -> typing.Tuple[float, float]:
    """ Σ (1-μ±)/C±² and Σ μ±(1-μ±)/C±²; exactly 1 and -1 for every ω. """
    prm = params(omega)
    return sum(prm.left_weights), sum(prm.right_weights)


class AsymptoticAmplitudes(typing.NamedTuple):
    l_re: typing.Any
    l_im: typing.Any
    r_re: typing.Any
    r_im: typing.Any

    def return_probability(self):
        return self.l_re ** 2 + self.l_im ** 2 + self.r_re ** 2 + self.r_im ** 2


def asymptotic_amplitudes(omega: float, n) -> AsymptoticAmplitudes:
    """ Large-n forms of the real and imaginary parts of Ψ_{2n}(0).

    Parameters
    ----------
    omega : float
        origin coin angle, must not be 0
    n : int or array of int
        half-time

    Returns
    -------
    amplitudes : AsymptoticAmplitudes
        (L,Re), (L,Im), (R,Re), (R,Im); their squares sum to c(ω)
    """
    prm = params(omega)
    if prm.degenerate:
        raise ValueError(
            "Asymptotic amplitudes vanish at ω = 0; use hadamard_asymptote."
        )
    cos_w, sin_w = exact_trig(prm.omega)
    root = np.sqrt(1 + sin_w ** 2)
    theta0 = np.arctan2(prm.sin_theta0, prm.cos_theta0)
    n = np.asarray(n)
    amplitude = np.sqrt(2) * (1 - cos_w) / (3 - 2 * cos_w)
    cos_part = amplitude * np.cos(n * theta0)
    sin_part = amplitude * np.sin(n * theta0) / root
    return AsymptoticAmplitudes(
        l_re=cos_part,
        l_im=-(1 + sin_w) * sin_part,
        r_re=(1 - sin_w) * sin_part,
        r_im=cos_part,
    )


def hadamard_asymptote(n):
    """ p_{2n}^(H)(0) ~ 1/(πn) """
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("The Hadamard asymptote needs n >= 1.")
    return 1 / (np.pi * n)


def classical_asymptote(p0: float, q0: float, p: float, q: float, n):
    """ p_{2n}^(c)(0) ~ 2/(p0/p + q0/q) (4pq)^n / √(πn) """
    if not (0 < p < 1 and 0 < q < 1):
        raise ValueError(f"Need p, q in (0, 1), got p={p}, q={q}.")
    n = np.asarray(n, dtype=float)
    prefactor = 2 / (p0 / p + q0 / q)
    return prefactor * (4 * p * q) ** n / np.sqrt(np.pi * n)
