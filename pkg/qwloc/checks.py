"""
The invariant suite run by `qwloc verify`.

Every check returns one non-negative number, the largest error it
observed, and passes when that number stays within its bound. Precision
checks are bounded by the run's tolerance, exact checks demand zero and
asymptotic checks carry a fixed bound of their own.
"""
import dataclasses
import logging
import typing
from fractions import Fraction

import numpy as np
import pandas as pd

from qwloc import paths, series, theory
from qwloc.coins import CoinField, make_coin_eq21, make_coin_eq22
from qwloc.models import classical, quantum

log = logging.getLogger(__name__)

PRECISION = "precision"
EXACT = "exact"
ASYMPTOTIC = "asymptotic"

TABLE_EQ22_PI = [Fraction(2, 4), Fraction(10, 16), Fraction(40, 64),
                 Fraction(170, 256), Fraction(680, 1024), Fraction(2600, 4096)]
TABLE_HADAMARD = [Fraction(2, 4), Fraction(2, 16), Fraction(8, 64),
                  Fraction(18, 256), Fraction(72, 1024), Fraction(200, 4096)]
R_STAR_FIXTURES = [Fraction(v) for v in
                   (-1, 0, Fraction(1, 2), 0, 0, 0, Fraction(-1, 8), 0, 0, 0, Fraction(1, 16))]

ORACLE_OMEGAS = np.array([0.0, np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2])
AGREEMENT_OMEGAS = np.linspace(0, 2 * np.pi, 8, endpoint=False) + np.pi / 16
DELOCALIZED_OMEGAS = np.array([np.pi / 3, np.pi, 5 * np.pi / 3])
RATIO_ORIGIN_BIASES = (0.1, 0.5, 0.9)
LOCALIZED_OMEGAS = np.array([np.pi / 2, np.pi, 3 * np.pi / 2])
NORM_FIELDS = (CoinField.hadamard(), CoinField.eq22(np.pi), CoinField.eq22(1.3), CoinField.eq21(np.pi / 3))
NORM_BOUND = 1e-12


@dataclasses.dataclass(frozen=True)
class Check:
    name: str
    func: typing.Callable[..., float]
    kind: str
    bound: float = 0.0
    perturbable: bool = False

    def limit(self, tolerance: float) -> float:
        """ Precision checks with a bound of their own never loosen past it. """
        if self.kind == PRECISION:
            return min(tolerance, self.bound) if self.bound else tolerance
        return self.bound


def _origin_field(perturb: float) -> CoinField:
    field = CoinField.eq22(np.pi)
    return field.with_perturbed_origin(perturb) if perturb else field


def check_coin_unitarity(perturb: float = 0.0) -> float:
    grid = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    coins = [make(omega) for omega in grid for make in (make_coin_eq22, make_coin_eq21)]
    coins.append(_origin_field(perturb).origin_coin)
    return max(coin.unitarity_error() for coin in coins)


def check_norm_conservation(perturb: float = 0.0, steps: int = 10_000) -> float:
    fields = NORM_FIELDS
    if perturb:
        fields = tuple(field.with_perturbed_origin(perturb) for field in fields)
    return max(float(np.abs(quantum.trace(field, steps).norm - 1).max()) for field in fields)


def _table_error(field: CoinField, table) -> float:
    p_return = quantum.trace(field, 2 * len(table)).p_return
    expected = np.array([float(v) for v in table])
    return float(np.abs(p_return.loc[2::2].to_numpy() - expected).max())


def check_table_eq22_pi() -> float:
    return _table_error(CoinField.eq22(np.pi), TABLE_EQ22_PI)


def check_table_hadamard() -> float:
    return _table_error(CoinField.hadamard(), TABLE_HADAMARD)


def check_eq21_delocalization(half_steps: int = 200) -> float:
    hadamard = quantum.return_probabilities(CoinField.hadamard(), 2 * half_steps)
    return max(
        float(np.abs(quantum.return_probabilities(CoinField.eq21(omega), 2 * half_steps) - hadamard).max())
        for omega in DELOCALIZED_OMEGAS
    )


def check_path_oracle(max_steps: int = 12) -> float:
    error = 0.0
    for omega in ORACLE_OMEGAS:
        field = CoinField.eq22(omega)
        for n in range(max_steps + 1):
            state = quantum.run(field, n)
            for l in range(n + 1):
                amplitude = paths.xi(n, l, field).apply()
                error = max(error, float(np.abs(amplitude - state.amplitude_at(n - 2 * l)).max()))
    return error


def check_first_passage_zeros(max_steps: int = 13) -> float:
    """ q and s vanish on the plus side, p and r on the minus side. """
    error = 0.0
    plus = paths.first_passage_coefficients(1, max_steps)
    minus = paths.first_passage_coefficients(-1, max_steps)
    for frame, columns in ((plus, ["q", "s"]), (minus, ["p", "r"])):
        error = max(error, float(frame[columns].abs().to_numpy().max()))
    return error


def check_first_passage_mirror(max_steps: int = 13) -> float:
    """ r^(∞,1) + s^(-∞,-1) = 0 """
    plus = paths.first_passage_coefficients(1, max_steps)
    minus = paths.first_passage_coefficients(-1, max_steps)
    return float(np.abs(plus.r.to_numpy() + minus.s.to_numpy()).max())


def check_r_star_fixtures() -> float:
    computed = list(series.r_star_series(len(R_STAR_FIXTURES)))[1:]
    return float(sum(abs(a - b) for a, b in zip(computed, R_STAR_FIXTURES)))


def check_r_star_support(order: int = 200) -> float:
    """ Number of r*_n that are zero where they should not be, or the
        reverse; only n = 1 and n = 4m - 1 carry weight. """
    r_star = series.r_star_series(order)
    return float(sum(
        (r_star[n] != 0) != (n == 1 or n % 4 == 3) for n in range(1, order + 1)
    ))


def check_sqrt_self_consistency(order: int = 64) -> float:
    """ sqrt(S)^2 = S for S = 1 + z^4 and S = 1 - z^2 """
    error = Fraction(0)
    for coefficients in ([1, 0, 0, 0, 1], [1, 0, -1]):
        target = series.Series.polynomial(coefficients, order)
        root = target.sqrt()
        error += sum(abs(a - b) for a, b in zip(root * root, target))
    return float(error)


def check_three_engines(half_steps: int = 200) -> float:
    error = 0.0
    for omega in AGREEMENT_OMEGAS:
        traced = quantum.trace(CoinField.eq22(omega), 2 * half_steps)
        evolved = traced[["psi_left", "psi_right"]].to_numpy()[::2]
        composed = series.prop31_amplitudes(omega, half_steps)
        gf = series.origin_gf(omega, 2 * half_steps)
        generated = np.array([gf.amplitude(2 * j) for j in range(half_steps + 1)])
        error = max(
            error,
            float(np.abs(evolved - composed).max()),
            float(np.abs(evolved - generated).max()),
            float(np.abs(composed - generated).max()),
        )
    return error


def check_excursions(half_steps: int = 6) -> float:
    error = 0.0
    for omega in ORACLE_OMEGAS:
        traced = quantum.trace(CoinField.eq22(omega), 2 * half_steps)
        for j in range(1, half_steps + 1):
            evolved = traced.loc[2 * j, ["psi_left", "psi_right"]].to_numpy(dtype=complex)
            error = max(error, float(np.abs(paths.excursion_amplitude(j, omega) - evolved).max()))
    return error


def check_weight_identities() -> float:
    grid = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    return max(
        max(abs(left - 1), abs(right + 1))
        for left, right in map(theory.weight_identities, grid)
    )


def check_c_properties(points: int = 1025) -> float:
    """ Largest violation of symmetry, bounds and monotonicity on [0, π]. """
    grid = np.linspace(0, np.pi, points)
    c = theory.localization_constant(grid)
    mirrored = theory.localization_constant(2 * np.pi - grid)
    violations = [
        np.abs(c - mirrored).max(),
        max(0.0, -c.min()),
        max(0.0, c.max() - theory.localization_constant(np.pi)),
        max(0.0, -np.diff(c).min()),
        abs(theory.localization_constant(0.0)),
        abs(theory.localization_constant(np.pi) - 0.64),
    ]
    return float(max(violations))


def check_c_mean() -> float:
    return abs(theory.expected_c_quadrature(10_000) - theory.expected_c_uniform())


def check_localization_limit(window: typing.Tuple[int, int] = (900, 1000)) -> float:
    low, high = window
    error = 0.0
    for omega in LOCALIZED_OMEGAS:
        p_return = quantum.return_probabilities(CoinField.eq22(omega), 2 * high)
        mean = p_return.loc[2 * low : 2 * high : 2].mean()
        error = max(error, abs(mean - theory.localization_constant(omega)))
    return float(error)


def check_hadamard_decay(half_steps: int = 2000) -> float:
    p_return = quantum.return_probabilities(CoinField.hadamard(), 2 * half_steps)
    return float(abs(half_steps * np.pi * p_return.loc[2 * half_steps] - 1))


def check_classical_gf(max_steps: int = 100) -> float:
    error = 0.0
    for p0 in (0.0, 0.3, 0.5, 0.9):
        for p in (0.3, 0.5, 0.6):
            field = classical.ClassicalField.from_left(p0, p)
            dp = classical.classical_returns(field, max_steps).to_numpy()
            gf = series.classical_gf(field.p0, field.q0, field.p, field.q, max_steps).to_numpy()
            error = max(error, float(np.abs(dp - gf).max()))
    return error


def check_classical_symmetric(half_steps: int = 2000) -> float:
    field = classical.ClassicalField.from_left(0.5, 0.5)
    p_return = classical.classical_returns(field, 2 * half_steps)
    return float(abs(np.sqrt(np.pi * half_steps) * p_return.loc[2 * half_steps] - 1))


def check_classical_origin_ratio(half_steps: int = 2000) -> float:
    """ max |p^(c)_2n(0) / p^(c)_2n(0)|_{p0=1/2} - 1| at p = 1/2 """
    returns = {
        p0: classical.classical_returns(classical.ClassicalField.from_left(p0, 0.5), 2 * half_steps).loc[2::2]
        for p0 in RATIO_ORIGIN_BIASES
    }
    reference = returns[0.5]
    return max(float((returns[p0] / reference - 1).abs().max()) for p0 in RATIO_ORIGIN_BIASES)


def check_classical_decay(half_steps: int = 500) -> float:
    """ The smallest C with p_2n <= C (4pq)^n for p = 0.6. """
    field = classical.ClassicalField.from_left(0.5, 0.6)
    p_return = classical.classical_returns(field, 2 * half_steps).loc[::2].to_numpy()
    n = np.arange(half_steps + 1)
    return float((p_return / 0.96 ** n).max())


CHECKS: typing.Dict[str, Check] = {
    check.name: check
    for check in [
        Check("coin_unitarity", check_coin_unitarity, PRECISION, perturbable=True),
        Check("norm_conservation", check_norm_conservation, PRECISION, bound=NORM_BOUND, perturbable=True),
        Check("table_eq22_pi", check_table_eq22_pi, PRECISION),
        Check("table_hadamard", check_table_hadamard, PRECISION),
        Check("eq21_delocalization", check_eq21_delocalization, PRECISION),
        Check("path_oracle", check_path_oracle, PRECISION),
        Check("first_passage_zeros", check_first_passage_zeros, EXACT),
        Check("first_passage_mirror", check_first_passage_mirror, EXACT),
        Check("r_star_fixtures", check_r_star_fixtures, EXACT),
        Check("r_star_support", check_r_star_support, EXACT),
        Check("sqrt_self_consistency", check_sqrt_self_consistency, EXACT),
        Check("three_engines", check_three_engines, PRECISION),
        Check("excursions", check_excursions, PRECISION),
        Check("weight_identities", check_weight_identities, PRECISION),
        Check("c_properties", check_c_properties, PRECISION),
        Check("c_mean", check_c_mean, ASYMPTOTIC, bound=1e-8),
        Check("localization_limit", check_localization_limit, ASYMPTOTIC, bound=5e-3),
        Check("hadamard_decay", check_hadamard_decay, ASYMPTOTIC, bound=0.05),
        Check("classical_gf", check_classical_gf, PRECISION),
        Check("classical_symmetric", check_classical_symmetric, ASYMPTOTIC, bound=0.05),
        Check("classical_origin_ratio", check_classical_origin_ratio, PRECISION),
        Check("classical_decay", check_classical_decay, ASYMPTOTIC, bound=2.0),
    ]
}


def run_checks(
    tolerance: float = 1e-10,
    perturb: float = 0.0,
    names: typing.Optional[typing.Iterable[str]] = None,
) -> pd.DataFrame:
    """ Runs the registered checks and tabulates the outcome.

    Parameters
    ----------
    tolerance : float
        bound of the precision checks, must be positive
    perturb : float
        offset added to the origin coin of the perturbable checks
    names : iterable of str, optional
        subset of CHECKS to run, all of them by default

    Returns
    -------
    report : pd.DataFrame
        indexed by check name with columns kind, observed, bound, passed
    """
    if not tolerance > 0:
        raise ValueError(f"Tolerance must be positive, got {tolerance}.")
    names = list(CHECKS) if names is None else list(names)
    rows = []
    for name in names:
        if not name in CHECKS:
            raise KeyError(f"No check '{name}' is registered.")
        check = CHECKS[name]
        try:
            observed = check.func(perturb=perturb) if check.perturbable else check.func()
        except Exception:
            log.exception("Check %s raised", name)
            observed = np.inf
        bound = check.limit(tolerance)
        passed = bool(observed <= bound)
        log.info("%-22s %-10s observed %.3e bound %.1e %s",
                 name, check.kind, observed, bound, "ok" if passed else "FAILED")
        rows.append((name, check.kind, observed, bound, passed))
    report = pd.DataFrame(rows, columns=["check", "kind", "observed", "bound", "passed"])
    return report.set_index("check")
