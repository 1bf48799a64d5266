import io
import os
from fractions import Fraction

import numpy
import pandas
import pytest
import scipy.special
from hypothesis import given, settings, strategies as st

import qwloc.checks
import qwloc.cli
import qwloc.coins
import qwloc.models.classical
import qwloc.models.quantum
import qwloc.paths
import qwloc.series
import qwloc.storage
import qwloc.theory

angles = st.floats(min_value=0.0, max_value=2 * numpy.pi, exclude_max=True)
nonzero_angles = st.floats(min_value=0.01, max_value=2 * numpy.pi - 0.01)


class TestCoins:
    def test_hadamard_is_eq22_at_zero(self):
        expected = numpy.array([[1, 1], [1, -1]]) / numpy.sqrt(2)
        numpy.testing.assert_allclose(qwloc.coins.HADAMARD.to_array(), expected, atol=1e-15)
        numpy.testing.assert_allclose(qwloc.coins.make_coin_eq21(0).to_array(), expected, atol=1e-15)

    @given(angles)
    def test_coins_are_unitary(self, omega):
        assert qwloc.coins.make_coin_eq22(omega).is_unitary()
        assert qwloc.coins.make_coin_eq21(omega).is_unitary()

    def test_split_recombines(self):
        coin = qwloc.coins.make_coin_eq22(1.0)
        parts = qwloc.coins.split(coin)
        numpy.testing.assert_array_equal(parts.p_part + parts.q_part, coin.to_array())
        assert not parts.p_part[1].any()
        assert not parts.q_part[0].any()

    def test_eq21_at_half_pi(self):
        expected = numpy.array([[1j, 1], [1, 1j]]) / numpy.sqrt(2)
        numpy.testing.assert_allclose(qwloc.coins.make_coin_eq21(numpy.pi / 2).to_array(), expected, atol=1e-15)

    def test_split_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            qwloc.coins.split(qwloc.coins.HADAMARD.perturbed(1e-3))

    def test_field_positions(self):
        field = qwloc.coins.get_field("eq22", numpy.pi)
        assert qwloc.coins.coin_at(field, 0) == qwloc.coins.make_coin_eq22(numpy.pi)
        assert qwloc.coins.coin_at(field, 5) == qwloc.coins.HADAMARD
        assert qwloc.coins.coin_at(field, -3) == qwloc.coins.HADAMARD
        table = field.matrices(numpy.arange(-2, 3))
        assert table.shape == (5, 2, 2)
        numpy.testing.assert_array_equal(table[2], field.origin_coin.to_array())

    def test_unnormalized_matrices(self):
        positions = numpy.arange(-3, 4)
        for field in [qwloc.coins.CoinField.eq22(1.1), qwloc.coins.CoinField.eq21(2.0), qwloc.coins.CoinField.hadamard()]:
            raw = field.matrices(positions, normalized=False)
            numpy.testing.assert_array_equal(raw[0], [[1, 1], [1, -1]])
            numpy.testing.assert_allclose(raw / numpy.sqrt(2), field.matrices(positions), atol=1e-16)
        with pytest.raises(ValueError):
            qwloc.coins.CoinField.custom({}, default=qwloc.coins.HADAMARD).matrices(positions, normalized=False)

    def test_get_unsupported(self):
        with pytest.raises(KeyError):
            qwloc.coins.get_field("not_a_model")

    def test_custom_field_without_default(self):
        field = qwloc.coins.CoinField.custom({0: qwloc.coins.HADAMARD})
        assert field.coin_at(0) == qwloc.coins.HADAMARD
        with pytest.raises(KeyError):
            field.coin_at(1)

    def test_angles_are_reduced(self):
        assert qwloc.coins.normalize_angle(-1e-18) == 0.0
        assert qwloc.coins.normalize_angle(3 * numpy.pi) == pytest.approx(numpy.pi)
        assert qwloc.coins.CoinField.eq22(-numpy.pi).omega == pytest.approx(numpy.pi)

    def test_perturbed_origin(self):
        field = qwloc.coins.CoinField.eq22(numpy.pi).with_perturbed_origin(1e-3)
        assert not field.origin_coin.is_unitary()
        assert field.coin_at(7) == qwloc.coins.HADAMARD


class TestEvolution:
    def test_table_eq22_pi(self):
        p_return = qwloc.models.quantum.return_probabilities(qwloc.coins.CoinField.eq22(numpy.pi), 12)
        expected = [2 / 4, 10 / 16, 40 / 64, 170 / 256, 680 / 1024, 2600 / 4096]
        numpy.testing.assert_allclose(p_return.loc[2::2], expected, atol=1e-12)

    def test_table_hadamard(self):
        p_return = qwloc.models.quantum.return_probabilities(qwloc.coins.CoinField.hadamard(), 12)
        expected = [2 / 4, 2 / 16, 8 / 64, 18 / 256, 72 / 1024, 200 / 4096]
        numpy.testing.assert_allclose(p_return.loc[2::2], expected, atol=1e-12)

    def test_initial_state(self):
        state = qwloc.models.quantum.run(qwloc.coins.CoinField.hadamard(), 0)
        assert state.time == 0
        numpy.testing.assert_allclose(state.amplitude_at(0), [1 / numpy.sqrt(2), 1j / numpy.sqrt(2)])
        assert qwloc.models.quantum.return_probability(state) == pytest.approx(1.0)

    def test_first_hadamard_step(self):
        state = qwloc.models.quantum.step(qwloc.models.quantum.initial_state(), qwloc.coins.CoinField.hadamard())
        probabilities = qwloc.models.quantum.distribution(state).probabilities
        numpy.testing.assert_allclose(probabilities.loc[[-1, 0, 1]], [0.5, 0, 0.5], atol=1e-15)
        assert not state.amplitude_at(0).any()

    def test_step_matches_run(self):
        field = qwloc.coins.CoinField.eq22(numpy.pi / 3)
        state = qwloc.models.quantum.initial_state()
        for _ in range(7):
            before = state.amplitudes.copy()
            following = qwloc.models.quantum.step(state, field)
            numpy.testing.assert_array_equal(state.amplitudes, before)
            state = following
        numpy.testing.assert_allclose(
            state.amplitudes, qwloc.models.quantum.run(field, 7).amplitudes, atol=1e-15
        )

    def test_negative_steps(self):
        with pytest.raises(ValueError):
            qwloc.models.quantum.run(qwloc.coins.CoinField.hadamard(), -1)

    @settings(max_examples=20, deadline=None)
    @given(angles)
    def test_norm_and_parity(self, omega):
        traced = qwloc.models.quantum.trace(qwloc.coins.CoinField.eq22(omega), 60)
        numpy.testing.assert_allclose(traced.norm, 1.0, atol=1e-12)
        assert (traced.p_return.loc[1::2] == 0).all()

    def test_distribution(self):
        state = qwloc.models.quantum.run(qwloc.coins.CoinField.eq22(numpy.pi), 9)
        dist = qwloc.models.quantum.distribution(state)
        assert dist.probabilities.index.name == "position"
        assert dist.probabilities.sum() == pytest.approx(1.0)
        # odd time: only odd sites are occupied
        assert (dist.support.index % 2 == 1).all()

    def test_eq21_delocalization(self):
        assert qwloc.checks.check_eq21_delocalization(200) <= 1e-10

    def test_localization_limit(self):
        for omega in [numpy.pi / 2, numpy.pi, 3 * numpy.pi / 2]:
            p_return = qwloc.models.quantum.return_probabilities(qwloc.coins.CoinField.eq22(omega), 2000)
            mean = p_return.loc[1800:2000:2].mean()
            assert abs(mean - qwloc.theory.localization_constant(omega)) < 5e-3

    def test_hadamard_decay(self):
        p_return = qwloc.models.quantum.return_probabilities(qwloc.coins.CoinField.hadamard(), 4000)
        assert abs(2000 * numpy.pi * p_return.loc[4000] - 1) <= 0.05
        assert p_return.loc[4000] == pytest.approx(float(qwloc.theory.hadamard_asymptote(2000)), rel=0.05)

    def test_asymptotic_amplitudes(self):
        traced = qwloc.models.quantum.trace(qwloc.coins.CoinField.eq22(numpy.pi), 2000)
        left, right = traced.loc[2000, ["psi_left", "psi_right"]].to_numpy(dtype=complex)
        evolved = numpy.array([left.real, left.imag, right.real, right.imag])
        predicted = numpy.array(qwloc.theory.asymptotic_amplitudes(numpy.pi, 1000), dtype=float)
        assert numpy.abs(evolved - predicted).max() <= 0.02

    def test_norm_over_ten_thousand_steps(self):
        fields = [
            qwloc.coins.CoinField.hadamard(),
            qwloc.coins.CoinField.eq22(numpy.pi),
            qwloc.coins.CoinField.eq22(1.3),
            qwloc.coins.CoinField.eq21(numpy.pi / 3),
        ]
        for field in fields:
            traced = qwloc.models.quantum.trace(field, 10_000)
            assert numpy.abs(traced.norm - 1).max() <= 1e-12
        assert qwloc.checks.check_norm_conservation() <= qwloc.checks.NORM_BOUND


class TestPaths:
    def test_oracle_matches_evolution(self):
        assert qwloc.checks.check_path_oracle(12) <= 1e-12

    def test_path_counts(self):
        field = qwloc.coins.CoinField.eq22(numpy.pi)
        for l in range(7):
            assert qwloc.paths.xi(6, l, field).terms == [1, 6, 15, 20, 15, 6, 1][l]

    def test_enumeration_bound(self):
        with pytest.raises(ValueError):
            qwloc.paths.xi(qwloc.paths.MAX_ORACLE_STEPS + 1, 0, qwloc.coins.CoinField.hadamard())
        with pytest.raises(ValueError):
            qwloc.paths.xi(4, 5, qwloc.coins.CoinField.hadamard())

    def test_first_passage_zeros(self):
        plus = qwloc.paths.first_passage_coefficients(1, 13)
        minus = qwloc.paths.first_passage_coefficients(-1, 13)
        assert (plus[["q", "s"]] == 0).all().all()
        assert (minus[["p", "r"]] == 0).all().all()
        assert (plus.r + minus.s == 0).all()
        assert qwloc.checks.check_first_passage_mirror(13) == 0

    def test_first_passage_values(self):
        plus = qwloc.paths.first_passage_coefficients(1, 3)
        assert plus.loc[1, "p"] == pytest.approx(1.0)
        assert plus.loc[3, "r"] == pytest.approx(0.5)
        minus = qwloc.paths.first_passage_coefficients(-1, 3)
        assert minus.loc[3, "s"] == pytest.approx(-0.5)
        far = qwloc.paths.first_passage_coefficients(2, 4)
        assert far.loc[2, "p"] == pytest.approx(1 / numpy.sqrt(2))
        assert far.loc[4, "p"] == pytest.approx(1 / (2 * numpy.sqrt(2)))
        assert far.loc[4, "r"] == pytest.approx(1 / (2 * numpy.sqrt(2)))
        assert qwloc.paths.first_passage_coefficients(-2, 2).loc[2, "q"] == pytest.approx(-1 / numpy.sqrt(2))

    def test_first_passage_matches_series(self):
        for m, columns in [(1, "pr"), (2, "pr"), (-1, "qs"), (-2, "qs")]:
            enumerated = qwloc.paths.first_passage_coefficients(m, 9)
            first, second = qwloc.series.first_passage_gf(m, 9)
            for n in range(1, 10):
                assert enumerated.loc[n, columns[0]] == pytest.approx(float(first[n]), abs=1e-12)
                assert enumerated.loc[n, columns[1]] == pytest.approx(float(second[n]), abs=1e-12)

    def test_first_passage_rejects_origin(self):
        with pytest.raises(ValueError):
            qwloc.paths.first_passage_paths(3, 0)
        with pytest.raises(ValueError):
            qwloc.paths.xi_first_passage_plus(3, -1)
        with pytest.raises(ValueError):
            qwloc.paths.xi_first_passage_minus(3, 1)

    def test_first_passage_words(self):
        words = sorted(
            qwloc.paths.path_word(bits, 3) for bits, _ in qwloc.paths.first_passage_paths(3, 1)
        )
        assert words == ["PPQ"]

    def test_plus_side_path_shapes(self):
        for n in range(1, 12):
            for bits, product in qwloc.paths.first_passage_paths(n, 1):
                word = qwloc.paths.path_word(bits, n)
                assert word[0] == "P"
                coefficients = qwloc.paths.basis_expand(product)
                if word[-1] == "P":
                    assert abs(coefficients.r) < 1e-12
                else:
                    assert abs(coefficients.p) < 1e-12

    def test_xi_two_steps(self):
        field = qwloc.coins.CoinField.eq22(1.0)
        origin = qwloc.coins.split(field.origin_coin)
        expected = qwloc.paths.Q @ origin.p_part + qwloc.paths.P @ origin.q_part
        numpy.testing.assert_allclose(qwloc.paths.xi(2, 1, field).entries, expected, atol=1e-15)

    def test_xi_four_steps_back_to_origin(self):
        field = qwloc.coins.CoinField.eq22(0.9)
        P, Q = qwloc.paths.P, qwloc.paths.Q
        origin = qwloc.coins.split(field.origin_coin)
        P0, Q0 = origin.p_part, origin.q_part
        expected = (
            Q @ Q @ P @ P0 + P @ P @ Q @ Q0 + Q @ P0 @ Q @ P0
            + P @ Q0 @ P @ Q0 + P @ Q0 @ Q @ P0 + Q @ P0 @ P @ Q0
        )
        xi = qwloc.paths.xi(4, 2, field)
        assert xi.terms == 6
        numpy.testing.assert_allclose(xi.entries, expected, atol=1e-15)

    def test_xi_star(self):
        expected = -0.5 * numpy.array([[1, 1], [-1, 1]])
        numpy.testing.assert_allclose(qwloc.paths.xi_star(2, numpy.pi).entries, expected, atol=1e-12)
        assert not qwloc.paths.xi_star(3, numpy.pi).entries.any()
        omega = 0.7
        excursion = numpy.array([[-numpy.exp(-1j * omega), 1], [-1, -numpy.exp(1j * omega)]])
        numpy.testing.assert_allclose(qwloc.paths.xi_star(4, omega).entries, excursion / 4, atol=1e-12)
        numpy.testing.assert_allclose(qwloc.paths.xi_star(6, omega).entries, 0, atol=1e-12)

    def test_basis_expansion(self):
        matrix = numpy.array([[1 + 2j, -0.5], [3, 1j]])
        coefficients = qwloc.paths.basis_expand(matrix)
        numpy.testing.assert_allclose(coefficients.reconstruct(), matrix, atol=1e-12)

    def test_compositions(self):
        assert list(qwloc.paths.compositions(3)) == [(1, 1, 1), (1, 2), (2, 1), (3,)]
        assert len(list(qwloc.paths.compositions(6))) == 32

    def test_excursions(self):
        assert qwloc.checks.check_excursions(6) <= 1e-12


class TestSeries:
    def test_r_star_fixtures(self):
        r_star = list(qwloc.series.r_star_series(11))
        expected = [0, -1, 0, Fraction(1, 2), 0, 0, 0, Fraction(-1, 8), 0, 0, 0, Fraction(1, 16)]
        assert r_star == expected
        assert all(isinstance(value, Fraction) for value in r_star)

    def test_r_star_support(self):
        r_star = qwloc.series.r_star_series(200)
        assert r_star[199] != 0 and r_star[197] == 0 and r_star[200] == 0
        assert qwloc.checks.check_r_star_support(200) == 0

    def test_sqrt_squares_back(self):
        root = qwloc.series.sqrt_one_plus_z4(40)
        assert root * root == qwloc.series.Series.polynomial([1, 0, 0, 0, 1], 40)
        generic = qwloc.series.Series.polynomial([1, 3, Fraction(1, 2)], 12)
        assert generic.sqrt() * generic.sqrt() == generic
        assert root.poly.ring.domain == qwloc.series.EXACT_RING.domain
        assert qwloc.series.Series.polynomial([1, 0, 0, 0, 1], 40).sqrt() == root
        falling = qwloc.series.Series.polynomial([1, 0, -1], 30)
        falling_root = falling.sqrt()
        assert falling_root * falling_root == falling
        assert [falling_root[k] for k in (2, 4, 6)] == [Fraction(-1, 2), Fraction(-1, 8), Fraction(-1, 16)]
        assert qwloc.checks.check_sqrt_self_consistency() == 0

    def test_arithmetic(self):
        z = qwloc.series.Series.monomial(1, 6)
        geometric = (1 - z).reciprocal()
        assert list(geometric) == [1] * 7
        assert list((1 + z) ** 2) == [1, 2, 1, 0, 0, 0, 0]
        assert list(z.divide_by_z()) == [1, 0, 0, 0, 0, 0]

    def test_errors(self):
        z = qwloc.series.Series.monomial(1, 6)
        with pytest.raises(ZeroDivisionError):
            z.reciprocal()
        with pytest.raises(ValueError):
            (1 + z).divide_by_z()
        with pytest.raises(ValueError):
            qwloc.series.lambda_series("-", 6)
        with pytest.raises(ValueError):
            qwloc.series.first_passage_gf(0, 6)

    def test_lambda_plus(self):
        lam = qwloc.series.lambda_plus_series(8)
        assert lam.sqrt2_power == -1
        numpy.testing.assert_allclose(
            lam.to_numpy(), numpy.array([0, 1, 0, 0.5, 0, 0, 0, -0.125, 0]) / numpy.sqrt(2), atol=1e-15
        )

    def test_first_passage_plus(self):
        p, r = qwloc.series.first_passage_gf(1, 6)
        assert list(p) == [0, 1, 0, 0, 0, 0, 0]
        assert r[3] == Fraction(1, 2)

    def test_prop31_first_amplitude(self):
        amplitude = qwloc.series.prop31_amplitude(numpy.pi, 1)
        assert numpy.sum(numpy.abs(amplitude) ** 2) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            qwloc.series.prop31_amplitude(numpy.pi, 0)

    def test_three_engines(self):
        assert qwloc.checks.check_three_engines(200) <= 1e-10

    @settings(max_examples=25, deadline=None)
    @given(angles)
    def test_explicit_forms_agree(self, omega):
        implicit = qwloc.series.origin_gf(omega, 24).to_frame()
        explicit = qwloc.series.origin_gf_explicit(omega, 24).to_frame()
        numpy.testing.assert_allclose(implicit.to_numpy(), explicit.to_numpy(), atol=1e-12)

    def test_origin_gf_tables(self):
        frame = qwloc.series.origin_gf(numpy.pi, 12).to_frame()
        expected = [2 / 4, 10 / 16, 40 / 64, 170 / 256, 680 / 1024, 2600 / 4096]
        numpy.testing.assert_allclose(frame.p_return.loc[2::2], expected, atol=1e-12)
        hadamard = qwloc.series.origin_gf(0.0, 12).to_frame()
        expected = [2 / 4, 2 / 16, 8 / 64, 18 / 256, 72 / 1024, 200 / 4096]
        numpy.testing.assert_allclose(hadamard.p_return.loc[2::2], expected, atol=1e-12)
        assert frame.p_return.loc[0] == pytest.approx(1.0)

    def test_hadamard_generating_function(self):
        order = 24
        z2 = qwloc.series.Series.polynomial([1, 0, 1], order)
        expected = (1 + z2 * qwloc.series.sqrt_one_plus_z4(order).reciprocal()) / (2 * numpy.sqrt(2))
        numpy.testing.assert_allclose(
            qwloc.series.origin_gf(0.0, order).l_re.to_numpy(), expected.to_numpy(), atol=1e-14
        )

    def test_classical_gf_exact(self):
        half = Fraction(1, 2)
        for p0 in [Fraction(0), Fraction(1, 3), half]:
            f = qwloc.series.classical_gf(p0, 1 - p0, half, half, 10)
            assert f[10] == Fraction(252, 4 ** 5)
            assert f[3] == 0

    def test_classical_gf_rejects(self):
        with pytest.raises(ValueError):
            qwloc.series.classical_gf(0.5, 0.5, 1.0, 0.0, 10)


class TestTheory:
    def test_localization_constant(self):
        assert qwloc.theory.localization_constant(0.0) == 0.0
        assert qwloc.theory.localization_constant(numpy.pi) == pytest.approx(0.64)
        assert qwloc.theory.localization_constant(numpy.pi / 2) == pytest.approx(4 / 9)

    @given(angles)
    def test_c_symmetry_and_bounds(self, omega):
        c = qwloc.theory.localization_constant(omega)
        assert 0 <= c <= 0.64 + 1e-15
        assert c == pytest.approx(qwloc.theory.localization_constant(2 * numpy.pi - omega), abs=1e-12)

    def test_c_properties(self):
        assert qwloc.checks.check_c_properties() <= 1e-12

    def test_uniform_mean(self):
        assert qwloc.theory.expected_c_uniform() == pytest.approx(0.3739, abs=1e-4)
        assert abs(qwloc.theory.expected_c_quadrature(10_000) - qwloc.theory.expected_c_uniform()) <= 1e-8

    def test_half_range_quadrature(self):
        half = qwloc.theory.expected_c_quadrature(10_000, omega_max=numpy.pi)
        full = qwloc.theory.expected_c_quadrature(20_000)
        assert half == pytest.approx(full, abs=1e-12)
        assert half == pytest.approx(qwloc.theory.expected_c_uniform(), abs=1e-8)

    def test_params_at_pi(self):
        prm = qwloc.theory.params(numpy.pi)
        assert prm.cos_theta0 == pytest.approx(-0.8)
        assert prm.sin_theta0 == pytest.approx(0.6)
        assert prm.gamma_plus * prm.gamma_minus == pytest.approx(2)
        assert not prm.degenerate
        assert qwloc.theory.params(0.0).degenerate

    @given(angles)
    def test_weight_identities(self, omega):
        left, right = qwloc.theory.weight_identities(omega)
        assert left == pytest.approx(1, abs=1e-12)
        assert right == pytest.approx(-1, abs=1e-12)

    @given(nonzero_angles)
    def test_theta0_on_unit_circle(self, omega):
        prm = qwloc.theory.params(omega)
        assert prm.sin_theta0 ** 2 + prm.cos_theta0 ** 2 == pytest.approx(1, abs=1e-12)

    @given(nonzero_angles, st.integers(min_value=1, max_value=10_000))
    def test_asymptotic_mass(self, omega, n):
        amplitudes = qwloc.theory.asymptotic_amplitudes(omega, n)
        assert amplitudes.return_probability() == pytest.approx(
            qwloc.theory.localization_constant(omega), abs=1e-12
        )

    def test_asymptote_domains(self):
        with pytest.raises(ValueError):
            qwloc.theory.asymptotic_amplitudes(0.0, 10)
        with pytest.raises(ValueError):
            qwloc.theory.hadamard_asymptote(0)
        with pytest.raises(ValueError):
            qwloc.theory.classical_asymptote(0.5, 0.5, 1.0, 0.0, 10)


class TestClassical:
    def test_two_step_return(self):
        field = qwloc.models.classical.ClassicalField.from_left(0.3, 0.6)
        assert qwloc.models.classical.classical_return(field, 2) == pytest.approx(0.3 * 0.4 + 0.7 * 0.6)
        assert qwloc.models.classical.classical_return(field, 3) == 0

    def test_mass_is_conserved(self):
        field = qwloc.models.classical.ClassicalField.from_left(0.9, 0.2)
        dist = qwloc.models.classical.classical_run(field, 50)
        assert dist.mass.sum() == pytest.approx(1.0, abs=1e-12)
        assert dist.to_series().index.name == "position"

    def test_invalid_probabilities(self):
        with pytest.raises(ValueError):
            qwloc.models.classical.ClassicalField(0.5, 0.6, 0.5, 0.5)
        with pytest.raises(ValueError):
            qwloc.models.classical.ClassicalField.from_left(1.2, 0.5)
        with pytest.raises(ValueError):
            qwloc.models.classical.classical_run(
                qwloc.models.classical.ClassicalField.from_left(0.5, 0.5), -1
            )

    def test_binomial_oracle(self):
        field = qwloc.models.classical.ClassicalField.from_left(0.5, 0.5)
        p_return = qwloc.models.classical.classical_returns(field, 60)
        n = numpy.arange(31)
        expected = scipy.special.comb(2 * n, n) / 4.0 ** n
        numpy.testing.assert_allclose(p_return.loc[::2], expected, rtol=1e-12)

    def test_dp_matches_series(self):
        assert qwloc.checks.check_classical_gf(100) <= 1e-12

    def test_symmetric_asymptote(self):
        field = qwloc.models.classical.ClassicalField.from_left(0.5, 0.5)
        p_return = qwloc.models.classical.classical_returns(field, 4000)
        assert 0.95 <= numpy.sqrt(numpy.pi * 2000) * p_return.loc[4000] <= 1.05

    def test_origin_bias_does_not_change_symmetric_returns(self):
        returns = [
            qwloc.models.classical.classical_returns(qwloc.models.classical.ClassicalField.from_left(p0, 0.5), 4000)
            for p0 in (0.1, 0.5, 0.9)
        ]
        for other in (returns[0], returns[2]):
            ratio = other.loc[2::2] / returns[1].loc[2::2]
            assert numpy.abs(ratio - 1).max() <= 1e-10
        assert qwloc.checks.check_classical_origin_ratio(2000) <= 1e-10

    def test_mass_over_ten_thousand_steps(self):
        field = qwloc.models.classical.ClassicalField.from_left(0.9, 0.3)
        dist = qwloc.models.classical.classical_run(field, 10_000)
        assert abs(dist.mass.sum() - 1) <= qwloc.models.classical.MASS_TOL

    def test_biased_decay(self):
        assert qwloc.checks.check_classical_decay(500) < 2


class TestStorage:
    def test_keys(self):
        assert qwloc.storage.get_simulation_output_key("eq22", numpy.pi, 12) == "eq22/simulate/omega3p141593_n12.csv"
        assert qwloc.storage.get_sweep_output_key(257, 0) == "eq22/sweep/grid257_n0.csv"
        assert qwloc.storage.get_verify_report_key(1e-10) == "verify/report_tol1e-10.csv"
        assert qwloc.storage.get_classical_output_key(0.5, 0.6, 8).startswith("classical/simulate/")
        assert qwloc.storage.get_series_output_key(0.0, 20).endswith("_order20.csv")


class TestVerify:
    def test_perturbation_fails(self):
        report = qwloc.checks.run_checks(
            perturb=1e-3, names=["coin_unitarity", "norm_conservation", "table_hadamard"]
        )
        assert not report.loc["coin_unitarity", "passed"]
        assert not report.loc["norm_conservation", "passed"]
        assert report.loc["table_hadamard", "passed"]

    def test_tolerance_governance(self):
        assert qwloc.checks.run_checks(names=["norm_conservation"]).passed.all()
        assert not qwloc.checks.run_checks(tolerance=1e-20, names=["norm_conservation"]).passed.all()
        with pytest.raises(ValueError):
            qwloc.checks.run_checks(tolerance=0)
        with pytest.raises(KeyError):
            qwloc.checks.run_checks(names=["not_a_check"])

    def test_exact_checks(self):
        report = qwloc.checks.run_checks(
            names=["r_star_fixtures", "r_star_support", "sqrt_self_consistency", "first_passage_zeros", "first_passage_mirror"]
        )
        assert (report.observed == 0).all()
        assert report.passed.all()


def _run(capsys, *argv):
    code = qwloc.cli.main(list(argv))
    return code, pandas.read_csv(io.StringIO(capsys.readouterr().out))


class TestCli:
    def test_parse_angle(self):
        assert qwloc.cli.parse_angle("pi") == numpy.pi
        assert qwloc.cli.parse_angle("pi/2") == pytest.approx(numpy.pi / 2)
        assert qwloc.cli.parse_angle("3pi/2") == pytest.approx(1.5 * numpy.pi)
        assert qwloc.cli.parse_angle("2*pi/3") == pytest.approx(2 * numpy.pi / 3)
        assert qwloc.cli.parse_angle("-pi") == -numpy.pi
        assert qwloc.cli.parse_angle("0.25") == 0.25

    def test_simulate_eq22(self, capsys):
        code, frame = _run(capsys, "simulate", "--model", "eq22", "--omega", "pi", "--steps", "12")
        assert code == 0
        assert list(frame.columns) == ["n", "p_return", "c", "p_minus_c"]
        assert frame.n.tolist() == [2, 4, 6, 8, 10, 12]
        numpy.testing.assert_allclose(
            frame.p_return, [0.5, 0.625, 0.625, 0.6640625, 0.6640625, 0.634765625], atol=1e-12
        )
        numpy.testing.assert_allclose(frame.c, 0.64)

    def test_simulate_hadamard(self, capsys):
        code, frame = _run(capsys, "simulate", "--model", "hadamard", "--steps", "4")
        assert code == 0
        numpy.testing.assert_allclose(frame.p_return, [0.5, 0.125], atol=1e-12)

    def test_simulate_zero_steps(self, capsys):
        code, frame = _run(capsys, "simulate", "--steps", "0")
        assert code == 0
        assert frame.n.tolist() == [0]
        assert frame.p_return.tolist() == [1.0]

    def test_simulate_classical(self, capsys):
        code, frame = _run(capsys, "simulate", "--model", "classical", "--p0", "0.5", "--p", "0.5", "--steps", "4")
        assert code == 0
        numpy.testing.assert_allclose(frame.p_return, [0.5, 0.375])
        assert (frame.c == 0).all()

    def test_output_is_deterministic(self, capsys):
        argv = ["simulate", "--omega", "pi/3", "--steps", "30"]
        qwloc.cli.main(argv)
        first = capsys.readouterr().out
        qwloc.cli.main(argv)
        assert capsys.readouterr().out == first

    def test_sweep(self, capsys):
        code, frame = _run(capsys, "sweep", "--grid", "257", "--steps", "0")
        assert code == 0
        assert list(frame.columns) == ["omega", "c", "p_return"]
        assert len(frame) == 257
        assert frame.loc[0, "omega"] == 0 and frame.loc[0, "c"] == 0
        c = frame.c.to_numpy()
        numpy.testing.assert_allclose(c[1:], c[1:][::-1], atol=1e-12)
        assert c.max() == pytest.approx(0.64, abs=1e-3)
        assert abs(frame.omega[c.argmax()] - numpy.pi) < 2 * numpy.pi / 257
        assert c.mean() == pytest.approx(0.3739, abs=1e-4)
        assert (frame.p_return == 1).all()

    def test_sweep_parallel_matches_serial(self, capsys):
        _, serial = _run(capsys, "sweep", "--grid", "8", "--steps", "10")
        _, parallel = _run(capsys, "sweep", "--grid", "8", "--steps", "10", "--jobs", "2")
        pandas.testing.assert_frame_equal(serial, parallel)

    def test_classical(self, capsys):
        code, frame = _run(capsys, "classical", "--p0", "0.3", "--p", "0.6", "--steps", "20")
        assert code == 0
        numpy.testing.assert_allclose(frame.p_return, frame.p_series, atol=1e-12)
        assert "asymptote" in frame.columns

    def test_series(self, capsys):
        code, frame = _run(capsys, "series", "--omega", "pi", "--steps", "11")
        assert code == 0
        assert frame.r_star_exact.tolist() == ["0", "-1", "0", "1/2", "0", "0", "0", "-1/8", "0", "0", "0", "1/16"]
        numpy.testing.assert_allclose(frame.p_return.loc[2], 0.5, atol=1e-12)

    def test_out_directory(self, capsys, tmp_path):
        code = qwloc.cli.main(["simulate", "--steps", "4", "--out", str(tmp_path)])
        assert code == 0
        assert capsys.readouterr().out == ""
        path = tmp_path / qwloc.storage.get_simulation_output_key("eq22", numpy.pi, 4)
        assert os.path.exists(path)
        assert pandas.read_csv(path).n.tolist() == [2, 4]

    def test_unwritable_output(self, capsys, tmp_path):
        target = tmp_path / "missing" / "out.csv"
        assert qwloc.cli.main(["simulate", "--steps", "4", "--out", str(target)]) == 2
        assert not target.exists()
        assert capsys.readouterr().out == ""

    def test_usage_errors(self, capsys):
        for argv in [
            ["simulate", "--omega", "banana"],
            ["simulate", "--steps", "-1"],
            ["simulate", "--model", "not_a_model"],
            ["verify", "--tolerance", "0"],
            ["classical", "--p", "1.5"],
        ]:
            with pytest.raises(SystemExit) as excinfo:
                qwloc.cli.main(argv)
            assert excinfo.value.code == 2

    def test_verify_perturbed_fails(self, monkeypatch, capsys):
        def only(*names):
            return {name: qwloc.checks.CHECKS[name] for name in names}

        monkeypatch.setattr(qwloc.checks, "CHECKS", only("coin_unitarity", "norm_conservation"))
        code, report = _run(capsys, "verify", "--perturb", "1e-3")
        assert code == 1
        assert not report.passed.any()
        code, report = _run(capsys, "verify")
        assert code == 0
        assert report.check.tolist() == ["coin_unitarity", "norm_conservation"]

    def test_verify_default_run_passes(self, capsys):
        code, report = _run(capsys, "verify")
        failed = report.loc[~report.passed, "check"].tolist()
        assert code == 0, f"Failed checks: {failed}"
        assert len(report) == len(qwloc.checks.CHECKS)
