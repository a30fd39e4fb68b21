"""Solenoid structure: compatibility, shift/lift, invariance, group case."""

import numpy as np
import pytest
from fractions import Fraction

from xferlab import (
    CircleSpace,
    CylinderFunctional,
    FiniteSpace,
    Measure,
    Observable,
    SmaleWilliamsState,
    SolenoidWord,
    covariance_check,
    group_translation_invariance,
    invariant_measure,
    lift_conditional_residual,
    matrix_operator,
    rhat,
    ruelle_from_endo,
    ruelle_from_filter,
    sample_paths,
    shift,
    shift_invariance_residual,
    smale_williams_map,
    smale_williams_orbit,
    support_mass,
    uniform_circle_operator,
)
from xferlab.pathmeasure import default_word_battery
from xferlab.solenoid import (
    ensemble_compatibility_violations,
    random_solenoid_translate,
)

HAAR_M0 = {0: 2**-0.5, 1: 2**-0.5}


@pytest.fixture
def circle():
    return CircleSpace(degree=32, grid=256)


@pytest.fixture
def circle_R(circle):
    return ruelle_from_filter(circle, HAAR_M0)


class TestSolenoidWords:
    def test_circle_word_validates_compatibility(self, circle):
        SolenoidWord(circle, (Fraction(1, 3), Fraction(1, 6), Fraction(7, 12)))
        with pytest.raises(ValueError):
            SolenoidWord(circle, (Fraction(1, 3), Fraction(1, 5)))

    def test_shift_and_lift_are_mutually_inverse(self, circle):
        w = SolenoidWord(circle, (Fraction(1, 3), Fraction(2, 3), Fraction(1, 3)))
        assert shift(rhat(w)).entries == w.entries
        assert rhat(shift(w)).entries == w.entries

    def test_finite_word_uses_the_endo(self):
        sp = FiniteSpace(("a", "b", "c"), endo=(1, 2, 0))
        SolenoidWord(sp, (1, 0, 2))
        with pytest.raises(ValueError):
            SolenoidWord(sp, (1, 1))


class TestSupport:
    def test_full_mass_for_pullout_operator(self, circle_R):
        for n in range(1, 7):
            assert support_mass(circle_R, Fraction(0), n) == 1.0
        assert support_mass(circle_R, Fraction(1, 3), 5) == 1.0

    def test_mass_is_monotone_in_depth(self):
        sp = FiniteSpace(("a", "b"), endo=(0, 1))
        R = matrix_operator(sp, [[0.75, 0.25], [0.5, 0.5]])
        masses = [support_mass(R, 0, n) for n in range(1, 6)]
        assert all(a >= b for a, b in zip(masses, masses[1:]))

    def test_negative_control_mass(self):
        # identity endomorphism but off-diagonal transitions: pullout fails
        sp = FiniteSpace(("a", "b"), endo=(0, 1))
        R = matrix_operator(sp, [[0.75, 0.25], [0.5, 0.5]])
        assert support_mass(R, 0, 2) == pytest.approx(0.75, abs=1e-15)

    def test_sampled_paths_never_violate_compatibility(self, circle_R):
        ens = sample_paths(circle_R, Fraction(0), 8, 5000, seed=13)
        assert ensemble_compatibility_violations(ens) == 0


class TestShiftInvariance:
    @pytest.fixture
    def two_state(self):
        sp = FiniteSpace(("a", "b"))
        return sp, matrix_operator(sp, [[0.75, 0.25], [0.5, 0.5]])

    def test_stationary_measure_gives_invariance(self, two_state):
        sp, R = two_state
        mu = invariant_measure(R)
        battery = default_word_battery(sp, seed=4)
        assert shift_invariance_residual(mu, R, battery) < 1e-12

    def test_nonstationary_residual_frozen_value(self, two_state):
        sp, R = two_state
        mu = Measure.from_weights(sp, [0.9, 0.1])
        battery = [Observable.indicator(sp, 0), Observable.indicator(sp, 1)]
        # oracle: |mu R - mu| at the indicator = |0.9*0.75 + 0.1*0.5 - 0.9| = 0.175
        assert shift_invariance_residual(mu, R, battery) == pytest.approx(0.175)


class TestLiftAndCovariance:
    def test_lift_conditional_identity(self, circle_R):
        words = default_word_battery(circle_R.space, max_depth=3, per_depth=3, seed=6)
        pts = [Fraction(0), Fraction(1, 3), Fraction(2, 5)]
        assert lift_conditional_residual(circle_R, words, pts) < 1e-10

    def test_covariance_relations(self, circle_R):
        space = circle_R.space
        mu = Measure.haar_measure(space)
        basis = [Observable.character(space, n) for n in (-2, -1, 0, 1, 2)]
        words = default_word_battery(space, max_depth=3, per_depth=2, seed=15)
        m = Observable.from_fourier(space, HAAR_M0)
        out = covariance_check(circle_R, mu, basis, words, m=m)
        assert out["v1_covariance"] < 1e-12
        assert out["multiplication_covariance"] < 1e-10
        assert out["norm_preservation"] < 1e-10


class TestGroupCase:
    def test_haar_invariant_under_solenoid_translation(self, circle):
        R = uniform_circle_operator(circle)
        mu = Measure.haar_measure(circle)
        for seed in range(5):
            tr = random_solenoid_translate(circle, depth=4, seed=seed)
            f = CylinderFunctional(
                tuple(Observable.character(circle, n) for n in (1, -1, 2, 0))
            )
            assert group_translation_invariance(R, mu, f, tr) < 1e-12

    def test_group_case_requires_uniform_weight(self, circle, circle_R):
        mu = Measure.haar_measure(circle)
        tr = random_solenoid_translate(circle, depth=2, seed=0)
        f = CylinderFunctional((Observable.character(circle, 1),))
        from xferlab import NormalizationError

        with pytest.raises(NormalizationError):
            group_translation_invariance(circle_R, mu, f, tr)


class TestSmaleWilliams:
    def test_orbit_enters_the_attractor_radius(self):
        orbit = smale_williams_orbit(SmaleWilliamsState(0.137, 0.9 + 0.1j), 500)
        radii = np.hypot(orbit[1:, 1], orbit[1:, 2])
        assert radii.max() <= 0.75 + 1e-12

    def test_meridional_contraction_is_exactly_one_quarter(self):
        a = SmaleWilliamsState(0.3, 0.2 + 0.1j)
        b = SmaleWilliamsState(0.3, -0.5 + 0.4j)
        fa, fb = smale_williams_map(a), smale_williams_map(b)
        assert abs(fa.z - fb.z) == pytest.approx(abs(a.z - b.z) / 4, abs=1e-15)

    def test_angle_coordinate_follows_the_doubling_map(self):
        s = SmaleWilliamsState(0.3, 0.0)
        assert smale_williams_map(s).t == pytest.approx(0.6)

    def test_points_outside_the_torus_rejected(self):
        with pytest.raises(ValueError):
            SmaleWilliamsState(0.0, 1.5 + 0.0j)
