"""Conductance networks: Dirichlet problem, reversibility, hitting times."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xferlab import (
    FiniteSpace,
    Network,
    NormalizationError,
    Observable,
    detailed_balance_residual,
    harmonic_solve,
    harmonicity_residual,
    hitting_verification,
    laplacian_apply,
    path_network,
    random_network,
    transition_operator,
)


class TestNetworkValidation:
    def test_conductance_must_be_symmetric(self):
        sp = FiniteSpace(("x", "y"))
        with pytest.raises(NormalizationError):
            Network(sp, np.array([[0.0, 1.0], [2.0, 0.0]]), (0,))

    def test_negative_conductance_rejected(self):
        sp = FiniteSpace(("x", "y"))
        with pytest.raises(NormalizationError):
            Network(sp, np.array([[0.0, -1.0], [-1.0, 0.0]]), (0,))

    def test_isolated_interior_vertex_rejected(self):
        sp = FiniteSpace(("x", "y", "z"))
        c = np.zeros((3, 3))
        c[0, 1] = c[1, 0] = 1.0
        with pytest.raises(ValueError):
            Network(sp, c, (0,))


class TestWalkStructure:
    def test_transition_rows_are_conductance_ratios(self):
        net = path_network([1.0, 2.0])
        P = transition_operator(net)
        assert P.kernel[1] == pytest.approx([1 / 3, 0.0, 2 / 3])

    def test_boundary_is_absorbing(self):
        net = path_network([1.0, 2.0])
        P = transition_operator(net)
        assert P.kernel[0, 0] == 1.0 and P.kernel[2, 2] == 1.0

    def test_detailed_balance(self):
        net = random_network(12, 3, seed=5)
        assert detailed_balance_residual(net) < 1e-12


class TestDirichletProblem:
    def test_weighted_path_value(self):
        # conductances 1 and 2: h(mid) = (1*0 + 2*1)/3 = 2/3, exact
        net = path_network([1.0, 2.0])
        h = harmonic_solve(net, {0: 0.0, 2: 1.0})
        assert h.values[1] == pytest.approx(2 / 3, abs=1e-15)

    def test_solution_is_laplacian_harmonic(self):
        net = random_network(20, 4, seed=9)
        bv = {b: float(i) for i, b in enumerate(net.boundary)}
        h = harmonic_solve(net, bv)
        assert harmonicity_residual(net, h) < 1e-10

    def test_laplacian_mean_value_equivalence(self):
        # Delta phi = c(x) (phi - P phi) at interior vertices
        net = random_network(15, 3, seed=2)
        rng = np.random.default_rng(0)
        phi = Observable.from_values(net.space, rng.standard_normal(net.space.n))
        P = transition_operator(net)
        lap = laplacian_apply(net, phi)
        mean_form = net.total_conductance() * (phi.values - P.apply(phi).values)
        interior = list(net.interior)
        assert np.max(np.abs(lap[interior] - mean_form[interior])) < 1e-12

    def test_maximum_principle(self):
        net = random_network(25, 5, seed=11)
        bv = {b: float(v) for b, v in zip(net.boundary, [0.0, 1.0, 0.5, 0.2, 0.9])}
        h = harmonic_solve(net, bv)
        assert np.min(h.values) >= min(bv.values()) - 1e-12
        assert np.max(h.values) <= max(bv.values()) + 1e-12

    def test_boundary_values_must_cover_the_boundary(self):
        net = path_network([1.0, 1.0])
        with pytest.raises(ValueError):
            harmonic_solve(net, {0: 0.0})

    @given(c1=st.floats(0.1, 10), c2=st.floats(0.1, 10))
    @settings(max_examples=30, deadline=None)
    def test_path_value_is_conductance_weighted_average(self, c1, c2):
        net = path_network([c1, c2])
        h = harmonic_solve(net, {0: 0.0, 2: 1.0})
        assert h.values[1] == pytest.approx(c2 / (c1 + c2), rel=1e-12)


class TestHitting:
    def test_mc_agrees_with_exact(self):
        net = path_network([1.0, 2.0])
        rep = hitting_verification(net, {0: 0.0, 2: 1.0}, start=1, count=50_000, seed=3)
        assert rep.capped == 0
        assert abs(rep.estimate - rep.exact) < 4 * rep.stderr

    def test_step_cap_is_reported(self):
        net = path_network([1.0] * 6)
        rep = hitting_verification(
            net, {0: 0.0, 6: 1.0}, start=3, count=200, seed=1, step_cap=2
        )
        assert rep.capped > 0
