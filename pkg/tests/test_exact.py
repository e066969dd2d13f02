import json
import math

import numpy as np
import pytest

import oracles
from jep.distributions import BoundedUniformFamily, MemorylessFamily, TableFamily
from jep.errors import DomainError, TruncationError
from jep.exact import (
    balance_residual,
    build_matrix,
    distribution_at_time,
    drift_statistic,
    enumerate_states,
    read_distribution_csv,
    renewal_equilibrium,
    stationary_distribution,
    tv_distance,
    write_distribution_csv,
)
from jep.gibbs import gibbs_pmf, gibbs_vector
from jep.sets import EMPTY, ParticleConfig


def P(*xs):
    return ParticleConfig(xs)


class TestEnumerate:
    def test_small_space(self):
        space = enumerate_states(2, 3)
        assert space.states == (P(0, 1), P(0, 2), P(1, 2))
        assert len(enumerate_states(3, 10)) == math.comb(10, 3)

    def test_colex_order(self):
        states = enumerate_states(2, 4).states
        assert states == (P(0, 1), P(0, 2), P(1, 2), P(0, 3), P(1, 3), P(2, 3))

    def test_invalid(self):
        with pytest.raises(DomainError):
            enumerate_states(3, 2)
        with pytest.raises(DomainError):
            enumerate_states(0, 4)

    def test_position_outside(self):
        with pytest.raises(DomainError):
            enumerate_states(2, 4).position(P(0, 9))


class TestBuildMatrix:
    def test_drift_row(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(2, 10))
        assert m.row(P(1, 2)) == {P(0, 1): 1.0}

    def test_jump_row(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(2, 10))
        row = m.row(P(0, 1))
        assert row[P(0, 1)] == 0.5
        assert row[P(0, 2)] == 0.25
        assert row[P(0, 3)] == 0.125
        assert m.escaped[m.space.position(P(0, 1))] == pytest.approx(0.5**9)

    def test_rows_sum_to_one_minus_escape(self):
        m = build_matrix(MemorylessFamily(0.7), enumerate_states(3, 15))
        sums = np.asarray(m.P.sum(axis=1)).ravel()
        assert np.allclose(sums + m.escaped, 1.0, atol=1e-14)

    def test_matches_dense_oracle(self):
        alpha, n, h = 0.4, 2, 9
        m = build_matrix(MemorylessFamily(alpha), enumerate_states(n, h))
        states, dense = oracles.jep_dense_matrix(lambda B, y: (1 - alpha) * alpha ** oracles.h(B, y), n, h)
        for i, s in enumerate(states):
            row = m.row(s)
            for j, t in enumerate(states):
                assert abs(row.get(ParticleConfig(t), 0.0) - dense[i, j]) < 1e-15

    def test_truncation_error(self):
        with pytest.raises(TruncationError):
            build_matrix(MemorylessFamily(0.9), enumerate_states(2, 10), tol=1e-10)

    def test_bounded_uniform_has_no_escape(self):
        m = build_matrix(BoundedUniformFamily(5), enumerate_states(2, 5), tol=0.0)
        assert m.max_escaped == 0.0

    def test_json_export(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(1, 4))
        doc = json.loads(m.to_json())
        assert doc["states"] == [[0], [1], [2], [3]]
        assert doc["rows"][1] == [[0, 1.0]]
        assert doc["rows"][0] == [[0, 0.5], [1, 0.25], [2, 0.125], [3, 0.0625]]
        assert doc["escaped"][0] == 0.0625


class TestStationary:
    @pytest.mark.parametrize("alpha,n,h", [(0.5, 2, 12), (0.3, 3, 10), (0.6, 1, 20)])
    def test_matches_dense_lstsq(self, alpha, n, h):
        space = enumerate_states(n, h)
        m = build_matrix(MemorylessFamily(alpha), space)
        states, dense = oracles.jep_dense_matrix(lambda B, y: (1 - alpha) * alpha ** oracles.h(B, y), n, h)
        # the truncated kernel is substochastic; compare after restoring row sums
        dense[np.arange(len(states)), np.arange(len(states))] += 1 - dense.sum(axis=1)
        ref = dict(zip(states, oracles.dense_stationary(dense)))
        pi = stationary_distribution(_with_self_loops(m), tol=1.0)
        for i, s in enumerate(space.states):
            assert abs(pi[i] - ref[tuple(s)]) < 1e-10

    def test_gibbs_at_depth_forty(self):
        space = enumerate_states(2, 40)
        m = build_matrix(MemorylessFamily(0.5), space, tol=1e-10)
        pi = stationary_distribution(m)
        g = gibbs_vector(space, 0.5)
        assert np.abs(pi - g).max() < 1e-9

    def test_doubling_depth_is_stable(self):
        alpha = 0.3
        small, big = enumerate_states(3, 25), enumerate_states(3, 50)
        p1 = stationary_distribution(build_matrix(MemorylessFamily(alpha), small))
        p2 = stationary_distribution(build_matrix(MemorylessFamily(alpha), big))
        diff = max(abs(p1[i] - p2[big.index[s]]) for i, s in enumerate(small.states))
        assert diff < 1e-9

    def test_refuses_leaky_truncation(self):
        m = build_matrix(MemorylessFamily(0.9), enumerate_states(2, 10))
        with pytest.raises(TruncationError):
            stationary_distribution(m)

    def test_power_iteration_branch(self, monkeypatch):
        import jep.exact

        space = enumerate_states(2, 30)
        m = build_matrix(MemorylessFamily(0.4), space)
        direct = stationary_distribution(m)
        monkeypatch.setattr(jep.exact, "DENSE_LIMIT", 10)
        iterated = stationary_distribution(m)
        assert np.abs(direct - iterated).max() < 1e-10


def _with_self_loops(m):
    import scipy.sparse as sp

    from jep.exact import StochasticMatrix

    P2 = (m.P + sp.diags(m.escaped)).tocsr()
    return StochasticMatrix(m.space, P2, np.zeros_like(m.escaped))


class TestBalanceResidual:
    def test_point_mass_at_ground_state(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(2, 12))
        G = P(0, 1)
        i = m.space.position(G)
        pGG = m.row(G)[G]
        rowsum = sum(m.row(G).values())
        # mass entering other states plus loss at G, and the ground state feeds on itself only
        expected = (1 - pGG) + (rowsum - pGG)
        assert balance_residual(m.space.point_mass(G), m) == pytest.approx(expected)
        assert i == 0

    def test_gibbs_residual_small(self):
        space = enumerate_states(2, 40)
        m = build_matrix(MemorylessFamily(0.5), space)
        assert balance_residual(gibbs_vector(space, 0.5), m) < 1e-9

    def test_dimension_mismatch(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(1, 5))
        with pytest.raises(DomainError):
            balance_residual(np.ones(3), m)


class TestDistributionAtTime:
    def test_time_zero_and_deterministic_phase(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(3, 40))
        p0 = distribution_at_time(P(1, 4, 7), m, 0)
        assert p0[m.space.position(P(1, 4, 7))] == 1.0
        p1 = distribution_at_time(P(1, 4, 7), m, 1)
        assert p1[m.space.position(P(0, 3, 6))] == 1.0

    def test_one_jump(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(2, 40))
        p = distribution_at_time(P(0, 5), m, 1)
        # B = {4}: free sites 0,1,2,3 then 5
        assert p[m.space.position(P(0, 4))] == 0.5
        assert p[m.space.position(P(4, 5))] == pytest.approx(0.5**5)

    def test_exact_at_last_jump(self):
        space = enumerate_states(3, 40)
        m = build_matrix(MemorylessFamily(0.5), space)
        g = gibbs_vector(space, 0.5)
        assert tv_distance(distribution_at_time(P(1, 4, 7), m, 8), g) < 1e-9
        assert tv_distance(distribution_at_time(P(1, 4, 7), m, 7), g) > 1e-3

    def test_negative_time(self):
        m = build_matrix(MemorylessFamily(0.5), enumerate_states(1, 40))
        with pytest.raises(DomainError):
            distribution_at_time(P(0), m, -1)


class TestTV:
    def test_examples(self):
        assert tv_distance([1, 0], [0, 1]) == 1.0
        assert tv_distance([0.5, 0.5], [0.5, 0.5]) == 0.0
        assert tv_distance([0.2, 0.8], [0.5, 0.5]) == pytest.approx(0.3)
        with pytest.raises(DomainError):
            tv_distance([1], [0.5, 0.5])


class TestRenewal:
    def test_point_mass(self):
        assert np.allclose(renewal_equilibrium([0, 0, 1]), [1 / 3, 1 / 3, 1 / 3])

    def test_uniform_support(self):
        assert np.allclose(renewal_equilibrium([1 / 3, 1 / 3, 1 / 3]), [1 / 2, 1 / 3, 1 / 6], atol=1e-15)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    def test_geometric_is_geometric(self, alpha):
        K = 400
        nu = (1 - alpha) * alpha ** np.arange(K)
        nu[-1] = alpha ** (K - 1)
        pi = renewal_equilibrium(nu)
        assert np.abs(pi[:60] - nu[:60]).max() < 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_linear_solve(self, seed):
        rng = np.random.default_rng(seed)
        nu = rng.random(8)
        nu /= nu.sum()
        pi = renewal_equilibrium(nu)
        ref = oracles.dense_stationary(oracles.one_particle_matrix(nu))
        assert np.abs(pi - ref).max() < 1e-10

    def test_invalid(self):
        with pytest.raises(DomainError):
            renewal_equilibrium([0.5, 0.4])
        with pytest.raises(DomainError):
            renewal_equilibrium([])


class TestDrift:
    def test_no_particle_at_zero(self):
        assert drift_statistic(MemorylessFamily(0.5), P(2, 5)) == -1.0

    def test_far_apart(self):
        assert drift_statistic(MemorylessFamily(0.5), P(0, 30)) <= -0.5

    def test_single_particle_is_mean_jump(self):
        assert drift_statistic(MemorylessFamily(0.5), P(0)) == pytest.approx(1.0)
        assert drift_statistic(MemorylessFamily(0.75), P(0)) == pytest.approx(3.0)

    def test_against_direct_expectation(self):
        alpha = 0.6
        fam = MemorylessFamily(alpha)
        for A in [P(0, 1), P(0, 3, 4), P(0, 2, 9), P(0, 1, 2, 3)]:
            B = tuple(a - 1 for a in A[1:])
            V = A[-1]
            direct = sum(max(V - 1, y) * (1 - alpha) * alpha ** oracles.h(B, y) for y in range(600) if y not in B)
            assert drift_statistic(fam, A) == pytest.approx(direct - V, abs=1e-12)

    def test_bounded_family(self):
        fam = BoundedUniformFamily(6)
        # B = {} from A = {0}: uniform on 0..5, mean 2.5
        assert drift_statistic(fam, P(0)) == pytest.approx(2.5)

    def test_empty(self):
        with pytest.raises(DomainError):
            drift_statistic(MemorylessFamily(0.5), EMPTY)

    def test_table_family(self):
        fam = TableFamily({P(2): {0: 0.5, 4: 0.5}})
        # A = {0,3}: next max is max(2, Y) -> 2 or 4
        assert drift_statistic(fam, P(0, 3)) == pytest.approx(3.0 - 3)


class TestCsv:
    def test_roundtrip(self, tmp_path):
        space = enumerate_states(2, 4)
        probs = [0.375] + [gibbs_pmf(2, math.log(2), s) for s in space.states[1:]]
        path = tmp_path / "pi.csv"
        text = write_distribution_csv(space, probs, path)
        assert text.splitlines()[0] == "state,probability"
        assert text.splitlines()[1] == '"0,1",0.375'
        back = read_distribution_csv(path)
        assert back[P(0, 2)] == probs[1]

    def test_single_particle_unquoted(self):
        text = write_distribution_csv([P(3)], [1.0])
        assert text.splitlines()[1] == "3,1.0"
