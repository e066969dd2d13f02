import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from jep.errors import DomainError
from jep.sets import (
    EMPTY,
    ParticleConfig,
    avoiding_shift,
    avoiding_shift_literal,
    count_below,
    delete_min,
    noncolliding_union,
    parse_config,
    shift_down,
    shift_up,
)

configs = st.frozensets(st.integers(0, 30), max_size=6).map(ParticleConfig)
nonempty_configs = st.frozensets(st.integers(0, 30), min_size=1, max_size=6).map(ParticleConfig)
points = st.integers(0, 40)


def P(*xs):
    return ParticleConfig(xs)


class TestParticleConfig:
    def test_sorts_and_validates(self):
        assert P(7, 1, 4) == (1, 4, 7)
        with pytest.raises(DomainError):
            P(1, 1)
        with pytest.raises(DomainError):
            P(-1, 2)
        with pytest.raises(DomainError):
            P(1.5)

    def test_parse_roundtrip(self):
        assert parse_config("1,4,7") == P(1, 4, 7)
        assert parse_config("") == EMPTY
        assert parse_config(P(0, 2, 3).key()) == P(0, 2, 3)
        with pytest.raises(DomainError):
            parse_config("1,x")

    def test_repr(self):
        assert repr(P(0, 2)) == "{0,2}"


class TestShiftDown:
    def test_examples(self):
        assert shift_down(P(1, 4, 7), 1) == P(0, 3, 6)
        assert shift_down(P(3), 3) == P(0)

    def test_rejects_negative_heights(self):
        with pytest.raises(DomainError):
            shift_down(P(0, 2), 1)


class TestDeleteMin:
    def test_examples(self):
        assert delete_min(P(0, 2, 3)) == P(2, 3)
        assert delete_min(P(5)) == EMPTY

    def test_empty(self):
        with pytest.raises(DomainError):
            delete_min(EMPTY)


class TestCountBelow:
    def test_examples(self):
        assert count_below(EMPTY, 7) == 7
        assert count_below(P(0, 2, 3), 5) == 2
        # theta_A(1) = 4 for A = {0,2,3}, so h_A(4) = 1
        assert count_below(P(0, 2, 3), 4) == 1

    @given(configs, points)
    def test_matches_enumeration(self, A, x):
        assert count_below(A, x) == oracles.h(A, x)

    @given(configs, points)
    def test_monotone(self, A, x):
        assert count_below(A, x) <= count_below(A, x + 1)


class TestAvoidingShift:
    def test_figure_values(self):
        A = P(0, 2, 3)
        assert [avoiding_shift(A, x) for x in range(3)] == [1, 4, 5]

    def test_small_examples(self):
        assert all(avoiding_shift(EMPTY, x) == x for x in range(20))
        assert avoiding_shift(P(1), 0) == 0
        assert avoiding_shift(P(1), 1) == 2

    def test_walk_equals_literal_definition_exhaustively(self):
        for k in range(5):
            for A in itertools.combinations(range(11), k):
                for x in range(14):
                    assert avoiding_shift(A, x) == avoiding_shift_literal(A, x) == oracles.theta(A, x)

    @given(configs, points)
    def test_result_is_free_and_increasing(self, A, x):
        y = avoiding_shift(A, x)
        assert y not in A
        assert avoiding_shift(A, x + 1) > y

    @given(configs, st.integers(0, 20))
    def test_bijection_onto_complement_prefix(self, A, K):
        assert [avoiding_shift(A, x) for x in range(K + 1)] == oracles.complement_prefix(A, K + 1)

    @given(configs, points)
    def test_index_shift(self, A, x):
        assert avoiding_shift(shift_up(A), x + 1) == avoiding_shift(A, x) + 1

    @given(nonempty_configs, points)
    def test_index_delete(self, A, x):
        expected = x if x < A[0] else avoiding_shift(delete_min(A), x + 1)
        assert avoiding_shift(A, x) == expected

    @given(configs, points)
    def test_inverse_is_count_below(self, A, x):
        if x not in A:
            assert avoiding_shift(A, count_below(A, x)) == x


class TestNoncollidingUnion:
    def test_examples(self):
        assert noncolliding_union(EMPTY, [0, 0, 0]) == P(0, 1, 2)
        assert noncolliding_union(P(0, 2, 3), [1]) == P(0, 2, 3, 4)
        assert noncolliding_union(EMPTY, [5]) == P(5)

    @given(configs, st.lists(points, max_size=5))
    def test_size_and_containment(self, A, xs):
        U = noncolliding_union(A, xs)
        assert len(U) == len(A) + len(xs)
        assert set(A) <= set(U)
        assert U == oracles.union(A, xs)

    @given(configs, st.lists(points, min_size=1, max_size=5))
    def test_minimum(self, A, xs):
        assert noncolliding_union(A, xs)[0] == min(set(A) | set(xs))

    @given(configs, st.lists(points, max_size=5))
    def test_shift_equivariance(self, A, xs):
        lhs = noncolliding_union(shift_up(A), [x + 1 for x in xs])
        assert lhs == shift_up(noncolliding_union(A, xs))

    @given(nonempty_configs, points)
    def test_delete_min_of_union(self, A, x):
        expected = A if x < A[0] else noncolliding_union(delete_min(A), [x + 1])
        assert delete_min(noncolliding_union(A, [x])) == expected

    def test_order_can_matter(self):
        # the union of deterministic inputs is not permutation invariant
        assert noncolliding_union(EMPTY, [1, 0]) == P(0, 1)
        assert noncolliding_union(EMPTY, [0, 1]) == P(0, 2)
