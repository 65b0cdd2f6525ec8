import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrfs.errors import MalformedInputError
from lrfs.metrics import (
    AssignmentMetricParams,
    base_distance,
    set_distance,
    tuple_distance,
    tuple_representation_demo,
)
from lrfs.state_model import Label, LabeledSet, LabeledState

P = AssignmentMetricParams()


def lset(*items, time=0):
    return LabeledSet([(x, lab, time) for x, lab in items], time=time)


labeled_sets = st.lists(
    st.tuples(st.tuples(st.integers(-5, 5).map(float), st.integers(-5, 5).map(float)), st.integers(1, 6)),
    max_size=5,
    unique_by=lambda t: t[1],
).map(lambda items: lset(*((x, Label(0, i)) for x, i in items)))


def test_params_validation():
    for bad in (dict(cutoff=0), dict(order=0.5), dict(label_penalty=11)):
        with pytest.raises(MalformedInputError):
            AssignmentMetricParams(**bad)


def test_base_distance():
    a = LabeledState((0.0, 0.0), Label(0, 1), 0)
    b = LabeledState((3.0, 4.0), Label(0, 2), 0)
    assert base_distance(a, b, P) == 7.0
    assert base_distance(a, b, AssignmentMetricParams(cutoff=6.0)) == 6.0
    with pytest.raises(MalformedInputError):
        base_distance(a, LabeledState((1.0,), Label(0, 1), 0), P)


class TestSetDistance:
    def test_identity(self):
        X = lset(((1.0,), Label(0, 1)), ((2.0,), Label(0, 2)))
        assert set_distance(X, X) == 0.0
        assert set_distance(lset(), lset()) == 0.0

    def test_cardinality_charge(self):
        assert set_distance(lset(), lset(((1.0,), Label(0, 1)))) == P.cutoff

    def test_two_by_two_brute_force(self):
        la, lb = Label(0, 1), Label(0, 2)
        A = [((0.0, 0.0), la), ((4.0, 0.0), lb)]
        B = [((1.0, 0.0), lb), ((4.0, 3.0), la)]
        straight = min(10, 1 + 2) + min(10, 3 + 2)
        crossed = min(10, 5.0) + min(10, 3.0)
        expected = min(straight, crossed) / 2
        assert set_distance(lset(*A), lset(*B)) == pytest.approx(expected)

    @given(labeled_sets, labeled_sets)
    def test_symmetry_and_range(self, A, B):
        d = set_distance(A, B)
        assert d == set_distance(B, A)
        assert 0.0 <= d <= P.cutoff

    @given(labeled_sets, labeled_sets, labeled_sets, st.sampled_from([1.0, 2.0]))
    def test_triangle(self, A, B, C, p):
        params = AssignmentMetricParams(order=p)
        assert set_distance(A, C, params) <= set_distance(A, B, params) + set_distance(B, C, params) + 1e-9

    @given(st.integers(0, 10_000))
    def test_hungarian_matches_exhaustive(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(0, 7)), int(rng.integers(0, 7))
        A = lset(*((tuple(rng.normal(size=2) * 4), Label(0, j + 1)) for j in range(n)))
        B = lset(*((tuple(rng.normal(size=2) * 4), Label(0, int(rng.integers(1, 9)) + 10 * j)) for j in range(m)))
        assert set_distance(A, B, method="hungarian") == pytest.approx(set_distance(A, B, method="exhaustive"), abs=1e-12)

    def test_large_sets_use_hungarian(self):
        A = lset(*(((float(j),), Label(0, j + 1)) for j in range(12)))
        B = lset(*(((float(j) + 0.5,), Label(0, j + 1)) for j in range(12)))
        assert set_distance(A, B) == pytest.approx(0.5)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            set_distance(lset(((0.0,), Label(0, 1))), lset(((0.0,), Label(0, 1))), method="greedy")


class TestTupleDemo:
    pop = [LabeledState((float(j),), Label(0, j + 1), 0) for j in range(3)]

    def test_identity(self):
        r = tuple_representation_demo(self.pop[:2], (0, 1))
        assert r.tuple_distance == 0.0 and r.set_distance == 0.0

    def test_swap(self):
        r = tuple_representation_demo(self.pop[:2], (1, 0))
        assert r.tuple_distance > 0 and r.set_distance == 0.0
        assert r.witnesses_ill_defined_tuple_metric

    def test_all_of_s3(self):
        for perm in itertools.permutations(range(3)):
            r = tuple_representation_demo(self.pop, perm)
            assert r.set_distance == 0.0
            assert (r.tuple_distance == 0.0) == (perm == (0, 1, 2))

    def test_bad_permutation(self):
        with pytest.raises(MalformedInputError):
            tuple_representation_demo(self.pop, (0, 0, 1))
        with pytest.raises(MalformedInputError):
            tuple_representation_demo([self.pop[0], self.pop[0]], (1, 0))

    def test_tuple_distance_length(self):
        with pytest.raises(MalformedInputError):
            tuple_distance(self.pop[:1], self.pop[:2])
        assert tuple_distance([], []) == 0.0

    @given(st.data())
    def test_witness_always_found(self, data):
        n = data.draw(st.integers(2, 5))
        xs = data.draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
        pop = [LabeledState((float(x),), Label(0, j + 1), 0) for j, x in enumerate(xs)]
        perm = data.draw(st.permutations(range(n)).filter(lambda q: list(q) != list(range(n))))
        r = tuple_representation_demo(pop, perm)
        assert r.tuple_distance > 0 and r.set_distance == 0.0
        assert not math.isnan(r.tuple_distance)
