import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrfs.distributions import (
    CardinalityPmf,
    IntensityFunction,
    LmbParams,
    cardinality_pmf,
    enumerate_lmb,
    labeled_poisson_density,
    lmb_density,
    lmb_normalization,
    lmb_sample,
    lmb_sample_batch,
)
from lrfs.errors import EnumerationBoundError, MalformedInputError
from lrfs.state_model import Label, is_labeled

from conftest import lmb_params, random_lmb

L1, L2, L3 = Label(0, 1), Label(0, 2), Label(1, 1)


def brute_force_mass(params):
    """Sum the density over every assignment label -> absent or cell."""
    labs = params.labels
    g = params.num_cells
    terms = []
    for choice in itertools.product([None, *range(g)], repeat=len(labs)):
        X = {(c, lab) for c, lab in zip(choice, labs) if c is not None}
        terms.append(lmb_density(params, X))
    return math.fsum(terms)


def test_params_validation():
    with pytest.raises(MalformedInputError):
        LmbParams({L1: 1.2}, {L1: [1.0]})
    with pytest.raises(MalformedInputError):
        LmbParams({L1: 0.5}, {L1: [0.5, 0.4]})
    with pytest.raises(MalformedInputError):
        LmbParams({L1: 0.5}, {L2: [1.0]})
    with pytest.raises(MalformedInputError):
        LmbParams({L1: 0.5, L2: 0.5}, {L1: [1.0], L2: [0.5, 0.5]})


class TestLmbDensity:
    def test_empty_set(self):
        assert lmb_density(LmbParams({L1: 0.5}, {L1: [0.25, 0.75]}), set()) == 0.5

    def test_label_outside_J(self):
        assert lmb_density(LmbParams({L1: 0.5}, {L1: [0.25, 0.75]}), {(0, L2)}) == 0.0

    def test_repeated_label(self):
        p = LmbParams({L1: 0.5, L2: 0.5}, {L1: [0.5, 0.5], L2: [0.5, 0.5]})
        assert lmb_density(p, {(0, L1), (1, L1)}) == 0.0

    def test_hand_value(self):
        p = LmbParams({L1: 0.3, L2: 0.6}, {L1: [0.2, 0.8], L2: [1.0, 0.0]})
        assert lmb_density(p, {(1, L1)}) == pytest.approx(0.3 * 0.8 * 0.4, abs=1e-15)
        assert lmb_density(p, {(1, L1), (0, L2)}) == pytest.approx(0.3 * 0.8 * 0.6, abs=1e-15)

    @given(lmb_params(), st.data())
    def test_vanishes_off_labeled_sets(self, params, data):
        if not params.labels or params.num_cells < 2:
            return
        lab = data.draw(st.sampled_from(params.labels))
        c1, c2 = data.draw(st.lists(st.integers(0, params.num_cells - 1), min_size=2, max_size=2, unique=True))
        X = {(c1, lab), (c2, lab)}
        assert not is_labeled(X)
        assert lmb_density(params, X) == 0.0


class TestNormalization:
    def test_empty_label_set(self):
        assert lmb_normalization(LmbParams({}, {})) == 1.0

    def test_single_label(self):
        rng = np.random.default_rng(0)
        s = rng.random(7)
        s /= s.sum()
        assert abs(lmb_normalization(LmbParams({L1: 0.3}, {L1: s})) - 1.0) <= 1e-12

    def test_three_labels_ten_cells(self):
        p = random_lmb(np.random.default_rng(1), 3, 10)
        assert abs(lmb_normalization(p) - 1.0) <= 1e-9
        assert abs(brute_force_mass(p) - 1.0) <= 1e-9

    @given(lmb_params(max_labels=3, max_cells=5))
    def test_matches_brute_force(self, params):
        assert abs(lmb_normalization(params) - brute_force_mass(params)) <= 1e-12
        assert abs(lmb_normalization(params) - 1.0) <= 1e-9

    def test_bounds(self):
        p = random_lmb(np.random.default_rng(2), 7, 3)
        with pytest.raises(EnumerationBoundError):
            lmb_normalization(p)
        big = LmbParams({L1: 0.5}, {L1: np.full(40, 1 / 40)})
        with pytest.raises(EnumerationBoundError):
            lmb_normalization(big)
        assert abs(lmb_normalization(big, max_cells=64) - 1.0) <= 1e-9


@given(lmb_params())
def test_enumeration_matches_pointwise_density(params):
    seen = dict(enumerate_lmb(params))
    for X, w in seen.items():
        assert w == pytest.approx(lmb_density(params, X), rel=1e-12, abs=0)
        assert w > 0
    full = dict(enumerate_lmb(params, nonzero_only=False))
    assert len(full) == (1 + params.num_cells) ** len(params)


class TestSampling:
    def test_all_absent(self):
        p = LmbParams({L1: 0.0, L2: 0.0}, {L1: [0.5, 0.5], L2: [0.5, 0.5]})
        assert len(lmb_sample(p, 3)) == 0

    def test_all_present_point_masses(self):
        p = LmbParams({L1: 1.0, L2: 1.0}, {L1: [0, 1, 0], L2: [0, 0, 1]})
        X = lmb_sample(p, 3)
        assert X.pairs() == {(1, L1), (2, L2)}

    def test_deterministic(self):
        p = random_lmb(np.random.default_rng(4), 3, 6)
        assert lmb_sample(p, 99) == lmb_sample(p, 99)
        assert np.array_equal(lmb_sample_batch(p, 50, 7), lmb_sample_batch(p, 50, 7))

    def test_inclusion_frequency(self):
        p = LmbParams({L1: 0.5, L2: 0.5}, {L1: [0.5, 0.5], L2: [0.1, 0.9]})
        draws = lmb_sample_batch(p, 100_000, 2024)
        freq = (draws >= 0).mean(axis=0)
        assert np.all(np.abs(freq - 0.5) <= 0.01)

    def test_scalar_sampler_frequency(self):
        p = LmbParams({L1: 0.5}, {L1: [0.5, 0.5]})
        rng = np.random.default_rng(5)
        hits = sum(len(lmb_sample(p, rng)) for _ in range(20_000))
        assert abs(hits / 20_000 - 0.5) <= 0.015

    def test_total_variation(self):
        p = LmbParams({L1: 0.4, L2: 0.7}, {L1: [0.1, 0.2, 0.3, 0.4], L2: [0.25, 0.25, 0.4, 0.1]})
        draws = lmb_sample_batch(p, 1_000_000, 11)
        codes = (draws[:, 0] + 1) * 5 + (draws[:, 1] + 1)
        emp = np.bincount(codes, minlength=25) / draws.shape[0]
        tv = 0.0
        for a in range(-1, 4):
            for b in range(-1, 4):
                X = {(c, lab) for c, lab in ((a, L1), (b, L2)) if c >= 0}
                tv += abs(emp[(a + 1) * 5 + b + 1] - lmb_density(p, X))
        assert tv / 2 < 0.01

    @given(lmb_params(), st.integers(0, 1000))
    def test_samples_are_labeled(self, params, seed):
        X = lmb_sample(params, seed, time=2)
        assert is_labeled(X) and X.labels <= set(params.labels)


class TestPoisson:
    def test_empty(self):
        D = IntensityFunction({(0, L1): 0.3, (1, L2): 0.2})
        assert labeled_poisson_density(D, set()) == pytest.approx(math.exp(-0.5))

    def test_not_an_lrfs_distribution(self):
        D = IntensityFunction({(0, L1): 0.3, (1, L1): 0.2})
        Y = {(0, L1), (1, L1)}
        assert not is_labeled(Y)
        assert labeled_poisson_density(D, Y) == pytest.approx(math.exp(-0.5) * 0.06)
        assert labeled_poisson_density(D, Y) > 0

    def test_zero_intensity(self):
        assert labeled_poisson_density(IntensityFunction({}), set()) == 1.0

    def test_rejects_negative(self):
        with pytest.raises(MalformedInputError):
            IntensityFunction({(0, L1): -0.1})

    @given(st.dictionaries(st.tuples(st.integers(0, 4), st.sampled_from([L1, L2, L3])), st.floats(0.01, 2.0), min_size=1))
    def test_positive_on_some_non_labeled_set(self, values):
        D = IntensityFunction(values)
        by_label = {}
        for (c, lab), v in values.items():
            by_label.setdefault(lab, []).append(c)
        for lab, cells in by_label.items():
            if len(cells) >= 2:
                Y = {(cells[0], lab), (cells[1], lab)}
                assert labeled_poisson_density(D, Y) > 0


class TestCardinality:
    def test_bernoulli(self):
        pmf = cardinality_pmf(LmbParams({L1: 0.3}, {L1: [1.0]}))
        assert pmf[0] == pytest.approx(0.7) and pmf[1] == pytest.approx(0.3)

    def test_two_labels(self):
        pmf = cardinality_pmf(LmbParams({L1: 0.5, L2: 0.5}, {L1: [0.5, 0.5], L2: [1.0, 0.0]}))
        assert np.allclose(pmf.p, [0.25, 0.5, 0.25], atol=1e-15)
        assert pmf.mean() == pytest.approx(1.0)

    @given(lmb_params())
    def test_normalized_and_mean(self, params):
        pmf = cardinality_pmf(params)
        assert abs(pmf.p.sum() - 1.0) <= 1e-9
        assert pmf.mean() == pytest.approx(sum(params.existence.values()), abs=1e-9)

    @given(lmb_params(max_labels=3, max_cells=4), st.data())
    def test_monotone_in_existence(self, params, data):
        if not params.labels:
            return
        lab = data.draw(st.sampled_from(params.labels))
        bump = data.draw(st.floats(0.0, 1.0))
        q = dict(params.existence)
        q[lab] = q[lab] + (1.0 - q[lab]) * bump
        higher = LmbParams(q, params.spatial)
        assert cardinality_pmf(higher).tail(1) >= cardinality_pmf(params).tail(1) - 1e-12

    def test_pmf_validation(self):
        with pytest.raises(MalformedInputError):
            CardinalityPmf([0.5, 0.4])
        assert CardinalityPmf([0.5, 0.5])[7] == 0.0
