import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ifacediv.errors import DimensionMismatch, DomainError, EmptyInput, EnumerationTooLarge, InvalidK, NotIdentical
from ifacediv.latency_model import PRESETS, EmpiricalCurve, InterfaceProfile, ParametricCurve, curves_for
from ifacediv.strategy_eval import (
    AllocationVector,
    Cloning,
    KofN,
    Weighted,
    decode_indicator,
    decode_latency,
    eval_cloning,
    eval_k_of_n,
    eval_k_of_n_identical,
    eval_weighted,
    fragment_plan,
    k_of_n_binomial,
    outcome_probabilities,
    parse_strategy,
)

from oracles import recursive_weighted, subset_decode_time


def flat(p):
    """Empirical curve that has already reached plateau p before 1 ms."""
    return EmpiricalCurve(np.array([0.5]), np.array([p]), p)


def bits(text):
    # leftmost character is interface 0
    return sum(1 << i for i, c in enumerate(text) if c == "1")


class TestDecodeIndicator:
    def test_examples(self):
        half3 = AllocationVector((0.5, 0.5, 0.5))
        assert decode_indicator(bits("110"), half3) == 1
        assert decode_indicator(bits("100"), half3) == 0
        assert decode_indicator(bits("11"), AllocationVector((0.5, 0.5), decode_min=1.05)) == 0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            decode_indicator(0b1000, AllocationVector((0.5, 0.5, 0.5)))

    @given(st.lists(st.floats(0, 1.05), min_size=1, max_size=8), st.data())
    def test_monotone_in_received_set(self, gam, data):
        alloc = AllocationVector(tuple(gam))
        h = data.draw(st.integers(0, (1 << len(gam)) - 1))
        extra = data.draw(st.integers(0, len(gam) - 1))
        assert decode_indicator(h | 1 << extra, alloc) >= decode_indicator(h, alloc)


class TestWeighted:
    def test_single_interface_reduction(self):
        c = ParametricCurve(PRESETS["UMTS"])
        for x in (300.0, 450.0, 600.0):
            got = eval_weighted([c], AllocationVector((1.05,)), 1500, x)
            assert got == pytest.approx(c(x, 1.05 * 1500), abs=1e-15)

    def test_parallel_form(self):
        got = eval_weighted([flat(0.9), flat(0.9)], AllocationVector((1.05, 1.05)), 1500, 10.0)
        assert got == pytest.approx(0.99, abs=1e-15)

    def test_zero_allocation_is_ignored(self):
        curves = curves_for([PRESETS["UMTS"], PRESETS["GPRS"], PRESETS["LTE"]])
        a = eval_weighted(curves, AllocationVector((1.0, 0.0, 0.5)), 1500, 500.0)
        b = eval_weighted([curves[0], curves[2]], AllocationVector((1.0, 0.5)), 1500, 500.0)
        assert a == b

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_weighted([flat(0.5)], AllocationVector((0.5, 0.5)), 10, 1.0)

    def test_enumeration_cap(self):
        curves = [flat(0.5)] * 25
        with pytest.raises(EnumerationTooLarge):
            eval_weighted(curves, AllocationVector((0.1,) * 25), 10, 1.0)

    def test_vectorized_over_latency(self):
        curves = curves_for([PRESETS["UMTS"], PRESETS["GPRS"]])
        alloc = AllocationVector((0.7, 0.4))
        xs = np.linspace(0, 1000, 11)
        vec = eval_weighted(curves, alloc, 1500, xs)
        assert np.allclose(vec, [eval_weighted(curves, alloc, 1500, x) for x in xs], atol=0, rtol=0)

    def test_total_probability(self):
        curves = curves_for([PRESETS[n] for n in ("LTE", "HSDPA", "UMTS", "EDGE", "GPRS")])
        _, probs = outcome_probabilities(curves, AllocationVector((0.2, 0.4, 0.6, 0.8, 1.0)), 1500, 350.0)
        assert math.fsum(float(p) for p in probs) == pytest.approx(1.0, abs=1e-12)

    @given(st.integers(1, 6), st.data())
    @settings(max_examples=150, deadline=None)
    def test_matches_recursive_expansion(self, n, data):
        fvals = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
        gam = data.draw(st.lists(st.floats(0, 1.05), min_size=n, max_size=n))
        tau = data.draw(st.sampled_from([1.0, 1.05]))
        curves = [flat(p) for p in fvals]
        got = eval_weighted(curves, AllocationVector(tuple(gam), decode_min=tau), 1, 10.0)
        assert got == pytest.approx(recursive_weighted(fvals, gam, tau), abs=1e-12)

    @given(st.lists(st.floats(0.1, 1.05), min_size=1, max_size=4), st.floats(0, 800), st.floats(0, 800))
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_latency(self, gam, x1, x2):
        names = ["LTE", "HSDPA", "UMTS", "GPRS"][: len(gam)]
        curves = curves_for([PRESETS[n] for n in names])
        alloc = AllocationVector(tuple(gam))
        lo, hi = sorted((x1, x2))
        a, b = eval_weighted(curves, alloc, 1500, lo), eval_weighted(curves, alloc, 1500, hi)
        assert 0 <= a <= b + 1e-15 <= 1 + 1e-12


class TestCloning:
    def test_examples(self):
        assert eval_cloning([flat(0.9), flat(0.99)], 1500, 1.0) == pytest.approx(0.999, abs=1e-15)
        c = ParametricCurve(PRESETS["EDGE"])
        assert eval_cloning([c], 1500, 500.0) == c(500.0, 1500)
        assert eval_cloning([flat(0.7)] * 4, 1, 1.0) == pytest.approx(1 - 0.3**4, abs=1e-15)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            eval_cloning([], 1500, 1.0)

    @given(st.lists(st.sampled_from(sorted(PRESETS)), min_size=1, max_size=6), st.floats(0, 1500))
    @settings(max_examples=100, deadline=None)
    def test_equals_enumeration(self, names, x):
        curves = curves_for([PRESETS[n] for n in names])
        alloc = AllocationVector((1.0,) * len(names), decode_min=1.0)
        assert eval_cloning(curves, 1500, x) == pytest.approx(eval_weighted(curves, alloc, 1500, x), abs=1e-12)


class TestKofN:
    def test_k1_is_cloning(self):
        curves = curves_for([PRESETS["UMTS"], PRESETS["GPRS"]])
        for x in (300.0, 500.0, 800.0):
            assert eval_k_of_n(curves, 1, 1500, x) == pytest.approx(eval_cloning(curves, 1500, x), abs=1e-15)

    def test_binomial_arithmetic(self):
        assert k_of_n_binomial(0.9, 2, 3) == pytest.approx(0.972, abs=1e-15)
        assert eval_k_of_n([flat(0.9)] * 3, 2, 30, 1.0) == pytest.approx(0.972, abs=1e-15)

    def test_heterogeneous_rejects_closed_form(self):
        curves = curves_for([PRESETS[n] for n in ("LTE", "HSDPA", "UMTS", "EDGE", "GPRS")])
        with pytest.raises(NotIdentical):
            eval_k_of_n_identical(curves, 2, 1500, 400.0)
        assert 0 < eval_k_of_n(curves, 2, 1500, 400.0) < 1

    @pytest.mark.parametrize("k,n", [(0, 3), (4, 3)])
    def test_invalid_k(self, k, n):
        with pytest.raises(InvalidK):
            eval_k_of_n([flat(0.5)] * n, k, 10, 1.0)

    @given(st.integers(1, 10), st.data(), st.floats(0, 1200))
    @settings(max_examples=150, deadline=None)
    def test_identical_closed_form(self, n, data, x):
        k = data.draw(st.integers(1, n))
        prof = data.draw(st.sampled_from(sorted(PRESETS)))
        curves = curves_for([PRESETS[prof]] * n)
        assert eval_k_of_n(curves, k, 1500, x) == pytest.approx(eval_k_of_n_identical(curves, k, 1500, x), abs=1e-12)


@pytest.mark.parametrize(
    "gamma,expected", [(0.5, (75, 750)), (0.0, (0, 0)), (1.05, (158, 1580)), (1 / 3, (50, 500))]
)
def test_fragment_plan(gamma, expected):
    assert fragment_plan(AllocationVector((gamma,)), 1500, 10) == [expected]


def test_fragment_plan_rejects_nonpositive_size():
    with pytest.raises(DomainError):
        fragment_plan(AllocationVector((0.5,)), 1500, 0)


def test_allocation_bounds():
    with pytest.raises(DomainError):
        AllocationVector((1.2,))
    with pytest.raises(DimensionMismatch):
        AllocationVector(())
    assert AllocationVector((0.5, 0.55)).feasible
    assert not AllocationVector((0.5, 0.5)).feasible


def test_parse_strategy():
    assert parse_strategy("cloning") == Cloning()
    assert parse_strategy("kofn:3") == KofN(3)
    w = parse_strategy("weighted:0.5,0.55", decode_min=1.05)
    assert isinstance(w, Weighted) and w.alloc.gamma == (0.5, 0.55) and w.alloc.decode_min == 1.05
    assert str(parse_strategy(str(w))) == str(w)
    for bad in ("nope", "kofn:x", "weighted:a,b"):
        with pytest.raises(DomainError):
            parse_strategy(bad)


lat_values = st.one_of(st.just(math.inf), st.floats(0, 100).map(lambda v: round(v, 2)))


@given(st.integers(1, 4), st.data())
@settings(max_examples=300, deadline=None)
def test_decode_latency_equals_subset_minimum(n, data):
    gam = data.draw(st.lists(st.sampled_from([0.0, 0.25, 1 / 3, 0.5, 0.7, 1.0, 1.05]), min_size=n, max_size=n))
    tau = data.draw(st.sampled_from([1.0, 1.05]))
    rows = data.draw(st.lists(st.lists(lat_values, min_size=n, max_size=n), min_size=1, max_size=5))
    alloc = AllocationVector(tuple(gam), decode_min=tau)
    got = decode_latency(np.array(rows), alloc)
    for row, value in zip(rows, got):
        assert value == subset_decode_time(row, gam, tau)
