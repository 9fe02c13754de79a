import math
from dataclasses import dataclass

import numpy as np
import pytest

from nonmarkov.channels import AmplitudeDampingFamily, ChannelSnapshot, PhaseDampingFamily
from nonmarkov.errors import ConfigurationError
from nonmarkov.measures import (
    CandidateSet,
    certified_epsilon,
    cjks_measure,
    curve_values,
    decay_plateau_revival,
    distance_table,
    divisible_candidates,
    max_distance_measure,
    measure_curve,
    min_distance_measure,
)
from nonmarkov.quantum import choi_state, relative_entropy, trace_distance
from nonmarkov.sampling import SampleConfig, sample_states

CFG = SampleConfig(seed=3, n_states=40, n_maps=40)
STATES = sample_states(CFG)
AD44 = AmplitudeDampingFamily(4.0, 4.0)


@dataclass(frozen=True)
class Reset:
    """Test candidate: everything goes to |0><0|."""

    certified_epsilon = 0.0
    param = -1.0

    def snapshot(self, t):
        return ChannelSnapshot((np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]])), t)


def ad_set(*gammas, lam=4.0):
    return CandidateSet("amplitude_damping", [AmplitudeDampingFamily(g, lam) for g in gammas])


class TestCandidateSet:
    def test_rejects_non_divisible_member(self):
        with pytest.raises(ConfigurationError):
            ad_set(1.0, 3.0)

    def test_rejects_empty(self):
        with pytest.raises(ConfigurationError):
            CandidateSet("x", [])

    def test_certified_epsilon(self):
        assert certified_epsilon(AmplitudeDampingFamily(1.0, 4.0)) == 0.0
        assert certified_epsilon(AD44) is None
        assert certified_epsilon(PhaseDampingFamily(1.5)) == 0.0
        assert certified_epsilon(object()) is None

    def test_union(self):
        u = ad_set(1.0).union(ad_set(0.5))
        assert len(u) == 2

    def test_sampled_set(self):
        cands = divisible_candidates(AD44, CFG)
        assert len(cands) == CFG.n_maps
        assert all(m.lam == 4.0 for m in cands)


class TestSelfContained:
    @pytest.mark.parametrize("probe", [AmplitudeDampingFamily(1.3, 4.0), PhaseDampingFamily(1.5)])
    @pytest.mark.parametrize("mode", ["max", "min", "cjks"])
    def test_divisible_probe_scores_zero(self, probe, mode):
        cands = divisible_candidates(probe, CFG).union([probe])
        t = np.linspace(0, 5, 11)
        values = curve_values(measure_curve(probe, t, cands, STATES, mode=mode))
        assert np.all(values < 1e-9)


class TestAgainstBruteForce:
    @pytest.mark.parametrize("t", [0.9, 3 * math.pi / 8])
    def test_max_and_min(self, t):
        cands = ad_set(0.3, 1.0, 1.7)
        table = np.array(
            [[trace_distance(AD44.snapshot(t).apply(s), m.snapshot(t).apply(s)) for s in STATES] for m in cands]
        )
        assert np.allclose(distance_table(AD44, t, cands, STATES), table, atol=1e-12)
        rmax = max_distance_measure(AD44, t, cands, STATES)
        assert rmax.value == pytest.approx(table.max(axis=1).min(), abs=1e-12)
        assert rmax.candidate_index == int(np.argmin(table.max(axis=1)))
        assert rmax.state_index == int(np.argmax(table[rmax.candidate_index]))
        rmin = min_distance_measure(AD44, t, cands, STATES)
        assert rmin.value == pytest.approx(table.min(), abs=1e-12)
        assert np.allclose(rmin.probe_state.data, STATES[rmin.state_index].data)

    def test_cjks(self):
        cands = ad_set(0.3, 1.0, 1.7)
        t = 0.9
        ref = [trace_distance(choi_state(AD44.snapshot(t)), choi_state(m.snapshot(t))) for m in cands]
        r = cjks_measure(AD44, t, cands)
        assert r.value == pytest.approx(min(ref), abs=1e-12)
        assert r.probe_state is None

    def test_relative_entropy_backend(self):
        cands = ad_set(0.3, 1.7)
        t = 0.5
        ref = [[relative_entropy(AD44.snapshot(t).apply(s), m.snapshot(t).apply(s)) for s in STATES] for m in cands]
        r = max_distance_measure(AD44, t, cands, STATES, distance="relative_entropy")
        assert r.value == pytest.approx(np.min(np.max(ref, axis=1)), rel=1e-9)


class TestSemantics:
    @pytest.mark.parametrize("t", [0.2, 0.6, 1.2, 2.0])
    def test_min_below_max(self, t):
        cands = divisible_candidates(AD44, CFG)
        assert min_distance_measure(AD44, t, cands, STATES).value <= max_distance_measure(AD44, t, cands, STATES).value

    def test_ties_resolve_to_lowest_index(self):
        fam = AmplitudeDampingFamily(1.0, 4.0)
        cands = CandidateSet("amplitude_damping", [fam, fam, fam])
        for mode_fn in (max_distance_measure, min_distance_measure):
            assert mode_fn(AD44, 0.7, cands, STATES).candidate_index == 0
        assert cjks_measure(AD44, 0.7, cands).candidate_index == 0

    def test_more_candidates_never_hurt(self):
        small = ad_set(1.0)
        big = small.union(divisible_candidates(AD44, CFG))
        for t in (0.3, 1.0):
            assert max_distance_measure(AD44, t, big, STATES).value <= max_distance_measure(AD44, t, small, STATES).value

    def test_infinite_relative_entropy_excluded(self):
        cands = CandidateSet("mixed", [Reset(), AmplitudeDampingFamily(1.0, 4.0)])
        r = max_distance_measure(AD44, 0.5, cands, STATES, distance="relative_entropy")
        assert r.candidate_index == 1 and math.isfinite(r.value)

    def test_all_infinite(self):
        cands = CandidateSet("reset", [Reset()])
        assert max_distance_measure(AD44, 0.5, cands, STATES, distance="relative_entropy").value == math.inf

    def test_threads_match_serial(self):
        cands = divisible_candidates(AD44, CFG)
        t = np.linspace(0, 3, 9)
        a = curve_values(measure_curve(AD44, t, cands, STATES, workers=1))
        b = curve_values(measure_curve(AD44, t, cands, STATES, workers=3))
        assert np.array_equal(a, b)

    def test_nonzero_for_non_divisible_probe(self):
        cands = divisible_candidates(AD44, CFG)
        values = curve_values(measure_curve(AD44, np.linspace(0, 3, 13), cands, STATES))
        assert np.any(values > 1e-3)

    @pytest.mark.parametrize(
        "kwargs",
        [{"mode": "median"}, {"distance": "fidelity"}],
    )
    def test_bad_options(self, kwargs):
        with pytest.raises(ConfigurationError):
            measure_curve(AD44, [0.1], ad_set(1.0), STATES, **kwargs)

    def test_empty_states(self):
        with pytest.raises(ConfigurationError):
            max_distance_measure(AD44, 0.1, ad_set(1.0), [])


class TestProperties:
    def test_more_states_never_lower_max(self):
        cands = divisible_candidates(AD44, CFG)
        for t in (0.4, 1.5):
            few = max_distance_measure(AD44, t, cands, STATES[:10]).value
            assert max_distance_measure(AD44, t, cands, STATES).value >= few

    def test_min_below_max_random_configurations(self):
        rng = np.random.default_rng(9)
        for k in range(100):
            lam = rng.uniform(0.5, 8)
            probe = AmplitudeDampingFamily(rng.uniform(0.1, 5) * lam, lam)
            cfg = SampleConfig(seed=k, n_states=8, n_maps=8)
            cands = divisible_candidates(probe, cfg)
            states = sample_states(cfg)
            t = rng.uniform(0, 3)
            assert min_distance_measure(probe, t, cands, states).value <= max_distance_measure(probe, t, cands, states).value

    def test_data_processing_on_dilations(self):
        rng = np.random.default_rng(10)
        cands = divisible_candidates(AD44, CFG)
        for _ in range(100):
            j, i = rng.integers(len(cands)), rng.integers(len(STATES))
            t = rng.uniform(0, 3)
            rho = STATES[i]
            d_s = trace_distance(AD44.snapshot(t).apply(rho), cands[j].snapshot(t).apply(rho))
            d_se = trace_distance(AD44.dilate(t, rho), cands[j].dilate(t, rho))
            assert d_s <= d_se + 1e-12

    def test_cjks_zero_at_start(self):
        assert cjks_measure(AD44, 0.0, divisible_candidates(AD44, CFG)).value == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("mode", ["max", "min", "cjks"])
    def test_value_range(self, mode):
        cands = divisible_candidates(PhaseDampingFamily(2.8), CFG)
        for r in measure_curve(PhaseDampingFamily(2.8), np.linspace(0, 8, 9), cands, STATES, mode=mode):
            assert -1e-9 <= r.value <= 2.0


class TestPlateau:
    def test_shape(self):
        t = np.arange(8.0)
        v = np.array([0, 0.5, 0.1, 1e-4, 1e-5, 2e-4, 0.01, 0.2])
        assert decay_plateau_revival(t, v) == (3.0, 6.0)

    def test_no_revival(self):
        assert decay_plateau_revival([0, 1, 2], [0, 1, 0]) == (2.0, None)

    def test_never_above(self):
        assert decay_plateau_revival([0, 1], [0, 0]) == (None, None)
