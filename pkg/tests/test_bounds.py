import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nonmarkov.bounds import (
    KET0,
    CollisionFamily,
    CollisionModel,
    collision_candidates,
    collision_hamiltonian,
    collision_step_kraus,
    collision_unitary,
    concurrence,
    entanglement_mixed_approx,
    entanglement_pure,
    eps_separable_membership,
    is_ppt,
    run_collision_model,
    sampled_eps_separable_diameter,
    sampled_separable_diameter,
    separable_diameter,
    solve_alpha,
    trace_entanglement_bounds,
    verify_bound,
    _eps_pure_pool,
    _schedule,
)
from nonmarkov.channels import AmplitudeDampingFamily, PhaseDampingFamily
from nonmarkov.errors import ConfigurationError, ContractError, FreshQubitsExhausted
from nonmarkov.measures import (
    CandidateSet,
    cjks_measure,
    divisible_candidates,
    max_distance_measure,
    measure_curve,
    min_distance_measure,
)
from nonmarkov.quantum import (
    DensityMatrix,
    PureState,
    binary_entropy,
    partial_trace,
    quantum_mutual_information,
    tensor,
    trace_distance,
)
from nonmarkov.sampling import SampleConfig, haar_pure_state, random_two_qubit_state, sample_states

seeds = st.integers(0, 2**32 - 1)
BELL = PureState(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2))


def werner(p):
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    return p * np.outer(singlet, singlet) + (1 - p) * np.eye(4) / 4


def alpha_oracle(eps):
    mpmath.mp.dps = 40
    h = lambda p: -p * mpmath.log(p, 2) - (1 - p) * mpmath.log(1 - p, 2)  # noqa: E731
    p = mpmath.findroot(lambda p: 2 * h(p) - eps, (mpmath.mpf("0.5000001"), mpmath.mpf("0.9999999")), solver="anderson")
    return float(mpmath.sqrt(p))


class TestSolveAlpha:
    def test_endpoints(self):
        assert solve_alpha(0) == 1.0
        assert solve_alpha(2) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_eps_one(self):
        assert solve_alpha(1.0) ** 2 == pytest.approx(0.889972, abs=1e-6)
        assert solve_alpha(1.0) == pytest.approx(alpha_oracle(1.0), abs=1e-10)

    @pytest.mark.parametrize("eps", [0.1, 0.5, 1.5, 1.9])
    def test_matches_oracle(self, eps):
        assert solve_alpha(eps) == pytest.approx(alpha_oracle(eps), abs=1e-10)

    @pytest.mark.parametrize("eps", [-0.1, 2.1, float("nan")])
    def test_range(self, eps):
        with pytest.raises(ValueError):
            solve_alpha(eps)

    @given(st.floats(0.0, 2.0))
    def test_constraint(self, eps):
        a = solve_alpha(eps)
        assert 1 / math.sqrt(2) - 1e-12 <= a <= 1.0
        assert 2 * binary_entropy(a * a) == pytest.approx(eps, abs=1e-9)


class TestCollisionModel:
    def test_unitary_is_exponential(self):
        theta = CollisionModel(0.7).theta
        h = collision_hamiltonian(theta)
        assert np.allclose(h, h.conj().T)
        for e in (0.0, 0.3, 1.0):
            assert np.allclose(collision_unitary(theta, e), expm(1j * e * h), atol=1e-13)

    def test_first_collision_state(self):
        m = CollisionModel(1.0)
        out = m.unitary(1.0) @ np.array([1, 0, 0, 0])
        assert np.allclose(out, [m.alpha, 0, 0, math.sqrt(1 - m.alpha**2)])

    def test_step_kraus_is_reduced_collision(self):
        theta, e = CollisionModel(0.5).theta, 0.6
        rho = random_two_qubit_state(1)
        rho_s = partial_trace(rho, [0]).data
        u = collision_unitary(theta, e)
        joint = u @ np.kron(rho_s, KET0.data) @ u.conj().T
        via_kraus = sum(k @ rho_s @ k.conj().T for k in collision_step_kraus(theta, e))
        assert np.allclose(partial_trace(DensityMatrix(joint, (2, 2), validate=False), [0]).data, via_kraus)

    @pytest.mark.parametrize("eps", [0.0, 0.1, 0.5, 1.0, 2.0])
    def test_mutual_information_capped(self, eps):
        trace = run_collision_model(CollisionModel(eps), 100)
        assert len(trace) == 100
        assert trace.mutual_information.max() <= eps + 1e-9
        assert np.all((0 <= trace.eps1) & (trace.eps1 <= 1))

    def test_first_step_saturates(self):
        trace = run_collision_model(CollisionModel(0.5), 1)
        assert trace.mutual_information[0] == pytest.approx(0.5, abs=1e-9)
        assert trace.eps1[0] == 1.0

    def test_eps_zero_products(self):
        for step in run_collision_model(CollisionModel(0.0), 20).steps:
            a = partial_trace(step.state_se, [0])
            b = partial_trace(step.state_se, [1])
            assert np.allclose(step.state_se.data, np.kron(a.data, b.data), atol=1e-12)

    def test_post_swap_environment_fresh(self):
        for step in run_collision_model(CollisionModel(1.0), 10).steps:
            assert np.allclose(partial_trace(step.post_swap, [1]).data, KET0.data)
            assert np.allclose(partial_trace(step.post_swap, [0]).data, step.state_s.data)

    @given(seeds, st.sampled_from([0.1, 0.5, 1.0, 2.0]))
    def test_any_initial_state(self, seed, eps):
        rho = haar_pure_state(2, seed)
        trace = run_collision_model(CollisionModel(eps), 30, rho)
        assert trace.mutual_information.max() <= eps + 1e-9

    def test_exhaustion(self):
        with pytest.raises(FreshQubitsExhausted):
            run_collision_model(CollisionModel(0.5, n_fresh=10), 11)


class TestCollisionFamily:
    def test_time_zero_is_identity(self):
        snap = CollisionFamily(0.5).snapshot(0.0)
        assert np.allclose(snap.superoperator(), np.eye(4))

    def test_snapshots_are_channels(self):
        fam = CollisionFamily(0.5, tau=0.25)
        for t in np.linspace(0, 10, 11):
            snap = fam.snapshot(t)
            assert np.allclose(sum(k.conj().T @ k for k in snap.kraus), np.eye(2), atol=1e-10)

    def test_matches_stepwise_simulation(self):
        fam = CollisionFamily(1.0, tau=1.0)
        trace = run_collision_model(CollisionModel(1.0), 7)
        out = fam.snapshot(7.0).apply(KET0)
        assert np.allclose(out.data, trace.steps[-1].state_s.data, atol=1e-10)

    @given(seeds, st.sampled_from([0.1, 0.5, 1.0]))
    def test_schedule_respects_epsilon_for_random_inputs(self, seed, eps):
        sched = _schedule(eps)
        sched.extend(60)
        theta = sched.model.theta
        rho = random_two_qubit_state(seed)
        r = partial_trace(rho, [0]).data
        for e in sched.eps1[:60]:
            u = collision_unitary(theta, e)
            joint = u @ np.kron(r, KET0.data) @ u.conj().T
            assert quantum_mutual_information(DensityMatrix(joint, (2, 2), validate=False)) <= eps + 1e-9
            r = partial_trace(DensityMatrix(joint, (2, 2), validate=False), [0]).data

    def test_exhaustion(self):
        with pytest.raises(FreshQubitsExhausted):
            CollisionFamily(0.5, tau=1.0, n_fresh=5).snapshot(6.0)

    def test_candidate_set(self):
        cands = collision_candidates(0.5, [0.1, 0.5])
        assert cands.epsilon == 0.5 and len(cands) == 2
        with pytest.raises(ConfigurationError):
            CandidateSet("x", [CollisionFamily(0.5)], epsilon=0.0)


class TestSeparability:
    @given(seeds, st.floats(0.0, 2.0))
    def test_products_always_yes(self, seed, eps):
        a = random_two_qubit_state(seed)
        prod = tensor(partial_trace(a, [0]), partial_trace(a, [1]))
        assert eps_separable_membership(prod, eps).status == "yes"

    def test_bell_is_no(self):
        v = eps_separable_membership(BELL.projector(), 0.0)
        assert v.status == "no" and v.witness == pytest.approx(-0.5)

    def test_bell_yes_at_two(self):
        assert eps_separable_membership(BELL.projector(), 2.0).status == "yes"

    @pytest.mark.parametrize("p", [1 / 3, 0.2, 0.0])
    def test_werner_separable(self, p):
        rho = werner(p)
        v = eps_separable_membership(rho, 0.0)
        assert v.status == "yes"
        assert v.weights.sum() == pytest.approx(1.0)
        assert len(v.components) <= 16
        assert trace_distance(v.reconstruct(), rho) < 1e-8
        assert v.component_iq().max() <= 1e-9

    def test_werner_entangled(self):
        assert eps_separable_membership(werner(1 / 3 + 1e-3), 0.0).status == "no"

    @given(seeds, st.sampled_from([0.0, 0.3, 0.8, 1.5]))
    def test_yes_certificates_revalidate(self, seed, eps):
        rho = random_two_qubit_state(seed)
        v = eps_separable_membership(rho, eps, budget=30, rng=seed)
        if v.status == "yes":
            assert v.weights.sum() == pytest.approx(1.0)
            assert trace_distance(v.reconstruct(), rho.data) < 1e-8
            assert v.component_iq().max() <= eps + 1e-9
        elif v.status == "no":
            assert eps == 0.0 and not is_ppt(rho)
        else:
            assert eps > 0 or not is_ppt(rho)

    def test_concurrence(self):
        assert concurrence(BELL.projector()) == pytest.approx(1.0)
        assert concurrence(werner(1 / 3)) == pytest.approx(0.0, abs=1e-9)
        assert concurrence(werner(0.8)) == pytest.approx((3 * 0.8 - 1) / 2, abs=1e-9)


class TestEntanglement:
    def test_pure_values(self):
        assert entanglement_pure(PureState([1, 0, 0, 0], (2, 2))) == pytest.approx(0.0, abs=1e-12)
        assert entanglement_pure(BELL) == pytest.approx(1.0)
        a = math.sqrt(0.889972)
        psi = PureState([a, 0, 0, math.sqrt(1 - a * a)], (2, 2), normalize=True)
        assert entanglement_pure(psi) == pytest.approx(binary_entropy(0.110028), abs=1e-9)
        assert entanglement_pure(psi) == pytest.approx(0.5, abs=1e-5)

    def test_mixed_on_separable(self):
        assert entanglement_mixed_approx(werner(0.3)).value == pytest.approx(0.0, abs=1e-3)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_mixed_on_pure(self, seed):
        psi = haar_pure_state(4, seed, (2, 2))
        est = entanglement_mixed_approx(psi.projector())
        assert est.value == pytest.approx(entanglement_pure(psi), abs=1e-2)

    @given(seeds)
    def test_below_mutual_information(self, seed):
        rho = random_two_qubit_state(seed)
        est = entanglement_mixed_approx(rho)
        assert est.value <= quantum_mutual_information(rho) + 1e-9

    def test_variational_restarts(self):
        rho = werner(0.8)
        est = entanglement_mixed_approx(rho, budget=2, rng=0, terms=4)
        assert math.isfinite(est.variational)
        assert est.value <= est.iq_bound + 1e-9

    def test_bell_trace_entanglement(self):
        lo, hi = trace_entanglement_bounds(BELL.projector())
        assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)

    @given(seeds)
    def test_trace_bounds_ordered(self, seed):
        lo, hi = trace_entanglement_bounds(random_two_qubit_state(seed))
        assert 0 <= lo <= hi + 1e-12


class TestDiameter:
    def test_trace(self):
        assert separable_diameter("trace") == 2.0
        assert trace_distance(np.diag([1.0, 0, 0, 0]), np.diag([0, 0, 0, 1.0])) == 2.0

    def test_unsupported(self):
        with pytest.raises(ConfigurationError):
            separable_diameter("relative_entropy")

    def test_sampled_supremum(self):
        d = sampled_separable_diameter(100_000, rng=0)
        assert 1.95 <= d <= 2.0

    @pytest.mark.parametrize("eps", [0.0, 0.5, 2.0])
    def test_eps_pool(self, eps):
        pool = _eps_pure_pool(eps, 200, np.random.default_rng(0))
        iq = [quantum_mutual_information(PureState(v, (2, 2), normalize=True).projector()) for v in pool]
        assert max(iq) <= eps + 1e-9
        assert sampled_eps_separable_diameter(eps, 500, rng=1) <= 2.0


class TestVerifyBound:
    CFG = SampleConfig(seed=4, n_states=60, n_maps=60)

    def test_divisible_probe(self):
        probe = AmplitudeDampingFamily(1.0, 4.0)
        cands = divisible_candidates(probe, self.CFG).union([probe])
        states = sample_states(self.CFG)
        r = max_distance_measure(probe, 0.8, cands, states)
        rep = verify_bound(probe, 0.8, r)
        assert rep.N < 1e-9
        assert rep.slack == pytest.approx(rep.E + rep.d)
        assert rep.holds

    def test_missing_state(self):
        probe = AmplitudeDampingFamily(4.0, 4.0)
        r = cjks_measure(probe, 0.5, divisible_candidates(probe, self.CFG))
        with pytest.raises(ContractError):
            verify_bound(probe, 0.5, r)

    @pytest.mark.parametrize("probe", [AmplitudeDampingFamily(4.0, 4.0), PhaseDampingFamily(2.5)])
    @pytest.mark.parametrize("mode_fn", [max_distance_measure, min_distance_measure])
    def test_chain(self, probe, mode_fn):
        cands = divisible_candidates(probe, self.CFG)
        states = sample_states(self.CFG)
        for t in np.linspace(0.05, 4, 9):
            rep = verify_bound(probe, t, mode_fn(probe, t, cands, states))
            assert rep.holds and rep.chain_holds
            assert rep.E <= rep.E_upper + 1e-12

    def test_custom_dilation(self):
        probe = PhaseDampingFamily(2.5)
        cands = divisible_candidates(probe, self.CFG)
        r = max_distance_measure(probe, 1.0, cands, sample_states(self.CFG))
        calls = []

        def dil(p, t, rho):
            calls.append(t)
            return p.dilate(t, rho)

        verify_bound(probe, 1.0, r, dilation=dil)
        assert calls == [1.0]

    def test_epsilon_collision_candidates(self):
        probe = AmplitudeDampingFamily(4.0, 4.0)
        cands = divisible_candidates(probe, self.CFG).union(collision_candidates(0.5, [0.05, 0.2, 1.0]))
        assert cands.epsilon == 0.5
        states = sample_states(self.CFG)
        results = measure_curve(probe, np.linspace(0.1, 3, 6), cands, states)
        for r in results:
            rep = verify_bound(probe, r.time, r, d_samples=300, rng=0)
            assert rep.epsilon == 0.5 and rep.d_samples == 300
            assert rep.d <= rep.d_exact
            assert rep.holds
