import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from avgfid.channels import (
    BudgetError,
    amplitude_damping_channel,
    depolarizing_channel,
    random_channel,
    remix,
    tensor_power,
    unitary_channel,
)
from avgfid.fidelity import (
    DegenerateAcceptanceError,
    FidelityReport,
    SubspaceSelector,
    acceptance_probability,
    avg_kraus,
    avg_quadratic_form,
    avg_subspace,
    avg_unitary,
    composite_bruteforce_check,
    composite_fidelity,
    conditional_fidelity,
    worst_case_unitary,
)
from avgfid.haar import (
    estimate,
    expectation,
    mc_quadratic_form_average,
    sample_haar_states,
    sample_values,
)
from avgfid.linalg import NotUnitaryError, ShapeError, random_matrix, random_unitary

from conftest import SX, leakage_unitary

N = 100_000


def phase_gate(phi):
    return np.diag([1, np.exp(1j * phi)])


def embedded_mc(integrand, n_rel, n, seed, samples=N):
    """Monte Carlo over states supported on the first n_rel basis vectors of C^n."""

    def f(states):
        full = np.zeros((states.shape[0], n), dtype=complex)
        full[:, :n_rel] = states
        return integrand(full)

    return estimate(sample_values(f, n_rel, samples, seed), seed)


def sampled_min(m, samples, seed):
    return float(np.min(sample_values(lambda s: np.abs(expectation(s, m)) ** 2, m.shape[0], samples, seed)))


class TestQuadraticForm:
    @pytest.mark.parametrize("n", [1, 2, 3, 7])
    def test_identity(self, n):
        assert avg_quadratic_form(np.eye(n)) == pytest.approx(1, abs=1e-15)

    def test_projector(self):
        assert avg_quadratic_form(np.diag([1, 0])) == pytest.approx(1 / 3, abs=1e-15)

    def test_random_4x4_against_mc(self, rng):
        m = random_matrix(4, rng)
        assert mc_quadratic_form_average(m, N, seed=17).agrees_with(avg_quadratic_form(m))

    def test_non_square(self):
        with pytest.raises(ShapeError):
            avg_quadratic_form(np.ones((2, 3)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_conjugation_invariance(self, n, seed):
        r = np.random.default_rng(seed)
        m, v = random_matrix(n, r), random_unitary(n, r)
        assert avg_quadratic_form(v @ m @ v.conj().T) == pytest.approx(avg_quadratic_form(m), abs=1e-12 * (1 + avg_quadratic_form(m)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_hermitian_antihermitian_additivity(self, n, seed):
        r = np.random.default_rng(seed)
        s = random_matrix(n, r, "hermitian")
        a = random_matrix(n, r, "antihermitian")
        total = avg_quadratic_form(s + a)
        assert total == pytest.approx(avg_quadratic_form(s) + avg_quadratic_form(a), abs=1e-12 * (1 + total))


class TestUnitary:
    def test_identical(self, rng):
        u = random_unitary(3, rng)
        assert avg_unitary(u, u).mean_fidelity == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("phi", [0.3, np.pi / 2, 2.0, np.pi])
    def test_phase_gate(self, phi):
        expected = (2 + np.cos(phi)) / 3
        got = avg_unitary(np.eye(2), phase_gate(phi)).mean_fidelity
        assert got == pytest.approx(expected, abs=1e-12)
        assert mc_quadratic_form_average(phase_gate(phi), N, seed=int(phi * 100)).agrees_with(expected)

    def test_phase_pi_is_third(self):
        assert avg_unitary(np.eye(2), phase_gate(np.pi)).mean_fidelity == pytest.approx(1 / 3, abs=1e-12)

    def test_pauli_x(self):
        assert avg_unitary(np.eye(2), SX).mean_fidelity == pytest.approx(1 / 3, abs=1e-15)
        assert mc_quadratic_form_average(SX, N, seed=31).agrees_with(1 / 3)

    def test_global_phase(self, rng):
        for _ in range(10):
            u0, u = random_unitary(3, rng), random_unitary(3, rng)
            alpha = rng.uniform(0, 2 * np.pi)
            a = avg_unitary(u0, np.exp(1j * alpha) * u).mean_fidelity
            assert a == pytest.approx(avg_unitary(u0, u).mean_fidelity, abs=1e-12)
            assert avg_unitary(u0, np.exp(1j * alpha) * u0).mean_fidelity == pytest.approx(1, abs=1e-12)

    def test_bounds(self, rng):
        for n in (2, 3, 5):
            for _ in range(20):
                f = avg_unitary(random_unitary(n, rng), random_unitary(n, rng)).mean_fidelity
                assert 1 / (n + 1) - 1e-12 <= f <= 1 + 1e-12

    def test_errors(self):
        with pytest.raises(NotUnitaryError):
            avg_unitary(np.eye(2), np.diag([1, 0.5]))
        with pytest.raises(ShapeError):
            avg_unitary(np.eye(2), np.eye(3))


class TestWorstCase:
    def test_identical(self, rng):
        u = random_unitary(3, rng)
        assert worst_case_unitary(u, u) == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("phi", [np.pi / 4, np.pi / 2, 2.5, np.pi])
    def test_qubit_phase(self, phi):
        expected = np.cos(phi / 2) ** 2
        assert worst_case_unitary(np.eye(2), phase_gate(phi)) == pytest.approx(expected, abs=1e-12)
        # independent check: min over sampled states, which can only overshoot
        sampled = sampled_min(phase_gate(phi), N, seed=3)
        assert expected - 1e-12 <= sampled <= expected + 1e-3

    def test_origin_inside(self):
        u = np.diag(np.exp(1j * np.array([0, 2 * np.pi / 3, 4 * np.pi / 3])))
        assert worst_case_unitary(np.eye(3), u) == 0.0

    def test_dominated_by_mean(self, rng):
        for n in (2, 3, 4):
            for _ in range(15):
                u0, u = random_unitary(n, rng), random_unitary(n, rng)
                assert worst_case_unitary(u0, u) <= avg_unitary(u0, u).mean_fidelity + 1e-12

    def test_equal_when_phases_coincide(self, rng):
        u0 = random_unitary(3, rng)
        u = np.exp(0.7j) * u0
        assert worst_case_unitary(u0, u) == pytest.approx(avg_unitary(u0, u).mean_fidelity, abs=1e-12)


class TestSubspace:
    @pytest.mark.parametrize("theta", [0.0, 0.4, np.pi / 2, np.pi, 5.0])
    def test_auxiliary_phase_ignored(self, theta):
        u = np.diag([1, 1, np.exp(1j * theta)])
        assert avg_subspace(np.eye(3), u, [0, 1]).mean_fidelity == pytest.approx(1, abs=1e-12)

    def test_full_space_is_pessimistic(self):
        u = np.diag([1, 1, -1])
        assert avg_unitary(np.eye(3), u).mean_fidelity == pytest.approx((3 + 1) / 12, abs=1e-12)

    @pytest.mark.parametrize("theta", [0.3, 1.0, np.pi / 2, 2.5])
    def test_leakage(self, theta):
        c = np.cos(theta)
        expected = (1 + c**2 + (1 + c) ** 2) / 6
        u = leakage_unitary(theta)
        assert avg_subspace(np.eye(3), u, [0, 1]).mean_fidelity == pytest.approx(expected, abs=1e-12)
        est = embedded_mc(lambda s: np.abs(expectation(s, u)) ** 2, 2, 3, seed=int(theta * 10))
        assert est.agrees_with(expected)

    def test_leakage_acceptance(self):
        for theta in (0.3, 1.0, 2.5):
            c2 = np.cos(theta) ** 2
            expected = (1 + c2**2 + (1 + c2) ** 2) / 6
            u = leakage_unitary(theta)
            assert acceptance_probability(u, [0, 1]) == pytest.approx(expected, abs=1e-12)
            p = np.diag([1, 1, 0])

            # per state, acceptance is <psi|U^dag P U|psi>; the average squares it
            def f(states):
                return np.abs(expectation(states, u.conj().T @ p @ u)) ** 2

            assert embedded_mc(f, 2, 3, seed=int(theta * 10) + 1).agrees_with(expected)

    def test_acceptance_no_leakage(self, rng):
        u = np.zeros((3, 3), dtype=complex)
        u[:2, :2] = random_unitary(2, rng)
        u[2, 2] = np.exp(0.3j)
        assert acceptance_probability(u, [0, 1]) == pytest.approx(1, abs=1e-12)

    def test_acceptance_at_right_angle(self):
        assert acceptance_probability(leakage_unitary(np.pi / 2), [0, 1]) == pytest.approx(1 / 3, abs=1e-12)

    def test_bounds(self, rng):
        for _ in range(20):
            u0, u = random_unitary(4, rng), random_unitary(4, rng)
            f = avg_subspace(u0, u, [1, 3]).mean_fidelity
            q = acceptance_probability(u, [1, 3])
            assert 0 <= f <= 1 and 0 <= q <= 1

    def test_selector_validation(self):
        with pytest.raises(ValueError):
            SubspaceSelector(3, (1, 0))
        with pytest.raises(ValueError):
            SubspaceSelector(3, (0, 3))
        with pytest.raises(ValueError):
            SubspaceSelector(3, ())
        with pytest.raises(ShapeError):
            avg_subspace(np.eye(3), np.eye(3), SubspaceSelector(4, (0, 1)))

    def test_projector(self):
        p = SubspaceSelector(4, (0, 2)).projector()
        np.testing.assert_array_equal(p @ p, p)
        np.testing.assert_array_equal(p, p.conj().T)


class TestConditional:
    def test_no_leakage(self, rng):
        u = np.zeros((3, 3), dtype=complex)
        u[:2, :2] = random_unitary(2, rng)
        u[2, 2] = 1
        rep = conditional_fidelity(u, u, [0, 1])
        assert rep.conditional == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("theta", [0.3, 1.2])
    def test_leakage_ratio(self, theta):
        c = np.cos(theta)
        f = (1 + c**2 + (1 + c) ** 2) / 6
        q = (1 + c**4 + (1 + c**2) ** 2) / 6
        rep = conditional_fidelity(np.eye(3), leakage_unitary(theta), [0, 1])
        assert rep.mean_fidelity == pytest.approx(f, abs=1e-12)
        assert rep.acceptance_q == pytest.approx(q, abs=1e-12)
        assert rep.conditional == pytest.approx(f / q, abs=1e-12)

    def test_right_angle_restores_unit_fidelity(self):
        rep = conditional_fidelity(np.eye(3), leakage_unitary(np.pi / 2), [0, 1])
        assert rep.mean_fidelity == pytest.approx(1 / 3, abs=1e-12)
        assert rep.acceptance_q == pytest.approx(1 / 3, abs=1e-12)
        assert rep.conditional == pytest.approx(1, abs=1e-12)

    def test_degenerate(self):
        swap = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)
        with pytest.raises(DegenerateAcceptanceError):
            conditional_fidelity(np.eye(3), swap, [0])


class TestKraus:
    @pytest.mark.parametrize("p", [0.0, 0.3, 0.7, 1.0])
    def test_depolarizing(self, p):
        assert avg_kraus(np.eye(2), depolarizing_channel(p)).mean_fidelity == pytest.approx((1 + p) / 2, abs=1e-12)

    @pytest.mark.parametrize("gt", [0.0, 0.5, 2.0])
    def test_decay(self, gt):
        expected = (3 + np.exp(-gt) + 2 * np.exp(-gt / 2)) / 6
        assert avg_kraus(np.eye(2), amplitude_damping_channel(gt)).mean_fidelity == pytest.approx(expected, abs=1e-12)

    def test_single_unitary(self, rng):
        u = random_unitary(3, rng)
        assert avg_kraus(u, unitary_channel(u)).mean_fidelity == pytest.approx(1, abs=1e-12)

    def test_reduces_to_unitary_case(self, rng):
        u0, u = random_unitary(3, rng), random_unitary(3, rng)
        assert avg_kraus(u0, unitary_channel(u)).mean_fidelity == pytest.approx(
            avg_unitary(u0, u).mean_fidelity, abs=1e-12
        )

    def test_remix_invariance(self, rng):
        for _ in range(10):
            m = int(rng.integers(1, 5))
            ch = random_channel(3, m, rng)
            u0 = random_unitary(3, rng)
            a = avg_kraus(u0, ch).mean_fidelity
            b = avg_kraus(u0, remix(ch, random_unitary(m, rng))).mean_fidelity
            assert abs(a - b) <= 1e-12

    def test_bounds(self, rng):
        for n in (2, 3):
            for _ in range(20):
                f = avg_kraus(random_unitary(n, rng), random_channel(n, 3, rng)).mean_fidelity
                assert 1 / (n + 1) - 1e-12 <= f <= 1 + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            avg_kraus(np.eye(3), depolarizing_channel(0.5))


class TestComposite:
    @pytest.mark.parametrize("n,k", [(2, 1), (2, 7), (3, 4), (5, 2)])
    def test_endpoints(self, n, k):
        assert composite_fidelity(n, k, 1.0) == 1.0
        assert composite_fidelity(n, k, 1 / (n + 1)) == 1 / (n**k + 1)

    def test_substitution(self):
        assert composite_fidelity(2, 2, 0.9) == pytest.approx((1 + 1.7**2) / 5, abs=1e-15)
        assert (1 + 1.7**2) / 5 == pytest.approx(0.778, abs=1e-12)

    def test_substitution_by_brute_force(self):
        ch = depolarizing_channel(0.8)
        assert avg_kraus(np.eye(2), ch).mean_fidelity == pytest.approx(0.9, abs=1e-15)
        brute, law = composite_bruteforce_check(ch, 2)
        assert brute == pytest.approx(0.778, abs=1e-12)
        assert law == pytest.approx(brute, abs=1e-10)

    def test_depolarizing_k2(self):
        brute, law = composite_bruteforce_check(depolarizing_channel(0.7), 2)
        assert brute == pytest.approx(0.6805, abs=1e-12)
        assert law == pytest.approx(0.6805, abs=1e-12)

    def test_unitary_k3(self, rng):
        brute, law = composite_bruteforce_check(unitary_channel(np.eye(2)), 3)
        assert brute == pytest.approx(1, abs=1e-12) and law == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("k", [2, 3])
    def test_decay(self, k):
        brute, law = composite_bruteforce_check(amplitude_damping_channel(0.5), k)
        assert abs(brute - law) <= 1e-10

    def test_qutrit_random_channel(self, rng):
        brute, law = composite_bruteforce_check(random_channel(3, 2, rng), 2)
        assert abs(brute - law) <= 1e-10

    def test_budget(self):
        with pytest.raises(BudgetError):
            composite_bruteforce_check(depolarizing_channel(0.5), 7)

    def test_asymptotic(self):
        f = 1 - 1e-3
        c = composite_fidelity(2, 100, f)
        assert abs(c - f**150) / c <= 2e-3

    def test_first_order_expansion(self):
        eps = 1e-7
        for n, k in [(2, 3), (3, 4)]:
            nk = n**k
            linear = 1 - nk / (nk + 1) * (n + 1) / n * k * eps
            assert composite_fidelity(n, k, 1 - eps) == pytest.approx(linear, abs=1e-11)
            assert composite_fidelity(n, k, 1 - eps) < (1 - eps) ** k

    def test_large_k_no_overflow(self):
        f = composite_fidelity(2, 5000, 0.9999)
        assert 0 < f < 1 and np.isfinite(f)
        assert composite_fidelity(2, 5000, 1.0) == pytest.approx(1.0, abs=1e-12)
        assert composite_fidelity(3, 2000, 0.25) >= 0

    def test_large_k_matches_direct_formula(self):
        for k in (60, 200, 900):
            direct = (1 + (3 * 0.95 - 1) ** k) / (2.0**k + 1)
            assert composite_fidelity(2, k, 0.95) == pytest.approx(direct, rel=1e-12)

    def test_range(self):
        assert composite_fidelity(2, 3, 1 + 1e-13) == 1.0
        with pytest.raises(ValueError):
            composite_fidelity(2, 3, 1.001)
        with pytest.raises(ValueError):
            composite_fidelity(2, 3, 0.3)
        with pytest.raises(ValueError):
            composite_fidelity(1, 3, 0.9)


def test_report_invariants():
    with pytest.raises(ValueError):
        FidelityReport(1.5, "unitary", 2)
    with pytest.raises(ValueError):
        FidelityReport(0.2, "kraus", 2)
    with pytest.raises(ValueError):
        FidelityReport(0.5, "subspace", 2, conditional=1.0)
    with pytest.raises(ValueError):
        FidelityReport(0.5, "other", 2)
    FidelityReport(0.2, "subspace", 2)
