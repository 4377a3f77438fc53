import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from spacetimeq import channels, linalg, pdm
from spacetimeq.channels import depolarizing, identity_channel, random_channel, unitary_channel
from spacetimeq.linalg import I2, PAULIS, X, Y, Z, dag
from spacetimeq.pdm import (
    PDM,
    TemporalProcess,
    UndefinedPostselectionError,
    build_pdm,
    build_postselected_pdm,
    causality_monotone,
    classify,
    ctc_probability,
    ctc_probability_via_projection,
    event_correlation,
    expectation_from_pdm,
    marginal,
    postselected_correlation,
    tetrahedron_point,
)

KET0 = np.array([1, 0], dtype=complex)
ZERO = np.outer(KET0, KET0.conj())
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SWAP = 0.5 * sum(linalg.tensor(p, p) for p in PAULIS)

TWO_TIME_ZERO = np.array(
    [[1, 0, 0, 0], [0, 0, 0.5, 0], [0, 0.5, 0, 0], [0, 0, 0, 0]], dtype=complex
)


def zero_process():
    return TemporalProcess(ZERO, [identity_channel()])


def mixed_process():
    return TemporalProcess(I2 / 2, [identity_channel()])


class TestEventCorrelation:
    def test_zero_state_zz(self):
        assert abs(event_correlation(zero_process(), (3, 3)) - 1.0) < 1e-14

    def test_zero_state_xy(self):
        assert abs(event_correlation(zero_process(), (1, 2))) < 1e-14

    def test_zero_state_table(self):
        # nonzero correlations of |0> with identity evolution: II, XX, YY, ZZ, ZI, IZ
        nonzero = {(0, 0), (1, 1), (2, 2), (3, 3), (3, 0), (0, 3)}
        for i in range(4):
            for j in range(4):
                val = event_correlation(zero_process(), (i, j))
                target = 1.0 if (i, j) in nonzero else 0.0
                assert abs(val - target) < 1e-14, (i, j, val)

    def test_unitary_closed_form(self):
        for seed in range(20):
            u = linalg.haar_random_unitary(2, seed)
            proc = TemporalProcess(I2 / 2, [unitary_channel(u)])
            for i in (1, 2, 3):
                for j in (1, 2, 3):
                    got = event_correlation(proc, (i, j))
                    want = 0.5 * np.real(np.trace(PAULIS[j] @ u @ PAULIS[i] @ dag(u)))
                    assert abs(got - want) < 1e-12

    def test_hadamard_zx(self):
        proc = TemporalProcess(I2 / 2, [unitary_channel(HADAMARD)])
        assert abs(event_correlation(proc, (3, 1)) - 1.0) < 1e-12

    def test_values_in_range(self):
        for seed in range(10):
            proc = TemporalProcess(
                linalg.random_density_matrix(2, seed), [random_channel(2, 2, seed)]
            )
            for i in range(4):
                for j in range(4):
                    assert abs(event_correlation(proc, (i, j))) <= 1.0 + 1e-10

    def test_wrong_arity(self):
        with pytest.raises(ValueError):
            event_correlation(zero_process(), (3, 3, 3))


class TestBuildPdm:
    def test_zero_state_matrix(self):
        r = build_pdm(zero_process())
        assert_allclose(r.matrix, TWO_TIME_ZERO, atol=1e-12)
        assert_allclose(
            linalg.hermitian_eigenvalues(r.matrix), [-0.5, 0.0, 0.5, 1.0], atol=1e-12
        )

    def test_mixed_state_is_half_swap(self):
        r = build_pdm(mixed_process())
        assert_allclose(r.matrix, SWAP / 2, atol=1e-12)

    def test_spacelike_product(self):
        rho_a = linalg.random_density_matrix(2, 0)
        rho_b = linalg.random_density_matrix(2, 1)
        proc = TemporalProcess(linalg.tensor(rho_a, rho_b))
        r = build_pdm(proc)
        assert_allclose(r.matrix, linalg.tensor(rho_a, rho_b), atol=1e-12)
        # spacelike pseudo-density matrices are genuinely positive
        assert linalg.hermitian_eigenvalues(r.matrix).min() >= -1e-12

    def test_hermitian_unit_trace_random(self):
        for seed in range(100):
            proc = TemporalProcess(
                linalg.random_density_matrix(2, seed), [random_channel(2, 2, seed + 1000)]
            )
            r = build_pdm(proc)
            assert linalg.is_hermitian(r.matrix, atol=1e-10)
            assert abs(np.trace(r.matrix) - 1.0) < 1e-10

    @pytest.mark.parametrize("n_events", [2, 3])
    def test_reproduces_correlations(self, n_events):
        proc = TemporalProcess(
            linalg.random_density_matrix(2, 7),
            [random_channel(2, 2, 70 + k) for k in range(n_events - 1)],
        )
        r = build_pdm(proc)
        for combo in itertools.product(range(4), repeat=n_events):
            got = expectation_from_pdm(r, combo)
            want = event_correlation(proc, combo)
            assert abs(got - want) < 1e-10, combo


class TestExpectation:
    def test_half_swap_xx(self):
        r = PDM(n_events=2, qubits_per_event=1, matrix=SWAP / 2)
        assert abs(expectation_from_pdm(r, (1, 1)) - 1.0) < 1e-12

    def test_zero_state_zi(self):
        r = build_pdm(zero_process())
        assert abs(expectation_from_pdm(r, (3, 0)) - 1.0) < 1e-12

    def test_unit_trace_via_identities(self):
        r = build_pdm(mixed_process())
        assert abs(expectation_from_pdm(r, (0, 0)) - 1.0) < 1e-12


class TestMarginal:
    def test_zero_state(self):
        r = build_pdm(zero_process())
        assert_allclose(marginal(r, 0), ZERO, atol=1e-12)

    def test_half_swap_marginals(self):
        r = build_pdm(mixed_process())
        for event in (0, 1):
            assert_allclose(marginal(r, event), I2 / 2, atol=1e-12)

    def test_spacelike(self):
        rho_b = linalg.random_density_matrix(2, 4)
        r = pdm.spacelike_pdm(linalg.tensor(ZERO, rho_b), 2)
        assert_allclose(marginal(r, 1), rho_b, atol=1e-12)

    def test_first_marginal_is_initial(self):
        for seed in range(10):
            rho = linalg.random_density_matrix(2, seed)
            proc = TemporalProcess(rho, [random_channel(2, 2, seed + 60)])
            assert_allclose(marginal(build_pdm(proc), 0), rho, atol=1e-10)

    def test_last_marginal_is_evolved(self):
        rho = linalg.random_density_matrix(2, 12)
        ch = random_channel(2, 2, 13)
        proc = TemporalProcess(rho, [ch])
        assert_allclose(marginal(build_pdm(proc), 1), channels.apply(ch, rho), atol=1e-10)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            marginal(build_pdm(zero_process()), 2)


class TestCausalityMonotone:
    def test_positive_matrix_gives_zero(self):
        r = pdm.spacelike_pdm(linalg.tensor(ZERO, I2 / 2), 2)
        assert causality_monotone(r) == 0.0

    def test_closed_two_time_gives_one(self):
        assert abs(causality_monotone(build_pdm(zero_process())) - 1.0) < 1e-12
        assert abs(causality_monotone(build_pdm(mixed_process())) - 1.0) < 1e-12

    def test_depolarized_in_between(self):
        proc = TemporalProcess(I2 / 2, [depolarizing(0.5)])
        value = causality_monotone(build_pdm(proc))
        assert 0.0 < value < 1.0

    def test_local_unitary_invariance(self):
        r = build_pdm(zero_process())
        for seed in range(10):
            u = linalg.tensor(
                linalg.haar_random_unitary(2, seed), linalg.haar_random_unitary(2, seed + 40)
            )
            rotated = PDM(
                n_events=2, qubits_per_event=1, matrix=u @ r.matrix @ dag(u)
            )
            assert abs(causality_monotone(rotated) - causality_monotone(r)) < 1e-10


class TestTetrahedron:
    def test_identity_on_mixed(self):
        point = tetrahedron_point(mixed_process())
        assert_allclose(point.as_array(), [1, 1, 1], atol=1e-12)
        member = classify(point)
        assert member.in_temporal and not member.in_spatial

    def test_bell_state_point_is_spatial_vertex(self):
        phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        rho = np.outer(phi, phi.conj())
        point = pdm.CorrelationTriple(
            *(np.real(np.trace(linalg.tensor(PAULIS[i], PAULIS[i]) @ rho)) for i in (1, 2, 3))
        )
        assert_allclose(point.as_array(), [1, -1, 1], atol=1e-12)
        member = classify(point)
        assert member.in_spatial and not member.in_temporal

    def test_full_depolarizing_in_both(self):
        proc = TemporalProcess(I2 / 2, [depolarizing(1.0)])
        point = tetrahedron_point(proc)
        assert_allclose(point.as_array(), [0, 0, 0], atol=1e-12)
        member = classify(point)
        assert member.in_spatial and member.in_temporal

    def test_unitary_processes_stay_temporal(self):
        for seed in range(20):
            u = linalg.haar_random_unitary(2, seed)
            proc = TemporalProcess(I2 / 2, [unitary_channel(u)])
            assert classify(tetrahedron_point(proc)).in_temporal

    def test_wrong_arity(self):
        with pytest.raises(ValueError):
            tetrahedron_point(TemporalProcess(I2 / 2, [identity_channel(), identity_channel()]))


class TestPostselection:
    def test_trivial_postselection_reduces(self):
        rho = linalg.random_density_matrix(2, 21)
        ch = random_channel(2, 2, 22)
        proc = TemporalProcess(rho, [ch])
        for i in range(4):
            for j in range(4):
                got = postselected_correlation(rho, ch, i, j, I2)
                want = event_correlation(proc, (i, j))
                assert abs(got - want) < 1e-12

    def test_matched_projector(self):
        assert abs(postselected_correlation(ZERO, identity_channel(), 3, 3, ZERO) - 1.0) < 1e-12

    def test_impossible_postselection(self):
        one = np.diag([0.0, 1.0]).astype(complex)
        with pytest.raises(UndefinedPostselectionError):
            postselected_correlation(ZERO, identity_channel(), 3, 3, one)

    def test_scale_invariance(self):
        rho = linalg.random_density_matrix(2, 31)
        ch = depolarizing(0.2)
        eta = linalg.random_density_matrix(2, 32)
        a = postselected_correlation(rho, ch, 1, 3, eta)
        b = postselected_correlation(rho, ch, 1, 3, 1.7 * eta)
        assert abs(a - b) < 1e-12

    def test_postselected_pdm_shape(self):
        eta = linalg.random_density_matrix(2, 33)
        r = build_postselected_pdm(ZERO, depolarizing(0.1), eta)
        assert r.matrix.shape == (8, 8)
        assert linalg.is_hermitian(r.matrix, atol=1e-10)
        assert abs(np.trace(r.matrix) - 1.0) < 1e-10


class TestCtc:
    def test_identity_unitary(self):
        rho = linalg.random_density_matrix(2, 41)
        assert abs(ctc_probability(np.eye(8, dtype=complex), rho, 4) - 1.0) < 1e-12

    def test_swap_unitary(self):
        d = 2
        swap = SWAP.copy()
        rho = linalg.random_density_matrix(2, 42)
        assert abs(ctc_probability(swap, rho, d) - 1.0 / d**2) < 1e-12

    def test_matches_projection_construction(self):
        for seed in range(10):
            u = linalg.haar_random_unitary(4, seed)
            rho = linalg.random_density_matrix(2, seed + 80)
            a = ctc_probability(u, rho, 2)
            b = ctc_probability_via_projection(u, rho, 2)
            assert abs(a - b) < 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            ctc_probability(np.ones((4, 4), dtype=complex), I2 / 2, 2)
