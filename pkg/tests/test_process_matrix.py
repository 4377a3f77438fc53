import numpy as np
import pytest
from numpy.testing import assert_allclose

from spacetimeq import linalg, process_matrix as pmx
from spacetimeq.linalg import I2, PAULIS, X, Z, dag
from spacetimeq.process_matrix import (
    ALLOWED_TERM_TYPES,
    Instrument,
    ProcessMatrix,
    SLOTS,
    count_causal_vertices,
    enumerate_causal_vertices,
    gyni_demo,
    gyni_score,
    identity_process,
    is_valid_process,
    lgyni_score,
    lv_project,
    maxent_choi,
    ocb_process,
    pauli_pair_correlation,
    pdm_gyni_demo,
    probability_table,
    process_correlation,
    vertex_probability_table,
    violating_operations,
)

CLOSED_FORM_GYNI = (5.0 / 16.0) * (1.0 + 1.0 / np.sqrt(2.0))
INV_SQRT8 = 1.0 / (2.0 * np.sqrt(2.0))


def pauli_term(pattern):
    """Random-signed Pauli word acting nontrivially exactly on `pattern`."""
    ops = [Z if name in pattern else I2 for name in SLOTS]
    return linalg.tensor(*ops)


class TestProjector:
    def test_fixed_points(self):
        rho = linalg.random_density_matrix(2, 3)
        u = linalg.haar_random_unitary(2, 4)
        w_channel = ProcessMatrix(w=linalg.tensor(rho, maxent_choi(u), I2))
        assert_allclose(lv_project(w_channel).w, w_channel.w, atol=1e-12)
        w_identity = ProcessMatrix(w=np.eye(16, dtype=complex) / 4)
        assert_allclose(lv_project(w_identity).w, w_identity.w, atol=1e-12)

    def test_global_loop_killed(self):
        loop = ProcessMatrix(w=linalg.tensor(maxent_choi(), maxent_choi()).real + 0j)
        projected = lv_project(loop).w
        assert np.max(np.abs(projected - loop.w)) > 1e-3

    def test_term_type_characterization(self):
        for pattern in ALLOWED_TERM_TYPES:
            term = ProcessMatrix(w=pauli_term(pattern))
            assert_allclose(lv_project(term).w, term.w, atol=1e-12)
        all_patterns = [
            frozenset(s)
            for k in range(5)
            for s in __import__("itertools").combinations(SLOTS, k)
        ]
        for pattern in all_patterns:
            if pattern in ALLOWED_TERM_TYPES:
                continue
            term = ProcessMatrix(w=pauli_term(pattern))
            assert np.max(np.abs(lv_project(term).w)) < 1e-12, pattern

    def test_idempotent_and_linear(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            h = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
            h = h + dag(h)
            once = lv_project(ProcessMatrix(w=h)).w
            twice = lv_project(ProcessMatrix(w=once)).w
            assert np.max(np.abs(twice - once)) < 1e-12
        a = rng.normal(size=(16, 16)); a = (a + a.T) + 0j
        b = rng.normal(size=(16, 16)); b = (b + b.T) + 0j
        combo = lv_project(ProcessMatrix(w=2.0 * a - 0.5 * b)).w
        parts = 2.0 * lv_project(ProcessMatrix(w=a)).w - 0.5 * lv_project(ProcessMatrix(w=b)).w
        assert np.max(np.abs(combo - parts)) < 1e-12

    def test_trace_preserved_on_fixed_space(self):
        w = ocb_process()
        assert abs(np.trace(lv_project(w).w) - np.trace(w.w)) < 1e-12


class TestValidity:
    def test_identity_evolution_process(self):
        v = is_valid_process(identity_process())
        assert v.is_valid and v.psd and v.trace_ok and v.projector_fixed

    def test_ocb_process(self):
        v = is_valid_process(ocb_process())
        assert v.is_valid
        assert abs(v.trace - 4.0) < 1e-12

    def test_negative_identity_invalid(self):
        v = is_valid_process(ProcessMatrix(w=-np.eye(16, dtype=complex) / 4))
        assert not v.psd and not v.is_valid


class TestCorrelations:
    def test_pauli_closed_form(self):
        for seed in range(20):
            u = linalg.haar_random_unitary(2, seed)
            w = identity_process(u=u)
            for i in (1, 2, 3):
                for j in (1, 2, 3):
                    got = pauli_pair_correlation(w, i, j)
                    want = 0.5 * np.real(np.trace(PAULIS[j] @ u @ PAULIS[i] @ dag(u)))
                    assert abs(got - want) < 1e-12

    def test_tables_normalized(self):
        inst = violating_operations()
        table = probability_table(ocb_process(), inst, inst)
        for x in (0, 1):
            for y in (0, 1):
                total = sum(v for (a, b, xx, yy), v in table.items() if (xx, yy) == (x, y))
                assert abs(total - 1.0) < 1e-8

    def test_instrument_completeness(self):
        inst = violating_operations()
        for x in inst.inputs():
            assert inst.completeness_defect(x) < 1e-12

    def test_sixteen_entry_closed_form(self):
        inst = violating_operations()
        table = probability_table(ocb_process(), inst, inst)
        expected = {
            (1, 1, 0, 0): 1.0,
            (1, 0, 0, 1): 0.5 + INV_SQRT8,
            (1, 1, 0, 1): 0.5 - INV_SQRT8,
            (0, 1, 1, 0): 0.5 + INV_SQRT8,
            (1, 1, 1, 0): 0.5 - INV_SQRT8,
            (0, 0, 1, 1): 0.25 - INV_SQRT8 / 2,
            (0, 1, 1, 1): 0.25 + INV_SQRT8 / 2,
            (1, 0, 1, 1): 0.25 - INV_SQRT8 / 2,
            (1, 1, 1, 1): 0.25 + INV_SQRT8 / 2,
        }
        for key, value in table.items():
            assert abs(value - expected.get(key, 0.0)) < 1e-10, (key, value)


class TestGames:
    def test_gyni_lgyni_values(self):
        g, l = gyni_demo()
        assert abs(g - CLOSED_FORM_GYNI) < 1e-12
        assert abs(l - CLOSED_FORM_GYNI - 0.25) < 1e-12
        assert g > 0.5 and l > 0.75

    def test_uniform_noise(self):
        table = {
            (a, b, x, y): 0.25
            for a in (0, 1)
            for b in (0, 1)
            for x in (0, 1)
            for y in (0, 1)
        }
        assert abs(gyni_score(table) - 0.25) < 1e-12
        assert lgyni_score(table) <= 0.75

    def test_unnormalized_rejected(self):
        table = {(0, 0, 0, 0): 0.7}
        with pytest.raises(ValueError):
            gyni_score(table)

    def test_spacetime_route_equals_process_route(self):
        g, l = gyni_demo()
        g2, l2 = pdm_gyni_demo()
        assert abs(g - g2) < 1e-10
        assert abs(l - l2) < 1e-10

    def test_ancilla_state_shares_signal_terms(self):
        w = ocb_process().w
        for x in (0, 1):
            for y in (0, 1):
                r = pmx.ancilla_pdm(x, y)
                assert abs(np.trace(r) - 1.0) < 1e-12
                assert linalg.is_hermitian(r)
                for word in (linalg.tensor(Z, Z, Z, I2), linalg.tensor(Z, I2, X, X)):
                    a = np.trace(word @ r).real
                    b = np.trace(word @ w).real
                    assert abs(a - b) < 1e-12


class TestCausalPolytope:
    def test_counts(self):
        assert count_causal_vertices(2, 2, 2, 2) == 112
        assert count_causal_vertices(1, 1, 2, 2) == 4
        assert count_causal_vertices(1, 1, 1, 1) == 1

    @pytest.mark.parametrize(
        "dims", [(2, 2, 2, 2), (1, 1, 2, 2), (1, 2, 2, 2), (2, 1, 3, 2)]
    )
    def test_enumeration_matches_formula(self, dims):
        assert len(enumerate_causal_vertices(*dims)) == count_causal_vertices(*dims)

    def test_all_vertices_respect_inequalities(self):
        worst_g, worst_l = 0.0, 0.0
        for vertex in enumerate_causal_vertices(2, 2, 2, 2):
            table = vertex_probability_table(vertex, 2, 2, 2, 2)
            worst_g = max(worst_g, gyni_score(table))
            worst_l = max(worst_l, lgyni_score(table))
        assert worst_g <= 0.5
        assert worst_l <= 0.75
        # the classical bounds are attained
        assert worst_g == 0.5
        assert worst_l == 0.75

    def test_rejects_bad_cardinalities(self):
        with pytest.raises(ValueError):
            count_causal_vertices(0, 1, 2, 2)
