"""Decoherence functionals of projector histories, and signalling games.

A history family is an initial state, one exhaustive mutually exclusive
projector set per time, and a unitary per gap. The decoherence functional

    D([a], [a']) = Tr[ P^n_{a_n} ... P^1_{a_1} rho P^1_{a'_1} ... P^n_{a'_n} ]

is evaluated in the Heisenberg picture built from the supplied
Schroedinger-picture unitaries. Diagonal entries are history probabilities
whenever the family is consistent.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from spacetimeq import linalg
from spacetimeq.channels import KrausChannel, apply
from spacetimeq.linalg import dag
from spacetimeq.pdm import TemporalProcess, event_correlation


@dataclass(frozen=True)
class HistoryFamily:
    initial: np.ndarray
    projector_sets: tuple[tuple[np.ndarray, ...], ...]
    unitaries: tuple[np.ndarray, ...]

    def __init__(self, initial, projector_sets, unitaries=(), atol: float = 1e-10):
        rho = np.asarray(initial, dtype=complex)
        sets = tuple(tuple(np.asarray(p, dtype=complex) for p in s) for s in projector_sets)
        us = tuple(np.asarray(u, dtype=complex) for u in unitaries)
        if len(us) != len(sets) - 1:
            raise ValueError("need one unitary per gap between successive times")
        d = rho.shape[0]
        for t, group in enumerate(sets):
            total = sum(group)
            if not np.allclose(total, np.eye(d), atol=atol, rtol=0.0):
                raise ValueError(f"projectors at time {t} are not exhaustive")
            for i, p in enumerate(group):
                for j, q in enumerate(group):
                    expected = p if i == j else np.zeros_like(p)
                    if not np.allclose(p @ q, expected, atol=max(atol, 1e-9), rtol=0.0):
                        raise ValueError(f"projectors at time {t} are not exclusive")
        for u in us:
            if not np.allclose(dag(u) @ u, np.eye(d), atol=1e-8, rtol=0.0):
                raise ValueError("gap evolutions must be unitary")
        object.__setattr__(self, "initial", rho)
        object.__setattr__(self, "projector_sets", sets)
        object.__setattr__(self, "unitaries", us)

    @property
    def n_times(self) -> int:
        return len(self.projector_sets)

    def labels(self):
        """All history label tuples, one index per time."""
        return itertools.product(*(range(len(s)) for s in self.projector_sets))

    def heisenberg_projector(self, t: int, label: int) -> np.ndarray:
        """Projector at time t conjugated back to the initial time."""
        p = self.projector_sets[t][label]
        u_total = np.eye(p.shape[0], dtype=complex)  # U_{t-1} ... U_1
        for u in self.unitaries[:t]:
            u_total = u @ u_total
        return dag(u_total) @ p @ u_total


def decoherence_functional(f: HistoryFamily, hist, hist_prime) -> complex:
    """D([a],[a']) for a pair of history label tuples."""
    hist = tuple(hist)
    hist_prime = tuple(hist_prime)
    if len(hist) != f.n_times or len(hist_prime) != f.n_times:
        raise ValueError("history labels must name one projector per time")
    for t, (a, ap) in enumerate(zip(hist, hist_prime)):
        n_out = len(f.projector_sets[t])
        if not (0 <= a < n_out and 0 <= ap < n_out):
            raise IndexError(f"label out of range at time {t}")
    left = f.initial.copy()
    chain = np.eye(f.initial.shape[0], dtype=complex)
    for t in range(f.n_times):
        chain = f.heisenberg_projector(t, hist[t]) @ chain
    chain_prime = np.eye(f.initial.shape[0], dtype=complex)
    for t in range(f.n_times):
        chain_prime = f.heisenberg_projector(t, hist_prime[t]) @ chain_prime
    return complex(np.trace(chain @ left @ dag(chain_prime)))


def decoherence_matrix(f: HistoryFamily) -> dict:
    """The full complex map over pairs of history labels."""
    labels = list(f.labels())
    return {
        (ha, hb): decoherence_functional(f, ha, hb) for ha in labels for hb in labels
    }


def is_consistent(f: HistoryFamily, tol: float = 1e-10, strong: bool = False) -> bool:
    """Weak (real-part) or strong (modulus) consistency of the family."""
    for ha in f.labels():
        for hb in f.labels():
            if ha == hb:
                continue
            d = decoherence_functional(f, ha, hb)
            size = abs(d) if strong else abs(d.real)
            if size > tol:
                return False
    return True


def coarse_grained_functional(f: HistoryFamily, partitions, bar_hist, bar_hist_prime) -> complex:
    """D over coarse labels, summing the fine-grained functional.

    ``partitions`` holds, per time, a list of label groups; coarse label k
    at time t stands for every fine label in partitions[t][k].
    """
    groups = [partitions[t][bar_hist[t]] for t in range(f.n_times)]
    groups_prime = [partitions[t][bar_hist_prime[t]] for t in range(f.n_times)]
    total = 0.0 + 0.0j
    for fine in itertools.product(*groups):
        for fine_prime in itertools.product(*groups_prime):
            total += decoherence_functional(f, fine, fine_prime)
    return total


def coarse_grained_family(f: HistoryFamily, partitions) -> HistoryFamily:
    """New family whose projectors are the sums over each label group."""
    sets = []
    for t, groups in enumerate(partitions):
        sets.append(tuple(sum(f.projector_sets[t][i] for i in g) for g in groups))
    return HistoryFamily(f.initial, sets, f.unitaries)


def pauli_history_family(initial, pauli_indices, unitaries) -> HistoryFamily:
    """Family whose projector pair at each time is (1 +/- sigma)/2."""
    sets = []
    for idx in pauli_indices:
        plus, minus = linalg.dichotomic_projectors(linalg.PAULIS[idx])
        sets.append((plus, minus))
    return HistoryFamily(initial, sets, unitaries)


def pdm_correlation_from_df(f: HistoryFamily) -> float:
    """Signed sum of diagonal decoherence entries over +/- projector pairs.

    Requires every time to carry exactly two projectors, ordered (+, -).
    Equals the pseudo-density-matrix correlation of the matching process.
    """
    if any(len(s) != 2 for s in f.projector_sets):
        raise ValueError("signed sum needs a (+, -) projector pair at every time")
    total = 0.0
    for labels in f.labels():
        sign = 1.0
        for a in labels:
            sign *= 1.0 if a == 0 else -1.0
        total += sign * decoherence_functional(f, labels, labels).real
    return float(total)


def matching_process_correlation(initial, pauli_indices, unitaries) -> float:
    """Same correlation through the pseudo-density measurement cascade."""
    steps = [KrausChannel([u]) for u in unitaries]
    proc = TemporalProcess(initial, steps)
    return event_correlation(proc, tuple(pauli_indices))


def signalling_game_probability(tau_x, phi, memory: KrausChannel, psi) -> dict:
    """Outcome table of a one-player signalling game at two times.

    ``phi`` maps each first-round outcome ``a`` to its list of Kraus
    operators (together forming one trace-preserving instrument), ``memory``
    carries the output between the rounds, and ``psi`` maps each ``a`` to
    the POVM {psi[a][b]} read out at the second time. Returns
    {(a, b): p(a, b | x)} with rows summing to one.
    """
    tau = np.asarray(tau_x, dtype=complex)
    d = tau.shape[0]
    completeness = sum(
        dag(k) @ k for ops in phi.values() for k in map(np.asarray, ops)
    )
    if not np.allclose(completeness, np.eye(d), atol=1e-8, rtol=0.0):
        raise ValueError("first-round instrument is not trace preserving overall")
    table = {}
    for a, ops in phi.items():
        branch = np.zeros_like(tau)
        for k in ops:
            k = np.asarray(k, dtype=complex)
            branch += k @ tau @ dag(k)
        evolved = apply(memory, branch)
        povm = psi[a]
        total_povm = sum(np.asarray(e, dtype=complex) for e in povm.values())
        if not np.allclose(total_povm, np.eye(evolved.shape[0]), atol=1e-8, rtol=0.0):
            raise ValueError(f"second-round POVM for outcome {a} is incomplete")
        for b, effect in povm.items():
            table[(a, b)] = float(np.real(np.trace(np.asarray(effect, dtype=complex) @ evolved)))
    return table


def signed_game_correlation(table: dict) -> float:
    """sum_ab a b p(a, b) for +/-1-labelled outcomes."""
    return float(sum(a * b * p for (a, b), p in table.items()))
