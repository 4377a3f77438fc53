"""Quantum channels as Kraus families and their Choi matrices.

Choi convention: the unnormalized maximally entangled vector
``|I>> = sum_n |n>|n>`` with the *output* factor first, so the Choi matrix
of a map E from dimension d0 to d1 is

    M = sum_{ij} E(|i><j|) (x) |i><j|   on  H_out (x) H_in,

trace preservation reads ``Tr_out M = I_in`` and the inverse map is
``E(X) = Tr_in[(I (x) X^T) M]``. This convention is fixed package-wide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from spacetimeq import linalg
from spacetimeq.linalg import ATOL, I2, X, Y, Z, dag


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map represented by a list of Kraus operators (out_dim x in_dim)."""

    operators: tuple[np.ndarray, ...]
    in_dim: int = field(init=False)
    out_dim: int = field(init=False)

    def __init__(self, operators, atol: float = 1e-8):
        ops = tuple(np.asarray(k, dtype=complex) for k in operators)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        out_dim, in_dim = ops[0].shape
        if any(k.shape != (out_dim, in_dim) for k in ops):
            raise ValueError("all Kraus operators must share one shape")
        total = sum(dag(k) @ k for k in ops)
        if not np.allclose(total, np.eye(in_dim), atol=atol, rtol=0.0):
            raise ValueError("Kraus operators do not sum to the identity (not CPTP)")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "in_dim", in_dim)
        object.__setattr__(self, "out_dim", out_dim)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)


def apply(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Apply the channel, rho -> sum_k K rho K^dag."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.in_dim, ch.in_dim):
        raise ValueError(f"state shape {rho.shape} does not match in_dim {ch.in_dim}")
    out = np.zeros((ch.out_dim, ch.out_dim), dtype=complex)
    for k in ch.operators:
        out += k @ rho @ dag(k)
    return out


def apply_n(ch: KrausChannel, rho: np.ndarray, n: int) -> np.ndarray:
    """Apply the channel n times (in_dim must equal out_dim for n > 1)."""
    out = np.asarray(rho, dtype=complex)
    for _ in range(n):
        out = apply(ch, out)
    return out


def identity_channel(d: int = 2) -> KrausChannel:
    return KrausChannel([np.eye(d, dtype=complex)])


def unitary_channel(u: np.ndarray, atol: float = ATOL) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    if not np.allclose(dag(u) @ u, np.eye(u.shape[0]), atol=max(atol, 1e-8), rtol=0.0):
        raise ValueError("matrix is not unitary")
    return KrausChannel([u])


def discard_and_prepare(sigma: np.ndarray) -> KrausChannel:
    """Channel rho -> Tr[rho] * sigma (trace out everything, prepare sigma)."""
    sigma = np.asarray(sigma, dtype=complex)
    d_out = sigma.shape[0]
    vals, vecs = np.linalg.eigh(sigma)
    vals = np.clip(vals.real, 0.0, None)
    d_in = d_out
    ops = []
    for lam, v in zip(vals, vecs.T):
        if lam < 1e-14:
            continue
        for j in range(d_in):
            e = np.zeros((1, d_in), dtype=complex)
            e[0, j] = 1.0
            ops.append(np.sqrt(lam) * np.outer(v, e[0].conj()))
    return KrausChannel(ops)


def random_channel(d: int, kraus_rank: int, seed: int) -> KrausChannel:
    """Random CPTP channel from a Haar isometry (Stinespring dilation)."""
    u = linalg.haar_random_unitary(d * kraus_rank, seed)
    iso = u[:, :d]  # isometry from the system into system (x) environment
    ops = [iso[k * d : (k + 1) * d, :] for k in range(kraus_rank)]
    return KrausChannel(ops)


def depolarizing(p: float) -> KrausChannel:
    """Depolarizing qubit channel, rho -> (1-p) rho + p I/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    return KrausChannel(
        [
            np.sqrt(1 - 3 * p / 4) * I2,
            np.sqrt(p / 4) * X,
            np.sqrt(p / 4) * Y,
            np.sqrt(p / 4) * Z,
        ]
    )


def dephasing(lam: float) -> KrausChannel:
    """Dephasing qubit channel.

    Bloch action (rx, ry, rz) -> (rx sqrt(1-lam), ry sqrt(1-lam), rz),
    realized as a phase flip with probability q = (1 - sqrt(1-lam))/2.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    q = (1.0 - np.sqrt(1.0 - lam)) / 2.0
    return KrausChannel([np.sqrt(1 - q) * I2, np.sqrt(q) * Z])


def lindblad_dephasing_evolve(rho: np.ndarray, omega: float, gamma: float, t: float) -> np.ndarray:
    """Closed-form qubit evolution for H = omega Z/2 with Z-dephasing at rate gamma.

    Off-diagonals rotate and damp, rho01(t) = rho01(0) e^{-i omega t - gamma t};
    populations are constants of motion.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("lindblad_dephasing_evolve expects a 2x2 density matrix")
    out = rho.copy()
    out[0, 1] = rho[0, 1] * np.exp(-1j * omega * t - gamma * t)
    out[1, 0] = rho[1, 0] * np.exp(1j * omega * t - gamma * t)
    return out


@dataclass(frozen=True)
class ChoiOperator:
    """Choi matrix of a linear map, on H_out (x) H_in."""

    matrix: np.ndarray
    dims: tuple[int, int]  # (d_out, d_in)


@dataclass(frozen=True)
class ChoiFlags:
    tp: bool
    hermitian_preserving: bool
    cp: bool

    @property
    def is_cptp(self) -> bool:
        return self.tp and self.hermitian_preserving and self.cp


def choi_of_channel(ch: KrausChannel) -> ChoiOperator:
    """Choi matrix sum_{ij} E(|i><j|) (x) |i><j|."""
    d0, d1 = ch.in_dim, ch.out_dim
    m = np.zeros((d1 * d0, d1 * d0), dtype=complex)
    for k in ch.operators:
        # E(|i><j|) = K |i><j| K^dag, so vec of K plays the entangled role
        v = np.zeros((d1 * d0,), dtype=complex)
        for i in range(d0):
            v += np.kron(k[:, i], _basis(d0, i))
        m += np.outer(v, v.conj())
    return ChoiOperator(matrix=m, dims=(d1, d0))


def _basis(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


def channel_of_choi(c: ChoiOperator):
    """Return the map action X -> Tr_in[(I (x) X^T) M] as a callable."""
    d1, d0 = c.dims
    m = np.asarray(c.matrix, dtype=complex)

    def action(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (d0, d0):
            raise ValueError(f"operator shape {x.shape} does not match input dim {d0}")
        full = np.kron(np.eye(d1, dtype=complex), x.T) @ m
        return linalg.partial_trace(full, (d1, d0), keep=0)

    return action


def check_choi(c: ChoiOperator, atol: float = 1e-8) -> ChoiFlags:
    """Report trace preservation, Hermiticity preservation and complete positivity."""
    d1, d0 = c.dims
    m = np.asarray(c.matrix, dtype=complex)
    marg = linalg.partial_trace(m, (d1, d0), keep=1)
    tp = bool(np.allclose(marg, np.eye(d0), atol=atol, rtol=0.0))
    hp = linalg.is_hermitian(m, atol=atol)
    if hp:
        cp = bool(np.linalg.eigvalsh(m).min() >= -atol)
    else:
        cp = False
    return ChoiFlags(tp=tp, hermitian_preserving=hp, cp=cp)
