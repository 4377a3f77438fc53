"""Spacetime Wigner functions from displaced-parity measurements.

Works on a truncated Fock space. The observable T(alpha) is twice the
displaced parity operator D(alpha) (-1)^n D(alpha)^dag; its expectation is
the Wigner function value at alpha. Across two times the value is built
from the projective measurement of the parity sign at t1, channel
evolution, and a second parity readout at t2.

Truncation notes: the displacement is the matrix exponential of the
truncated generator, accurate for |alpha|^2 well below n_max. The trace of
the truncated T(0) oscillates with n_max (0 for even, 2 for odd cutoffs)
instead of converging to 1; that artifact only matters for diagnostics,
never for the smoothed integrals below.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from spacetimeq import linalg
from spacetimeq.channels import KrausChannel, apply


def annihilation(n_max: int) -> np.ndarray:
    """Truncated annihilation operator on n_max Fock levels."""
    a = np.zeros((n_max, n_max), dtype=complex)
    for n in range(1, n_max):
        a[n - 1, n] = np.sqrt(n)
    return a


def displacement(alpha: complex, n_max: int) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha* a) on the truncated space."""
    a = annihilation(n_max)
    return expm(alpha * linalg.dag(a) - np.conj(alpha) * a)


def parity(n_max: int) -> np.ndarray:
    """(-1)^{a^dag a}."""
    return np.diag((-1.0) ** np.arange(n_max)).astype(complex)


def displaced_parity(alpha: complex, n_max: int) -> np.ndarray:
    """T(alpha) = 2 D(alpha) (-1)^n D(alpha)^dag, Hermitian with eigenvalues +/-2."""
    if n_max < 2:
        raise ValueError("need at least two Fock levels")
    d = displacement(alpha, n_max)
    return 2.0 * d @ parity(n_max) @ linalg.dag(d)


def parity_projectors(alpha: complex, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenprojectors (odd, even) of the displaced parity at alpha.

    Computed from the Hermitian eigendecomposition of T(alpha)/2 with the
    eigenvalue sign thresholded at zero, which is robust to truncation.
    """
    u = displaced_parity(alpha, n_max) / 2.0
    vals, vecs = np.linalg.eigh(u)
    odd = vecs[:, vals < 0]
    even = vecs[:, vals >= 0]
    pi_odd = odd @ linalg.dag(odd)
    pi_even = even @ linalg.dag(even)
    return pi_odd, pi_even


def _spacetime_wigner_complex(rho, ch: KrausChannel, alpha, beta, n_max: int) -> complex:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n_max, n_max):
        raise ValueError("state dimension does not match n_max")
    pi_odd, pi_even = parity_projectors(alpha, n_max)
    t_beta = displaced_parity(beta, n_max)
    total = 0.0 + 0.0j
    for sign, proj in ((-1.0, pi_odd), (1.0, pi_even)):
        total += sign * np.trace(t_beta @ apply(ch, proj @ rho @ proj))
    return 2.0 * total


def spacetime_wigner_point(rho, ch: KrausChannel, alpha, beta, n_max: int) -> float:
    """Two-time Wigner value W(alpha, beta) for initial state rho and channel ch.

    W = 2 sum_i (-1)^i Tr{ T(beta) E[ Pi_i(alpha) rho Pi_i(alpha) ] } with
    Pi_1/Pi_2 the odd/even displaced-parity projectors. The result is real;
    a large imaginary residue signals invalid (non-Hermitian) inputs.
    """
    val = _spacetime_wigner_complex(rho, ch, alpha, beta, n_max)
    if abs(val.imag) > 1e-6 * max(1.0, abs(val.real)):
        raise ValueError("Wigner value came out complex; check that inputs are Hermitian")
    return float(val.real)


def spatial_wigner_point(rho12, alpha, beta, n_max: int) -> float:
    """Two-mode Wigner value Tr[(T(alpha) (x) T(beta)) rho12]."""
    rho12 = np.asarray(rho12, dtype=complex)
    if rho12.shape != (n_max * n_max, n_max * n_max):
        raise ValueError("two-mode state dimension does not match n_max")
    op = linalg.tensor(displaced_parity(alpha, n_max), displaced_parity(beta, n_max))
    return float(np.real(np.trace(op @ rho12)))


def _disc_grid(radius: float, points: int) -> tuple[np.ndarray, float]:
    """Midpoint grid over the square, masked to the disc |alpha| <= radius."""
    h = 2.0 * radius / points
    centers = -radius + h * (np.arange(points) + 0.5)
    re, im = np.meshgrid(centers, centers, indexing="ij")
    alphas = (re + 1j * im).ravel()
    alphas = alphas[np.abs(alphas) <= radius]
    return alphas, h * h


def wigner_normalization_check(
    rho,
    ch: KrausChannel,
    radius: float = 4.0,
    points: int = 64,
    n_max: int = 40,
) -> float:
    """Midpoint-rule value of  integral W(alpha,beta) d2a d2b / pi^2.

    The double phase-space sum factorizes exactly through the trace, so the
    grid accumulation runs over each variable once: the alpha grid builds
    the signed post-measurement mixture, the beta grid builds the averaged
    readout operator. Expected close to 1 for trace-preserving evolution.

    Pick the radius so the state's tail mass beyond it is negligible while
    radius^2 stays a few standard deviations below n_max; beyond that the
    truncated displacement pollutes the readout operator.
    """
    rho = np.asarray(rho, dtype=complex)
    alphas, cell = _disc_grid(radius, points)

    signed_mix = np.zeros((n_max, n_max), dtype=complex)
    t_sum = np.zeros((n_max, n_max), dtype=complex)
    for a in alphas:
        pi_odd, pi_even = parity_projectors(a, n_max)
        signed_mix += pi_even @ rho @ pi_even - pi_odd @ rho @ pi_odd
        t_sum += displaced_parity(a, n_max)
    signed_mix *= cell / np.pi
    t_sum *= cell / np.pi

    value = 2.0 * np.trace(t_sum @ apply(ch, signed_mix))
    return float(np.real(value))


def coherent_state(alpha: complex, n_max: int) -> np.ndarray:
    """Coherent state vector from the truncated displacement of the vacuum."""
    vac = np.zeros(n_max, dtype=complex)
    vac[0] = 1.0
    return displacement(alpha, n_max) @ vac


def fock_phase_damping(n_max: int) -> KrausChannel:
    """Full phase damping: keeps Fock populations, kills all coherences."""
    ops = []
    for n in range(n_max):
        k = np.zeros((n_max, n_max), dtype=complex)
        k[n, n] = 1.0
        ops.append(k)
    return KrausChannel(ops)


def cascade_monte_carlo(
    rho, ch: KrausChannel, alpha, beta, n_max: int, samples: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo estimate of W(alpha, beta) from the measurement cascade.

    Samples the +/-2 parity outcome at t1, collapses, evolves, samples the
    +/-2 outcome at t2, and averages the product. Returns (mean, standard
    error of the mean).
    """
    rng = np.random.default_rng(seed)
    rho = np.asarray(rho, dtype=complex)
    pi_odd, pi_even = parity_projectors(alpha, n_max)
    sig_odd, sig_even = parity_projectors(beta, n_max)
    first = {
        -2.0: pi_odd @ rho @ pi_odd,
        2.0: pi_even @ rho @ pi_even,
    }
    probs1 = {k: max(np.trace(v).real, 0.0) for k, v in first.items()}
    evolved = {
        k: apply(ch, v / probs1[k]) if probs1[k] > 0 else None for k, v in first.items()
    }
    p_even_2 = {
        k: (np.trace(sig_even @ v @ sig_even).real if v is not None else 0.0)
        for k, v in evolved.items()
    }
    outcomes = np.empty(samples)
    for i in range(samples):
        o1 = 2.0 if rng.random() < probs1[2.0] else -2.0
        o2 = 2.0 if rng.random() < p_even_2[o1] else -2.0
        outcomes[i] = o1 * o2
    return float(outcomes.mean()), float(outcomes.std(ddof=1) / np.sqrt(samples))
