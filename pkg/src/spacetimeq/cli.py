"""Batch experiment runner.

Every experiment is addressed as ``group.command`` (on the command line:
``spacetimeq GROUP COMMAND [flags]``), takes its parameters from flags or
from a JSON config document (flags win), and writes a self-describing JSON
payload or CSV table to stdout or ``--out``.

Exit codes: 0 success, 2 validation error, 3 invariant violation detected,
4 I/O failure. Seeds are mandatory for stochastic experiments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from spacetimeq import (
    channels,
    cv_wigner,
    gaussian,
    histories,
    linalg,
    otoc,
    pdm,
    process_matrix,
    timecrystal,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INVARIANT = 3
EXIT_IO = 4

OBS_INDEX = {"I": 0, "X": 1, "Y": 2, "Z": 3}

QUBIT_STATES = {
    "zero": np.diag([1.0, 0.0]).astype(complex),
    "one": np.diag([0.0, 1.0]).astype(complex),
    "plus": np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),
    "mixed": np.eye(2, dtype=complex) / 2.0,
}


class InvariantViolation(RuntimeError):
    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload


def _fmt_float(x) -> str:
    if isinstance(x, float):
        if x != 0.0 and abs(x) < 1e-4:
            return f"{x:.12e}"
        return repr(x)
    return str(x)


def _make_channel(name: str, p: float | None, lam: float | None, seed: int | None):
    if name == "identity":
        return channels.identity_channel()
    if name == "depolarizing":
        if p is None:
            raise ValueError("--p is required for the depolarizing channel")
        return channels.depolarizing(p)
    if name == "dephasing":
        if lam is None:
            raise ValueError("--lam is required for the dephasing channel")
        return channels.dephasing(lam)
    if name == "haar":
        if seed is None:
            raise ValueError("--seed is required for a Haar-random step")
        return channels.unitary_channel(linalg.haar_random_unitary(2, seed))
    if name == "hadamard":
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        return channels.unitary_channel(h)
    raise ValueError(f"unknown channel {name!r}")


def _steps_from_spec(spec: str, seed: int | None):
    steps = []
    for k, part in enumerate(spec.split(",")):
        token = part.strip()
        if not token:
            continue
        name, _, arg = token.partition(":")
        p = lam = None
        if name == "depolarizing" and arg:
            p = float(arg)
        if name == "dephasing" and arg:
            lam = float(arg)
        sub_seed = None if seed is None else seed + k
        steps.append(_make_channel(name, p, lam, sub_seed))
    return steps


def _qubit_state(name: str) -> np.ndarray:
    if name not in QUBIT_STATES:
        raise ValueError(f"unknown state {name!r}; choose from {sorted(QUBIT_STATES)}")
    return QUBIT_STATES[name]


def _parse_complex(text: str) -> complex:
    re_part, _, im_part = text.partition(",")
    return complex(float(re_part), float(im_part or 0.0))


# -- experiment handlers -------------------------------------------------------
# each handler returns (payload_dict, rows or None); rows drive the CSV format


def run_pdm_build(args):
    proc = pdm.TemporalProcess(_qubit_state(args.state), _steps_from_spec(args.steps, args.seed))
    r = pdm.build_pdm(proc)
    payload = {
        "experiment": "pdm.build",
        "params": {"state": args.state, "steps": args.steps, "seed": args.seed},
        "matrix_real": np.real(r.matrix).tolist(),
        "matrix_imag": np.imag(r.matrix).tolist(),
        "trace": float(np.real(np.trace(r.matrix))),
    }
    return payload, None


def run_pdm_eigen(args):
    proc = pdm.TemporalProcess(_qubit_state(args.state), _steps_from_spec(args.steps, args.seed))
    r = pdm.build_pdm(proc)
    eigs = linalg.hermitian_eigenvalues(r.matrix).tolist()
    payload = {
        "experiment": "pdm.eigen",
        "params": {"state": args.state, "steps": args.steps, "seed": args.seed},
        "eigenvalues": eigs,
    }
    rows = [
        {"state": args.state, "steps": args.steps, "index": i, "eigenvalue": v}
        for i, v in enumerate(eigs)
    ]
    return payload, rows


def run_pdm_correlation(args):
    proc = pdm.TemporalProcess(_qubit_state(args.state), _steps_from_spec(args.steps, args.seed))
    paulis = [OBS_INDEX[t.strip().upper()] for t in args.paulis.split(",")]
    value = pdm.event_correlation(proc, paulis)
    payload = {
        "experiment": "pdm.correlation",
        "params": {"state": args.state, "steps": args.steps, "paulis": args.paulis, "seed": args.seed},
        "correlation": value,
    }
    return payload, None


def run_pdm_monotone(args):
    proc = pdm.TemporalProcess(_qubit_state(args.state), _steps_from_spec(args.steps, args.seed))
    r = pdm.build_pdm(proc)
    payload = {
        "experiment": "pdm.monotone",
        "params": {"state": args.state, "steps": args.steps, "seed": args.seed},
        "causality_monotone": pdm.causality_monotone(r),
    }
    return payload, None


def run_pdm_tetra(args):
    proc = pdm.TemporalProcess(_qubit_state(args.state), _steps_from_spec(args.steps, args.seed))
    point = pdm.tetrahedron_point(proc)
    member = pdm.classify(point)
    payload = {
        "experiment": "pdm.tetra",
        "params": {"state": args.state, "steps": args.steps, "seed": args.seed},
        "point": [point.t11, point.t22, point.t33],
        "in_spatial": member.in_spatial,
        "in_temporal": member.in_temporal,
    }
    return payload, None


def run_gaussian_state(args):
    state = _gaussian_initial(args.kind)
    payload = {
        "experiment": "gaussian.state",
        "params": {"kind": args.kind},
        "mean": state.mean.tolist(),
        "cov": state.cov.tolist(),
        "uncertainty_ok": gaussian.uncertainty_ok(state.cov),
    }
    return payload, None


def _gaussian_initial(kind: str) -> gaussian.GaussianState:
    name, _, arg = kind.partition(":")
    if name == "vacuum":
        return gaussian.vacuum()
    if name == "thermal":
        return gaussian.thermal(float(arg or 1.0))
    if name == "tmss":
        return gaussian.two_mode_squeezed(float(arg or 1.0))
    raise ValueError(f"unknown gaussian state {kind!r}")


def _gaussian_step(spec: str) -> np.ndarray:
    name, _, arg = spec.partition(":")
    if name == "identity":
        return np.eye(2)
    if name == "rotation":
        return gaussian.rotation_symplectic(float(arg or 0.0))
    if name == "squeeze":
        return gaussian.squeeze_symplectic(float(arg or 0.0))
    raise ValueError(f"unknown symplectic step {spec!r}")


def run_gaussian_temporal(args):
    initial = _gaussian_initial(args.initial)
    st = gaussian.temporal_gaussian(initial, _gaussian_step(args.step))
    payload = {
        "experiment": "gaussian.temporal",
        "params": {"initial": args.initial, "step": args.step},
        "mean": st.mean.tolist(),
        "cov": st.cov.tolist(),
        "uncertainty_ok": gaussian.uncertainty_ok(st.cov),
    }
    return payload, None


def run_gaussian_uncertainty(args):
    initial = _gaussian_initial(args.kind)
    payload = {
        "experiment": "gaussian.uncertainty",
        "params": {"kind": args.kind},
        "uncertainty_ok": gaussian.uncertainty_ok(initial.cov),
    }
    return payload, None


def run_gaussian_pt(args):
    r = args.r
    omts = gaussian.temporal_gaussian(gaussian.thermal(np.sinh(r) ** 2), np.eye(2))
    tmss = gaussian.two_mode_squeezed(r)
    pt = gaussian.partial_transpose_gaussian(omts.cov, 0)
    rel = float(np.max(np.abs(pt - tmss.cov)) / np.cosh(2 * r))
    payload = {
        "experiment": "gaussian.pt",
        "params": {"r": r},
        "max_relative_entry_error": rel,
        "pt_matches_tmss": bool(rel <= args.tol),
    }
    if not payload["pt_matches_tmss"]:
        raise InvariantViolation(f"partial transpose mismatch {rel} above tol {args.tol}", payload)
    return payload, None


def run_cvwigner_point(args):
    n_max = args.nmax
    rho = np.zeros((n_max, n_max), dtype=complex)
    rho[0, 0] = 1.0
    ch = (
        cv_wigner.fock_phase_damping(n_max)
        if args.channel == "phase-damping"
        else channels.identity_channel(n_max)
    )
    val = cv_wigner.spacetime_wigner_point(
        rho, ch, _parse_complex(args.alpha), _parse_complex(args.beta), n_max
    )
    payload = {
        "experiment": "cv-wigner.point",
        "params": {"alpha": args.alpha, "beta": args.beta, "channel": args.channel, "nmax": n_max},
        "wigner": val,
    }
    return payload, None


def run_cvwigner_normcheck(args):
    n_max = args.nmax
    rho = np.zeros((n_max, n_max), dtype=complex)
    rho[0, 0] = 1.0
    ch = (
        cv_wigner.fock_phase_damping(n_max)
        if args.channel == "phase-damping"
        else channels.identity_channel(n_max)
    )
    val = cv_wigner.wigner_normalization_check(rho, ch, args.radius, args.points, n_max)
    payload = {
        "experiment": "cv-wigner.normcheck",
        "params": {
            "channel": args.channel,
            "radius": args.radius,
            "points": args.points,
            "nmax": n_max,
        },
        "normalization": val,
        "within_tolerance": bool(abs(val - 1.0) <= args.tol),
    }
    if not payload["within_tolerance"]:
        raise InvariantViolation(f"normalization {val} deviates beyond {args.tol}", payload)
    return payload, None


def run_process_validate(args):
    if args.which == "ocb":
        w = process_matrix.ocb_process()
    elif args.which == "identity":
        w = process_matrix.identity_process()
    else:
        raise ValueError(f"unknown process {args.which!r}")
    v = process_matrix.is_valid_process(w)
    payload = {
        "experiment": "process.validate",
        "params": {"which": args.which},
        "is_valid": v.is_valid,
        "psd": v.psd,
        "trace_ok": v.trace_ok,
        "projector_fixed": v.projector_fixed,
        "min_eigenvalue": v.min_eigenvalue,
        "trace": v.trace,
        "projector_residual": v.projector_residual,
    }
    if not v.is_valid:
        raise InvariantViolation("process matrix failed validity conditions", payload)
    return payload, None


def run_process_correlate(args):
    if args.u == "haar":
        if args.seed is None:
            raise ValueError("--seed is required for a Haar unitary")
        u = linalg.haar_random_unitary(2, args.seed)
    else:
        u = np.eye(2, dtype=complex)
    w = process_matrix.identity_process(u=u)
    i, j = OBS_INDEX[args.i.upper()], OBS_INDEX[args.j.upper()]
    value = process_matrix.pauli_pair_correlation(w, i, j)
    closed = 0.5 * float(np.real(np.trace(linalg.PAULIS[j] @ u @ linalg.PAULIS[i] @ linalg.dag(u))))
    payload = {
        "experiment": "process.correlate",
        "params": {"u": args.u, "seed": args.seed, "i": args.i, "j": args.j},
        "correlation": value,
        "closed_form": closed,
    }
    return payload, None


def run_process_gyni(args):
    g, l = process_matrix.gyni_demo()
    g2, l2 = process_matrix.pdm_gyni_demo()
    payload = {
        "experiment": "process.gyni",
        "params": {"demo": args.demo},
        "gyni": g,
        "lgyni": l,
        "pdm_gyni": g2,
        "pdm_lgyni": l2,
        "violates_gyni": bool(g > 0.5),
        "violates_lgyni": bool(l > 0.75),
    }
    if abs(g - g2) > 1e-10 or abs(l - l2) > 1e-10:
        raise InvariantViolation("process and spacetime-state routes disagree", payload)
    return payload, None


def run_process_vertices(args):
    count = process_matrix.count_causal_vertices(args.ma, args.mb, args.ka, args.kb)
    payload = {
        "experiment": "process.vertices",
        "params": {"ma": args.ma, "mb": args.mb, "ka": args.ka, "kb": args.kb},
        "count_formula": count,
    }
    if args.enumerate:
        verts = process_matrix.enumerate_causal_vertices(args.ma, args.mb, args.ka, args.kb)
        payload["count_enumerated"] = len(verts)
        if len(verts) != count:
            raise InvariantViolation("vertex enumeration disagrees with the closed form", payload)
    return payload, None


def _history_unitary(name: str, seed):
    if name == "identity":
        return np.eye(2, dtype=complex)
    if name == "hadamard":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if name == "haar":
        if seed is None:
            raise ValueError("--seed is required for a Haar unitary")
        return linalg.haar_random_unitary(2, seed)
    raise ValueError(f"unknown unitary {name!r}")


def _history_family(args):
    paulis = [OBS_INDEX[t.strip().upper()] for t in args.paulis.split(",")]
    us = [_history_unitary(args.unitary, args.seed) for _ in range(len(paulis) - 1)]
    return histories.pauli_history_family(_qubit_state(args.state), paulis, us), paulis


def run_histories_df(args):
    fam, _ = _history_family(args)
    entries = histories.decoherence_matrix(fam)
    rows = [
        {
            "state": args.state,
            "paulis": args.paulis,
            "unitary": args.unitary,
            "hist": "".join(map(str, ha)),
            "hist_prime": "".join(map(str, hb)),
            "re": v.real,
            "im": v.imag,
        }
        for (ha, hb), v in sorted(entries.items())
    ]
    total = sum(v for v in entries.values())
    payload = {
        "experiment": "histories.df",
        "params": {"state": args.state, "paulis": args.paulis, "unitary": args.unitary, "seed": args.seed},
        "entries": rows,
        "total_re": total.real,
        "total_im": total.imag,
    }
    return payload, rows


def run_histories_consistent(args):
    fam, _ = _history_family(args)
    payload = {
        "experiment": "histories.consistent",
        "params": {"state": args.state, "paulis": args.paulis, "unitary": args.unitary, "seed": args.seed},
        "weak_consistent": histories.is_consistent(fam, tol=args.tol),
        "strong_consistent": histories.is_consistent(fam, tol=args.tol, strong=True),
    }
    return payload, None


def run_histories_corr(args):
    fam, paulis = _history_family(args)
    df_value = histories.pdm_correlation_from_df(fam)
    u = _history_unitary(args.unitary, args.seed)
    pdm_value = histories.matching_process_correlation(
        _qubit_state(args.state), paulis, [u] * (len(paulis) - 1)
    )
    payload = {
        "experiment": "histories.corr",
        "params": {"state": args.state, "paulis": args.paulis, "unitary": args.unitary, "seed": args.seed},
        "signed_diagonal_sum": df_value,
        "pdm_correlation": pdm_value,
    }
    if abs(df_value - pdm_value) > 1e-10:
        raise InvariantViolation("history and measurement-cascade correlations disagree", payload)
    return payload, None


def run_otoc_direct(args):
    if args.seed is None:
        raise ValueError("--seed is required (Haar evolution)")
    d = args.d
    u = linalg.haar_random_unitary(d, args.seed)
    v = linalg.haar_random_unitary(d, args.seed + 1)
    w = linalg.haar_random_unitary(d, args.seed + 2)
    val = otoc.otoc_direct(otoc.OtocSpec(v=v, w=w, u=u, rho=np.eye(d, dtype=complex) / d))
    payload = {
        "experiment": "otoc.direct",
        "params": {"d": d, "seed": args.seed},
        "otoc_re": val.real,
        "otoc_im": val.imag,
    }
    return payload, None


def run_otoc_pdm(args):
    if args.seed is None:
        raise ValueError("--seed is required (Haar evolution)")
    d = args.d
    u = linalg.haar_random_unitary(d, args.seed)
    basis = linalg.haar_random_unitary(d, args.seed + 1)[:, : d // 2]
    a = basis @ linalg.dag(basis)
    b = linalg.haar_random_unitary(d, args.seed + 2)
    rho = np.eye(d, dtype=complex) / d
    via = otoc.otoc_via_pdm(a, b, u, rho)
    direct = otoc.otoc_direct(otoc.OtocSpec(v=a, w=b, u=u, rho=rho))
    payload = {
        "experiment": "otoc.pdm",
        "params": {"d": d, "seed": args.seed},
        "via_pdm_re": via.real,
        "via_pdm_im": via.imag,
        "direct_re": direct.real,
        "direct_im": direct.imag,
    }
    if abs(via - direct) > 1e-12:
        raise InvariantViolation("forward-backward route deviates from the direct OTOC", payload)
    return payload, None


def run_otoc_finalstate(args):
    if args.seed is None:
        raise ValueError("--seed is required (Haar evaporation unitary)")
    n = args.n
    s = linalg.haar_random_unitary(n, args.seed)
    psi = linalg.haar_random_state(n, args.seed + 1)
    prob, out = otoc.final_state_conditional_output(psi, s)
    fidelity = float(abs(np.vdot(s @ psi, out)) ** 2)
    payload = {
        "experiment": "otoc.finalstate",
        "params": {"n": n, "seed": args.seed},
        "probability": prob,
        "fidelity_with_s_psi": fidelity,
    }
    if abs(fidelity - 1.0) > 1e-10:
        raise InvariantViolation("conditional state is not S|psi>", payload)
    return payload, None


def run_otoc_harmonic(args):
    vals = {
        "pdm": otoc.harmonic_pdm_correlation(args.m, args.omega, args.tau),
        "path_integral": otoc.harmonic_pi_correlation(args.omega, args.tau),
    }
    payload = {
        "experiment": "otoc.harmonic",
        "params": {"m": args.m, "omega": args.omega, "tau": args.tau},
        **vals,
        "ratio": vals["pdm"] / vals["path_integral"],
    }
    return payload, None


def run_tc_decay(args):
    ch = _make_channel(args.channel, args.p, args.lam, args.seed)
    obs = OBS_INDEX[args.obs.upper()]
    series = timecrystal.channel_decay_series(_qubit_state(args.state), ch, obs, args.n)
    rows = [
        {
            "channel": args.channel,
            "p": args.p if args.p is not None else "",
            "lam": args.lam if args.lam is not None else "",
            "obs": args.obs.upper(),
            "N": k + 1,
            "corr": v,
        }
        for k, v in enumerate(series.values)
    ]
    payload = {
        "experiment": "tc.decay",
        "params": {"channel": args.channel, "p": args.p, "lam": args.lam,
                   "obs": args.obs.upper(), "n": args.n, "state": args.state},
        "series": list(series.values),
    }
    return payload, rows


def run_tc_symm(args):
    if args.lam is not None:
        series = timecrystal.dephasing_symmetrization_series(args.lam, args.n)
        noise = {"lam": args.lam}
    else:
        if args.p is None:
            raise ValueError("provide --p (depolarizing) or --lam (dephasing)")
        series = timecrystal.symmetrization_series(args.p, args.n)
        noise = {"p": args.p}
    rows = [
        {**noise, "N": k + 1, "corr": v} for k, v in enumerate(series.values)
    ]
    payload = {
        "experiment": "tc.symm",
        "params": {**noise, "n": args.n},
        "series": list(series.values),
    }
    return payload, rows


def run_tc_phaseflip(args):
    xx, zz = timecrystal.phase_flip_code_series(args.p, args.n)
    rows = [
        {"p": args.p, "N": k + 1, "xx": xv, "zz": zv}
        for k, (xv, zv) in enumerate(zip(xx.values, zz.values))
    ]
    payload = {
        "experiment": "tc.phaseflip",
        "params": {"p": args.p, "n": args.n},
        "xx": list(xx.values),
        "zz": list(zz.values),
    }
    return payload, rows


def _floquet_spec(args) -> timecrystal.FloquetChainSpec:
    if args.seed is None:
        raise ValueError("--seed is required (disorder realization)")
    return timecrystal.FloquetChainSpec(
        length=args.length,
        epsilon=args.epsilon,
        interactions=not args.no_interactions,
        disorder_seed=args.seed,
    )


def run_tc_floquet(args):
    spec = _floquet_spec(args)
    series = timecrystal.floquet_correlation_series(spec, args.site, args.periods)
    rows = [
        {
            "length": args.length,
            "epsilon": args.epsilon,
            "interactions": int(not args.no_interactions),
            "seed": args.seed,
            "site": args.site,
            "period": k,
            "corr": v,
        }
        for k, v in enumerate(series.values)
    ]
    payload = {
        "experiment": "tc.floquet",
        "params": {"length": args.length, "epsilon": args.epsilon, "site": args.site,
                   "periods": args.periods, "seed": args.seed,
                   "interactions": not args.no_interactions},
        "series": list(series.values),
    }
    return payload, rows


def run_tc_spectrum(args):
    spec = _floquet_spec(args)
    series = timecrystal.floquet_correlation_series(spec, args.site, args.periods)
    peak = timecrystal.subharmonic_peak(series)
    payload = {
        "experiment": "tc.spectrum",
        "params": {"length": args.length, "epsilon": args.epsilon, "site": args.site,
                   "periods": args.periods, "seed": args.seed,
                   "interactions": not args.no_interactions},
        "peak_freq": peak.peak_freq,
        "peak_weight": peak.peak_weight,
        "split": peak.split,
    }
    return payload, None


def run_cj_of_channel(args):
    ch = _make_channel(args.channel, args.p, args.lam, args.seed)
    choi = channels.choi_of_channel(ch)
    flags = channels.check_choi(choi)
    payload = {
        "experiment": "cj.of-channel",
        "params": {"channel": args.channel, "p": args.p, "lam": args.lam},
        "choi_real": np.real(choi.matrix).tolist(),
        "choi_imag": np.imag(choi.matrix).tolist(),
        "tp": flags.tp,
        "hermitian_preserving": flags.hermitian_preserving,
        "cp": flags.cp,
    }
    return payload, None


def run_cj_check(args):
    ch = _make_channel(args.channel, args.p, args.lam, args.seed)
    flags = channels.check_choi(channels.choi_of_channel(ch))
    payload = {
        "experiment": "cj.check",
        "params": {"channel": args.channel, "p": args.p, "lam": args.lam},
        "tp": flags.tp,
        "hermitian_preserving": flags.hermitian_preserving,
        "cp": flags.cp,
    }
    if not (flags.tp and flags.hermitian_preserving and flags.cp):
        raise InvariantViolation("constructed channel failed the Choi conditions", payload)
    return payload, None


def run_cj_roundtrip(args):
    ch = _make_channel(args.channel, args.p, args.lam, args.seed)
    action = channels.channel_of_choi(channels.choi_of_channel(ch))
    worst = 0.0
    for basis in linalg.PAULIS:
        worst = max(worst, float(np.max(np.abs(action(basis) - channels.apply(ch, basis)))))
    payload = {
        "experiment": "cj.roundtrip",
        "params": {"channel": args.channel, "p": args.p, "lam": args.lam, "tol": args.tol},
        "max_deviation": worst,
    }
    if worst > args.tol:
        raise InvariantViolation(f"roundtrip deviation {worst} above tol {args.tol}", payload)
    return payload, None


# -- registry and wiring --------------------------------------------------------

EXPERIMENTS = {}


def _common_parent() -> argparse.ArgumentParser:
    """Output flags accepted after the subcommand without clobbering globals."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    parent.add_argument("--out", default=argparse.SUPPRESS)
    return parent


_OUTPUT_PARENT = _common_parent()


def _register(parser, group, command, handler, options):
    sub = parser.add_parser(command, help=f"{group}.{command}", parents=[_OUTPUT_PARENT])
    for flags, kwargs in options:
        sub.add_argument(*flags, **kwargs)
    sub.set_defaults(handler=handler, experiment=f"{group}.{command}")
    EXPERIMENTS[f"{group}.{command}"] = [f[0] for f, _ in options]


OPT_STATE = (("--state",), {"default": "zero", "help": "zero|one|plus|mixed"})
OPT_STEPS = (("--steps",), {"default": "identity",
                            "help": "comma list: identity, depolarizing:p, dephasing:l, haar, hadamard"})
OPT_SEED = (("--seed",), {"type": int, "default": None})
OPT_TOL = (("--tol",), {"type": float, "default": 1e-8})
OPT_CH = (("--channel",), {"default": "depolarizing",
                           "help": "identity|depolarizing|dephasing|haar"})
OPT_P = (("--p",), {"type": float, "default": None})
OPT_LAM = (("--lam", "--lambda"), {"type": float, "default": None, "dest": "lam"})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spacetimeq",
        description="spacetime quantum correlation experiments",
    )
    parser.add_argument("--format", choices=("json", "csv"), default=None)
    parser.add_argument("--out", default=None, help="write the payload to a file")
    parser.add_argument("--config", default=None, help="JSON config supplying defaults")
    parser.add_argument("--list", action="store_true", help="print the experiment catalog")
    groups = parser.add_subparsers(dest="group")

    g = groups.add_parser("pdm").add_subparsers(dest="command", required=True)
    _register(g, "pdm", "build", run_pdm_build, [OPT_STATE, OPT_STEPS, OPT_SEED])
    _register(g, "pdm", "eigen", run_pdm_eigen, [OPT_STATE, OPT_STEPS, OPT_SEED])
    _register(g, "pdm", "correlation", run_pdm_correlation,
              [OPT_STATE, OPT_STEPS, OPT_SEED,
               (("--paulis",), {"default": "Z,Z", "help": "comma list like Z,Z"})])
    _register(g, "pdm", "monotone", run_pdm_monotone, [OPT_STATE, OPT_STEPS, OPT_SEED])
    _register(g, "pdm", "tetra", run_pdm_tetra, [OPT_STATE, OPT_STEPS, OPT_SEED])

    g = groups.add_parser("gaussian").add_subparsers(dest="command", required=True)
    _register(g, "gaussian", "state", run_gaussian_state,
              [(("--kind",), {"default": "vacuum", "help": "vacuum|thermal:n|tmss:r"})])
    _register(g, "gaussian", "temporal", run_gaussian_temporal,
              [(("--initial",), {"default": "vacuum"}),
               (("--step",), {"default": "identity", "help": "identity|rotation:t|squeeze:r"})])
    _register(g, "gaussian", "uncertainty", run_gaussian_uncertainty,
              [(("--kind",), {"default": "vacuum"})])
    _register(g, "gaussian", "pt", run_gaussian_pt,
              [(("--r",), {"type": float, "default": 3.0}),
               (("--tol",), {"type": float, "default": 2e-5})])

    g = groups.add_parser("cv-wigner").add_subparsers(dest="command", required=True)
    _register(g, "cv-wigner", "point", run_cvwigner_point,
              [(("--alpha",), {"default": "0,0", "help": "re,im"}),
               (("--beta",), {"default": "0,0"}),
               (("--channel",), {"default": "identity", "help": "identity|phase-damping"}),
               (("--nmax",), {"type": int, "default": 40})])
    _register(g, "cv-wigner", "normcheck", run_cvwigner_normcheck,
              [(("--channel",), {"default": "identity"}),
               (("--radius",), {"type": float, "default": 4.0}),
               (("--points",), {"type": int, "default": 64}),
               (("--nmax",), {"type": int, "default": 40}),
               (("--tol",), {"type": float, "default": 0.02})])

    for alias in ("process", "game"):
        g = groups.add_parser(alias).add_subparsers(dest="command", required=True)
        _register(g, "process", "validate", run_process_validate,
                  [(("--which",), {"default": "ocb", "help": "ocb|identity"})])
        _register(g, "process", "correlate", run_process_correlate,
                  [(("--u",), {"default": "identity", "help": "identity|haar"}), OPT_SEED,
                   (("--i",), {"default": "Z"}), (("--j",), {"default": "Z"})])
        _register(g, "process", "gyni", run_process_gyni,
                  [(("--demo",), {"default": "paper"})])
        _register(g, "process", "vertices", run_process_vertices,
                  [(("--ma",), {"type": int, "default": 2}),
                   (("--mb",), {"type": int, "default": 2}),
                   (("--ka",), {"type": int, "default": 2}),
                   (("--kb",), {"type": int, "default": 2}),
                   (("--enumerate",), {"action": "store_true"})])

    g = groups.add_parser("histories").add_subparsers(dest="command", required=True)
    hist_opts = [OPT_STATE,
                 (("--paulis",), {"default": "Z,Z"}),
                 (("--unitary",), {"default": "identity", "help": "identity|hadamard|haar"}),
                 OPT_SEED, OPT_TOL]
    _register(g, "histories", "df", run_histories_df, hist_opts)
    _register(g, "histories", "consistent", run_histories_consistent, hist_opts)
    _register(g, "histories", "corr", run_histories_corr, hist_opts)

    g = groups.add_parser("otoc").add_subparsers(dest="command", required=True)
    _register(g, "otoc", "direct", run_otoc_direct,
              [(("--d",), {"type": int, "default": 4}), OPT_SEED])
    _register(g, "otoc", "pdm", run_otoc_pdm,
              [(("--d",), {"type": int, "default": 4}), OPT_SEED])
    _register(g, "otoc", "finalstate", run_otoc_finalstate,
              [(("--n",), {"type": int, "default": 4}), OPT_SEED])
    _register(g, "otoc", "harmonic", run_otoc_harmonic,
              [(("--m",), {"type": float, "default": 1.0}),
               (("--omega",), {"type": float, "default": 1.0}),
               (("--tau",), {"type": float, "default": 1.0})])

    g = groups.add_parser("tc").add_subparsers(dest="command", required=True)
    _register(g, "tc", "decay", run_tc_decay,
              [OPT_CH, OPT_P, OPT_LAM, OPT_SEED, OPT_STATE,
               (("--n",), {"type": int, "default": 20}),
               (("--obs",), {"default": "X"})])
    _register(g, "tc", "symm", run_tc_symm,
              [OPT_P, OPT_LAM, (("--n",), {"type": int, "default": 50})])
    _register(g, "tc", "phaseflip", run_tc_phaseflip,
              [(("--p",), {"type": float, "default": 0.05}),
               (("--n",), {"type": int, "default": 10})])
    floq_opts = [(("--length",), {"type": int, "default": 8}),
                 (("--epsilon",), {"type": float, "default": 0.05}),
                 (("--site",), {"type": int, "default": 3}),
                 (("--periods",), {"type": int, "default": 64}),
                 (("--no-interactions",), {"action": "store_true"}),
                 OPT_SEED]
    _register(g, "tc", "floquet", run_tc_floquet, floq_opts)
    _register(g, "tc", "spectrum", run_tc_spectrum, floq_opts)

    g = groups.add_parser("cj").add_subparsers(dest="command", required=True)
    _register(g, "cj", "of-channel", run_cj_of_channel, [OPT_CH, OPT_P, OPT_LAM, OPT_SEED])
    _register(g, "cj", "check", run_cj_check, [OPT_CH, OPT_P, OPT_LAM, OPT_SEED])
    _register(g, "cj", "roundtrip", run_cj_roundtrip, [OPT_CH, OPT_P, OPT_LAM, OPT_SEED, OPT_TOL])

    return parser


def list_experiments(fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps({"experiments": EXPERIMENTS}, indent=2, sort_keys=True)
    lines = ["available experiments:"]
    for name in sorted(EXPERIMENTS):
        opts = " ".join(EXPERIMENTS[name])
        lines.append(f"  {name:24s} {opts}")
    return "\n".join(lines)


def _payload_to_csv(payload: dict, rows) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt_float(v) for k, v in row.items()})
    else:
        flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
        flat.update({f"param_{k}": v for k, v in payload.get("params", {}).items()})
        writer = csv.DictWriter(buf, fieldnames=list(flat.keys()))
        writer.writeheader()
        writer.writerow({k: _fmt_float(v) for k, v in flat.items()})
    return buf.getvalue()


def _emit(text: str, out_path):
    if out_path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IOError(f"cannot write {out_path}: {exc}") from exc


def _apply_config(parser, argv):
    """Pull defaults out of --config and let explicit flags override them."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    experiment = config.get("experiment")
    inject = []
    if experiment and not any(not a.startswith("-") for a in argv[:idx]):
        inject.extend(experiment.split("."))
    for key, value in config.get("params", {}).items():
        flag = f"--{key}"
        if flag not in argv:
            if isinstance(value, bool):
                if value:
                    inject.append(flag)
            else:
                inject.extend([flag, str(value)])
    if "format" in config and "--format" not in argv:
        inject = ["--format", str(config["format"])] + inject
    if "out" in config and "--out" not in argv:
        inject = ["--out", str(config["out"])] + inject
    rest = [a for i, a in enumerate(argv) if i not in (idx, idx + 1)]
    return inject + rest


def _emit_payload(payload, rows, args) -> int:
    fmt = args.format or "json"
    try:
        if fmt == "csv":
            _emit(_payload_to_csv(payload, rows), args.out)
        else:
            _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    except IOError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, OSError) else EXIT_VALIDATION

    args = parser.parse_args(argv)
    if args.group is None or args.list:
        print(list_experiments("json" if args.format == "json" else "text"))
        return EXIT_OK

    try:
        payload, rows = args.handler(args)
    except InvariantViolation as exc:
        if exc.payload is not None:
            _emit_payload(exc.payload, None, args)
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, IndexError, KeyError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    return _emit_payload(payload, rows, args)


if __name__ == "__main__":
    sys.exit(main())
