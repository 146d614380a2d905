"""Named reproduction checks for the claims the library is built around.

Each check is a zero-argument function returning a dict with at least a
``passed`` flag.  ``reproduce_paper`` runs a selection of them concurrently
and bundles the results in registry order.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import __version__
from .channels import (
    channel_history,
    choi_from_kraus,
    marginal_out,
    random_cptp_channel,
    unitary_channel,
)
from .history import InstantChain, bridge_operator, build_history, transition_amplitude
from .monitor import MonitorProtocol, run_protocol
from .qcore import (
    I2,
    NAMED_KETS,
    X,
    Z,
    Basis,
    projector,
    random_density,
    random_ket,
    random_unitary,
)
from .tempcorr import (
    SequentialMeasurementPlan,
    SpinObservable,
    fibonacci_sphere,
    lg_classical_max,
    lg_correlator,
    lg_sweep,
    pointer_two_time,
    rotation_y,
    sequential_exact,
    sequential_measure,
)
from .uncertainty import (
    EnergyModel,
    InstantEnsemble,
    brute_force_projective,
    chain_from_energy_model,
    helstrom_success,
    instant_marginals,
    uncertainty_report,
)

CHECKS: dict[str, Callable[[], dict]] = {}
SEED = 20240607


def check(name: str):
    def register(fn):
        CHECKS[name] = fn
        return fn
    return register


def _ghz(alpha, n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0], v[-1] = alpha
    return v


def _random_alpha(rng) -> np.ndarray:
    return random_ket(2, rng)


# -- examples tied to single claims -------------------------------------------------------------

@check("ghz_form")
def _ghz_form():
    rng = np.random.default_rng(SEED)
    alpha = _random_alpha(rng)
    err = max(
        np.max(np.abs(build_history(InstantChain.uniform(I2, n), alpha).vector - _ghz(alpha, n)))
        for n in range(2, 7)
    )
    return {"passed": bool(err <= 1e-12), "max_abs_error": float(err)}


@check("x_gate_history")
def _x_gate_history():
    h = build_history(InstantChain((X,)), NAMED_KETS["0"]).vector
    target = np.kron(NAMED_KETS["1"], NAMED_KETS["0"])
    err = float(np.max(np.abs(h - target)))
    return {"passed": err <= 1e-12, "max_abs_error": err}


@check("bridge_identity")
def _bridge_identity():
    b = bridge_operator(InstantChain((I2,)), 0).matrix
    err = float(np.max(np.abs(b - np.eye(2))))
    return {"passed": err <= 1e-12, "max_abs_error": err}


@check("monitor_equals_history")
def _monitor_equals_history():
    rng = np.random.default_rng(SEED + 1)
    u = random_unitary(2, rng)
    a_basis, b_basis = Basis(random_unitary(2, rng)), Basis(random_unitary(2, rng))
    alpha, beta = _random_alpha(rng)
    s1 = alpha * a_basis[0] + beta * a_basis[1]
    chain = InstantChain((u,), bases=(a_basis, b_basis))
    out = run_protocol(MonitorProtocol(chain, s1))
    # amplitudes written out term by term: A(a->b) alpha |b>|a> + ...
    terms = np.zeros(4, dtype=complex)
    for coef, a in ((alpha, a_basis[0]), (beta, a_basis[1])):
        for b in (b_basis[0], b_basis[1]):
            terms += transition_amplitude(u, a, b) * coef * np.kron(b, a)
    fid = float(abs(np.vdot(terms, out.monitor_state)) ** 2)
    return {"passed": abs(fid - 1) <= 1e-9 and abs(out.success_prob - 0.5) <= 1e-12,
            "fidelity": fid, "success_prob": out.success_prob}


@check("pointer_trivial_zero")
def _pointer_trivial_zero():
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for r in fibonacci_sphere(5):
        dist = pointer_two_time(InstantChain.uniform(I2, 3), random_ket(2, rng), SpinObservable(r), 0, 2)
        worst = max(worst, abs(dist[0] - 1))
    return {"passed": worst <= 1e-12, "max_deviation": worst}


@check("repeated_spin_same_value")
def _repeated_spin():
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for r in fibonacci_sphere(5):
        s = SpinObservable(r).matrix
        plan = SequentialMeasurementPlan(InstantChain.uniform(I2, 4), (0, 3), (s, s))
        exact = sequential_exact(plan, random_ket(2, rng))
        worst = max(worst, abs(sum(v for k, v in exact.items() if k[0] == k[1]) - 1))
    return {"passed": worst <= 1e-12, "max_deviation": worst}


@check("energy_fixed_time_uncertain")
def _energy_fixed():
    em = EnergyModel.from_spectrum([1.0, -0.5], Basis.computational(2))
    chain = chain_from_energy_model(em, 0.7, 5)
    rep = uncertainty_report(chain, em.eigenbasis[0], em)
    ens = instant_marginals(build_history(chain, em.eigenbasis[0]))
    same = max(np.max(np.abs(s - ens.states[0])) for s in ens.states)
    ok = (rep["energy"]["variance"] <= 1e-9 and abs(rep["time"]["success"] - 1 / 5) <= 1e-9 and same <= 1e-12)
    return {"passed": bool(ok), "variance": rep["energy"]["variance"], "success": rep["time"]["success"]}


@check("time_fixed_energy_uncertain")
def _time_fixed():
    em = EnergyModel.from_spectrum([1.0, -1.0], Basis.from_vectors([NAMED_KETS["+"], NAMED_KETS["-"]]))
    rep = uncertainty_report(InstantChain((X,)), NAMED_KETS["0"], em)
    ok = abs(rep["energy"]["entropy_bits"] - 1) <= 1e-9 and abs(rep["time"]["success"] - 1) <= 1e-9
    return {"passed": bool(ok), "entropy_bits": rep["energy"]["entropy_bits"], "success": rep["time"]["success"]}


# -- acceptance-scale checks ---------------------------------------------------------------------

@check("acc1_ghz_form")
def _acc1():
    rng = np.random.default_rng(SEED + 10)
    t0 = time.perf_counter()
    err = 0.0
    for _ in range(20):
        alpha = _random_alpha(rng)
        for n in range(2, 7):
            err = max(err, float(np.max(np.abs(build_history(InstantChain.uniform(I2, n), alpha).vector - _ghz(alpha, n)))))
    dt = time.perf_counter() - t0
    return {"passed": err <= 1e-12 and dt < 1.0, "max_abs_error": err, "seconds": dt}


@check("acc2_monitor_history")
def _acc2():
    rng = np.random.default_rng(SEED + 11)
    t0 = time.perf_counter()
    worst = 0.0
    for case in range(200):
        n = 2 + case % 2
        chain = InstantChain(tuple(random_unitary(2, rng) for _ in range(n - 1)),
                             bases=tuple(random_unitary(2, rng) for _ in range(n)))
        out = run_protocol(MonitorProtocol(chain, random_ket(2, rng)))
        worst = max(worst, abs(out.fidelity_vs_history - 1))
    dt = time.perf_counter() - t0
    return {"passed": worst <= 1e-9 and dt < 10, "max_fidelity_deviation": worst, "cases": 200, "seconds": dt}


@check("acc3_pointer_nullity")
def _acc3():
    rng = np.random.default_rng(SEED + 12)
    t0 = time.perf_counter()
    states = [random_ket(2, rng) for _ in range(50)]
    chain = InstantChain.uniform(I2, 2)
    worst = 0.0
    for r in fibonacci_sphere(20):
        spin = SpinObservable(r)
        for psi in states:
            worst = max(worst, abs(pointer_two_time(chain, psi, spin, 0, 1)[0] - 1))
    dt = time.perf_counter() - t0
    return {"passed": worst <= 1e-12 and dt < 5, "max_deviation": worst, "seconds": dt}


@check("acc4_repeated_spin")
def _acc4():
    rng = np.random.default_rng(SEED + 13)
    worst_exact = 0.0
    worst_z = 0.0
    chain = InstantChain.uniform(I2, 2)
    for k in range(20):
        r = rng.standard_normal(3)
        s = SpinObservable(r / np.linalg.norm(r)).matrix
        plan = SequentialMeasurementPlan(chain, (0, 1), (s, s))
        res = sequential_measure(plan, random_ket(2, rng), 100_000, SEED + 100 + k)
        worst_exact = max(worst_exact, abs(sum(v for key, v in res.exact.items() if key[0] == key[1]) - 1))
        freq = res.frequencies()
        for key, p in res.exact.items():
            sigma = np.sqrt(max(p * (1 - p), 1e-300) / 100_000)
            dev = abs(freq[key] - p)
            worst_z = max(worst_z, 0.0 if dev == 0 else dev / sigma)
    return {"passed": worst_exact <= 1e-12 and worst_z <= 4, "max_exact_deviation": worst_exact,
            "max_sigma": worst_z}


@check("acc5_channel_history")
def _acc5():
    rng = np.random.default_rng(SEED + 14)
    tr_err = herm = pure_err = marg_err = 0.0
    for case in range(100):
        d = 2 + case % 2
        ch = random_cptp_channel(d, env_dim=1 + case % 4, seed=rng)
        rho = random_density(d, seed=rng)
        choi = choi_from_kraus(ch)
        h = channel_history(rho, choi)
        tr_err = max(tr_err, abs(np.trace(h.matrix) - 1))
        herm = max(herm, float(np.max(np.abs(h.matrix - h.matrix.conj().T))))
        marg_err = max(marg_err, float(np.max(np.abs(marginal_out(h) - ch.apply(rho)))))
        u, phi = random_unitary(d, rng), random_ket(d, rng)
        hu = channel_history(projector(phi), choi_from_kraus(unitary_channel(u))).matrix
        psi = build_history(InstantChain((u,)), phi).vector
        pure_err = max(pure_err, float(np.max(np.abs(hu - np.outer(psi, psi.conj())))))
    ok = tr_err <= 1e-10 and herm < 1e-10 and pure_err <= 1e-9 and marg_err <= 1e-9
    return {"passed": bool(ok), "trace_error": float(tr_err), "hermiticity_residual": herm,
            "pure_history_error": pure_err, "marginal_error": marg_err}


@check("acc6_energy_time_extremes")
def _acc6():
    a = _energy_fixed()
    b = _time_fixed()
    return {"passed": a["passed"] and b["passed"], "energy_fixed": a, "time_fixed": b}


@check("acc7_helstrom_oracle")
def _acc7():
    rng = np.random.default_rng(SEED + 15)
    worst_gap = 0.0
    worst_excess = -np.inf
    for _ in range(50):
        e = InstantEnsemble((random_density(2, seed=rng), random_density(2, seed=rng)))
        hel = helstrom_success(e)
        bf = brute_force_projective(e, 1e-3)
        worst_gap = max(worst_gap, abs(bf - hel))
        worst_excess = max(worst_excess, bf - hel)
    return {"passed": worst_gap <= 1e-4 and worst_excess <= 1e-9, "max_gap": worst_gap,
            "max_excess": float(worst_excess)}


@check("acc8_leggett_garg")
def _acc8():
    grid = np.arange(0, np.pi + 5e-4, 1e-3)
    rows = lg_sweep(grid)
    k = np.array([r["K"] for r in rows])
    closed = 2 * np.cos(grid) - np.cos(2 * grid)
    err = float(np.max(np.abs(k - closed)))
    kmax = float(k.max())
    theta_best = float(grid[np.argmax(k)])
    chain = InstantChain.uniform(rotation_y(np.pi / 3), 3)
    rho = np.eye(2) / 2
    k_third = (lg_correlator(chain, rho, Z, 0, 1) + lg_correlator(chain, rho, Z, 1, 2)
               - lg_correlator(chain, rho, Z, 0, 2))
    classical = lg_classical_max()
    ok = (err <= 1e-9 and abs(kmax - 1.5) <= 1e-6 and abs(k_third - 1.5) <= 1e-6
          and abs(theta_best - np.pi / 3) <= 1e-3 and classical <= 1)
    return {"passed": bool(ok), "max_closed_form_error": err, "max_K": kmax, "theta_at_max": theta_best,
            "K_at_pi_over_3": k_third, "classical_max": classical}


def reproduce_paper(only: list[str] | None = None, workers: int = 4) -> dict:
    names = list(CHECKS) if not only else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")

    def run(name):
        t0 = time.perf_counter()
        try:
            res = CHECKS[name]()
        except Exception as exc:  # noqa: BLE001 - one failing check must not hide the others
            res = {"passed": False, "error": {"type": type(exc).__name__, "message": str(exc)}}
        res = {k: (bool(v) if isinstance(v, np.bool_) else v) for k, v in res.items()}
        return {"name": name, **res, "seconds": time.perf_counter() - t0}

    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run, names))
    return {
        "library_version": __version__,
        "checks": results,
        "passed": all(r["passed"] for r in results),
        "timing": {"wall_seconds": time.perf_counter() - t0},
    }
