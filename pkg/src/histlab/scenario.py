"""Scenario files: parsing, validation and dispatch to the analysis modules.

A scenario is a JSON object.  Matrices use the interchange form
``{"rows": n, "cols": m, "re": [...], "im": [...]}`` (row-major); gates may
also be given by name (``"I"``, ``"X"``, ``"Y"``, ``"Z"``, ``"H"``) or as
``{"rotation": {"axis": "y", "angle": 1.0}}`` meaning ``exp(-i angle sigma/2)``.
Kets are a name (``"0"``, ``"1"``, ``"+"``, ``"-"``), ``{"re": [...], "im":
[...]}`` or a one-column matrix object.  Unknown keys are errors.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.linalg import expm

from . import __version__
from .channels import (
    KrausChannel,
    channel_history,
    choi_channel,
    choi_from_kraus,
    history_operator_report,
    marginal_out,
    validate_cptp,
)
from .history import InstantChain, build_history, history_to_json, temporal_marginal
from .monitor import MonitorProtocol, measure_monitors, run_protocol
from .qcore import (
    NAMED_GATES,
    NAMED_KETS,
    TOL,
    X,
    Y,
    Z,
    matrix_from_json,
    matrix_to_json,
    projector,
)
from .tempcorr import (
    SequentialMeasurementPlan,
    SpinObservable,
    lg_sweep,
    pointer_two_time,
    sequential_exact,
    sequential_measure,
)
from .uncertainty import (
    EnergyModel,
    discrimination_success,
    instant_marginals,
    time_discrimination,
    uncertainty_report,
)

SCHEMA_VERSION = 1
ANALYSES = ("history", "monitor", "discrimination", "channel", "pointer", "lg_sweep", "uncertainty", "sequential")

TOP_KEYS = {
    "schema_version", "name", "seed", "tolerance", "chain", "initial", "rho", "channel",
    "monitor", "pointer", "lg", "energy", "measurements", "discrimination", "analyses", "expect",
}
SECTION_KEYS = {
    "chain": {"instants", "steps", "bases", "labels"},
    "channel": {"kraus", "choi", "in_dim", "trace_decreasing"},
    "monitor": {"postselect", "observables"},
    "pointer": {"direction", "t1", "t2", "lattice_dim", "offset"},
    "lg": {"theta_min", "theta_max", "steps", "observable", "initial"},
    "energy": {"hamiltonian", "allow_degenerate"},
    "measurements": {"instants", "observables", "shots"},
    "discrimination": {"strategy"},
}
SECTION_NEEDS = {
    "history": ("chain", "initial"),
    "monitor": ("chain", "initial"),
    "discrimination": ("chain", "initial"),
    "channel": ("channel", "rho"),
    "pointer": ("chain", "initial", "pointer"),
    "lg_sweep": ("lg",),
    "uncertainty": ("chain", "initial", "energy"),
    "sequential": ("chain", "initial", "measurements"),
}
_PAULI = {"x": X, "y": Y, "z": Z}


class ScenarioError(ValueError):
    """Every problem found while validating a scenario, not just the first."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class Scenario:
    name: str
    analyses: list
    seed: int | None = None
    tolerance: float = TOL
    chain: InstantChain | None = None
    initial: np.ndarray | None = None
    rho: np.ndarray | None = None
    channel: Any = None
    monitor: dict = field(default_factory=dict)
    pointer: dict = field(default_factory=dict)
    lg: dict = field(default_factory=dict)
    energy: EnergyModel | None = None
    measurements: dict = field(default_factory=dict)
    discrimination: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)


# -- element parsers ---------------------------------------------------------------------------

def parse_gate(obj) -> np.ndarray:
    if isinstance(obj, str):
        if obj not in NAMED_GATES:
            raise ValueError(f"unknown gate name {obj!r}")
        return NAMED_GATES[obj]
    if isinstance(obj, dict) and set(obj) == {"rotation"}:
        rot = obj["rotation"]
        if not isinstance(rot, dict) or set(rot) != {"axis", "angle"} or rot["axis"] not in _PAULI:
            raise ValueError("rotation needs exactly {'axis': 'x'|'y'|'z', 'angle': number}")
        return expm(-0.5j * float(rot["angle"]) * _PAULI[rot["axis"]])
    if isinstance(obj, dict):
        return matrix_from_json(obj)
    raise ValueError(f"cannot read a matrix from {type(obj).__name__}")


def parse_ket(obj) -> np.ndarray:
    if isinstance(obj, str):
        if obj not in NAMED_KETS:
            raise ValueError(f"unknown ket name {obj!r}")
        return NAMED_KETS[obj]
    if isinstance(obj, dict) and "rows" not in obj:
        extra = set(obj) - {"re", "im"}
        if extra or "re" not in obj:
            raise ValueError("ket object needs 're' (and optionally 'im') only")
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape or re.ndim != 1:
            raise ValueError("ket 're' and 'im' must be equal-length lists")
        return re + 1j * im
    if isinstance(obj, dict):
        m = matrix_from_json(obj)
        if m.shape[1] != 1:
            raise ValueError(f"ket matrix must have one column, got {m.shape[1]}")
        return m[:, 0]
    raise ValueError(f"cannot read a ket from {type(obj).__name__}")


def ket_to_json(v) -> dict:
    v = np.asarray(v).reshape(-1)
    return {"re": [float(x) for x in v.real], "im": [float(x) for x in v.imag]}


def _check_keys(obj, allowed: set, path: str, errors: list) -> bool:
    if not isinstance(obj, dict):
        errors.append(f"{path}: expected an object")
        return False
    for k in sorted(set(obj) - allowed):
        errors.append(f"{path}: unknown key {k!r}")
    return True


def _try(errors: list, path: str, fn, *args):
    try:
        return fn(*args)
    except (ValueError, TypeError, KeyError, IndexError) as exc:
        errors.append(f"{path}: {exc}")
        return None


# -- validation --------------------------------------------------------------------------------

def validate_scenario(raw: dict) -> Scenario:
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ScenarioError(["scenario must be a JSON object"])
    for k in sorted(set(raw) - TOP_KEYS):
        errors.append(f"unknown top-level key {k!r}")
    for section, keys in SECTION_KEYS.items():
        if section in raw:
            _check_keys(raw[section], keys, section, errors)

    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errors.append(f"schema_version: unsupported version {version!r}, expected {SCHEMA_VERSION}")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: required non-empty string")
    seed = raw.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64):
        errors.append("seed: must be an unsigned 64-bit integer")
        seed = None
    tol = raw.get("tolerance", TOL)
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or not tol > 0:
        errors.append("tolerance: must be a positive number")
        tol = TOL

    analyses = raw.get("analyses")
    if not isinstance(analyses, list) or not analyses:
        errors.append("analyses: required non-empty list")
        analyses = []
    for a in analyses:
        if a not in ANALYSES:
            errors.append(f"analyses: unknown analysis {a!r}; known: {', '.join(ANALYSES)}")
    analyses = [a for a in analyses if a in ANALYSES]
    for a in analyses:
        for need in SECTION_NEEDS[a]:
            if need not in raw:
                errors.append(f"analyses: {a!r} requires section {need!r}")

    sc = Scenario(name=name or "", analyses=analyses, seed=seed, tolerance=float(tol), raw=raw)

    # -- initial state
    if "initial" in raw:
        sc.initial = _try(errors, "initial", parse_ket, raw["initial"])
        if sc.initial is not None and abs(np.linalg.norm(sc.initial) - 1) > sc.tolerance:
            errors.append(f"initial: norm {np.linalg.norm(sc.initial):.12g} is not 1")
            sc.initial = None

    # -- chain
    ch = raw.get("chain")
    if isinstance(ch, dict):
        _parse_chain(ch, sc, errors)

    d0 = sc.chain.dims[0] if sc.chain is not None else None
    if sc.initial is not None and sc.chain is not None and sc.initial.size != d0:
        errors.append(f"initial: dimension {sc.initial.size} is inconsistent with chain.steps[0] ({d0}x{d0})")

    # -- rho and channel
    if "rho" in raw:
        r = raw["rho"]
        if isinstance(r, dict) and set(r) == {"pure"}:
            k = _try(errors, "rho.pure", parse_ket, r["pure"])
            sc.rho = projector(k) if k is not None else None
        else:
            sc.rho = _try(errors, "rho", matrix_from_json, r)
    if isinstance(raw.get("channel"), dict):
        _parse_channel(raw["channel"], sc, errors)

    # -- other sections
    if isinstance(raw.get("monitor"), dict):
        _parse_monitor(raw["monitor"], sc, errors)
    if isinstance(raw.get("pointer"), dict):
        _parse_pointer(raw["pointer"], sc, errors)
    if isinstance(raw.get("lg"), dict):
        _parse_lg(raw["lg"], sc, errors)
    if isinstance(raw.get("energy"), dict):
        e = raw["energy"]
        h = _try(errors, "energy.hamiltonian", parse_gate, e.get("hamiltonian"))
        if h is not None:
            sc.energy = _try(errors, "energy", lambda: EnergyModel(h, bool(e.get("allow_degenerate", False))))
        if sc.energy is not None and d0 is not None and sc.energy.dim != d0:
            errors.append(f"energy.hamiltonian: dimension {sc.energy.dim} is inconsistent with chain dimension {d0}")
    if isinstance(raw.get("measurements"), dict):
        _parse_measurements(raw["measurements"], sc, errors)
    if isinstance(raw.get("discrimination"), dict):
        strat = raw["discrimination"].get("strategy", "pretty_good")
        if strat not in ("pretty_good", "brute_force_projective", "random_guess"):
            errors.append(f"discrimination.strategy: unknown strategy {strat!r}")
        sc.discrimination = {"strategy": strat}

    exp = raw.get("expect", {})
    if not isinstance(exp, dict):
        errors.append("expect: expected an object")
    else:
        for key, val in exp.items():
            head = key.split(".", 1)[0]
            if head not in analyses:
                errors.append(f"expect: key {key!r} refers to an analysis that is not requested")
            if isinstance(val, dict):
                if set(val) - {"value", "tol"} or "value" not in val:
                    errors.append(f"expect.{key}: use {{'value': x, 'tol': t}}")
            elif not isinstance(val, (int, float, bool)):
                errors.append(f"expect.{key}: expected a number, boolean or {{'value', 'tol'}}")
        sc.expect = dict(exp)

    if errors:
        raise ScenarioError(errors)
    return sc


def _parse_chain(ch: dict, sc: Scenario, errors: list):
    n = ch.get("instants")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        errors.append("chain.instants: must be an integer >= 2")
        return
    steps_raw = ch.get("steps")
    if not isinstance(steps_raw, list):
        errors.append("chain.steps: required list of gates")
        return
    if len(steps_raw) != n - 1:
        errors.append(f"chain.steps: {n} instants need {n - 1} steps, got {len(steps_raw)}")
        return
    steps = [_try(errors, f"chain.steps[{k}]", parse_gate, s) for k, s in enumerate(steps_raw)]
    if any(s is None for s in steps):
        return
    for k in range(1, len(steps)):
        if steps[k].shape != steps[0].shape:
            errors.append(f"chain.steps[{k}]: shape {steps[k].shape} differs from chain.steps[0] {steps[0].shape}")
            return
    bases = None
    if "bases" in ch:
        if not isinstance(ch["bases"], list) or len(ch["bases"]) != n:
            errors.append(f"chain.bases: need a list of {n} matrices")
            return
        bases = [_try(errors, f"chain.bases[{k}]", parse_gate, b) for k, b in enumerate(ch["bases"])]
        if any(b is None for b in bases):
            return
    labels = ch.get("labels")
    try:
        sc.chain = InstantChain(tuple(steps), tuple(bases) if bases else None,
                                tuple(labels) if labels else None, sc.tolerance)
    except (ValueError, IndexError) as exc:
        errors.append(f"chain: {exc}")


def _parse_channel(c: dict, sc: Scenario, errors: list):
    if ("kraus" in c) == ("choi" in c):
        errors.append("channel: give exactly one of 'kraus' or 'choi'")
        return
    if "kraus" in c:
        if not isinstance(c["kraus"], list) or not c["kraus"]:
            errors.append("channel.kraus: required non-empty list")
            return
        ops = [_try(errors, f"channel.kraus[{k}]", parse_gate, m) for k, m in enumerate(c["kraus"])]
        if any(o is None for o in ops):
            return
        ch = _try(errors, "channel", lambda: KrausChannel(tuple(ops), bool(c.get("trace_decreasing", False))))
        if ch is None:
            return
        rep = validate_cptp(ch, sc.tolerance)
        if not rep.cp_pass:
            errors.append("channel: Kraus operators are not completely positive")
        if not rep.tp_pass and not ch.trace_decreasing:
            errors.append(f"channel: not trace preserving (deficit {rep.tp_deficit:.3g}); set trace_decreasing to allow")
        sc.channel = ch
        d_in = ch.in_dim
    else:
        m = _try(errors, "channel.choi", matrix_from_json, c["choi"])
        if m is None:
            return
        sc.channel = _try(errors, "channel.choi", lambda: choi_channel(m, in_dim=c.get("in_dim"), tol=sc.tolerance))
        if sc.channel is None:
            return
        d_in = sc.channel.in_dim
    if sc.rho is not None and sc.rho.shape[0] != d_in:
        errors.append(f"rho: dimension {sc.rho.shape[0]} is inconsistent with channel input dimension {d_in}")


def _parse_monitor(m: dict, sc: Scenario, errors: list):
    out = {}
    if "postselect" in m:
        out["postselect"] = _try(errors, "monitor.postselect", parse_ket, m["postselect"])
        if out["postselect"] is not None and sc.chain is not None and out["postselect"].size != sc.chain.dims[-1]:
            errors.append(
                f"monitor.postselect: dimension {out['postselect'].size} is inconsistent with "
                f"chain final instant dimension {sc.chain.dims[-1]}"
            )
    if "observables" in m:
        obs = m["observables"]
        if not isinstance(obs, list):
            errors.append("monitor.observables: expected a list")
        else:
            out["observables"] = [_try(errors, f"monitor.observables[{k}]", parse_gate, o) for k, o in enumerate(obs)]
            if sc.chain is not None and len(obs) != sc.chain.n_instants:
                errors.append(f"monitor.observables: need one per instant ({sc.chain.n_instants}), got {len(obs)}")
    sc.monitor = out


def _parse_pointer(p: dict, sc: Scenario, errors: list):
    out = {
        "t1": p.get("t1", 0),
        "t2": p.get("t2", 1),
        "lattice_dim": p.get("lattice_dim", 7),
        "offset": p.get("offset", 0),
    }
    for k in ("t1", "t2", "lattice_dim", "offset"):
        if not isinstance(out[k], int) or isinstance(out[k], bool):
            errors.append(f"pointer.{k}: must be an integer")
    out["spin"] = _try(errors, "pointer.direction", lambda: SpinObservable(p.get("direction", [0, 0, 1])))
    if sc.chain is not None and isinstance(out["t2"], int) and not 0 <= out["t1"] < out["t2"] < sc.chain.n_instants:
        errors.append(f"pointer: need 0 <= t1 < t2 < {sc.chain.n_instants}")
    if isinstance(out["lattice_dim"], int) and (out["lattice_dim"] < 5 or out["lattice_dim"] % 2 == 0):
        errors.append("pointer.lattice_dim: must be an odd integer >= 5")
    sc.pointer = out


def _parse_lg(g: dict, sc: Scenario, errors: list):
    out = {
        "theta_min": g.get("theta_min", 0.0),
        "theta_max": g.get("theta_max", float(np.pi)),
        "steps": g.get("steps", 181),
    }
    for k in ("theta_min", "theta_max"):
        if not isinstance(out[k], (int, float)) or isinstance(out[k], bool):
            errors.append(f"lg.{k}: must be a number")
    if not isinstance(out["steps"], int) or isinstance(out["steps"], bool) or out["steps"] < 1:
        errors.append("lg.steps: must be a positive integer")
    out["observable"] = Z
    if "observable" in g:
        out["observable"] = _try(errors, "lg.observable", parse_gate, g["observable"])
    out["initial"] = np.eye(2) / 2
    if "initial" in g:
        out["initial"] = _try(errors, "lg.initial", matrix_from_json, g["initial"])
    sc.lg = out


def _parse_measurements(m: dict, sc: Scenario, errors: list):
    inst = m.get("instants")
    obs = m.get("observables")
    shots = m.get("shots", 0)
    if not isinstance(inst, list) or not isinstance(obs, list):
        errors.append("measurements: need 'instants' and 'observables' lists")
        return
    if not isinstance(shots, int) or isinstance(shots, bool) or shots < 0:
        errors.append("measurements.shots: must be a nonnegative integer")
    if shots and sc.seed is None:
        errors.append("seed: required because measurements.shots requests Monte-Carlo sampling")
    ops = [_try(errors, f"measurements.observables[{k}]", parse_gate, o) for k, o in enumerate(obs)]
    if sc.chain is not None and all(o is not None for o in ops):
        try:
            sc.measurements = {"plan": SequentialMeasurementPlan(sc.chain, tuple(inst), tuple(ops)), "shots": shots}
        except (ValueError, IndexError) as exc:
            errors.append(f"measurements: {exc}")


def load_scenario_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ScenarioError([f"scenario file not found: {path}"])
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: invalid JSON ({exc})"]) from None


def parse_scenario(path, seed: int | None = None, tolerance: float | None = None,
                   require: list[str] | None = None) -> Scenario:
    """Read and validate a scenario file.

    Command-line overrides and analyses named in ``require`` are merged in
    before validation so their sections get checked too.
    """
    raw = load_scenario_json(path)
    if isinstance(raw, dict):
        if seed is not None:
            raw["seed"] = seed
        if tolerance is not None:
            raw["tolerance"] = tolerance
        if require:
            listed = raw.get("analyses") if isinstance(raw.get("analyses"), list) else []
            raw["analyses"] = listed + [a for a in require if a not in listed]
    return validate_scenario(raw)


# -- analyses ----------------------------------------------------------------------------------

def _analysis_history(sc: Scenario) -> dict:
    h = build_history(sc.chain, sc.initial)
    return {
        "state": history_to_json(h),
        "marginals": [matrix_to_json(temporal_marginal(h, k)) for k in range(sc.chain.n_instants)],
    }


def _analysis_monitor(sc: Scenario) -> dict:
    out = run_protocol(MonitorProtocol(sc.chain, sc.initial, sc.monitor.get("postselect")))
    block = {
        "success_prob": out.success_prob,
        "fidelity": out.fidelity_vs_history,
        "monitor_state": {**matrix_to_json(out.monitor_state.reshape(-1, 1)), "dims": out.dims},
        "marginals": [matrix_to_json(out.marginal(k)) for k in range(sc.chain.n_instants)],
    }
    if sc.monitor.get("observables"):
        dist = measure_monitors(out, sc.monitor["observables"], sc.tolerance)
        block["statistics"] = [{"outcome": list(k), "prob": v} for k, v in dist.items()]
    return block


def _analysis_discrimination(sc: Scenario) -> dict:
    ens = instant_marginals(build_history(sc.chain, sc.initial))
    strategy = sc.discrimination.get("strategy")
    if strategy is None:
        return time_discrimination(ens)
    return {"success": discrimination_success(ens, strategy), "method": strategy, "n_instants": len(ens)}


def _analysis_channel(sc: Scenario) -> dict:
    ch = sc.channel
    choi = choi_from_kraus(ch) if isinstance(ch, KrausChannel) else ch
    h = channel_history(sc.rho, choi, sc.tolerance)
    block = {"history_operator": matrix_to_json(h.matrix), **history_operator_report(h)}
    block["marginal_out"] = matrix_to_json(marginal_out(h))
    block["marginal_out_monitored"] = matrix_to_json(marginal_out(h, "partial_trace"))
    if isinstance(ch, KrausChannel):
        block["cptp"] = validate_cptp(ch, sc.tolerance).to_dict()
    return block


def _analysis_pointer(sc: Scenario) -> dict:
    p = sc.pointer
    dist = pointer_two_time(sc.chain, sc.initial, p["spin"], p["t1"], p["t2"], p["lattice_dim"], p["offset"])
    return {
        "distribution": {str(k): v for k, v in dist.items()},
        "p_zero": dist[0],
        "lattice_dim": p["lattice_dim"],
    }


def lg_rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "C12", "C23", "C13", "K", "violated"])
    for r in rows:
        w.writerow([repr(r["theta"]), repr(r["C12"]), repr(r["C23"]), repr(r["C13"]), repr(r["K"]), str(r["violated"]).lower()])
    return buf.getvalue()


def _analysis_lg_sweep(sc: Scenario) -> dict:
    g = sc.lg
    angles = np.linspace(g["theta_min"], g["theta_max"], g["steps"])
    rows = lg_sweep(angles, g["observable"], g["initial"])
    best = max(rows, key=lambda r: r["K"])
    return {
        "rows": len(rows),
        "max_K": best["K"],
        "theta_at_max_K": best["theta"],
        "violations": sum(r["violated"] for r in rows),
        "csv": lg_rows_to_csv(rows),
    }


def _analysis_uncertainty(sc: Scenario) -> dict:
    rep = uncertainty_report(sc.chain, sc.initial, sc.energy)
    return {"energy": rep["energy"], "time": rep["time"],
            "steps_generated_by_energy_model": rep["steps_generated_by_energy_model"]}


def _analysis_sequential(sc: Scenario) -> dict:
    plan, shots = sc.measurements["plan"], sc.measurements["shots"]
    exact = sequential_exact(plan, sc.initial)
    block = {"exact": [{"outcome": list(k), "prob": v} for k, v in exact.items()],
             "p_all_equal": sum(v for k, v in exact.items() if len(set(k)) == 1)}
    if shots:
        res = sequential_measure(plan, sc.initial, shots, sc.seed)
        freq = res.frequencies()
        block["shots"] = shots
        block["frequencies"] = [{"outcome": list(k), "freq": v} for k, v in freq.items()]
    return block


DISPATCH = {
    "history": _analysis_history,
    "monitor": _analysis_monitor,
    "discrimination": _analysis_discrimination,
    "channel": _analysis_channel,
    "pointer": _analysis_pointer,
    "lg_sweep": _analysis_lg_sweep,
    "uncertainty": _analysis_uncertainty,
    "sequential": _analysis_sequential,
}


def _lookup(blocks: dict, key: str):
    cur: Any = blocks
    for part in key.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise KeyError(key)
        cur = cur[part]
    return cur


def _check_expectations(sc: Scenario, blocks: dict) -> list[dict]:
    out = []
    for key, spec in sc.expect.items():
        if isinstance(spec, dict):
            want, tol = spec["value"], spec.get("tol", sc.tolerance)
        else:
            want, tol = spec, sc.tolerance
        entry = {"key": key, "expected": want, "tol": tol}
        try:
            got = _lookup(blocks, key)
        except KeyError:
            entry.update(actual=None, passed=False, error="value missing from report")
            out.append(entry)
            continue
        if isinstance(want, bool):
            ok = got is want
        else:
            ok = isinstance(got, (int, float)) and abs(float(got) - float(want)) <= tol
        entry.update(actual=got, passed=bool(ok))
        out.append(entry)
    return out


def run_scenario(sc: Scenario, only: list[str] | None = None) -> dict:
    """Run each requested analysis; a failing analysis becomes an error block."""
    start = time.perf_counter()
    blocks: dict[str, Any] = {}
    for name in sc.analyses:
        if only is not None and name not in only:
            continue
        try:
            blocks[name] = _to_plain(DISPATCH[name](sc))
        except Exception as exc:  # noqa: BLE001 - reported per analysis
            blocks[name] = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    expectations = _check_expectations(sc, blocks) if only is None else []
    failed = [k for k, b in blocks.items() if "error" in b]
    report = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "scenario": sc.name,
        "seed": sc.seed,
        "tolerance": sc.tolerance,
        "analyses": blocks,
        "expectations": expectations,
        "failed_analyses": failed,
        "passed": not failed and all(e["passed"] for e in expectations),
    }
    report["timing"] = {"wall_seconds": time.perf_counter() - start}
    return report


def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _to_plain(obj.tolist())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def report_body(report: dict) -> str:
    """Canonical JSON of a report without its timing block."""
    body = {k: v for k, v in report.items() if k != "timing"}
    return json.dumps(body, sort_keys=True, indent=2)
