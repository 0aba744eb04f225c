"""Batch front end: run experiments, re-certify stored traces, sweep k.

Usage::

    monoprox run --config exp.json [--full-state]
    monoprox certify --trace trace.csv --config exp.json [--scalar-only]
    monoprox sweep --config exp.json --k 8,16,32

Exit codes: 0 success, 1 a gating check failed, 2 configuration or input
error, 3 solver abort. ``MONOPROX_SEED`` overrides the configured seed.
Relative output paths are resolved against the config file's directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from monoprox import operators as ops
from monoprox.certify import (
    CheckReport,
    aggregate,
    all_passed,
    check_large_step_bounds,
    check_ppm_trajectory,
    check_trace_scalars,
    check_trajectory,
    default_tolerance,
    ergodic_snapshots,
)
from monoprox.exceptions import (
    ConfigError,
    InvalidCertificateError,
    NoZeroError,
    NumericalFailure,
)
from monoprox.solver import (
    ErrorSchedule,
    ExactOracle,
    HpeParams,
    IterationRecord,
    LargeStepOracle,
    PerturbedOracle,
    Schedule,
    StepCertificate,
    Trajectory,
    ppm_solve,
    rhpe_solve,
)

log = logging.getLogger("monoprox")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

TRACE_COLUMNS = ["k", "t", "lambda", "norm_v", "eps", "res_norm", "Lambda",
                 "norm_v_a", "eps_a", "dist_to_zero"]
SWEEP_COLUMNS = ["k", "min_norm_v", "bound_pointwise_v", "ratio_pointwise_v",
                 "min_eps", "bound_pointwise_eps", "norm_v_a", "bound_ergodic_v",
                 "ratio_ergodic_v", "eps_a", "bound_ergodic_eps", "Lambda", "bound_Lambda"]
SIDECAR_SUFFIX = ".state.json"
CONSISTENCY_RTOL = 1e-12

_positive = {"type": "number", "exclusiveMinimum": 0}
_schedule = {"oneOf": [_positive, {"type": "array", "items": _positive, "minItems": 1}]}
_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_spd = {
    "type": "object",
    "required": ["dim", "eig_min", "eig_max", "seed"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "eig_min": {"type": "number", "minimum": 0},
        "eig_max": {"type": "number", "minimum": 0},
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["problem", "z0"],
    "properties": {
        "name": {"type": "string"},
        "problem": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["identity", "affine", "subdiff_abs"]},
                "dim": {"type": "integer", "minimum": 1},
                "A": {"type": "array", "items": _vector, "minItems": 1},
                "b": _vector,
                "c": _positive,
                "random_spd": _spd,
            },
            "additionalProperties": False,
        },
        "z0": {"oneOf": [{"type": "number"}, _vector]},
        "solver": {"enum": ["rhpe", "ppm"]},
        "oracle": {
            "type": "object",
            "required": ["type"],
            "properties": {
                "type": {"enum": ["exact", "perturbed", "large_step"]},
                "lambda": _schedule,
                "rho": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "mode": {"enum": ["point", "enlargement", "mixed"]},
                "eta": _positive,
                "theta": _positive,
            },
            "additionalProperties": False,
        },
        "ppm": {
            "type": "object",
            "properties": {
                "lambda": _schedule,
                "errors": {
                    "type": "object",
                    "properties": {
                        "scale": {"type": "number", "minimum": 0},
                        "ratio": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "params": {
            "type": "object",
            "properties": {
                "sigma": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "tau": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "t": {"oneOf": [
                    {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                    {"type": "array", "minItems": 1,
                     "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
                ]},
                "max_iters": {"type": "integer", "minimum": 1},
                "tol_v": {"type": "number", "minimum": 0},
                "tol_eps": {"type": "number", "minimum": 0},
                "seed": {"type": "integer"},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {
                "trace": {"type": "string"},
                "summary": {"type": "string"},
                "sweep": {"type": "string"},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


# ---------------------------------------------------------------- config


def validate_config(cfg):
    """Validate a config dict in place, raising ConfigError naming the field."""
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}")
    cfg.setdefault("solver", "rhpe")
    cfg.setdefault("oracle", {"type": "exact"})
    cfg.setdefault("params", {})
    cfg.setdefault("outputs", {})
    if cfg["solver"] == "rhpe" and cfg["oracle"]["type"] == "large_step":
        if "eta" not in cfg["oracle"]:
            raise ConfigError("oracle.eta: required for the large_step oracle")
    try:
        build_params(cfg)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc
    try:
        op = build_problem(cfg["problem"])
        build_z0(cfg, op)
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"problem: {exc}") from exc
    return cfg


def load_config(path):
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("<root>: config must be a JSON object")
    seed = os.environ.get("MONOPROX_SEED")
    if seed is not None:
        try:
            cfg.setdefault("params", {})["seed"] = int(seed)
        except ValueError as exc:
            raise ConfigError(f"MONOPROX_SEED: not an integer: {seed!r}") from exc
    cfg = validate_config(cfg)
    cfg["_base_dir"] = str(path.resolve().parent)
    return cfg


def build_problem(spec):
    if "random_spd" in spec:
        r = spec["random_spd"]
        if r["eig_min"] > r["eig_max"]:
            raise ConfigError("random_spd: eig_min exceeds eig_max")
        return ops.random_spd(r["dim"], r["eig_min"], r["eig_max"], r["seed"], spec.get("b"))
    kind = spec.get("kind")
    if kind == "identity":
        if "dim" not in spec:
            raise ConfigError("identity problem needs 'dim'")
        return ops.identity(spec["dim"])
    if kind == "affine":
        if "A" not in spec:
            raise ConfigError("affine problem needs 'A' or 'random_spd'")
        return ops.affine(spec["A"], spec.get("b"))
    if kind == "subdiff_abs":
        return ops.subdiff_abs(spec.get("c", 1.0))
    raise ConfigError("problem needs a 'kind' or a 'random_spd' recipe")


def build_z0(cfg, op):
    z0 = cfg["z0"]
    if isinstance(z0, (int, float)):
        return np.full(op.dim, float(z0))
    return ops.as_point(z0, op.dim)


def build_params(cfg, max_iters=None):
    p = dict(cfg["params"])
    return HpeParams(
        sigma=p.get("sigma", 0.0),
        tau=p.get("tau", 1.0),
        relaxation=Schedule.of(p.get("t", 1.0)),
        max_iters=max_iters or p.get("max_iters", 100),
        tol_v=p.get("tol_v", 0.0),
        tol_eps=p.get("tol_eps", 0.0),
        seed=p.get("seed", 0),
    )


def build_oracle(cfg):
    o = cfg["oracle"]
    if o["type"] == "exact":
        return ExactOracle(Schedule.of(o.get("lambda", 1.0)))
    if o["type"] == "perturbed":
        return PerturbedOracle(Schedule.of(o.get("lambda", 1.0)), o.get("rho", 0.5),
                               o.get("mode", "mixed"))
    return LargeStepOracle(o["eta"], o.get("theta", 0.1))


def _ppm_errors(cfg):
    e = cfg.get("ppm", {}).get("errors", {})
    return ErrorSchedule(e.get("scale", 0.0), e.get("ratio", 0.0))


def solve(cfg, max_iters=None):
    """Build and run the configured solver; returns the Trajectory."""
    op = build_problem(cfg["problem"])
    z0 = build_z0(cfg, op)
    params = build_params(cfg, max_iters)
    if cfg["solver"] == "ppm":
        lam = cfg.get("ppm", {}).get("lambda", 1.0)
        return ppm_solve(op, Schedule.of(lam), _ppm_errors(cfg), params, z0)
    return rhpe_solve(op, build_oracle(cfg), params, z0)


def _large_step_eta(cfg):
    if cfg["solver"] == "rhpe" and cfg["oracle"]["type"] == "large_step":
        return cfg["oracle"]["eta"]
    return None


def gating_checks(cfg, traj):
    if cfg["solver"] == "ppm":
        reports = check_ppm_trajectory(traj)
        if _ppm_errors(cfg).scale == 0:
            reports += check_trajectory(traj)
        return reports
    reports = check_trajectory(traj)
    eta = _large_step_eta(cfg)
    if eta is not None and traj.d0 is not None:
        reports += check_large_step_bounds(traj, eta, traj.params.tau, traj.d0)
    return reports


# ---------------------------------------------------------------- files


def _fmt(x):
    if x is None:
        return ""
    return format(float(x), ".17g")


def _output_path(cfg, key, default):
    name = cfg["outputs"].get(key, default)
    p = Path(name)
    return p if p.is_absolute() else Path(cfg.get("_base_dir", ".")) / p


def trace_rows(traj):
    rows = []
    for rec, snap in zip(traj.records, traj.snapshots):
        try:
            dist = ops.distance_to_zero(traj.op, rec.z_next)
        except NoZeroError:
            dist = None
        rows.append({
            "k": rec.k,
            "t": rec.t,
            "lambda": rec.cert.lam,
            "norm_v": float(np.linalg.norm(rec.cert.v)),
            "eps": rec.cert.eps,
            "res_norm": rec.res_norm,
            "Lambda": snap.Lambda,
            "norm_v_a": float(np.linalg.norm(snap.v_a)),
            "eps_a": snap.eps_a,
            "dist_to_zero": dist,
        })
    return rows


def write_trace(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow([str(r["k"])] + [_fmt(r[c]) for c in TRACE_COLUMNS[1:]])


def read_trace(path):
    """Parse a trace CSV into a list of dicts of floats (None for blanks)."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in TRACE_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise ConfigError(f"{path}: missing trace columns {missing}")
            rows = []
            for lineno, raw in enumerate(reader, start=2):
                try:
                    rows.append({c: (float(raw[c]) if raw[c] not in ("", None) else None)
                                 for c in TRACE_COLUMNS})
                except ValueError as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    except FileNotFoundError as exc:
        raise ConfigError(f"trace not found: {path}") from exc
    if not rows:
        raise ConfigError(f"{path}: trace has no rows")
    for r in rows:
        for c in TRACE_COLUMNS[:-1]:
            if r[c] is None:
                raise ConfigError(f"{path}: row k={r['k']} has an empty '{c}'")
    return rows


def _vec(x):
    return [float(v) for v in x]


def write_sidecar(path, traj):
    state = {
        "z0": _vec(traj.z0),
        "records": [
            {"k": r.k, "t": r.t, "lambda": r.cert.lam, "z_prev": _vec(r.z_prev),
             "z_tilde": _vec(r.cert.z_tilde), "v": _vec(r.cert.v), "eps": r.cert.eps,
             "z_next": _vec(r.z_next), "ppm_error": r.ppm_error}
            for r in traj.records
        ],
    }
    path.write_text(json.dumps(state, indent=1) + "\n")


def read_sidecar(path, op, params, solver, z0):
    """Rebuild a Trajectory (without snapshots) from a full-state file."""
    try:
        state = json.loads(Path(path).read_text())
        traj = Trajectory(op, ops.as_point(state["z0"], op.dim), params, solver=solver)
        for r in state["records"]:
            cert = StepCertificate(float(r["lambda"]), ops.as_point(r["z_tilde"], op.dim),
                                   ops.as_point(r["v"], op.dim), float(r["eps"]))
            z_prev = ops.as_point(r["z_prev"], op.dim)
            traj.records.append(IterationRecord(
                int(r["k"]), z_prev, cert, float(r["t"]),
                ops.as_point(r["z_next"], op.dim),
                float(np.linalg.norm(cert.z_tilde - z_prev)),
                float(np.linalg.norm(cert.lam * cert.v)), float(r.get("ppm_error", 0.0)),
            ))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: unreadable full-state file ({exc})") from exc
    try:
        traj.d0 = ops.distance_to_zero(op, traj.z0)
    except NoZeroError:
        traj.d0 = None
    return traj


def write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _public_config(cfg):
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


# ---------------------------------------------------------------- commands


def run_experiment(cfg, full_state=False):
    """Run one configured experiment and write its trace and summary.

    Returns
    -------
    int
        Exit status: 0 if the solver finished and every gating check passed.
    """
    try:
        traj = solve(cfg)
    except (InvalidCertificateError, NumericalFailure) as exc:
        log.error("solver aborted: %s", exc)
        return EXIT_ABORT
    reports = gating_checks(cfg, traj)
    trace_path = _output_path(cfg, "trace", "trace.csv")
    write_trace(trace_path, trace_rows(traj))
    if full_state:
        write_sidecar(Path(str(trace_path) + SIDECAR_SUFFIX), traj)
    passed = all_passed(reports)
    summary = {
        "config": _public_config(cfg),
        "stop_reason": traj.stop_reason,
        "iterations": len(traj),
        "final_iterate": _vec(traj.final),
        "d0": traj.d0,
        "checks": [r.to_json() for r in reports],
        "passed": passed,
    }
    write_json(_output_path(cfg, "summary", "summary.json"), summary)
    for r in reports:
        if not r.passed:
            log.warning("check %s failed: slack %.3e at k=%s", r.name, r.slack, r.worst_index)
    return EXIT_OK if passed else EXIT_CHECK


def _consistency_reports(rows, traj, cfg):
    """Compare the CSV against the full state and check the update chain."""
    recomputed = trace_rows(traj)
    items = []
    if len(recomputed) != len(rows):
        return [CheckReport("trace.sidecar_consistency", False, -1.0, None,
                            CONSISTENCY_RTOL, note="row count differs from full state")]
    for a, b in zip(rows, recomputed):
        worst = 0.0
        for c in TRACE_COLUMNS:
            x, y = a[c], b[c]
            if x is None or y is None:
                if (x is None) != (y is None):
                    worst = math.inf
                continue
            worst = max(worst, abs(x - y) / (1.0 + abs(y)))
        items.append((int(a["k"]), -worst))
    chain = []
    z = traj.z0
    expected_z0 = build_z0(cfg, traj.op)
    start = -float(np.max(np.abs(z - expected_z0)))
    for rec in traj.records:
        gap = float(np.max(np.abs(rec.z_prev - z)))
        if cfg["solver"] == "rhpe":
            step = rec.z_prev - rec.t * rec.cert.lam * rec.cert.v
            gap = max(gap, float(np.linalg.norm(rec.z_next - step))
                      / (1.0 + float(np.linalg.norm(rec.z_prev))))
        chain.append((rec.k, -gap))
        z = rec.z_next
    return [
        aggregate("trace.sidecar_consistency", items, CONSISTENCY_RTOL),
        aggregate("trace.chain", [(0, start)] + chain, CONSISTENCY_RTOL),
    ]


def certify_trace(trace_path, cfg, scalar_only=False, summary_path=None):
    """Re-run the applicable checks on a stored trace.

    Scalar checks use only the CSV. Vector checks need the full-state file
    written by ``run --full-state``; without it the result is a partial
    certification that can succeed only when ``scalar_only`` is set.
    """
    trace_path = Path(trace_path)
    rows = read_trace(trace_path)
    op = build_problem(cfg["problem"])
    z0 = build_z0(cfg, op)
    params = build_params(cfg)
    try:
        d0 = ops.distance_to_zero(op, z0)
    except NoZeroError:
        d0 = None
    reports = [replace(r, name="scalar." + r.name) for r in check_trace_scalars(
        rows, params.sigma, params.tau, d0, eta=_large_step_eta(cfg))]
    notes = []
    sidecar = Path(str(trace_path) + SIDECAR_SUFFIX)
    if sidecar.exists():
        traj = read_sidecar(sidecar, op, params, cfg["solver"], z0)
        traj.snapshots = ergodic_snapshots(traj)
        reports += _consistency_reports(rows, traj, cfg)
        reports += gating_checks(cfg, traj)
        mode = "full"
    else:
        mode = "scalar"
        notes.append("full-state file missing: vector checks not run")
        if not scalar_only:
            reports.append(CheckReport(
                "trace.full_state", False, -1.0, None, 0.0, status="precondition",
                note="rerun with --full-state or request --scalar-only"))
    passed = all_passed(reports)
    if summary_path is None:
        summary_path = Path(str(trace_path) + ".certify.json")
    write_json(Path(summary_path), {
        "trace": trace_path.name,
        "mode": mode,
        "notes": notes,
        "d0": d0,
        "checks": [r.to_json() for r in reports],
        "passed": passed,
    })
    for r in reports:
        if not r.passed:
            log.warning("check %s failed: slack %.3e at k=%s", r.name, r.slack, r.worst_index)
    return EXIT_OK if passed else EXIT_CHECK


def loglog_slope(ks, values):
    """Least-squares slope of log(values) against log(ks)."""
    ks = np.asarray(ks, dtype=float)
    vals = np.asarray(values, dtype=float)
    keep = vals > 0
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(ks[keep]), np.log(vals[keep]), 1)[0])


def _ratio(obs, bound):
    if bound == 0:
        return 0.0 if obs == 0 else math.inf
    return obs / bound


def sweep_table(traj, k_list, eta, tau):
    """Observed quantities against the large-step rate bounds.

    Rows are emitted for each requested k reached by the run; if the run
    stopped earlier, its terminal iteration is appended.
    """
    if traj.d0 is None:
        raise ConfigError("sweep needs an operator with a known zero")
    K = len(traj)
    ks = [k for k in k_list if k <= K]
    if K and K < max(k_list) and K not in ks:
        ks.append(K)
    d0, sigma = traj.d0, traj.params.sigma
    s2 = 1 - sigma**2
    rows = []
    for k in ks:
        recs = traj.records[:k]
        snap = traj.snapshots[k - 1]
        row = {
            "k": k,
            "min_norm_v": min(float(np.linalg.norm(r.cert.v)) for r in recs),
            "bound_pointwise_v": d0**2 / (eta * (1 - sigma) * k * tau),
            "min_eps": min(r.cert.eps for r in recs),
            "bound_pointwise_eps": sigma**2 / (2 * eta) * d0**3 / (s2 * k * tau) ** 1.5,
            "norm_v_a": float(np.linalg.norm(snap.v_a)),
            "bound_ergodic_v": 2 * d0**2 / ((tau * k) ** 1.5 * eta * math.sqrt(s2)),
            "eps_a": snap.eps_a,
            "bound_ergodic_eps": 2 * d0**3 / ((tau * k) ** 1.5 * eta * s2),
            "Lambda": snap.Lambda,
            "bound_Lambda": (tau * k) ** 1.5 * eta * math.sqrt(s2) / d0 if d0 > 0 else math.inf,
        }
        row["ratio_pointwise_v"] = _ratio(row["min_norm_v"], row["bound_pointwise_v"])
        row["ratio_ergodic_v"] = _ratio(row["norm_v_a"], row["bound_ergodic_v"])
        rows.append(row)
    return rows


def sweep_passed(rows, tol):
    pairs = [("min_norm_v", "bound_pointwise_v"), ("min_eps", "bound_pointwise_eps"),
             ("norm_v_a", "bound_ergodic_v"), ("eps_a", "bound_ergodic_eps")]
    ok = all(r[o] <= r[b] + tol for r in rows for o, b in pairs)
    return ok and all(r["Lambda"] >= r["bound_Lambda"] - tol for r in rows)


def sweep(cfg, k_list, out_path=None):
    """Tabulate observed rates against the bounds for each k in ``k_list``.

    One run of ``max(k_list)`` iterations serves every k: the per-step
    randomness is keyed by (seed, k), so a shorter run is an exact prefix.
    ``eta`` is the oracle's threshold for large-step runs and the smallest
    observed ``lam ||z_tilde - z||`` otherwise.

    Returns
    -------
    (int, dict)
        Exit status and a summary with the fitted log-log slope of
        ``norm_v_a``.
    """
    k_list = [int(k) for k in k_list]
    if not k_list or any(k < 1 for k in k_list) or k_list != sorted(set(k_list)):
        raise ConfigError("--k: expected a strictly increasing list of positive integers")
    try:
        traj = solve(cfg, max_iters=max(k_list))
    except (InvalidCertificateError, NumericalFailure) as exc:
        log.error("solver aborted: %s", exc)
        return EXIT_ABORT, {}
    eta = _large_step_eta(cfg)
    if eta is None:
        eta = min((r.cert.lam * r.res_norm for r in traj.records), default=0.0)
        if eta <= 0:
            raise ConfigError("sweep: no positive large-step threshold available")
    tau = traj.params.tau
    rows = sweep_table(traj, k_list, eta, tau)
    if out_path is None:
        out_path = _output_path(cfg, "sweep", "sweep.csv")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([str(r["k"])] + [_fmt(r[c]) for c in SWEEP_COLUMNS[1:]])
    passed = sweep_passed(rows, default_tolerance(traj.d0))
    info = {
        "eta": eta,
        "tau": tau,
        "d0": traj.d0,
        "iterations": len(traj),
        "stop_reason": traj.stop_reason,
        "slope_norm_v_a": loglog_slope([r["k"] for r in rows], [r["norm_v_a"] for r in rows]),
        "passed": passed,
    }
    write_json(Path(str(out_path) + ".json"), info)
    return (EXIT_OK if passed else EXIT_CHECK), info


# ---------------------------------------------------------------- entry point


def _parse_k(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad k list {text!r}") from exc


def build_parser():
    parser = argparse.ArgumentParser(prog="monoprox", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--full-state", action="store_true",
                       help="also write the full vector state next to the trace")

    p_cert = sub.add_parser("certify", help="re-check a stored trace")
    p_cert.add_argument("--trace", required=True)
    p_cert.add_argument("--config", required=True)
    p_cert.add_argument("--scalar-only", action="store_true",
                        help="accept a certification without the full-state file")
    p_cert.add_argument("--summary", help="summary JSON path")

    p_sweep = sub.add_parser("sweep", help="tabulate rates against bounds")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--k", required=True, type=_parse_k)
    p_sweep.add_argument("--out", help="output CSV path")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            return run_experiment(cfg, full_state=args.full_state)
        if args.command == "certify":
            return certify_trace(args.trace, cfg, scalar_only=args.scalar_only,
                                 summary_path=args.summary)
        code, info = sweep(cfg, args.k, args.out)
        if info:
            print(f"slope(norm_v_a) = {info['slope_norm_v_a']:.4f}  "
                  f"iterations = {info['iterations']}  passed = {info['passed']}")
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
