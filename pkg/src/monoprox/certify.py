"""Executable checks for the inequalities satisfied by HPE trajectories.

Every check produces a :class:`CheckReport` whose ``slack`` is the smallest
value of ``bound - quantity`` over the instances examined, so a report passes
iff ``slack >= -tolerance``. Checks that cannot run (no known zero, no
closed-form gap, degenerate data) come back with ``status="skipped"``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from monoprox.ergodic import ErgodicAccumulator
from monoprox.exceptions import NoZeroError
from monoprox.operators import (
    as_point,
    distance_to_zero,
    enlargement_gap,
    operator_value,
    project_to_zero_set,
    resolvent,
    sampled_enlargement_violation,
    supports_gap,
)
from monoprox.solver import validate_step

__all__ = [
    "CheckReport",
    "AffineMinorant",
    "default_tolerance",
    "check_step_inequalities",
    "check_trajectory",
    "check_ppm_trajectory",
    "check_large_step_bounds",
    "check_trace_scalars",
    "check_sum_lower_bound",
    "check_prox_error_bound",
    "all_passed",
    "aggregate",
    "ergodic_snapshots",
]

ZERO_TEST_TOL = 1e-8
MONOTONE_DIST_TOL = 1e-9
TELESCOPE_RTOL = 1e-9
EPS_A_RTOL = 1e-10


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    slack: float
    worst_index: int | None
    tolerance: float
    status: str = "checked"
    note: str = ""
    gating: bool = True

    def to_json(self):
        d = asdict(self)
        for key in ("slack", "tolerance"):
            if not math.isfinite(d[key]):
                d[key] = str(d[key])
        return d


@dataclass(frozen=True)
class AffineMinorant:
    """The affine function ``z' -> <z' - z_tilde, v> - eps``."""

    z_tilde: np.ndarray
    v: np.ndarray
    eps: float

    def __call__(self, z):
        return float(np.dot(as_point(z) - self.z_tilde, self.v)) - self.eps


def default_tolerance(d0):
    return 1e-8 * (1.0 + (d0 or 0.0) ** 2)


def aggregate(name, items, tol, **kw):
    """Reduce ``(index, slack)`` pairs to one report."""
    if not items:
        return CheckReport(name, True, math.inf, None, tol, status="skipped", **kw)
    idx, slack = min(items, key=lambda p: (p[1] if not math.isnan(p[1]) else -math.inf))
    passed = (not math.isnan(slack)) and slack >= -tol
    return CheckReport(name, passed, float(slack), idx, tol, **kw)


def _skipped(name, tol, note):
    return CheckReport(name, True, math.inf, None, tol, status="skipped", note=note)


def _precondition(name, slack, index, tol, note):
    return CheckReport(name, False, float(slack), index, tol, status="precondition", note=note)


def all_passed(reports):
    return all(r.passed for r in reports if r.gating)


def _is_zero(op, z_star):
    if op is None:
        return True
    try:
        if distance_to_zero(op, z_star) <= ZERO_TEST_TOL:
            return True
    except NoZeroError:
        return False
    return float(np.linalg.norm(operator_value(op, z_star))) <= ZERO_TEST_TOL


def _step_slacks(z, cert, t, z_star, sigma):
    d = cert.z_tilde - z
    nd = float(np.linalg.norm(d))
    lv = cert.lam * cert.v
    nlv = float(np.linalg.norm(lv))
    gamma = AffineMinorant(cert.z_tilde, cert.v, cert.eps)
    z_plus = z - t * lv
    # minimum of t lam gamma + |. - z|^2 / 2, attained at z_plus
    min_val = t * cert.lam * gamma(z_plus) + 0.5 * float(np.dot(z_plus - z, z_plus - z))
    item3_rhs = 0.5 * ((1 - sigma**2) * t * nd**2 + t * (1 - t) * nlv**2)
    out = {
        "step.lv_lower": nlv - (1 - sigma) * nd,
        "step.lv_upper": (1 + sigma) * nd - nlv,
        "step.eps_budget": sigma**2 * nd**2 - 2 * cert.lam * cert.eps,
        "step.prox_value": min_val - item3_rhs,
    }
    if z_star is not None:
        dz = float(np.linalg.norm(z - z_star))
        s = math.sqrt(1 - sigma**2)
        out["step.minorant_at_zero"] = -gamma(z_star)
        out["step.distance_decrease"] = dz**2 - (
            float(np.linalg.norm(z_plus - z_star)) ** 2
            + (1 - sigma**2) * t * nd**2
            + t * (1 - t) * nlv**2
        )
        out["step.localization"] = min(
            dz / s - float(np.linalg.norm(z_star - cert.z_tilde)), dz / s - nd
        )
    return out


_STEP_NAMES = (
    "step.lv_lower",
    "step.lv_upper",
    "step.eps_budget",
    "step.prox_value",
    "step.minorant_at_zero",
    "step.distance_decrease",
    "step.localization",
)


def check_step_inequalities(z, cert, t, z_star, sigma, tol=1e-8, op=None, index=None):
    """Check the single-step inequalities for one HPE certificate.

    Parameters
    ----------
    z : array_like
        Point the certificate was issued for.
    cert : StepCertificate
    t : float
        Relaxation in ``[0, 1]``.
    z_star : array_like
        A zero of the operator. Verified against ``op`` when given.
    sigma : float
    tol : float
    op : MonotoneOperator, optional
    index : int, optional
        Iteration index stored as ``worst_index``.

    Returns
    -------
    list of CheckReport
        Seven reports, or a single precondition report when ``z_star`` is
        not a zero of ``op``.
    """
    z = as_point(z)
    z_star = as_point(z_star, z.shape[0])
    if not _is_zero(op, z_star):
        return [_precondition("step.zero_test", -1.0, index, tol,
                              "z_star is not a zero of the operator")]
    slacks = _step_slacks(z, cert, t, z_star, sigma)
    return [aggregate(name, [(index, slacks[name])], tol) for name in _STEP_NAMES]


def ergodic_snapshots(traj):
    if len(traj.snapshots) == len(traj.records):
        return traj.snapshots
    acc = ErgodicAccumulator(traj.op.dim, strict=False)
    snaps = []
    for r in traj.records:
        acc.update(r.t, r.cert.lam, r.cert.z_tilde, r.cert.v, r.cert.eps)
        snaps.append(acc.finalize())
    return snaps


def _membership_slack(op, z, v, eps, seed):
    if supports_gap(op):
        gap = enlargement_gap(op, z, v)
        return eps - gap
    return -sampled_enlargement_violation(op, z, v, eps, sample_count=256, seed=seed)


def _ergodic_bound_slacks(Lambda, norm_v_a, eps_a, d0, sigma):
    s = math.sqrt(1 - sigma**2)
    return 2 * d0 / Lambda - norm_v_a, 2 * d0**2 / (Lambda * s) - eps_a


def check_trajectory(traj, z_star=None, tol=None):
    """Check every trajectory-level inequality of an r-HPE run.

    Parameters
    ----------
    traj : Trajectory
    z_star : array_like, optional
        A zero of the operator. Defaults to the projection of ``z0`` onto
        the zero set; distance-based checks are skipped when there is none.
    tol : float, optional
        Defaults to ``1e-8 * (1 + d0**2)``.
    """
    op, sigma = traj.op, traj.params.sigma
    d0 = traj.d0
    if z_star is None and d0 is not None:
        z_star = project_to_zero_set(op, traj.z0)
    if z_star is not None:
        z_star = as_point(z_star, op.dim)
        if d0 is None:
            d0 = float(np.linalg.norm(traj.z0 - z_star))
    if tol is None:
        tol = default_tolerance(d0)
    reports = []
    if z_star is not None and not _is_zero(op, z_star):
        reports.append(_precondition("trajectory.zero_test", -1.0, None, tol,
                                     "z_star is not a zero of the operator"))
        z_star = None

    step = {name: [] for name in _STEP_NAMES}
    crit, member, trange = [], [], []
    fejer, mono, item3 = [], [], []
    vbound, ebound, transport, telescope, eps_nonneg = [], [], [], [], []
    snaps = ergodic_snapshots(traj)
    partial = 0.0
    dz0 = float(np.linalg.norm(z_star - traj.z0)) if z_star is not None else None
    for rec, snap in zip(traj.records, snaps):
        k, z, cert, t = rec.k, rec.z_prev, rec.cert, rec.t
        crit.append((k, validate_step(z, cert, sigma)))
        trange.append((k, (1.0 - t) if t > 0 else t - 1.0))
        member.append((k, _membership_slack(op, cert.z_tilde, cert.v, cert.eps, seed=k)))
        for name, val in _step_slacks(z, cert, t, z_star, sigma).items():
            step[name].append((k, val))
        nd2 = rec.res_norm**2
        partial += t * nd2
        if z_star is not None:
            a = float(np.linalg.norm(z_star - z))
            b = float(np.linalg.norm(z_star - rec.z_next))
            fejer.append((k, a**2 - b**2 - t * (1 - sigma**2) * nd2))
            mono.append((k, a - b))
            item3.append((k, dz0**2 - b**2 - (1 - sigma**2) * partial))
            sv, se = _ergodic_bound_slacks(
                snap.Lambda, float(np.linalg.norm(snap.v_a)), snap.eps_a, d0, sigma)
            vbound.append((k, sv))
            ebound.append((k, se))
        if supports_gap(op):
            transport.append((k, snap.eps_a - enlargement_gap(op, snap.z_tilde_a, snap.v_a)))
        diff = traj.z0 - rec.z_next
        telescope.append((k, -float(np.linalg.norm(diff - snap.Lambda * snap.v_a))
                          / (1.0 + float(np.linalg.norm(diff)))))
        eps_nonneg.append((k, snap.eps_a / (1.0 + abs(snap.szv))))

    reports.append(aggregate("hpe.error_criterion", crit, tol))
    reports.append(aggregate("hpe.relaxation_range", trange, 0.0))
    reports.append(aggregate("enlargement.membership", member, tol,
                              note="" if supports_gap(op) else "sampled necessary condition"))
    for name in _STEP_NAMES:
        if name in ("step.minorant_at_zero", "step.distance_decrease", "step.localization") and z_star is None:
            reports.append(_skipped(name, tol, "no known zero"))
        else:
            reports.append(aggregate(name, step[name], tol))
    if z_star is None:
        for name in ("fejer.decrease", "fejer.monotone", "fejer.telescoped",
                     "ergodic.v_bound", "ergodic.eps_bound"):
            reports.append(_skipped(name, tol, "no known zero"))
    else:
        reports.append(aggregate("fejer.decrease", fejer, tol))
        reports.append(aggregate("fejer.monotone", mono, MONOTONE_DIST_TOL))
        reports.append(aggregate("fejer.telescoped", item3, tol))
        reports.append(aggregate("ergodic.v_bound", vbound, tol))
        reports.append(aggregate("ergodic.eps_bound", ebound, tol))
    if supports_gap(op):
        reports.append(aggregate("ergodic.transportation", transport, tol))
    else:
        reports.append(_skipped("ergodic.transportation", tol, "no closed-form gap"))
    reports.append(aggregate("ergodic.telescoping", telescope, TELESCOPE_RTOL))
    reports.append(aggregate("ergodic.eps_nonneg", eps_nonneg, EPS_A_RTOL))
    return reports


def check_ppm_trajectory(traj, tol=None):
    """Checks for inexact PPM runs.

    ``ppm.error_bound`` verifies ``||z_k - J(z_{k-1})|| <= e_k``;
    ``ppm.distance_bound`` verifies ``dist(z_k) <= d0 + sum_{j<=k} e_j``,
    which follows from nonexpansiveness of the resolvent.
    """
    if tol is None:
        tol = default_tolerance(traj.d0)
    err, dist = [], []
    total = 0.0
    for rec in traj.records:
        p = resolvent(traj.op, rec.cert.lam, rec.z_prev)
        err.append((rec.k, rec.ppm_error - float(np.linalg.norm(rec.z_next - p))))
        total += rec.ppm_error
        if traj.d0 is not None:
            dist.append((rec.k, traj.d0 + total - distance_to_zero(traj.op, rec.z_next)))
    reports = [aggregate("ppm.error_bound", err, tol)]
    if traj.d0 is None:
        reports.append(_skipped("ppm.distance_bound", tol, "no known zero"))
    else:
        reports.append(aggregate("ppm.distance_bound", dist, tol))
    return reports


def _large_step_reports(k, t, lam, res, norm_v, eps, Lambda, norm_v_a, eps_a,
                        sigma, eta, tau, d0, tol):
    names = ("large_step.pointwise_v", "large_step.pointwise_eps", "large_step.ergodic_v",
             "large_step.ergodic_eps", "large_step.aggregate_stepsize")
    pre = [(int(ki), min(li * ri - eta, ti - tau)) for ki, ti, li, ri in zip(k, t, lam, res)]
    reports = [aggregate("large_step.precondition", pre, tol)]
    if not d0 or d0 <= 0:
        return reports + [_skipped(n, tol, "d0 = 0") for n in names]
    s2 = 1 - sigma**2
    s = math.sqrt(s2)
    kk = np.asarray(k, dtype=float)
    min_v = np.minimum.accumulate(np.asarray(norm_v, dtype=float))
    min_e = np.minimum.accumulate(np.asarray(eps, dtype=float))
    b_v = d0**2 / (eta * (1 - sigma) * kk * tau)
    b_e = sigma**2 / (2 * eta) * d0**3 / (s2 * kk * tau) ** 1.5
    b_va = 2 * d0**2 / ((tau * kk) ** 1.5 * eta * s)
    b_ea = 2 * d0**3 / ((tau * kk) ** 1.5 * eta * s2)
    b_L = (tau * kk) ** 1.5 * eta * s / d0
    ks = [int(x) for x in k]
    slacks = (b_v - min_v, b_e - min_e, b_va - np.asarray(norm_v_a),
              b_ea - np.asarray(eps_a), np.asarray(Lambda) - b_L)
    for name, sl in zip(names, slacks):
        reports.append(aggregate(name, list(zip(ks, sl.tolist())), tol))
    return reports


def check_large_step_bounds(traj, eta, tau, d0, tol=None):
    """Pointwise and ergodic rates under the large-step condition.

    For every k checks the four bound families: best pointwise ``||v_i||``
    and ``eps_i``, ergodic ``||v_a||`` and ``eps_a``, and the lower bound on
    the aggregate stepsize. A ``large_step.precondition`` report fails, naming the
    first offending k, when some step violates ``lam ||z_tilde - z|| >= eta``
    or ``t >= tau``.
    """
    if tol is None:
        tol = default_tolerance(d0)
    recs = traj.records
    snaps = ergodic_snapshots(traj)
    return _large_step_reports(
        [r.k for r in recs], [r.t for r in recs], [r.cert.lam for r in recs],
        [r.res_norm for r in recs], [float(np.linalg.norm(r.cert.v)) for r in recs],
        [r.cert.eps for r in recs], [s.Lambda for s in snaps],
        [float(np.linalg.norm(s.v_a)) for s in snaps], [s.eps_a for s in snaps],
        traj.params.sigma, eta, tau, d0, tol,
    )


def check_trace_scalars(rows, sigma, tau, d0, eta=None, tol=None):
    """Checks that need only the scalar trace columns.

    Parameters
    ----------
    rows : list of dict
        Trace rows with float values under the trace column names.
    sigma, tau : float
    d0 : float or None
    eta : float, optional
        Large-step threshold; enables the rate checks.
    """
    if tol is None:
        tol = default_tolerance(d0)
    col = {key: [r[key] for r in rows] for key in rows[0]}
    k = [int(x) for x in col["k"]]
    reports = []
    trange = [(ki, min(1.0 - t, t - tau)) for ki, t in zip(k, col["t"])]
    reports.append(aggregate("hpe.relaxation_range", trange, 0.0))
    lower, upper, epsb, agg = [], [], [], []
    Lam = 0.0
    for ki, t, lam, nv, e, res, L in zip(k, col["t"], col["lambda"], col["norm_v"],
                                         col["eps"], col["res_norm"], col["Lambda"]):
        lv = lam * nv
        lower.append((ki, lv - (1 - sigma) * res))
        upper.append((ki, (1 + sigma) * res - lv))
        epsb.append((ki, sigma**2 * res**2 - 2 * lam * e))
        Lam += t * lam
        agg.append((ki, -abs(L - Lam) / (1.0 + abs(Lam))))
    reports += [
        aggregate("step.lv_lower", lower, tol),
        aggregate("step.lv_upper", upper, tol),
        aggregate("step.eps_budget", epsb, tol),
        aggregate("ergodic.aggregate_stepsize", agg, 1e-12),
    ]
    has_dist = "dist_to_zero" in col and all(
        isinstance(x, float) and math.isfinite(x) for x in col["dist_to_zero"])
    if d0 is None or not has_dist:
        for name in ("fejer.decrease", "fejer.telescoped", "ergodic.v_bound", "ergodic.eps_bound"):
            reports.append(_skipped(name, tol, "no known zero"))
    else:
        fejer, item3, vb, eb = [], [], [], []
        prev = d0
        partial = 0.0
        # distances to the zero set obey the same decrease as distances to any zero
        for ki, t, res, dist, L, nva, ea in zip(k, col["t"], col["res_norm"],
                                                col["dist_to_zero"], col["Lambda"],
                                                col["norm_v_a"], col["eps_a"]):
            fejer.append((ki, prev**2 - dist**2 - t * (1 - sigma**2) * res**2))
            partial += t * res**2
            item3.append((ki, d0**2 - dist**2 - (1 - sigma**2) * partial))
            sv, se = _ergodic_bound_slacks(L, nva, ea, d0, sigma)
            vb.append((ki, sv))
            eb.append((ki, se))
            prev = dist
        reports += [
            aggregate("fejer.decrease", fejer, tol),
            aggregate("fejer.telescoped", item3, tol),
            aggregate("ergodic.v_bound", vb, tol),
            aggregate("ergodic.eps_bound", eb, tol),
        ]
    if eta is not None and d0 is not None:
        reports += _large_step_reports(
            k, col["t"], col["lambda"], col["res_norm"], col["norm_v"], col["eps"],
            col["Lambda"], col["norm_v_a"], col["eps_a"], sigma, eta, tau, d0, tol)
    return reports


def check_sum_lower_bound(alphas, C, tol=1e-12):
    """``sum(alphas) >= m**1.5 / sqrt(C)`` whenever ``sum(alphas**-2) <= C``."""
    a = np.asarray(alphas, dtype=float)
    name = "sum_lower_bound"
    if a.size == 0 or np.any(a <= 0):
        return _precondition(name, -1.0, None, tol, "alphas must be positive")
    inv = float(np.sum(a**-2.0))
    if inv > C * (1 + 1e-12):
        return _precondition(name, C - inv, None, tol, "sum of alpha^-2 exceeds C")
    m = a.size
    slack = float(a.sum()) - m**1.5 / math.sqrt(C)
    return CheckReport(name, slack >= -tol, slack, None, tol)


def check_prox_error_bound(op, z, cert, tol=1e-10):
    """Lower bound on the HPE residual by the distance to the exact prox point.

    With ``p = (lam T + I)^{-1} z`` the corrected inequality reads

        ||lam v + z_tilde - z||^2 + 2 lam eps
            >= ||z_tilde - p||^2 + ||lam v - (z - p)||^2

    and is the gating one. The variant whose last term is
    ``||(p - z) / lam||^2`` is reported with ``gating=False``; it already
    fails on exact triples.

    Returns
    -------
    (CheckReport, CheckReport)
        As-written variant, corrected variant.
    """
    z = as_point(z, op.dim)
    lam = cert.lam
    names = ("prox_error.as_written", "prox_error.corrected")
    slack = _membership_slack(op, cert.z_tilde, cert.v, cert.eps, seed=0)
    if slack < -tol:
        return tuple(_precondition(n, slack, None, tol, "v is not in the eps-enlargement")
                     for n in names)
    p = resolvent(op, lam, z)
    r = lam * cert.v + cert.z_tilde - z
    lhs = float(np.dot(r, r)) + 2 * lam * cert.eps
    base = float(np.dot(cert.z_tilde - p, cert.z_tilde - p))
    as_written = base + float(np.dot((p - z) / lam, (p - z) / lam))
    w = lam * cert.v - (z - p)
    corrected = base + float(np.dot(w, w))
    return (
        CheckReport(names[0], lhs - as_written >= -tol, lhs - as_written, None, tol,
                    gating=False, note="non-gating; fails on exact triples"),
        CheckReport(names[1], lhs - corrected >= -tol, lhs - corrected, None, tol),
    )
