"""Proximal point and relaxed hybrid proximal-extragradient drivers.

An r-HPE iteration asks a *step oracle* for a certificate
``(lam, z_tilde, v, eps)`` with ``v`` in the eps-enlargement of ``T`` at
``z_tilde`` and

    ||lam v + z_tilde - z||^2 + 2 lam eps <= sigma^2 ||z_tilde - z||^2,

then moves ``z <- z - t lam v`` with a relaxation ``t`` in ``(0, 1]``.
Three oracles are provided: exact proximal steps, randomly perturbed steps
that use part of the error budget, and exact steps whose stepsize is chosen
to satisfy the large-step condition ``lam ||z_tilde - z|| >= eta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from monoprox.ergodic import ErgodicAccumulator
from monoprox.exceptions import (
    InvalidCertificateError,
    NoZeroError,
    NumericalFailure,
    Solved,
)
from monoprox.operators import (
    MonotoneOperator,
    as_point,
    distance_to_zero,
    enlargement_gap,
    operator_value,
    resolvent,
    supports_gap,
)

__all__ = [
    "Schedule",
    "ErrorSchedule",
    "HpeParams",
    "StepCertificate",
    "IterationRecord",
    "Trajectory",
    "ExactOracle",
    "PerturbedOracle",
    "LargeStepOracle",
    "validate_step",
    "exact_prox_step",
    "perturbed_step",
    "large_step_search",
    "rhpe_solve",
    "ppm_solve",
]

# certificates with slack below -REJECT_RTOL * (1 + ||z_tilde - z||^2) are rejected
REJECT_RTOL = 1e-12
MAX_RESCALE = 100
MAX_SEARCH = 200


@dataclass(frozen=True)
class Schedule:
    """A positive sequence indexed from 1; the last entry repeats forever."""

    values: tuple

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("schedule needs at least one value")

    @classmethod
    def of(cls, spec):
        if isinstance(spec, Schedule):
            return spec
        if np.isscalar(spec):
            return cls((float(spec),))
        return cls(tuple(float(x) for x in spec))

    def __call__(self, k):
        return self.values[min(k, len(self.values)) - 1]

    def to_json(self):
        return self.values[0] if len(self.values) == 1 else list(self.values)


@dataclass(frozen=True)
class ErrorSchedule:
    """Summable error tolerances ``e_k = scale * ratio**k``."""

    scale: float = 0.0
    ratio: float = 0.0

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("error scale must be nonnegative")
        if self.scale > 0 and not 0 <= self.ratio < 1:
            raise ValueError("error ratio must lie in [0, 1) for a summable schedule")

    def __call__(self, k):
        return self.scale * self.ratio**k if self.scale > 0 else 0.0

    def total(self, k):
        return sum(self(j) for j in range(1, k + 1))


@dataclass(frozen=True)
class HpeParams:
    sigma: float = 0.0
    tau: float = 1.0
    relaxation: Schedule = field(default_factory=lambda: Schedule((1.0,)))
    max_iters: int = 100
    tol_v: float = 0.0
    tol_eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "relaxation", Schedule.of(self.relaxation))
        if not 0 <= self.sigma < 1:
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma}")
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        for t in self.relaxation.values:
            if not self.tau <= t <= 1:
                raise ValueError(f"relaxation {t} outside [tau, 1] = [{self.tau}, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.tol_v < 0 or self.tol_eps < 0:
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True)
class StepCertificate:
    lam: float
    z_tilde: np.ndarray
    v: np.ndarray
    eps: float = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.eps >= 0:
            raise ValueError("eps must be nonnegative")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    z_prev: np.ndarray
    cert: StepCertificate
    t: float
    z_next: np.ndarray
    res_norm: float
    lv_norm: float
    # PPM only: norm of the deliberate error added to the proximal point
    ppm_error: float = 0.0


@dataclass
class Trajectory:
    op: MonotoneOperator
    z0: np.ndarray
    params: HpeParams
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    d0: float | None = None
    stop_reason: str = "max_iters"
    solver: str = "rhpe"
    oracle: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    @property
    def final(self):
        return self.records[-1].z_next if self.records else self.z0

    def iterates(self):
        """Array of z_0, z_1, ..., z_K."""
        return np.array([self.z0] + [r.z_next for r in self.records])


def validate_step(z, cert, sigma):
    """Slack of the relative error criterion; nonnegative iff it holds."""
    z = as_point(z)
    d = cert.z_tilde - z
    r = cert.lam * cert.v + d
    return sigma**2 * float(np.dot(d, d)) - (float(np.dot(r, r)) + 2 * cert.lam * cert.eps)


def exact_prox_step(op, lam, z):
    z = as_point(z, op.dim)
    p = resolvent(op, lam, z)
    return StepCertificate(float(lam), p, (z - p) / lam, 0.0)


def _unit(rng, n):
    u = rng.standard_normal(n)
    return u / np.linalg.norm(u)


def perturbed_step(op, lam, z, sigma, rho, seed, mode="point"):
    """Inexact proximal step that spends part of the error budget.

    ``mode="point"`` moves the proximal point by a random ``delta`` and uses
    the operator value there (eps = 0); the residual uses at most a
    ``rho`` fraction of ``sigma^2 ||z_tilde - z||^2``.
    ``mode="enlargement"`` keeps the exact proximal point, sets
    ``eps = rho sigma^2 ||z_tilde - z||^2 / (2 lam)`` and moves ``v`` inside
    the enlargement so that the residual fits in the remaining budget.

    Raises
    ------
    Solved
        If ``z`` is already a zero of ``op``.
    NumericalFailure
        If no admissible perturbation was found after 100 halvings.

    Notes
    -----
    Once the perturbation would fall below rounding of the current point the
    exact step is returned (with the requested ``eps`` in enlargement mode).
    """
    z = as_point(z, op.dim)
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    exact = exact_prox_step(op, lam, z)
    d = exact.z_tilde - z
    nd = float(np.linalg.norm(d))
    if nd == 0.0:
        raise Solved("proximal point equals z")
    if sigma == 0 or rho == 0:
        return exact
    rng = np.random.default_rng(seed)
    budget = sigma**2 * nd**2

    if mode == "point":
        if op.kind == "subdiff_abs" and exact.z_tilde[0] == 0.0:
            # kink: every nearby point selects v = +-c, which misses the budget
            return exact
        u = _unit(rng, op.dim)
        scale = sigma * nd
        floor = np.finfo(float).eps * (1.0 + float(np.linalg.norm(exact.z_tilde)))
        for _ in range(MAX_RESCALE):
            if scale < floor:
                # below rounding a perturbed point cannot be told from the exact one
                return exact
            zt = exact.z_tilde + scale * u
            cert = StepCertificate(float(lam), zt, operator_value(op, zt), 0.0)
            r = lam * cert.v + zt - z
            if np.dot(r, r) <= rho * sigma**2 * np.dot(zt - z, zt - z):
                return cert
            scale *= 0.5
        raise NumericalFailure("point perturbation did not fit the error budget")

    if mode != "enlargement":
        raise ValueError(f"unknown perturbation mode {mode!r}")
    if not supports_gap(op):
        raise ValueError("enlargement perturbation needs a closed-form gap")
    eps = rho * budget / (2 * lam)
    u = rng.standard_normal(op.dim)
    if op.kind == "identity":
        q = float(np.dot(u, u))
    else:
        w, V = op._sym_eigvals, op._sym_eigvecs
        keep = w > 1e-10 * max(1.0, abs(w[-1]))
        coef = V[:, keep].T @ u
        u = V[:, keep] @ coef
        q = float(np.sum(coef**2 / w[keep]))
    if q == 0.0 or not np.any(u):
        return StepCertificate(float(lam), exact.z_tilde, exact.v, eps)
    s = min(np.sqrt(4 * eps / q), np.sqrt(1 - rho) * sigma * nd / (lam * np.linalg.norm(u)))
    s *= 1 - 1e-6
    floor = np.finfo(float).eps * (1.0 + float(np.linalg.norm(exact.v)))
    for _ in range(MAX_RESCALE):
        if s * float(np.linalg.norm(u)) < floor:
            return StepCertificate(float(lam), exact.z_tilde, exact.v, eps)
        cert = StepCertificate(float(lam), exact.z_tilde, exact.v + s * u, eps)
        r = lam * cert.v + cert.z_tilde - z
        if (
            enlargement_gap(op, cert.z_tilde, cert.v) <= eps
            and np.dot(r, r) <= (1 - rho) * budget
        ):
            return cert
        s *= 0.5
    raise NumericalFailure("enlargement perturbation did not fit the error budget")


def large_step_search(op, z, eta, theta, max_iter=MAX_SEARCH):
    """Find ``lam`` with ``lam ||J_lam z - z||`` in ``[eta, (1 + theta) eta]``.

    ``phi(lam) = lam ||J_lam z - z||`` is continuous and nondecreasing, so we
    double (or halve) from ``lam = 1`` to bracket the window and then bisect
    in log scale.

    Returns
    -------
    lam : float
    cert : StepCertificate
        The exact proximal step at ``lam``.
    """
    if not eta > 0 or not theta > 0:
        raise ValueError("eta and theta must be positive")
    z = as_point(z, op.dim)
    hi_target = (1 + theta) * eta
    evals = 0

    def phi(lam):
        nonlocal evals
        evals += 1
        if evals > max_iter:
            raise NumericalFailure(f"large-step search exceeded {max_iter} evaluations")
        cert = exact_prox_step(op, lam, z)
        return lam * float(np.linalg.norm(cert.z_tilde - z)), cert

    lam = 1.0
    f, cert = phi(lam)
    if f == 0.0:
        raise Solved("proximal residual vanishes")
    if eta <= f <= hi_target:
        return lam, cert
    if f < eta:
        lo = lam
        while f < eta:
            lo = lam
            lam *= 2.0
            f, cert = phi(lam)
        hi = lam
    else:
        hi = lam
        while f > hi_target:
            hi = lam
            lam *= 0.5
            f, cert = phi(lam)
        lo = lam
    while not eta <= f <= hi_target:
        lam = np.sqrt(lo * hi)
        f, cert = phi(lam)
        if f < eta:
            lo = lam
        elif f > hi_target:
            hi = lam
    return float(lam), cert


@dataclass(frozen=True)
class ExactOracle:
    lam: Schedule = Schedule((1.0,))

    def step(self, op, z, k, params):
        return exact_prox_step(op, self.lam(k), z)

    def describe(self):
        return {"type": "exact", "lambda": self.lam.to_json()}


@dataclass(frozen=True)
class PerturbedOracle:
    """Perturbed steps; ``mode="mixed"`` alternates point/enlargement by k."""

    lam: Schedule = Schedule((1.0,))
    rho: float = 0.5
    mode: str = "mixed"

    def step(self, op, z, k, params):
        mode = self.mode
        if mode == "mixed":
            mode = "enlargement" if (k % 2 == 0 and supports_gap(op)) else "point"
        return perturbed_step(
            op, self.lam(k), z, params.sigma, self.rho, seed=(params.seed, k), mode=mode
        )

    def describe(self):
        return {"type": "perturbed", "lambda": self.lam.to_json(), "rho": self.rho,
                "mode": self.mode}


@dataclass(frozen=True)
class LargeStepOracle:
    eta: float = 0.1
    theta: float = 0.1

    def step(self, op, z, k, params):
        return large_step_search(op, z, self.eta, self.theta)[1]

    def describe(self):
        return {"type": "large_step", "eta": self.eta, "theta": self.theta}


def _initial_distance(op, z0):
    try:
        return distance_to_zero(op, z0)
    except NoZeroError:
        return None


def _stopped(params, v, eps):
    return float(np.linalg.norm(v)) <= params.tol_v and eps <= params.tol_eps


def rhpe_solve(op, oracle, params, z0):
    """Run the relaxed HPE method.

    Parameters
    ----------
    op : MonotoneOperator
    oracle : ExactOracle, PerturbedOracle or LargeStepOracle
    params : HpeParams
    z0 : array_like

    Returns
    -------
    Trajectory
        Stop reasons are ``"tolerance"``, ``"solved"`` (the oracle found an
        exact zero, or ``z0`` already met the tolerance) and ``"max_iters"``.

    Raises
    ------
    InvalidCertificateError
        If the oracle returns a step violating the error criterion.
    """
    z = as_point(z0, op.dim).copy()
    traj = Trajectory(op, z.copy(), params, d0=_initial_distance(op, z),
                      solver="rhpe", oracle=oracle.describe())
    if _stopped(params, operator_value(op, z), 0.0):
        traj.stop_reason = "solved"
        return traj
    acc = ErgodicAccumulator(op.dim)
    for k in range(1, params.max_iters + 1):
        try:
            cert = oracle.step(op, z, k, params)
        except Solved:
            traj.stop_reason = "solved"
            break
        d = cert.z_tilde - z
        slack = validate_step(z, cert, params.sigma)
        if slack < -REJECT_RTOL * (1.0 + float(np.dot(d, d))):
            raise InvalidCertificateError(k, slack)
        t = params.relaxation(k)
        z_next = z - t * cert.lam * cert.v
        traj.records.append(IterationRecord(
            k, z, cert, t, z_next, float(np.linalg.norm(d)),
            float(np.linalg.norm(cert.lam * cert.v)),
        ))
        acc.update(t, cert.lam, cert.z_tilde, cert.v, cert.eps)
        traj.snapshots.append(acc.finalize())
        z = z_next
        if _stopped(params, cert.v, cert.eps):
            traj.stop_reason = "tolerance"
            break
    return traj


def ppm_solve(op, lambda_schedule, errors, params, z0):
    """Inexact proximal point method.

    Each iterate is ``z_k = J_{lam_k}(z_{k-1}) + delta_k`` with ``delta_k``
    a seeded random direction of norm exactly ``e_k``.
    """
    lambda_schedule = Schedule.of(lambda_schedule)
    if min(lambda_schedule.values) <= 0:
        raise ValueError("stepsizes must be positive")
    if errors is None:
        errors = ErrorSchedule()
    z = as_point(z0, op.dim).copy()
    traj = Trajectory(op, z.copy(), params, d0=_initial_distance(op, z), solver="ppm",
                      oracle={"type": "ppm", "lambda": lambda_schedule.to_json(),
                              "errors": {"scale": errors.scale, "ratio": errors.ratio}})
    if _stopped(params, operator_value(op, z), 0.0):
        traj.stop_reason = "solved"
        return traj
    acc = ErgodicAccumulator(op.dim)
    for k in range(1, params.max_iters + 1):
        lam = lambda_schedule(k)
        cert = exact_prox_step(op, lam, z)
        e = errors(k)
        z_next = cert.z_tilde.copy()
        if e > 0:
            z_next = z_next + e * _unit(np.random.default_rng((params.seed, k)), op.dim)
        d = cert.z_tilde - z
        traj.records.append(IterationRecord(
            k, z, cert, 1.0, z_next, float(np.linalg.norm(d)),
            float(np.linalg.norm(lam * cert.v)), ppm_error=e,
        ))
        acc.update(1.0, lam, cert.z_tilde, cert.v, 0.0)
        traj.snapshots.append(acc.finalize())
        z = z_next
        if _stopped(params, cert.v, 0.0):
            traj.stop_reason = "tolerance"
            break
    return traj
