"""Aggregate stepsize and ergodic averages of an HPE-type trajectory.

With weights ``w_i = t_i * lam_i`` and ``Lam_k = sum w_i`` the ergodic
sequences are

    z_a   = sum w_i z_i / Lam_k
    v_a   = sum w_i v_i / Lam_k
    eps_a = sum w_i (eps_i + <z_i - z_a, v_i - v_a>) / Lam_k

:class:`ErgodicAccumulator` keeps five running sums so each update costs
O(n). Expanding the inner-product sum gives the one-pass form

    eps_a = (Se + Szv - <Sz, Sv> / Lam) / Lam

with ``Sz = sum w z``, ``Sv = sum w v``, ``Se = sum w eps`` and
``Szv = sum w <z, v>``. :func:`ergodic_recompute` evaluates the two-pass
definition literally and serves as a testing oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from monoprox.operators import as_point

__all__ = ["ErgodicSnapshot", "ErgodicAccumulator", "ergodic_recompute"]

# eps_a below -NEG_EPS_RTOL * (1 + |Szv|) is flagged as a genuine negative
NEG_EPS_RTOL = 1e-10


@dataclass(frozen=True)
class ErgodicSnapshot:
    """Ergodic state after ``count`` updates."""

    count: int
    Lambda: float
    z_tilde_a: np.ndarray
    v_a: np.ndarray
    eps_a: float
    szv: float

    @property
    def negative_flag(self):
        """True when eps_a is more negative than rounding can explain."""
        return self.eps_a < -NEG_EPS_RTOL * (1.0 + abs(self.szv))

    def as_tuple(self):
        return self.Lambda, self.z_tilde_a, self.v_a, self.eps_a


class ErgodicAccumulator:
    """Running sums for the ergodic averages.

    Parameters
    ----------
    dim : int
    strict : bool, default True
        Validate ``t``, ``lam`` and ``eps`` on every update. Certification
        turns this off so that tampered records are still averaged and
        then reported by the range checks instead of raising.

    Examples
    --------
    >>> acc = ErgodicAccumulator(1)
    >>> acc.update(1.0, 1.0, [0.5], [0.5], 0.0).update(1.0, 1.0, [0.25], [0.25], 0.0)
    ErgodicAccumulator(count=2, Lambda=2.0)
    >>> acc.finalize().eps_a
    0.015625
    """

    def __init__(self, dim, strict=True):
        self.dim = int(dim)
        self.strict = bool(strict)
        self.Lambda = 0.0
        self.Sz = np.zeros(self.dim)
        self.Sv = np.zeros(self.dim)
        self.Se = 0.0
        self.Szv = 0.0
        self.count = 0

    @staticmethod
    def _validate(t, lam, eps):
        if not 0 < t <= 1:
            raise ValueError(f"relaxation t must lie in (0, 1], got {t}")
        if not lam > 0:
            raise ValueError("lambda must be positive")
        if not eps >= 0:
            raise ValueError("eps must be nonnegative")

    def update(self, t, lam, z_tilde, v, eps):
        if self.strict:
            self._validate(t, lam, eps)
        z_tilde = as_point(z_tilde, self.dim)
        v = as_point(v, self.dim)
        w = t * lam
        self.Lambda += w
        self.Sz += w * z_tilde
        self.Sv += w * v
        self.Se += w * eps
        self.Szv += w * float(np.dot(z_tilde, v))
        self.count += 1
        return self

    def finalize(self):
        if self.count == 0:
            raise ValueError("no updates: ergodic averages undefined")
        L = self.Lambda
        eps_a = (self.Se + self.Szv - float(np.dot(self.Sz, self.Sv)) / L) / L
        return ErgodicSnapshot(
            self.count, L, self.Sz / L, self.Sv / L, eps_a, self.Szv
        )

    def __repr__(self):
        return f"ErgodicAccumulator(count={self.count}, Lambda={self.Lambda!r})"


def ergodic_recompute(records):
    """Two-pass evaluation of the ergodic averages.

    Parameters
    ----------
    records : iterable of (t, lam, z_tilde, v, eps)

    Returns
    -------
    ErgodicSnapshot
    """
    records = list(records)
    if not records:
        raise ValueError("need at least one record")
    w = np.array([t * lam for t, lam, *_ in records], dtype=float)
    Z = np.array([np.atleast_1d(np.asarray(r[2], dtype=float)) for r in records])
    V = np.array([np.atleast_1d(np.asarray(r[3], dtype=float)) for r in records])
    E = np.array([r[4] for r in records], dtype=float)
    L = float(w.sum())
    z_a = (w[:, None] * Z).sum(axis=0) / L
    v_a = (w[:, None] * V).sum(axis=0) / L
    cross = np.einsum("ij,ij->i", Z - z_a, V - v_a)
    eps_a = float(np.sum(w * (E + cross))) / L
    szv = float(np.sum(w * np.einsum("ij,ij->i", Z, V)))
    return ErgodicSnapshot(len(records), L, z_a, v_a, eps_a, szv)
