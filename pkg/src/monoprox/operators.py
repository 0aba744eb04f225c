"""Maximal monotone operators on R^n.

Three operator families are supported:

* ``identity``     T(z) = z
* ``affine``       T(z) = A z + b with A + A^T positive semidefinite
* ``subdiff_abs``  T = c * d|.| on the real line

Each exposes its principal (minimal-norm) value, an exact resolvent
``(lam*T + I)^{-1}``, and the distance to its zero set. Identity and affine
operators additionally have a closed-form epsilon-enlargement gap; the
subdifferential of ``|.|`` only supports the sampled necessary-condition
check.

Points are plain 1-D ``numpy`` float arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from monoprox.exceptions import DimensionError, NoZeroError, UnsupportedOperatorError

__all__ = [
    "MonotoneOperator",
    "identity",
    "affine",
    "subdiff_abs",
    "random_spd",
    "as_point",
    "operator_value",
    "resolvent",
    "enlargement_gap",
    "supports_gap",
    "sampled_enlargement_violation",
    "distance_to_zero",
    "project_to_zero_set",
]

KINDS = ("identity", "affine", "subdiff_abs")

# smallest admissible eigenvalue of (A + A^T)/2
MONOTONE_TOL = 1e-10
# relative size of a null-space component that makes the gap infinite
NULLSPACE_RTOL = 1e-9
# absolute floor for the same test, scaled by the magnitude of the data
NULLSPACE_ATOL = 1e-12


def as_point(z, dim=None):
    """Convert ``z`` to a finite 1-D float array, checking its dimension."""
    arr = np.atleast_1d(np.asarray(z, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D point, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True, eq=False)
class MonotoneOperator:
    """An immutable maximal monotone operator.

    Use the factory functions :func:`identity`, :func:`affine`,
    :func:`subdiff_abs` and :func:`random_spd` rather than the constructor.
    """

    kind: str
    dim: int
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    c: float | None = None
    # eigendecomposition of the symmetric part, filled in for affine operators
    _sym_eigvals: np.ndarray | None = field(default=None, repr=False)
    _sym_eigvecs: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind == "affine":
            A = np.array(self.A, dtype=float)
            b = np.zeros(self.dim) if self.b is None else np.array(self.b, dtype=float)
            if A.shape != (self.dim, self.dim) or b.shape != (self.dim,):
                raise DimensionError("affine operator needs A of shape (n, n) and b of shape (n,)")
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
                raise ValueError("affine data must be finite")
            S = 0.5 * (A + A.T)
            w, V = np.linalg.eigh(S)
            if w[0] < -MONOTONE_TOL:
                raise ValueError(
                    f"operator is not monotone: symmetric part has eigenvalue {w[0]:.3e}"
                )
            A.setflags(write=False)
            b.setflags(write=False)
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "b", b)
            object.__setattr__(self, "_sym_eigvals", w)
            object.__setattr__(self, "_sym_eigvecs", V)
        elif self.kind == "subdiff_abs":
            if self.dim != 1:
                raise DimensionError("subdiff_abs is only defined on the real line")
            if self.c is None or not self.c > 0:
                raise ValueError("subdiff_abs needs a scale c > 0")
            object.__setattr__(self, "c", float(self.c))

    @property
    def symmetric_part(self):
        if self.kind == "identity":
            return np.eye(self.dim)
        if self.kind == "affine":
            return 0.5 * (self.A + self.A.T)
        raise UnsupportedOperatorError("subdiff_abs has no symmetric part")

    def describe(self):
        """JSON-friendly description, enough to rebuild the operator."""
        if self.kind == "identity":
            return {"kind": "identity", "dim": self.dim}
        if self.kind == "affine":
            return {"kind": "affine", "A": self.A.tolist(), "b": self.b.tolist()}
        return {"kind": "subdiff_abs", "c": self.c}

    def __repr__(self):
        return f"MonotoneOperator(kind={self.kind!r}, dim={self.dim})"


def identity(dim):
    return MonotoneOperator("identity", int(dim))


def affine(A, b=None):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return MonotoneOperator("affine", A.shape[0], A=A, b=b)


def subdiff_abs(c=1.0):
    return MonotoneOperator("subdiff_abs", 1, c=c)


def random_spd(dim, eig_min, eig_max, seed, b=None):
    """Affine operator with a random symmetric positive definite matrix.

    Eigenvalues are drawn uniformly from ``[eig_min, eig_max]`` and the
    eigenbasis is a random orthogonal matrix (QR of a Gaussian matrix with
    sign-fixed diagonal).
    """
    if not 0 <= eig_min <= eig_max:
        raise ValueError("need 0 <= eig_min <= eig_max")
    rng = np.random.default_rng(seed)
    eigs = rng.uniform(eig_min, eig_max, size=dim)
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.sign(np.diag(R))
    A = (Q * eigs) @ Q.T
    A = 0.5 * (A + A.T)
    return affine(A, b)


def operator_value(op, z):
    """Principal value of ``T(z)``; the minimal-norm element for set values."""
    z = as_point(z, op.dim)
    if op.kind == "identity":
        return z.copy()
    if op.kind == "affine":
        return op.A @ z + op.b
    return op.c * np.sign(z)


def resolvent(op, lam, z):
    """Evaluate the proximal map ``(lam*T + I)^{-1} z``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    z = as_point(z, op.dim)
    if op.kind == "identity":
        return z / (1.0 + lam)
    if op.kind == "affine":
        M = lam * op.A + np.eye(op.dim)
        try:
            return np.linalg.solve(M, z - lam * op.b)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - cannot happen for monotone A
            raise AssertionError("lam*A + I singular for a monotone A") from exc
    return np.sign(z) * np.maximum(np.abs(z) - lam * op.c, 0.0)


def supports_gap(op):
    return op.kind in ("identity", "affine")


def enlargement_gap(op, z, v):
    """Smallest ``eps >= 0`` such that ``v`` lies in the eps-enlargement at ``z``.

    This is ``sup_{(z', v') in T} -<z - z', v - v'>``, evaluated in closed
    form. For ``T = A . + b`` with residual ``r = v - (A z + b)`` and
    ``S = (A + A^T)/2`` the supremum is ``<r, S^+ r>/4`` when ``r`` lies in
    the range of ``S`` and ``+inf`` otherwise.

    Returns
    -------
    float
        The gap, possibly ``inf``.
    """
    z = as_point(z, op.dim)
    v = as_point(v, op.dim)
    if op.kind == "identity":
        return 0.25 * float(np.dot(v - z, v - z))
    if op.kind != "affine":
        raise UnsupportedOperatorError(
            "no closed-form enlargement gap for subdiff_abs; "
            "use sampled_enlargement_violation"
        )
    Az = op.A @ z
    r = v - (Az + op.b)
    w, V = op._sym_eigvals, op._sym_eigvecs
    coef = V.T @ r
    cutoff = MONOTONE_TOL * max(1.0, abs(w[-1]))
    range_mask = w > cutoff
    null_norm = float(np.linalg.norm(coef[~range_mask]))
    scale = 1.0 + np.linalg.norm(v) + np.linalg.norm(Az) + np.linalg.norm(op.b)
    if null_norm > NULLSPACE_RTOL * np.linalg.norm(r) + NULLSPACE_ATOL * scale:
        return float("inf")
    c = coef[range_mask]
    return 0.25 * float(np.sum(c * c / w[range_mask]))


def sampled_enlargement_violation(op, z, v, eps, sample_count=1000, seed=0):
    """Largest violation of the enlargement inequality over random graph points.

    Draws ``z' = z + R g / sqrt(n)`` with ``g ~ N(0, I)`` and
    ``R = 10 (1 + ||z||)``, pairs each with ``v' = operator_value(z')`` and
    returns ``max(0, max(-<z - z', v - v'>) - eps)``. A zero result means no
    violation was found; it does not prove membership.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    z = as_point(z, op.dim)
    v = as_point(v, op.dim)
    rng = np.random.default_rng(seed)
    radius = 10.0 * (1.0 + np.linalg.norm(z))
    zs = z + radius * rng.standard_normal((sample_count, op.dim)) / np.sqrt(op.dim)
    if op.kind == "identity":
        vs = zs
    elif op.kind == "affine":
        vs = zs @ op.A.T + op.b
    else:
        vs = op.c * np.sign(zs)
    vals = -np.einsum("ij,ij->i", z - zs, v - vs)
    return max(0.0, float(vals.max()) - eps)


def _affine_particular_zero(op):
    x, *_ = np.linalg.lstsq(op.A, -op.b, rcond=None)
    if np.linalg.norm(op.A @ x + op.b) > 1e-9 * (1.0 + np.linalg.norm(op.b)):
        raise NoZeroError("A z = -b is inconsistent: no solution; d0 undefined")
    return x


def project_to_zero_set(op, z):
    """Euclidean projection of ``z`` onto ``T^{-1}(0)``."""
    z = as_point(z, op.dim)
    if op.kind != "affine":
        return np.zeros(op.dim)
    x = _affine_particular_zero(op)
    # zero set is x + null(A); remove the row-space component of z - x
    d = z - x
    row_part = np.linalg.pinv(op.A) @ (op.A @ d)
    return z - row_part


def distance_to_zero(op, z):
    """Distance from ``z`` to the zero set of ``op``."""
    z = as_point(z, op.dim)
    if op.kind != "affine":
        return float(np.linalg.norm(z))
    return float(np.linalg.norm(z - project_to_zero_set(op, z)))
