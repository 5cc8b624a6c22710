"""Dense complex matrix substrate.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; every public
function coerces its inputs through :func:`as_matrix` so there is a single
(complex) code path. Nothing here mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, NotIdempotent, Singular, ZeroMatrix

__all__ = [
    "ToleranceProfile",
    "DEFAULT_TOL",
    "as_matrix",
    "eye",
    "zeros",
    "frobenius",
    "relative_residual",
    "approx",
    "numerical_rank",
    "full_rank_factorization",
    "inverse",
    "pierce_decompose",
    "mpow",
    "spectral_norm",
]


@dataclass(frozen=True)
class ToleranceProfile:
    """Thresholds behind every existence decision.

    ``rank_rtol`` is the relative singular-value cutoff, ``residual_rtol`` the
    acceptance level for :func:`approx`, and ``cond_max`` the largest
    condition number accepted for an invertible core.
    """

    rank_rtol: float = 1e-9
    residual_rtol: float = 1e-9
    cond_max: float = 1e8

    def __post_init__(self):
        for name in ("rank_rtol", "residual_rtol", "cond_max"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if self.rank_rtol >= 1:
            raise ValueError("rank_rtol must be < 1")

    def with_(self, **changes) -> "ToleranceProfile":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def as_dict(self) -> dict:
        return {"rank_rtol": self.rank_rtol,
                "residual_rtol": self.residual_rtol,
                "cond_max": self.cond_max}

    @classmethod
    def from_dict(cls, data: dict) -> "ToleranceProfile":
        unknown = set(data) - {"rank_rtol", "residual_rtol", "cond_max"}
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


DEFAULT_TOL = ToleranceProfile()


def as_matrix(x) -> np.ndarray:
    """Coerce to a 2-D complex128 array (scalars become 1x1)."""
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def _square(x, what: str = "matrix") -> np.ndarray:
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got {x.shape}")
    return x


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def zeros(m: int, n: int | None = None) -> np.ndarray:
    return np.zeros((m, m if n is None else n), dtype=np.complex128)


def frobenius(x) -> float:
    return float(np.linalg.norm(as_matrix(x), "fro"))


def relative_residual(x, y) -> float:
    """||X - Y||_F / max(1, ||Y||_F)."""
    x, y = as_matrix(x), as_matrix(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"cannot compare {x.shape} with {y.shape}")
    return frobenius(x - y) / max(1.0, frobenius(y))


def approx(x, y, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    return relative_residual(x, y) <= tol.residual_rtol


def mpow(x, k: int) -> np.ndarray:
    return np.linalg.matrix_power(_square(x), k)


def _singular_values(x: np.ndarray) -> np.ndarray:
    if x.size == 0:
        return np.zeros(0)
    return np.linalg.svd(x, compute_uv=False)


def numerical_rank(m, tol: ToleranceProfile = DEFAULT_TOL, *, scale: float = 0.0) -> int:
    """Number of singular values above ``rank_rtol * max(sigma_max, scale)``.

    ``scale`` lets a caller anchor the cutoff to a related matrix, e.g. pass
    ``sigma_max(M)**2`` when ranking M^2 so that a numerically vanishing
    square is not ranked against its own rounding noise.
    """
    s = _singular_values(as_matrix(m))
    if s.size == 0:
        return 0
    ref = max(float(s[0]), float(scale))
    if ref == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rtol * ref))


def spectral_norm(m) -> float:
    s = _singular_values(as_matrix(m))
    return float(s[0]) if s.size else 0.0


def full_rank_factorization(m, tol: ToleranceProfile = DEFAULT_TOL, *, scale: float = 0.0):
    """Return (F, G) with M = F G, F of full column rank, G of full row rank.

    Built from the truncated SVD: F = U_r S_r, G = V_r^*. G has orthonormal
    rows, so ||G F||_2 <= ||M||_2.
    """
    m = as_matrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    ref = max(float(s[0]) if s.size else 0.0, float(scale))
    r = int(np.count_nonzero(s > tol.rank_rtol * ref)) if ref > 0 else 0
    if r == 0:
        raise ZeroMatrix(f"matrix of shape {m.shape} has numerical rank 0")
    return u[:, :r] * s[:r], vh[:r, :]


def inverse(m, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    m = _square(m)
    n = m.shape[0]
    if n == 0:
        return m.copy()
    s = _singular_values(m)
    rank = int(np.count_nonzero(s > tol.rank_rtol * s[0])) if s[0] > 0 else 0
    if rank < n:
        raise Singular(f"numerical rank {rank} < {n}")
    cond = float(s[0] / s[-1])
    if cond > tol.cond_max:
        raise Singular(f"condition estimate {cond:.3g} exceeds cond_max {tol.cond_max:.3g}")
    return np.linalg.solve(m, eye(n))


def pierce_decompose(x, p, tol: ToleranceProfile = DEFAULT_TOL):
    """Split x by the idempotent p into (pxp, px(1-p), (1-p)xp, (1-p)x(1-p))."""
    x, p = _square(x, "x"), _square(p, "p")
    if x.shape != p.shape:
        raise DimensionMismatch(f"x {x.shape} and p {p.shape} differ in size")
    if relative_residual(p @ p, p) > tol.residual_rtol:
        raise NotIdempotent(f"p.p differs from p by {relative_residual(p @ p, p):.3g}")
    q = eye(p.shape[0]) - p
    return p @ x @ p, p @ x @ q, q @ x @ p, q @ x @ q

