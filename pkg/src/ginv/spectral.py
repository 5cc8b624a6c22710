"""Group inverse, Drazin inverse and spectral idempotents.

Both inverses use Cline's full-rank factorization method. Writing M = F G,
the group inverse exists iff the core G F is invertible, and then

    M^# = F (G F)^-2 G.

Rank decisions on every core are anchored to ||M||_2 (G has orthonormal rows,
so cores never outgrow M); a core that is zero up to rounding is therefore
ranked as zero instead of against its own noise floor. Callers holding a
computed expression (a product BC, a sum a + b) pass ``scale``, the size of
its terms, so that an expression that cancels to rounding noise is treated
as zero as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_TOL,
    ToleranceProfile,
    _square,
    as_matrix,
    eye,
    full_rank_factorization,
    numerical_rank,
    relative_residual,
    spectral_norm,
    zeros,
)
from .errors import DimensionMismatch, NotGroupInvertible, ZeroMatrix

__all__ = [
    "GroupInverseResult",
    "DrazinResult",
    "group_inverse",
    "try_group_inverse",
    "drazin_inverse",
    "verify_group_axioms",
    "verify_drazin_identities",
    "cline_transfer",
    "rank_pair",
    "spectral_idempotent",
]


@dataclass(frozen=True)
class GroupInverseResult:
    inverse: np.ndarray
    idempotent: np.ndarray  # I - M M^#
    rank: int
    core_condition: float  # cond_2(G F); 0.0 for the zero matrix
    axiom_residuals: tuple  # (commutation, inner, outer)


@dataclass(frozen=True)
class DrazinResult:
    inverse: np.ndarray
    index: int


def rank_pair(m, tol: ToleranceProfile = DEFAULT_TOL, *, scale: float = 0.0) -> tuple[int, int]:
    """(rank M, rank M^2), the second ranked against ||M||_2^2."""
    m = _square(m)
    ref = max(spectral_norm(m), scale)
    return numerical_rank(m, tol, scale=ref), numerical_rank(m @ m, tol, scale=ref * ref)


def verify_group_axioms(m, x, tol: ToleranceProfile = DEFAULT_TOL) -> tuple[float, float, float]:
    """Residuals of MX = XM, XMX = X and MXM = M. No thresholding."""
    m, x = _square(m, "M"), _square(x, "X")
    if m.shape != x.shape:
        raise DimensionMismatch(f"M {m.shape} and X {x.shape} differ in size")
    mx = m @ x
    return (
        relative_residual(mx, x @ m),
        relative_residual(x @ mx, x),
        relative_residual(mx @ m, m),
    )


def verify_drazin_identities(m, x, k: int) -> tuple[float, float, float]:
    """Residuals of XM = MX, XMX = X and M^k X M = M^k."""
    m, x = _square(m, "M"), _square(x, "X")
    if m.shape != x.shape:
        raise DimensionMismatch(f"M {m.shape} and X {x.shape} differ in size")
    mk = np.linalg.matrix_power(m, k)
    return (
        relative_residual(x @ m, m @ x),
        relative_residual(x @ m @ x, x),
        relative_residual(mk @ x @ m, mk),
    )


def spectral_idempotent(m, x) -> np.ndarray:
    m = _square(m)
    return eye(m.shape[0]) - m @ as_matrix(x)


def group_inverse(m, tol: ToleranceProfile = DEFAULT_TOL, *,
                  scale: float = 0.0) -> GroupInverseResult:
    m = _square(m)
    n = m.shape[0]
    smax = max(spectral_norm(m), scale)
    try:
        f, g = full_rank_factorization(m, tol, scale=smax)
    except ZeroMatrix:
        z = zeros(n)
        return GroupInverseResult(z, eye(n), 0, 0.0, (0.0, 0.0, 0.0))
    r = f.shape[1]
    core = g @ f
    s = np.linalg.svd(core, compute_uv=False)
    core_rank = int(np.count_nonzero(s > tol.rank_rtol * max(smax, s[0])))
    if core_rank < r:
        raise NotGroupInvertible(*rank_pair(m, tol, scale=smax), detail="core G.F is singular")
    cond = float(s[0] / s[-1])
    if cond > tol.cond_max:
        raise NotGroupInvertible(*rank_pair(m, tol, scale=smax),
                                 detail=f"core condition {cond:.3g} > cond_max")
    y = np.linalg.solve(core, np.linalg.solve(core, g))
    x = f @ y
    return GroupInverseResult(
        inverse=x,
        idempotent=eye(n) - m @ x,
        rank=r,
        core_condition=cond,
        axiom_residuals=verify_group_axioms(m, x),
    )


def try_group_inverse(m, tol: ToleranceProfile = DEFAULT_TOL, *,
                      scale: float = 0.0) -> Optional[GroupInverseResult]:
    try:
        return group_inverse(m, tol, scale=scale)
    except NotGroupInvertible:
        return None


def drazin_inverse(m, tol: ToleranceProfile = DEFAULT_TOL, *, scale: float = 0.0) -> DrazinResult:
    """Recursive full-rank factorization; index is the recursion depth."""
    m = _square(m)
    n = m.shape[0]
    smax = max(spectral_norm(m), scale)
    if n and numerical_rank(m, tol, scale=smax) == n:
        return DrazinResult(np.linalg.solve(m, eye(n)), 0)

    fs, gs = [], []
    current = m
    depth = 0
    while True:
        depth += 1
        try:
            f, g = full_rank_factorization(current, tol, scale=smax)
        except ZeroMatrix:
            return DrazinResult(zeros(n), depth)
        fs.append(f)
        gs.append(g)
        core = g @ f
        if numerical_rank(core, tol, scale=smax) == core.shape[0]:
            break
        current = core

    core_inv = np.linalg.solve(core, eye(core.shape[0]))
    x = np.linalg.matrix_power(core_inv, depth + 1)
    for f in reversed(fs):
        x = f @ x
    for g in reversed(gs):
        x = x @ g
    return DrazinResult(x, depth)


def cline_transfer(b, c, bc_drazin: DrazinResult) -> np.ndarray:
    """Drazin inverse of C B from that of B C: (CB)^D = C ((BC)^D)^2 B."""
    b, c = as_matrix(b), as_matrix(c)
    y = as_matrix(bc_drazin.inverse)
    if b.shape != c.shape[::-1]:
        raise DimensionMismatch(f"B {b.shape} and C {c.shape} do not conform")
    if y.shape != (b.shape[0], b.shape[0]):
        raise DimensionMismatch(f"(BC)^D has shape {y.shape}, expected {(b.shape[0],) * 2}")
    return c @ y @ y @ b
