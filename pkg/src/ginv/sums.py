"""Group inverse of a sum of lambda-commuting elements.

For group invertible a, b with ab = lambda ba the closed form

    (a+b)^# = a^# b^pi + a^pi b^# + (a b b^# + b a a^#)^#

is evaluated together with the neighbouring variants (difference, commuting,
scaled sums). Where a printed formula is suspect, both the literal reading and
a correction candidate are returned; deciding between them is left to the
harness, which compares each against the oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import DEFAULT_TOL, ToleranceProfile, _square, eye, frobenius, relative_residual, spectral_norm
from .errors import DimensionMismatch, NoLambda, NotCommuting, ZeroScalar
from .spectral import group_inverse, try_group_inverse

__all__ = [
    "LambdaCertificate",
    "fit_lambda",
    "detect_lambda",
    "lemma21_check",
    "EquivalenceResult",
    "thm22_equivalence_check",
    "thm22_sum_formula",
    "thm22_intermediate_variants",
    "cor23_difference_formula",
    "cor24_commuting_formula",
    "cor25_scaled_formula",
]


@dataclass(frozen=True)
class LambdaCertificate:
    """Recovered constant of ab = lambda ba.

    ``both_zero`` marks ab = ba = 0, where any nonzero lambda works and 1 is
    used by convention.
    """

    lam: complex
    residual: float
    both_zero: bool = False


def fit_lambda(x, y) -> complex:
    """Least-squares scalar with X ~ lambda Y (Frobenius inner product)."""
    denom = float(np.vdot(y, y).real)
    if denom == 0.0:
        return 0j
    return complex(np.vdot(y, x) / denom)


def _pair(a, b):
    a, b = _square(a, "a"), _square(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatch(f"a {a.shape} and b {b.shape} differ in size")
    return a, b


def detect_lambda(a, b, tol: ToleranceProfile = DEFAULT_TOL) -> LambdaCertificate:
    a, b = _pair(a, b)
    ab, ba = a @ b, b @ a
    floor = tol.residual_rtol * max(1.0, frobenius(a) * frobenius(b))
    ab_zero, ba_zero = frobenius(ab) <= floor, frobenius(ba) <= floor
    if ab_zero and ba_zero:
        return LambdaCertificate(1.0 + 0j, relative_residual(ab, ba), both_zero=True)
    if ba_zero:
        raise NoLambda("ba vanishes but ab does not; lambda would be zero")
    lam = fit_lambda(ab, ba)
    residual = relative_residual(ab, lam * ba)
    if abs(lam) <= tol.residual_rtol:
        raise NoLambda(f"fitted lambda {lam:.3g} is zero")
    if residual > tol.residual_rtol:
        raise NoLambda(f"ab != lambda ba: best lambda {lam:.6g} leaves residual {residual:.3g}")
    return LambdaCertificate(lam, residual)


def _gi(x, tol, scale=0.0):
    """(x^#, x^pi). ``scale`` bounds the terms x was built from."""
    r = group_inverse(x, tol, scale=scale)
    return r.inverse, r.idempotent


def _norms(*xs):
    return [spectral_norm(x) for x in xs]


def lemma21_check(a, b, lam: complex, tol: ToleranceProfile = DEFAULT_TOL):
    """Residuals of abb^# = bb^#a, baa^# = aa^#b and ab^# = (1/lambda) b^# a."""
    a, b = _pair(a, b)
    ag, _ = _gi(a, tol)
    bg, _ = _gi(b, tol)
    return (
        relative_residual(a @ b @ bg, b @ bg @ a),
        relative_residual(b @ a @ ag, a @ ag @ b),
        relative_residual(a @ bg, (1.0 / lam) * bg @ a),
    )


class EquivalenceResult(NamedTuple):
    exists_sum: bool
    exists_cond2: bool
    exists_cond3: bool
    all_agree: bool


def thm22_equivalence_check(a, b, tol: ToleranceProfile = DEFAULT_TOL) -> EquivalenceResult:
    """Oracle existence of a+b, a(1 + a^# b) and abb^# + baa^#."""
    a, b = _pair(a, b)
    detect_lambda(a, b, tol)
    ag, _ = _gi(a, tol)
    bg, _ = _gi(b, tol)
    n = a.shape[0]
    na, nb, nag, nbg = _norms(a, b, ag, bg)
    flags = (
        try_group_inverse(a + b, tol, scale=na + nb) is not None,
        try_group_inverse(a @ (eye(n) + ag @ b), tol, scale=na * (1 + nag * nb)) is not None,
        try_group_inverse(a @ b @ bg + b @ a @ ag, tol, scale=na * nb * (nag + nbg)) is not None,
    )
    return EquivalenceResult(*flags, all_agree=len(set(flags)) == 1)


def thm22_sum_formula(a, b, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    a, b = _pair(a, b)
    detect_lambda(a, b, tol)
    ag, api = _gi(a, tol)
    bg, bpi = _gi(b, tol)
    na, nb, nag, nbg = _norms(a, b, ag, bg)
    inner, _ = _gi(a @ b @ bg + b @ a @ ag, tol, na * nb * (nag + nbg))
    return ag @ bpi + api @ bg + inner


def _intermediate_bracket(a, ag, b, sign, tol):
    n = a.shape[0]
    na, nag, nb = _norms(a, ag, b)
    inner, _ = _gi(a @ (eye(n) + sign * (ag @ b)), tol, na * (1 + nag * nb))
    return inner


def thm22_intermediate_variants(a, b, tol: ToleranceProfile = DEFAULT_TOL):
    """(stated, swapped): a^# b^pi + [a(1 + a^# b)]^# and b^# a^pi + [same]^#."""
    a, b = _pair(a, b)
    detect_lambda(a, b, tol)
    ag, api = _gi(a, tol)
    bg, bpi = _gi(b, tol)
    bracket = _intermediate_bracket(a, ag, b, 1.0, tol)
    return ag @ bpi + bracket, bg @ api + bracket


def cor23_difference_formula(a, b, tol: ToleranceProfile = DEFAULT_TOL):
    """(stated, swapped) candidates for (a - b)^#."""
    a, b = _pair(a, b)
    detect_lambda(a, b, tol)
    ag, api = _gi(a, tol)
    bg, bpi = _gi(b, tol)
    bracket = _intermediate_bracket(a, ag, b, -1.0, tol)
    stated = ag @ bpi - api @ bg + bracket
    swapped = -(bg @ api) + bracket
    return stated, swapped


def _require_commuting(a, b, tol):
    res = relative_residual(a @ b, b @ a)
    if res > tol.residual_rtol:
        raise NotCommuting(f"ab and ba differ by {res:.3g}")


def cor24_commuting_formula(a, b, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    a, b = _pair(a, b)
    _require_commuting(a, b, tol)
    ag, api = _gi(a, tol)
    bg, bpi = _gi(b, tol)
    nag, nb = _norms(ag, b)
    mid, _ = _gi(eye(a.shape[0]) + ag @ b, tol, 1 + nag * nb)
    return ag @ mid @ b @ bg + ag @ bpi + bg @ api


def cor25_scaled_formula(a, b, lam: complex, mu: complex,
                         tol: ToleranceProfile = DEFAULT_TOL):
    """(literal, variant) candidates for (lam a + mu b)^#."""
    a, b = _pair(a, b)
    if abs(lam) <= tol.residual_rtol or abs(mu) <= tol.residual_rtol:
        raise ZeroScalar(f"scalars must be nonzero, got lambda={lam}, mu={mu}")
    _require_commuting(a, b, tol)
    ag, api = _gi(a, tol)
    bg, bpi = _gi(b, tol)
    na, nb, nag, nbg = _norms(a, b, ag, bg)
    inner, _ = _gi(lam * (a @ b @ bg) + mu * (b @ a @ ag), tol,
                   na * nb * (abs(lam) * nbg + abs(mu) * nag))
    tail = (1.0 / mu) * (bg @ api)
    literal = inner + (1.0 / lam) * (a @ bg) + tail
    variant = inner + (1.0 / lam) * (ag @ bpi) + tail
    return literal, variant
