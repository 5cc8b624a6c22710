"""2x2 block matrices M = [[A, B], [C, D]]: hypothesis checks and formulas.

Every formula is addressed by ``(theorem_id, variant)``:

* ``STATED``    - the displayed statement, entry by entry;
* ``PROOF``     - what the proof actually derives (for THM32 its final
  display; for the derived results, the route applied to THM32-PROOF);
* ``CORRECTED`` - the sum formula with the b^# a^pi tail, composed with the
  triangular (LEM31) inverse, then carried to COR33 / THM35 / COR36 by the
  same block-swap and transpose routes the derivations use.

COR34 and COR37 are the complex-matrix restatements of THM32 and THM35 and
are accepted as aliases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (DEFAULT_TOL, ToleranceProfile, as_matrix, eye, frobenius, relative_residual,
                   spectral_norm, zeros)
from .errors import DimensionMismatch, HypothesisViolation
from .spectral import cline_transfer, drazin_inverse, try_group_inverse

__all__ = [
    "BlockInstance",
    "HypothesisReport",
    "THEOREMS",
    "VARIANTS",
    "block_hypotheses",
    "block_formula",
    "permutation_conjugate",
    "transpose_route",
    "swap_route",
]

THEOREMS = ("LEM31", "THM32", "COR33", "THM35", "COR36")
VARIANTS = ("STATED", "PROOF", "CORRECTED")
_ALIASES = {"COR34": "THM32", "COR37": "THM35"}


def _canonical(theorem_id: str) -> str:
    tid = _ALIASES.get(theorem_id.upper(), theorem_id.upper())
    if tid not in THEOREMS:
        raise ValueError(f"unknown theorem id {theorem_id!r}; expected one of {THEOREMS}")
    return tid


@dataclass(frozen=True)
class BlockInstance:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    lam: complex = 1.0 + 0j

    def __post_init__(self):
        for name in "ABCD":
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        object.__setattr__(self, "lam", complex(self.lam))
        m, n = self.A.shape[0], self.D.shape[0]
        expected = {"A": (m, m), "B": (m, n), "C": (n, m), "D": (n, n)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatch(
                    f"block {name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.D.shape[0]

    def assemble(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    @classmethod
    def split(cls, M, m: int, lam: complex = 1.0) -> "BlockInstance":
        M = as_matrix(M)
        if M.shape[0] != M.shape[1] or not 0 < m < M.shape[0]:
            raise DimensionMismatch(f"cannot split {M.shape} at {m}")
        return cls(M[:m, :m], M[:m, m:], M[m:, :m], M[m:, m:], lam)


@dataclass(frozen=True)
class HypothesisReport:
    theorem_id: str
    residuals: dict
    flags: dict
    required: tuple = field(default=())

    def failing(self, tol: ToleranceProfile = DEFAULT_TOL) -> dict:
        bad = {k: v for k, v in self.residuals.items() if v > tol.residual_rtol}
        bad.update({f"exists {k}": False for k in self.required if not self.flags[k]})
        return bad

    def passes(self, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        return not self.failing(tol)


class _Pieces:
    """Group inverses and spectral idempotents of A, D, BC and CB.

    The CB data come from the Cline transfer of (BC)^D followed by an
    index-one test, not from a direct computation on CB.
    """

    def __init__(self, inst: BlockInstance, tol: ToleranceProfile):
        self.inst = inst
        A, B, C, D = inst.A, inst.B, inst.C, inst.D
        m, n = inst.m, inst.n
        self.flags = {}
        self.Ag, self.Api = self._gi("A", A, tol)
        self.Dg, self.Dpi = self._gi("D", D, tol)
        bc, cb = B @ C, C @ B
        # products are ranked against ||B|| ||C||, not their own rounding noise
        scale = spectral_norm(B) * spectral_norm(C)
        self.BCg, self.BCpi = self._gi("BC", bc, tol, scale)
        bc_d = drazin_inverse(bc, tol, scale=scale)
        if self.BCg is None:
            self.BCg = bc_d.inverse
            self.BCpi = eye(m) - bc @ bc_d.inverse
        cb_d = cline_transfer(B, C, bc_d)
        self.flags["CB"] = relative_residual(cb @ cb_d @ cb, cb) <= tol.residual_rtol
        self.CBg = cb_d
        self.CBpi = eye(n) - cb @ cb_d

    def _gi(self, name, x, tol, scale=0.0):
        r = try_group_inverse(x, tol, scale=scale)
        self.flags[name] = r is not None
        if r is None:
            if name == "BC":
                return None, None
            d = drazin_inverse(x, tol)
            return d.inverse, eye(x.shape[0]) - x @ d.inverse
        return r.inverse, r.idempotent


def _hyp_residuals(tid: str, inst: BlockInstance, p: _Pieces) -> dict:
    A, B, C, D, lam = inst.A, inst.B, inst.C, inst.D, inst.lam
    norm = frobenius
    if tid == "LEM31":
        return {"B": norm(B), "D^pi C": norm(p.Dpi @ C)}
    ab_rel = relative_residual(A @ B, lam * (B @ D))
    dc_rel = relative_residual(D @ C, lam * (C @ A))
    if tid == "THM32":
        return {"AB": norm(A @ B), "BD": norm(B @ D),
                "B(CB)^pi": norm(B @ p.CBpi), "C(BC)^pi": norm(C @ p.BCpi),
                "DC-lambda*CA": dc_rel}
    if tid == "COR33":
        return {"CA": norm(C @ A), "DC": norm(D @ C),
                "B(CB)^pi": norm(B @ p.CBpi), "C(BC)^pi": norm(C @ p.BCpi),
                "AB-lambda*BD": ab_rel}
    if tid == "THM35":
        return {"CA": norm(C @ A), "DC": norm(D @ C),
                "(CB)^pi C": norm(p.CBpi @ C), "(BC)^pi B": norm(p.BCpi @ B),
                "AB-lambda*BD": ab_rel}
    # COR36
    return {"AB": norm(A @ B), "BD": norm(B @ D),
            "(BC)^pi B": norm(p.BCpi @ B), "(CB)^pi C": norm(p.CBpi @ C),
            "DC-lambda*CA": dc_rel}


def block_hypotheses(inst: BlockInstance, theorem_id: str,
                     tol: ToleranceProfile = DEFAULT_TOL) -> HypothesisReport:
    tid = _canonical(theorem_id)
    p = _Pieces(inst, tol)
    required = ("A", "D") if tid == "LEM31" else ("A", "D", "BC", "CB")
    return HypothesisReport(tid, _hyp_residuals(tid, inst, p), dict(p.flags), required)


def permutation_conjugate(M, m: int, n: int) -> np.ndarray:
    """J M J for the involution J exchanging the first m and last n coordinates."""
    M = as_matrix(M)
    if M.shape != (m + n, m + n):
        raise DimensionMismatch(f"expected {(m + n,) * 2}, got {M.shape}")
    perm = np.r_[m:m + n, 0:m]
    return M[np.ix_(perm, perm)]


def swap_route(inst: BlockInstance) -> BlockInstance:
    """(D, C, B, A): the instance whose assembly is J M J."""
    return BlockInstance(inst.D, inst.C, inst.B, inst.A, inst.lam)


def transpose_route(inst: BlockInstance) -> BlockInstance:
    """(A^T, C^T, B^T, D^T), assembling to M^T (plain transpose).

    AB = lam BD transposes to D^T B^T = (1/lam) B^T A^T, so the constant is
    inverted; the intertwining residual then matches the original's.
    """
    lam = inst.lam
    return BlockInstance(inst.A.T, inst.C.T, inst.B.T, inst.D.T,
                         1.0 / lam if lam != 0 else 0j)


def _blocks(x11, x12, x21, x22):
    return np.block([[x11, x12], [x21, x22]])


def _direct(tid: str, variant: str, inst: BlockInstance, p: _Pieces):
    """Formulas evaluated straight from their displays."""
    A, B, C, D = inst.A, inst.B, inst.C, inst.D
    m, n = inst.m, inst.n
    Ag, Api, Dg, Dpi = p.Ag, p.Api, p.Dg, p.Dpi
    lower_tri = -Dg @ C @ Ag + Dg @ Dg @ C @ Api
    if tid == "LEM31":
        return _blocks(Ag, zeros(m, n), lower_tri, Dg)
    if tid == "THM32":
        if variant == "STATED":
            return _blocks(2 * Ag, zeros(m, n), -Dg @ C @ Ag, Dg + Dg @ p.CBpi)
        if variant == "PROOF":
            return _blocks(Ag + Ag @ p.BCpi, zeros(m, n), lower_tri, Dg + Dg @ p.CBpi)
        return _blocks(Ag, B @ p.CBg @ Dpi, lower_tri + C @ p.BCg @ Api, Dg)
    if tid == "COR33":
        return _blocks(Ag + Ag @ p.BCpi, -Ag @ B @ Dg, zeros(n, m), 2 * Dg)
    if tid == "THM35":
        return _blocks(Ag + p.BCpi @ Ag, -Ag @ B @ Dg + Api @ B @ Dg @ Dg,
                       zeros(n, m), Dg + p.CBpi @ Dg)
    # COR36
    return _blocks(Ag + p.BCpi @ Ag, zeros(m, n),
                   -Dg @ C @ Ag + Dpi @ C @ Ag @ Ag, Dg + p.CBpi @ Dg)


def _evaluate(tid: str, variant: str, inst: BlockInstance, tol: ToleranceProfile):
    if tid in ("LEM31", "THM32") or variant == "STATED":
        return _direct(tid, variant, inst, _Pieces(inst, tol))
    if tid == "COR33":
        inner = _evaluate("THM32", variant, swap_route(inst), tol)
        return permutation_conjugate(inner, inst.n, inst.m)
    if tid == "THM35":
        return _evaluate("THM32", variant, transpose_route(inst), tol).T
    # COR36
    inner = _evaluate("THM35", variant, swap_route(inst), tol)
    return permutation_conjugate(inner, inst.n, inst.m)


def block_formula(inst: BlockInstance, theorem_id: str, variant: str = "STATED",
                  tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    tid = _canonical(theorem_id)
    variant = variant.upper()
    allowed = ("STATED",) if tid == "LEM31" else VARIANTS
    if variant not in allowed:
        raise ValueError(f"{tid} has variants {allowed}, not {variant!r}")
    report = block_hypotheses(inst, tid, tol)
    if not report.passes(tol):
        raise HypothesisViolation(tid, report.failing(tol))
    return _evaluate(tid, variant, inst, tol)
