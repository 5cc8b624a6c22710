"""Seeded generators of instances satisfying each result's hypotheses.

Randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence([seed, *stream])``; nothing touches global RNG state, so a
given (seed, stream) yields bit-identical output on any platform sharing the
floating-point profile. Every forge re-checks its output against the
relevant checker before returning and raises ContractViolation otherwise.

Similarity transforms are unitary x diag(s) x unitary with s in [1, 4], so
their condition numbers never exceed 4.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import block_diag

from .blocks import BlockInstance, block_hypotheses, transpose_route
from .core import DEFAULT_TOL, ToleranceProfile, eye
from .errors import ContractViolation, NoLambda, SearchExhausted
from .spectral import rank_pair, try_group_inverse
from .sums import detect_lambda, fit_lambda

__all__ = [
    "KINDS",
    "ForgeSpec",
    "make_rng",
    "root_of_unity",
    "forge_group_invertible",
    "forge_nilpotent_bearing",
    "forge_lambda_pair",
    "forge_commuting_pair",
    "forge_lem31_instance",
    "forge_thm32_instance",
    "forge_thm35_instance",
    "survey_thm32_grid",
    "forge",
]

KINDS = ("GROUP_INVERTIBLE", "COMMUTING_PAIR", "LAMBDA_PAIR", "LEM31", "THM32", "THM35")
STRATEGIES = {
    "GROUP_INVERTIBLE": ("DEFAULT",),
    "COMMUTING_PAIR": ("DEFAULT",),
    "LAMBDA_PAIR": ("DEFAULT", "SOLO", "NILPOTENT_SUM"),
    "LEM31": ("DEFAULT",),
    "THM32": ("SCALAR_LIFT", "SEARCH"),
    "THM35": ("SCALAR_LIFT", "SEARCH"),
}


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    if seed < 0 or any(s < 0 for s in stream):
        raise ValueError("seeds must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, stream)])))


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return make_rng(seed_or_rng)


def root_of_unity(k: int, j: int = 1) -> complex:
    """exp(2 pi i j / k) with components below 1e-15 snapped to zero."""
    w = np.exp(2j * np.pi * j / k)
    re = 0.0 if abs(w.real) < 1e-15 else float(w.real)
    im = 0.0 if abs(w.imag) < 1e-15 else float(w.imag)
    return complex(re, im)


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _unitary(rng, n):
    q, r = np.linalg.qr(_complex_normal(rng, (n, n)))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _modulus_phase(rng, size, lo=0.5, hi=2.0):
    return rng.uniform(lo, hi, size) * np.exp(2j * np.pi * rng.uniform(0, 1, size))


def _similarity(rng, n):
    """(S, S^-1) with cond(S) <= 4."""
    u, v = _unitary(rng, n), _unitary(rng, n)
    s = rng.uniform(1.0, 4.0, n)
    return (u * s) @ v, (v.conj().T / s) @ u.conj().T


def _well_conditioned(rng, r):
    """r x r matrix with singular values in [0.5, 2] (eigenvalues |.| >= 0.5)."""
    u, v = _unitary(rng, r), _unitary(rng, r)
    return (u * rng.uniform(0.5, 2.0, r)) @ v


def _core_block(rng, n, r):
    s, s_inv = _similarity(rng, n)
    core = np.zeros((n, n), dtype=np.complex128)
    core[:r, :r] = _well_conditioned(rng, r)
    return s @ core @ s_inv


def _check_group_invertible(x, tol, what):
    if try_group_inverse(x, tol) is None:
        raise ContractViolation(f"forged {what} is not group invertible: ranks {rank_pair(x, tol)}")


def forge_group_invertible(n: int, r: int, seed, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """S diag(K, 0) S^-1 with K well conditioned r x r."""
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= r <= n, got r={r}, n={n}")
    m = _core_block(_as_rng(seed), n, r)
    if rank_pair(m, tol) != (r, r):
        raise ContractViolation(f"forged matrix has ranks {rank_pair(m, tol)}, wanted ({r}, {r})")
    _check_group_invertible(m, tol, "matrix")
    return m


def forge_nilpotent_bearing(n: int, r: int, nil_sizes, seed) -> np.ndarray:
    """S diag(K, J_1, ..., J_p, 0) S^-1 with nilpotent Jordan-type blocks J_i.

    Each J_i of size >= 2 has its superdiagonal drawn with modulus in
    [0.5, 2]; the result is not group invertible whenever some size >= 2.
    """
    nil_sizes = [int(s) for s in nil_sizes]
    if r + sum(nil_sizes) > n:
        raise ValueError("blocks exceed the matrix size")
    rng = _as_rng(seed)
    blocks = [_well_conditioned(rng, r)] if r else []
    for size in nil_sizes:
        j = np.zeros((size, size), dtype=np.complex128)
        j[np.arange(size - 1), np.arange(1, size)] = _modulus_phase(rng, size - 1)
        blocks.append(j)
    rest = n - r - sum(nil_sizes)
    if rest:
        blocks.append(np.zeros((rest, rest)))
    core = block_diag(*blocks).astype(np.complex128) if blocks else np.zeros((n, n), complex)
    s, s_inv = _similarity(rng, n)
    return s @ core @ s_inv


def _cyclic_shift(k):
    a = np.zeros((k, k), dtype=np.complex128)
    a[np.arange(k - 1), np.arange(1, k)] = 1.0
    a[k - 1, 0] = 1.0
    return a


def forge_lambda_pair(k: int, block_pad: int, seed, *, d0=None, solo=(0, 0),
                      nilpotent_sum: bool = False, tol: ToleranceProfile = DEFAULT_TOL):
    """(a, b, lam) with a b = lam b a and lam = exp(2 pi i / k).

    a is the k-cycle shift and b = diag(d0, lam d0, ..., lam^(k-1) d0). Optional
    padding: ``block_pad`` shared zero coordinates, plus ``solo = (p, q)``
    coordinates where only a (resp. only b) acts by a random group invertible
    block. Padded pairs are conjugated by one random similarity.

    Since (a + b)^k = (1 + d0^k) I on the cyclic part, ``nilpotent_sum`` picks
    d0 with d0^k = -1, making a + b nilpotent there; otherwise d0 is kept away
    from those roots.
    """
    if k < 1 or block_pad < 0 or min(solo) < 0:
        raise ValueError("need k >= 1 and non-negative padding")
    rng = _as_rng(seed)
    lam = root_of_unity(k)
    if d0 is None:
        if nilpotent_sum:
            d0 = root_of_unity(2 * k, 2 * int(rng.integers(k)) + 1)
        else:
            while True:
                d0 = complex(_modulus_phase(rng, 1)[0])
                if abs(d0 ** k + 1) > 0.1:
                    break
    d0 = complex(d0)
    a1 = _cyclic_shift(k)
    b1 = np.diag([d0 * root_of_unity(k, j) for j in range(k)]).astype(np.complex128)
    p, q = (int(s) for s in solo)
    if p + q + block_pad == 0:
        a, b = a1, b1
    else:
        a2 = _core_block(rng, p, int(rng.integers(1, p + 1))) if p else np.zeros((0, 0))
        b3 = _core_block(rng, q, int(rng.integers(1, q + 1))) if q else np.zeros((0, 0))
        zp, zq, zz = np.zeros((p, p)), np.zeros((q, q)), np.zeros((block_pad, block_pad))
        a = block_diag(a1, a2, zq, zz).astype(np.complex128)
        b = block_diag(b1, zp, b3, zz).astype(np.complex128)
        s, s_inv = _similarity(rng, a.shape[0])
        a, b = s @ a @ s_inv, s @ b @ s_inv
    try:
        cert = detect_lambda(a, b, tol)
    except NoLambda as exc:
        raise ContractViolation(f"forged lambda pair fails: {exc}") from exc
    if abs(cert.lam - lam) > 1e-9:
        raise ContractViolation(f"recovered lambda {cert.lam} != {lam}")
    _check_group_invertible(a, tol, "a")
    _check_group_invertible(b, tol, "b")
    return a, b, lam


_LATTICE = np.array([x + 1j * y for x in range(-2, 3) for y in range(-2, 3)])


def forge_commuting_pair(n: int, seed, *, zero_b: bool = False, same: bool = False,
                         tol: ToleranceProfile = DEFAULT_TOL):
    """a = p(T), b = q(T) for a common diagonalizable T.

    T has eigenvalues on the integer lattice in [-2, 2]^2 (repeats allowed) and
    p, q have degree <= 3 with roots on the same lattice, so every eigenvalue
    of a or b is either exactly zero or of modulus >= 0.5.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _as_rng(seed)
    t = rng.choice(_LATTICE, size=n)

    def poly():
        roots = rng.choice(_LATTICE, size=int(rng.integers(0, 4)))
        c = complex(_modulus_phase(rng, 1, 0.5, 1.0)[0])
        return c * np.prod([t - r for r in roots], axis=0) if roots.size else np.full(n, c)

    pa = poly()
    pb = np.zeros(n, complex) if zero_b else (pa if same else poly())
    s, s_inv = _similarity(rng, n)
    a = (s * pa) @ s_inv
    b = (s * pb) @ s_inv
    _check_group_invertible(a, tol, "a")
    _check_group_invertible(b, tol, "b")
    return a, b


def _random_group_invertible_block(rng, n):
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    return _core_block(rng, n, int(rng.integers(0, n + 1)))


def _fail_closed(inst: BlockInstance, theorem_id: str, tol: ToleranceProfile):
    report = block_hypotheses(inst, theorem_id, tol)
    if not report.passes(tol):
        raise ContractViolation(f"forged {theorem_id} instance fails: {report.failing(tol)}")
    return inst


def forge_lem31_instance(m: int, n: int, seed, tol: ToleranceProfile = DEFAULT_TOL) -> BlockInstance:
    """A, D group invertible, B = 0, C = D D^# R so that D^pi C = 0."""
    if m < 1 or n < 1:
        raise ValueError("m, n must be >= 1")
    rng = _as_rng(seed)
    a = _random_group_invertible_block(rng, m)
    d = _random_group_invertible_block(rng, n)
    dd = try_group_inverse(d, tol)
    c = d @ dd.inverse @ _complex_normal(rng, (n, m))
    inst = BlockInstance(a, np.zeros((m, n), complex), c, d)
    return _fail_closed(inst, "LEM31", tol)


def _conjugate_blockwise(rng, inst: BlockInstance) -> BlockInstance:
    """diag(S, T) M diag(S, T)^-1; preserves every block hypothesis."""
    s, s_inv = _similarity(rng, inst.m)
    t, t_inv = _similarity(rng, inst.n)
    return BlockInstance(s @ inst.A @ s_inv, s @ inst.B @ t_inv,
                         t @ inst.C @ s_inv, t @ inst.D @ t_inv, inst.lam)


def forge_thm32_instance(m: int, n: int, seed, strategy: str = "SCALAR_LIFT", *,
                         cells: int | None = None, conjugate: bool = False,
                         tol: ToleranceProfile = DEFAULT_TOL):
    """(instance, nontrivial) satisfying the THM32 hypotheses.

    SCALAR_LIFT places ``cells`` scalar solutions (0, beta, gamma, 0) on the
    leading coordinates and free group invertible A, D blocks on the rest
    (where B = C = 0). SEARCH enumerates {0, +-1, +-i} entries for m, n <= 2.
    """
    if m < 1 or n < 1:
        raise ValueError("m, n must be >= 1")
    rng = _as_rng(seed)
    strategy = strategy.upper()
    if strategy == "SEARCH":
        inst = _search_thm32(m, n, rng, tol)
    elif strategy == "SCALAR_LIFT":
        top = min(m, n)
        if cells is None:
            cells = 0 if rng.uniform() < 0.15 else int(rng.integers(1, top + 1))
        if not 0 <= cells <= top:
            raise ValueError(f"cells must lie in [0, {top}]")
        a = block_diag(np.zeros((cells, cells)), _random_group_invertible_block(rng, m - cells))
        d = block_diag(np.zeros((cells, cells)), _random_group_invertible_block(rng, n - cells))
        b = np.zeros((m, n), complex)
        c = np.zeros((n, m), complex)
        idx = np.arange(cells)
        b[idx, idx] = _modulus_phase(rng, cells)
        c[idx, idx] = _modulus_phase(rng, cells)
        inst = BlockInstance(a, b, c, d, 1.0)
        if conjugate:
            inst = _conjugate_blockwise(rng, inst)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    _fail_closed(inst, "THM32", tol)
    nontrivial = bool(np.any(inst.B != 0) and np.any(inst.C != 0))
    return inst, nontrivial


def forge_thm35_instance(m: int, n: int, seed, strategy: str = "SCALAR_LIFT", *,
                         cells: int | None = None, conjugate: bool = False,
                         tol: ToleranceProfile = DEFAULT_TOL):
    """Transpose of a THM32 instance (block sizes are unchanged)."""
    inst, nontrivial = forge_thm32_instance(m, n, seed, strategy, cells=cells,
                                            conjugate=conjugate, tol=tol)
    out = transpose_route(inst)
    _fail_closed(out, "THM35", tol)
    return out, nontrivial


# --- discrete search over {0, +-1, +-i} ------------------------------------

_GRID = np.array([0, 1, -1, 1j, -1j], dtype=np.complex128)


@lru_cache(maxsize=None)
def _grid(rows: int, cols: int) -> np.ndarray:
    idx = np.array(list(itertools.product(range(5), repeat=rows * cols)), dtype=int)
    return _GRID[idx].reshape(-1, rows, cols)


def _ranks(x: np.ndarray) -> np.ndarray:
    return np.linalg.matrix_rank(x, tol=1e-8)


def _index_one(x: np.ndarray) -> np.ndarray:
    return _ranks(x) == _ranks(x @ x)


@lru_cache(maxsize=None)
def _grid_tables(m: int, n: int):
    """Exact-arithmetic prefilters for the THM32 hypotheses on the grid.

    With CB group invertible, B (CB)^pi = 0 iff rank CB = rank B; likewise
    C (BC)^pi = 0 iff rank BC = rank C.
    """
    As, Bs, Cs, Ds = _grid(m, m), _grid(m, n), _grid(n, m), _grid(n, n)
    bc = np.einsum("bij,cjk->bcik", Bs, Cs)
    cb = np.einsum("cij,bjk->bcik", Cs, Bs)
    ok_bc = (_index_one(bc) & _index_one(cb)
             & (_ranks(cb) == _ranks(Bs)[:, None])
             & (_ranks(bc) == _ranks(Cs)[None, :]))
    ok_a = _index_one(As)
    ok_d = _index_one(Ds)
    ab_zero = np.all(np.einsum("aij,bjk->abik", As, Bs) == 0, axis=(2, 3))
    bd_zero = np.all(np.einsum("bij,djk->bdik", Bs, Ds) == 0, axis=(2, 3))
    return As, Bs, Cs, Ds, ok_bc, ok_a, ok_d, ab_zero, bd_zero


def _intertwining(ca: np.ndarray, dc: np.ndarray):
    """Boolean table over (A, D) pairs of DC = lam CA (lam != 0), with lam."""
    ca_f = ca.reshape(len(ca), -1)
    dc_f = dc.reshape(len(dc), -1)
    ca_zero = np.all(ca_f == 0, axis=1)
    dc_zero = np.all(dc_f == 0, axis=1)
    norms = np.einsum("ai,ai->a", ca_f.conj(), ca_f).real
    inner = ca_f.conj() @ dc_f.T  # (A, D)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(norms[:, None] > 0, inner / norms[:, None], 0)
    resid = np.abs(dc_f[None, :, :] - lam[:, :, None] * ca_f[:, None, :]).max(axis=2)
    ok = (~ca_zero[:, None]) & (np.abs(lam) > 1e-12) & (resid < 1e-12)
    ok |= ca_zero[:, None] & dc_zero[None, :]
    lam = np.where(ca_zero[:, None] & dc_zero[None, :], 1.0, lam)
    return ok, lam


def _search_thm32(m, n, rng, tol):
    if m > 2 or n > 2:
        raise ValueError("SEARCH is limited to m, n <= 2")
    As, Bs, Cs, Ds, ok_bc, ok_a, ok_d, ab_zero, bd_zero = _grid_tables(m, n)
    nb, nc = ok_bc.shape
    off_bc, off_a, off_d = (int(rng.integers(x)) for x in (nb * nc, len(As), len(Ds)))
    a_order = np.roll(np.arange(len(As)), -off_a)
    d_order = np.roll(np.arange(len(Ds)), -off_d)
    flat = np.flatnonzero(ok_bc.ravel())
    flat = np.concatenate([flat[flat >= off_bc], flat[flat < off_bc]])
    for pos in flat:
        bi, ci = divmod(int(pos), nc)
        a_idx = a_order[ok_a[a_order] & ab_zero[a_order, bi]]
        d_idx = d_order[ok_d[d_order] & bd_zero[bi, d_order]]
        if not len(a_idx) or not len(d_idx):
            continue
        c = Cs[ci]
        ok, lam = _intertwining(c @ As[a_idx], Ds[d_idx] @ c)
        hits = np.argwhere(ok)
        if len(hits):
            i, j = hits[0]
            inst = BlockInstance(As[a_idx[i]], Bs[bi], c, Ds[d_idx[j]], complex(lam[i, j]))
            if block_hypotheses(inst, "THM32", tol).passes(tol):
                return inst
    raise SearchExhausted(f"no THM32 instance on the {{0, +-1, +-i}} grid for m={m}, n={n}")


def survey_thm32_grid(m: int, n: int, tol: ToleranceProfile = DEFAULT_TOL) -> dict:
    """Scan the whole grid for THM32 instances of two kinds.

    ``all_nonzero``: A, B, C, D all nonzero (nonzero group invertible A, D are
    never nilpotent). ``intertwined``: additionally DC = lam CA with DC != 0.
    Returns counts of passing (B, C) pairs and the first witness of each kind.
    """
    if m > 2 or n > 2:
        raise ValueError("survey is limited to m, n <= 2")
    As, Bs, Cs, Ds, ok_bc, ok_a, ok_d, ab_zero, bd_zero = _grid_tables(m, n)
    nz_a = np.any(As.reshape(len(As), -1) != 0, axis=1)
    nz_d = np.any(Ds.reshape(len(Ds), -1) != 0, axis=1)
    found = {"all_nonzero": None, "intertwined": None}
    n_pairs = 0
    for bi, ci in np.argwhere(ok_bc):
        n_pairs += 1
        if not (np.any(Bs[bi]) and np.any(Cs[ci])):
            continue
        a_idx = np.flatnonzero(ok_a & ab_zero[:, bi] & nz_a)
        d_idx = np.flatnonzero(ok_d & bd_zero[bi] & nz_d)
        if not len(a_idx) or not len(d_idx) or all(found.values()):
            continue
        c = Cs[ci]
        dc = Ds[d_idx] @ c
        ok, lam = _intertwining(c @ As[a_idx], dc)
        for i, j in np.argwhere(ok):
            inst = BlockInstance(As[a_idx[i]], Bs[bi], c, Ds[d_idx[j]], complex(lam[i, j]))
            key = "intertwined" if np.any(dc[j]) else "all_nonzero"
            if found[key] is None and block_hypotheses(inst, "THM32", tol).passes(tol):
                found[key] = inst
            if found["all_nonzero"] is None and key == "intertwined":
                found["all_nonzero"] = found["intertwined"]
            if all(found.values()):
                break
    return {"bc_pairs_passing": n_pairs, **found}


# --- ForgeSpec dispatch ----------------------------------------------------

@dataclass(frozen=True)
class ForgeSpec:
    kind: str
    dims: tuple = field(default=())
    seed: int = 0
    strategy: str = "DEFAULT"

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        strategy = (self.strategy or STRATEGIES[kind][0]).upper()
        if strategy == "DEFAULT":
            strategy = STRATEGIES[kind][0]
        if strategy not in STRATEGIES[kind]:
            raise ValueError(f"kind {kind} accepts strategies {STRATEGIES[kind]}, not {strategy!r}")
        object.__setattr__(self, "strategy", strategy)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, data: dict) -> "ForgeSpec":
        unknown = set(data) - {"kind", "dims", "seed", "strategy"}
        if unknown:
            raise ValueError(f"unknown ForgeSpec keys: {sorted(unknown)}")
        return cls(data["kind"], tuple(data.get("dims", ())), int(data.get("seed", 0)),
                   data.get("strategy", "DEFAULT"))

    def as_dict(self) -> dict:
        return {"kind": self.kind, "dims": list(self.dims), "seed": self.seed,
                "strategy": self.strategy}


_DEFAULT_DIMS = {
    "GROUP_INVERTIBLE": (4, 2),
    "COMMUTING_PAIR": (4,),
    "LAMBDA_PAIR": (2, 0),
    "LEM31": (2, 2),
    "THM32": (2, 2),
    "THM35": (2, 2),
}


def forge(spec: ForgeSpec, tol: ToleranceProfile = DEFAULT_TOL):
    """Dispatch on ``spec.kind``.

    Returns a matrix (GROUP_INVERTIBLE), a dict with keys a, b (and lambda)
    for pairs, or a BlockInstance.
    """
    dims = spec.dims or _DEFAULT_DIMS[spec.kind]
    rng = make_rng(spec.seed)
    if spec.kind == "GROUP_INVERTIBLE":
        n, r = (dims + (dims[0] // 2,))[:2]
        return forge_group_invertible(n, r, rng, tol)
    if spec.kind == "COMMUTING_PAIR":
        a, b = forge_commuting_pair(dims[0], rng, tol=tol)
        return {"a": a, "b": b, "lambda": 1.0 + 0j}
    if spec.kind == "LAMBDA_PAIR":
        k, pad = (tuple(dims) + (0,))[:2]
        solo = (1, 1) if spec.strategy == "SOLO" else (0, 0)
        a, b, lam = forge_lambda_pair(k, pad, rng, solo=solo,
                                      nilpotent_sum=spec.strategy == "NILPOTENT_SUM", tol=tol)
        return {"a": a, "b": b, "lambda": lam}
    m, n = (tuple(dims) * 2)[:2]
    if spec.kind == "LEM31":
        return forge_lem31_instance(m, n, rng, tol)
    if spec.kind == "THM32":
        return forge_thm32_instance(m, n, rng, spec.strategy, tol=tol)[0]
    return forge_thm35_instance(m, n, rng, spec.strategy, tol=tol)[0]
