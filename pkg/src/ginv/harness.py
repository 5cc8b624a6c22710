"""Verification harness: forge instances, evaluate formula variants, adjudicate.

Each target couples a forge (trial index -> instance) with an evaluator
(instance -> residual per variant). A residual is the relative distance to
the oracle group inverse; ``None`` marks a trial where the variant does not
apply (e.g. the oracle says the inverse does not exist) and ``inf`` a
formula that could not be evaluated although the oracle inverse exists.

Trial ``i`` draws from ``make_rng(seed, i)``, so trials are independent and
may run in any order; records are merged by index. With ``anchor`` on,
trial 0 replays a fixed diagnostic instance for the target.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .blocks import BlockInstance, block_formula, block_hypotheses, swap_route
from .core import DEFAULT_TOL, ToleranceProfile, eye, relative_residual, spectral_norm
from .errors import ContractViolation, GinvError, NoLambda, NotGroupInvertible
from .forge import (
    forge_commuting_pair,
    forge_lambda_pair,
    forge_lem31_instance,
    forge_nilpotent_bearing,
    forge_thm32_instance,
    forge_thm35_instance,
    make_rng,
)
from .io import digest, dumps, instance_from_json, instance_to_json, load_json
from .spectral import cline_transfer, drazin_inverse, try_group_inverse, verify_drazin_identities, verify_group_axioms
from .sums import (
    cor23_difference_formula,
    cor24_commuting_formula,
    cor25_scaled_formula,
    detect_lambda,
    lemma21_check,
    thm22_equivalence_check,
    thm22_intermediate_variants,
    thm22_sum_formula,
)

__all__ = [
    "TARGETS",
    "VERIFIED",
    "REFUTED",
    "INAPPLICABLE",
    "FormulaVerdict",
    "Report",
    "run_verification",
    "evaluate_instance",
    "replay_counterexample",
    "load_report",
]

VERIFIED = "VERIFIED_ON_SAMPLE"
REFUTED = "REFUTED"
INAPPLICABLE = "INAPPLICABLE"

EXAMPLE_26 = {"a": np.array([[0, 1], [1, 0]], complex), "b": np.array([[-1, 0], [0, 1]], complex)}
PROJECTION_PAIR = {"a": np.diag([1, 0]).astype(complex), "b": np.diag([0, 1]).astype(complex)}
SCALAR_SWAP = BlockInstance(0, 1, 1, 0)


@dataclass(frozen=True)
class Target:
    name: str
    variants: tuple
    primary: str
    default_dims: tuple
    forge: Callable  # (index, rng, dims, tol) -> instance
    evaluate: Callable  # (instance, tol) -> (residuals, extras)
    anchor: object = None


# --- evaluation helpers -----------------------------------------------------

def _against(oracle, compute) -> float:
    try:
        value = compute()
    except NotGroupInvertible:
        return math.inf
    return relative_residual(value, oracle)


def _pair_inputs(inst, tol):
    a, b = inst["a"], inst["b"]
    for name, x in (("a", a), ("b", b)):
        if try_group_inverse(x, tol) is None:
            raise ContractViolation(f"{name} is not group invertible on a forged pair")
    return a, b


def _lambda_cert(a, b, tol):
    try:
        return detect_lambda(a, b, tol)
    except NoLambda as exc:
        raise ContractViolation(f"forged pair has no lambda: {exc}") from exc


def _eval_lemma21(inst, tol):
    a, b = _pair_inputs(inst, tol)
    cert = _lambda_cert(a, b, tol)
    triple = lemma21_check(a, b, cert.lam, tol)
    return {"identities": max(triple)}, {"lambda": [cert.lam.real, cert.lam.imag],
                                          "both_zero": cert.both_zero}


def _eval_equivalence(inst, tol):
    a, b = _pair_inputs(inst, tol)
    _lambda_cert(a, b, tol)
    eq = thm22_equivalence_check(a, b, tol)
    return ({"equivalence": 0.0 if eq.all_agree else 1.0},
            {"exists": [eq.exists_sum, eq.exists_cond2, eq.exists_cond3]})


def _sum_oracle(x, tol, scale=0.0):
    r = try_group_inverse(x, tol, scale=scale)
    return None if r is None else r.inverse


def _eval_final(inst, tol):
    a, b = _pair_inputs(inst, tol)
    _lambda_cert(a, b, tol)
    oracle = _sum_oracle(a + b, tol, spectral_norm(a) + spectral_norm(b))
    if oracle is None:
        return {"final": None}, {"exists": False}
    res = _against(oracle, lambda: thm22_sum_formula(a, b, tol))
    extras = {"exists": True}
    if math.isfinite(res):
        extras["axioms"] = max(verify_group_axioms(a + b, thm22_sum_formula(a, b, tol)))
    return {"final": res}, extras


def _eval_pair_variants(names, oracle_of, formula, weights=(1.0, 1.0)):
    """``oracle_of`` builds w0 a + w1 b; the weights size its rank decisions."""
    def evaluate(inst, tol):
        a, b = _pair_inputs(inst, tol)
        scale = abs(weights[0]) * spectral_norm(a) + abs(weights[1]) * spectral_norm(b)
        oracle = _sum_oracle(oracle_of(inst, a, b), tol, scale)
        if oracle is None:
            return dict.fromkeys(names), {"exists": False}
        try:
            values = formula(inst, a, b, tol)
        except NotGroupInvertible:
            return dict.fromkeys(names, math.inf), {"exists": True}
        return {n: relative_residual(v, oracle) for n, v in zip(names, values)}, {"exists": True}
    return evaluate


def _eval_intermediate(inst, tol):
    _lambda_cert(inst["a"], inst["b"], tol)
    return _eval_pair_variants(("stated", "swapped"), lambda i, a, b: a + b,
                               lambda i, a, b, t: thm22_intermediate_variants(a, b, t))(inst, tol)


def _eval_cor23(inst, tol):
    _lambda_cert(inst["a"], inst["b"], tol)
    return _eval_pair_variants(("stated", "swapped"), lambda i, a, b: a - b,
                               lambda i, a, b, t: cor23_difference_formula(a, b, t))(inst, tol)


def _eval_cor24(inst, tol):
    a, b = _pair_inputs(inst, tol)
    ag = try_group_inverse(a, tol).inverse
    pre_scale = 1 + spectral_norm(ag) * spectral_norm(b)
    if try_group_inverse(eye(a.shape[0]) + ag @ b, tol, scale=pre_scale) is None:
        return {"literal": None}, {"exists": False}
    return _eval_pair_variants(("literal",), lambda i, a, b: a + b,
                               lambda i, a, b, t: (cor24_commuting_formula(a, b, t),))(inst, tol)


def _eval_cor25(inst, tol):
    lam, mu = complex(inst["lambda"]), complex(inst["mu"])
    return _eval_pair_variants(("literal", "variant"), lambda i, a, b: lam * a + mu * b,
                               lambda i, a, b, t: cor25_scaled_formula(a, b, lam, mu, t),
                               (lam, mu))(inst, tol)


def _eval_lem31(inst, tol):
    oracle = _sum_oracle(inst.assemble(), tol)
    if oracle is None:
        raise ContractViolation("LEM31 instance is not group invertible")
    return {"stated": _against(oracle, lambda: block_formula(inst, "LEM31", "STATED", tol))}, {}


def _block_evaluator(theorem_id):
    def evaluate(inst, tol):
        report = block_hypotheses(inst, theorem_id, tol)
        if not report.passes(tol):
            raise ContractViolation(f"{theorem_id} instance fails hypotheses: {report.failing(tol)}")
        M = inst.assemble()
        oracle = _sum_oracle(M, tol)
        residuals = {"existence": 0.0 if oracle is not None else 1.0}
        axioms = {}
        for variant in ("STATED", "PROOF", "CORRECTED"):
            key = variant.lower()
            if oracle is None:
                residuals[key] = None
                continue
            try:
                value = block_formula(inst, theorem_id, variant, tol)
            except NotGroupInvertible:
                residuals[key] = math.inf
                continue
            residuals[key] = relative_residual(value, oracle)
            axioms[key] = max(verify_group_axioms(M, value))
        return residuals, {"axioms": axioms}
    return evaluate


def _eval_cline(inst, tol):
    b, c = inst["B"], inst["C"]
    scale = spectral_norm(b) * spectral_norm(c)
    bc_d = drazin_inverse(b @ c, tol, scale=scale)
    x = cline_transfer(b, c, bc_d)
    cb = c @ b
    identities = verify_drazin_identities(cb, x, bc_d.index + 1)
    oracle = drazin_inverse(cb, tol, scale=scale).inverse
    return {"transfer": max(identities)}, {"bc_index": bc_d.index,
                                           "oracle_residual": relative_residual(x, oracle)}


# --- forges per target -------------------------------------------------------

_CYCLES = (1, 2, 3, 4, 6)


def _lambda_pair_forge(nilpotent_every: int = 0):
    def forge(index, rng, dims, tol):
        max_pad = dims[0]
        k = int(rng.choice(_CYCLES))
        pad = int(rng.integers(0, max_pad + 1))
        solo = tuple(int(s) for s in rng.integers(0, 3, size=2))
        nil = bool(nilpotent_every) and index % nilpotent_every == nilpotent_every - 1
        a, b, lam = forge_lambda_pair(k, pad, rng, solo=solo, nilpotent_sum=nil, tol=tol)
        return {"a": a, "b": b, "lambda": lam}
    return forge


def _commuting_forge(scaled: bool):
    def forge(index, rng, dims, tol):
        n = int(rng.integers(1, dims[0] + 1))
        a, b = forge_commuting_pair(n, rng, tol=tol)
        inst = {"a": a, "b": b}
        if scaled:
            inst["lambda"], inst["mu"] = (complex(z) for z in
                                          rng.uniform(0.5, 2.0, 2) * np.exp(2j * np.pi * rng.uniform(0, 1, 2)))
        return inst
    return forge


def _block_dims(rng, dims):
    return int(rng.integers(1, dims[0] + 1)), int(rng.integers(1, dims[1] + 1))


def _lem31_forge(index, rng, dims, tol):
    return forge_lem31_instance(*_block_dims(rng, dims), rng, tol)


def _block_forge(theorem_id):
    def forge(index, rng, dims, tol):
        m, n = _block_dims(rng, dims)
        conj = index % 2 == 1
        if theorem_id in ("THM32", "COR33"):
            inst, _ = forge_thm32_instance(m, n, rng, conjugate=conj, tol=tol)
        else:
            inst, _ = forge_thm35_instance(m, n, rng, conjugate=conj, tol=tol)
        return swap_route(inst) if theorem_id in ("COR33", "COR36") else inst
    return forge


def _cline_forge(index, rng, dims, tol):
    m, n = _block_dims(rng, dims)
    if index % 2 == 0:
        scale = rng.uniform(0.5, 2.0)
        b = scale * (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)))
        c = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        return {"B": b, "C": c}
    # B C equals a matrix with nilpotent part, so index(BC) >= 2 when possible
    size = max(m, 2)
    r = int(rng.integers(0, size - 1))
    z = forge_nilpotent_bearing(size, r, [2], rng)
    u, s, vh = np.linalg.svd(z)
    k = int(np.count_nonzero(s > 1e-9 * s[0]))
    extra = int(rng.integers(0, min(2, 6 - k) + 1))
    f = np.hstack([u[:, :k] * s[:k], rng.standard_normal((size, extra))])
    g = np.vstack([vh[:k], np.zeros((extra, size))])
    return {"B": f, "C": g}


def _pair_anchor(pair, **scalars):
    return dict(pair, **scalars)


TARGETS = {
    t.name: t for t in (
        Target("lemma2.1", ("identities",), "identities", (3,),
               _lambda_pair_forge(), _eval_lemma21, EXAMPLE_26),
        Target("thm2.2-equivalence", ("equivalence",), "equivalence", (3,),
               _lambda_pair_forge(nilpotent_every=4), _eval_equivalence, EXAMPLE_26),
        Target("thm2.2-final", ("final",), "final", (3,),
               _lambda_pair_forge(), _eval_final, EXAMPLE_26),
        Target("thm2.2-intermediate", ("stated", "swapped"), "stated", (3,),
               _lambda_pair_forge(), _eval_intermediate, PROJECTION_PAIR),
        Target("cor2.3", ("stated", "swapped"), "stated", (3,),
               _lambda_pair_forge(), _eval_cor23, PROJECTION_PAIR),
        Target("cor2.4", ("literal",), "literal", (6,),
               _commuting_forge(False), _eval_cor24, PROJECTION_PAIR),
        Target("cor2.5", ("literal", "variant"), "literal", (6,),
               _commuting_forge(True), _eval_cor25,
               _pair_anchor(PROJECTION_PAIR, **{"lambda": 1 + 0j, "mu": 1 + 0j})),
        Target("lem3.1", ("stated",), "stated", (4, 4),
               _lem31_forge, _eval_lem31, BlockInstance(1, 0, 1, 1)),
        Target("thm3.2", ("existence", "stated", "proof", "corrected"), "stated", (4, 4),
               _block_forge("THM32"), _block_evaluator("THM32"), SCALAR_SWAP),
        Target("cor3.3", ("existence", "stated", "proof", "corrected"), "stated", (4, 4),
               _block_forge("COR33"), _block_evaluator("COR33"), SCALAR_SWAP),
        Target("thm3.5", ("existence", "stated", "proof", "corrected"), "stated", (4, 4),
               _block_forge("THM35"), _block_evaluator("THM35"), SCALAR_SWAP),
        Target("cor3.6", ("existence", "stated", "proof", "corrected"), "stated", (4, 4),
               _block_forge("COR36"), _block_evaluator("COR36"), SCALAR_SWAP),
        Target("cline", ("transfer",), "transfer", (6, 6),
               _cline_forge, _eval_cline,
               {"B": np.array([[1], [0]], complex), "C": np.array([[1, 0]], complex)}),
    )
}


def _target(name: str) -> Target:
    try:
        return TARGETS[name]
    except KeyError:
        raise ValueError(f"unknown target {name!r}; expected one of {sorted(TARGETS)}") from None


def _normalize_dims(target: Target, dims) -> tuple:
    if dims is None or len(dims) == 0:
        return target.default_dims
    dims = tuple(int(d) for d in dims)
    if any(d < 0 for d in dims):
        raise ValueError("dims must be non-negative")
    need = len(target.default_dims)
    if len(dims) < need:
        dims = dims + dims[-1:] * (need - len(dims))
    return dims[:need]


# --- trials, verdicts, reports -------------------------------------------------

def evaluate_instance(target: str, instance, tol: ToleranceProfile = DEFAULT_TOL):
    """Residual per variant for one instance (the replay path)."""
    return _target(target).evaluate(instance, tol)


def _run_trial(args):
    name, index, seed, dims, profile, anchor = args
    target = _target(name)
    if anchor and index == 0 and target.anchor is not None:
        inst = target.anchor
    else:
        inst = target.forge(index, make_rng(seed, index), dims, profile)
    doc = instance_to_json(inst)
    # evaluate the serialized instance so persisted counterexamples replay exactly
    residuals, extras = target.evaluate(instance_from_json(doc), profile)
    return index, doc, residuals, extras


def _json_residual(x):
    if x is None or not math.isfinite(x):
        return None
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _json_residual(float(obj))
    return obj


@dataclass
class FormulaVerdict:
    target: str
    variant: str
    status: str
    trials: int
    max_residual: Optional[float]
    counterexample: Optional[str]

    def as_dict(self) -> dict:
        return {"target": self.target, "variant": self.variant, "status": self.status,
                "trials": self.trials, "max_residual": self.max_residual,
                "counterexample": self.counterexample}


@dataclass
class Report:
    config: dict
    verdicts: list
    trials: list
    version: str = __version__
    counterexamples: dict = field(default_factory=dict)  # relative path -> instance doc

    def as_dict(self) -> dict:
        return {"config": self.config, "verdicts": [v.as_dict() for v in self.verdicts],
                "trials": self.trials, "version": self.version}

    def to_json(self) -> str:
        return dumps(self.as_dict())

    def verdict(self, variant: str) -> FormulaVerdict:
        for v in self.verdicts:
            if v.variant == variant:
                return v
        raise KeyError(variant)

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        for rel, doc in self.counterexamples.items():
            out = path.parent / rel
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(dumps(doc), encoding="utf-8")
        path.write_text(self.to_json(), encoding="utf-8")
        return path


def run_verification(target: str, trials: int = 100, seed: int = 0, dims=None,
                     tol: float = 1e-8, profile: ToleranceProfile = DEFAULT_TOL, *,
                     anchor: bool = True, workers: int = 1,
                     store: str = "counterexamples") -> Report:
    """Run ``trials`` trials of ``target`` and adjudicate every variant at ``tol``.

    Counterexample documents are kept on the report (``Report.counterexamples``)
    under ``<store>/<digest>.json`` and written by :meth:`Report.save`.
    """
    tdef = _target(target)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    dims = _normalize_dims(tdef, dims)
    jobs = [(target, i, seed, dims, profile, anchor) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [_run_trial(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    records, docs = [], {}
    for index, doc, residuals, extras in results:
        record = {"index": index, "seed_offset": index, "digest": digest(doc),
                  "residuals": {k: _json_residual(v) for k, v in residuals.items()}}
        failed = [k for k, v in residuals.items() if v is not None and not math.isfinite(v)]
        if failed:
            record["not_evaluable"] = failed
        if extras:
            record["extras"] = _jsonable(extras)
        records.append(record)
        docs[index] = doc

    verdicts, counterexamples = [], {}
    for variant in tdef.variants:
        applicable, worst, first_fail = 0, None, None
        for index, _, residuals, _ in results:
            r = residuals.get(variant)
            if r is None:
                continue
            applicable += 1
            if math.isfinite(r):
                worst = r if worst is None else max(worst, r)
            if (not math.isfinite(r) or r > tol) and first_fail is None:
                first_fail = index
        ref = None
        if first_fail is not None:
            status = REFUTED
            ref = f"{store}/{digest(docs[first_fail])}.json"
            counterexamples[ref] = docs[first_fail]
        elif applicable == trials:
            status = VERIFIED
        else:
            status = INAPPLICABLE
        verdicts.append(FormulaVerdict(target, variant, status, applicable, worst, ref))

    config = {"target": target, "trials": trials, "seed": seed, "dims": list(dims),
              "tol": tol, "tolerance": profile.as_dict(), "anchor": anchor}
    return Report(config, verdicts, records, __version__, counterexamples)


def config_from_report(doc: dict) -> dict:
    """Keyword arguments that make run_verification reproduce a report."""
    cfg = doc["config"]
    return {"target": cfg["target"], "trials": int(cfg["trials"]), "seed": int(cfg["seed"]),
            "dims": tuple(cfg["dims"]), "tol": float(cfg["tol"]),
            "profile": ToleranceProfile.from_dict(cfg["tolerance"]),
            "anchor": bool(cfg.get("anchor", True))}


def load_report(path) -> dict:
    doc = load_json(path)
    if not isinstance(doc, dict) or not {"config", "verdicts", "trials", "version"} <= doc.keys():
        raise GinvError(f"{path}: not a verification report")
    return doc


def replay_counterexample(path, target: str, variant: str,
                          profile: ToleranceProfile = DEFAULT_TOL) -> float:
    """Residual of ``variant`` on a persisted counterexample instance."""
    inst = instance_from_json(load_json(path), str(path))
    residuals, _ = evaluate_instance(target, inst, profile)
    value = residuals.get(variant)
    if value is None:
        raise GinvError(f"variant {variant!r} does not apply to {path}")
    return value
