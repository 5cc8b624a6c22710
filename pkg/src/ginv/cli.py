"""Command-line interface: ``ginv compute | verify | forge | report``.

Exit codes: 0 success (or ``--expect`` met), 1 usage or I/O error,
2 ``--expect`` contradicted (or a replay disagreeing with its report),
3 internal contract violation (a forged instance breaking its own contract).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .core import DEFAULT_TOL, ToleranceProfile
from .errors import ContractViolation, GinvError, NotGroupInvertible, SearchExhausted
from .forge import KINDS, ForgeSpec, forge
from .harness import (
    INAPPLICABLE,
    REFUTED,
    TARGETS,
    VERIFIED,
    config_from_report,
    load_report,
    run_verification,
)
from .io import dumps, instance_to_json, load_json, matrix_from_json, matrix_to_json
from .spectral import drazin_inverse, group_inverse, verify_drazin_identities

__all__ = ["main", "cli_main"]

EXIT_OK, EXIT_USAGE, EXIT_EXPECT, EXIT_CONTRACT = 0, 1, 2, 3
DEFAULT_VERIFY_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(p) for p in text.replace(" ", "").split(",") if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or any(d < 0 for d in dims):
        raise argparse.ArgumentTypeError(f"expected non-negative integers, got {text!r}")
    return dims


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a finite positive number, got {text!r}")
    return value


def _env_tol() -> float:
    raw = os.environ.get("GINV_TOL")
    if raw is None or raw == "":
        return DEFAULT_VERIFY_TOL
    try:
        return _positive_float(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"GINV_TOL: {exc}") from None


def _add_tolerance_flags(p):
    p.add_argument("--rank-rtol", type=_positive_float, help="relative singular-value cutoff")
    p.add_argument("--residual-rtol", type=_positive_float, help="hypothesis residual threshold")
    p.add_argument("--cond-max", type=_positive_float, help="largest accepted core condition")
    p.add_argument("--config", type=Path,
                   help="JSON file with tolerance keys and, for verify, run settings")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ginv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="group (or Drazin) inverse of one matrix")
    p.add_argument("--in", dest="input", required=True, type=Path, help="matrix JSON")
    p.add_argument("--drazin", action="store_true", help="compute the Drazin inverse instead")
    p.add_argument("--out", type=Path, help="output JSON (default: stdout)")
    _add_tolerance_flags(p)

    p = sub.add_parser("verify", help="adjudicate a target's formula variants")
    p.add_argument("--target", choices=sorted(TARGETS))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dims", type=_dims, help="comma-separated, e.g. 4,4")
    p.add_argument("--tol", type=_positive_float,
                   help=f"adjudication tolerance (default: $GINV_TOL or {DEFAULT_VERIFY_TOL})")
    p.add_argument("--report", type=Path, help="write the report JSON here")
    p.add_argument("--expect", choices=("verified", "refuted"))
    p.add_argument("--variant", help="variant checked by --expect (default: the target's primary)")
    p.add_argument("--replay", type=Path, help="re-run the configuration echoed in a report")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-anchor", action="store_true",
                   help="forge trial 0 too instead of using the fixed diagnostic instance")
    _add_tolerance_flags(p)

    p = sub.add_parser("forge", help="emit a seeded instance")
    p.add_argument("--kind", type=str.upper, choices=KINDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--dims", type=_dims)
    p.add_argument("--strategy", type=str.upper)
    p.add_argument("--spec", type=Path, help="ForgeSpec JSON; flags override its fields")
    p.add_argument("--out", type=Path, help="output JSON (default: stdout)")
    _add_tolerance_flags(p)

    p = sub.add_parser("report", help="human-readable summary of a report")
    p.add_argument("--in", dest="input", required=True, type=Path)
    return parser


# --- helpers -------------------------------------------------------------------

def _load_config(args) -> dict:
    if getattr(args, "config", None) is None:
        return {}
    doc = load_json(args.config)
    if not isinstance(doc, dict):
        raise UsageError(f"{args.config}: expected a JSON object")
    return doc


def _profile(args, config: dict) -> ToleranceProfile:
    profile = DEFAULT_TOL
    if "tolerance" in config:
        profile = ToleranceProfile.from_dict(config["tolerance"])
    for key in ("rank_rtol", "residual_rtol", "cond_max"):
        if key in config:
            profile = profile.with_(**{key: float(config[key])})
    return profile.with_(rank_rtol=args.rank_rtol, residual_rtol=args.residual_rtol,
                         cond_max=args.cond_max)


def _emit(doc, out):
    text = dumps(doc)
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


# --- subcommands -----------------------------------------------------------------

def _cmd_compute(args) -> int:
    profile = _profile(args, _load_config(args))
    m = matrix_from_json(load_json(args.input), str(args.input))
    if m.shape[0] != m.shape[1]:
        raise UsageError(f"{args.input}: matrix is {m.shape[0]}x{m.shape[1]}, expected square")
    if args.drazin:
        d = drazin_inverse(m, profile)
        doc = {"operation": "drazin_inverse", "status": "ok", "index": d.index,
               "inverse": matrix_to_json(d.inverse),
               "identity_residuals": list(verify_drazin_identities(m, d.inverse, max(d.index, 1)))}
    else:
        try:
            r = group_inverse(m, profile)
        except NotGroupInvertible as exc:
            doc = {"operation": "group_inverse", "status": "error", "error": "NotGroupInvertible",
                   "rank": exc.rank, "rank_square": exc.rank_square, "message": str(exc)}
        else:
            doc = {"operation": "group_inverse", "status": "ok", "rank": r.rank,
                   "core_condition": r.core_condition, "inverse": matrix_to_json(r.inverse),
                   "idempotent": matrix_to_json(r.idempotent),
                   "axiom_residuals": list(r.axiom_residuals)}
    _emit(doc, args.out)
    return EXIT_OK


def _verify_settings(args) -> dict:
    config = _load_config(args)
    if args.replay is not None:
        settings = config_from_report(load_report(args.replay))
    else:
        settings = {"target": config.get("target"), "trials": config.get("trials", 100),
                    "seed": config.get("seed", 0), "dims": config.get("dims"),
                    "tol": config.get("tol", _env_tol()),
                    "profile": _profile(args, config),
                    "anchor": bool(config.get("anchor", True))}
    for key in ("target", "trials", "seed", "dims", "tol"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value
    if args.replay is not None:
        settings["profile"] = settings["profile"].with_(
            rank_rtol=args.rank_rtol, residual_rtol=args.residual_rtol, cond_max=args.cond_max)
    if args.no_anchor:
        settings["anchor"] = False
    if settings["target"] is None:
        raise UsageError("verify needs --target (or --replay / --config naming one)")
    if settings["target"] not in TARGETS:
        raise UsageError(f"unknown target {settings['target']!r}")
    if int(settings["trials"]) < 1:
        raise UsageError("--trials must be >= 1")
    if int(settings["seed"]) < 0:
        raise UsageError("--seed must be >= 0")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    return settings


def _summary_lines(verdicts) -> list:
    lines = []
    for v in verdicts:
        worst = "n/a" if v["max_residual"] is None else f"{v['max_residual']:.3e}"
        line = f"{v['target']:<20} {v['variant']:<12} {v['status']:<20} trials={v['trials']:<5} max_residual={worst}"
        if v.get("counterexample"):
            line += f" counterexample={v['counterexample']}"
        lines.append(line)
    return lines


def _cmd_verify(args) -> int:
    settings = _verify_settings(args)
    report = run_verification(settings["target"], int(settings["trials"]), int(settings["seed"]),
                              settings["dims"], float(settings["tol"]), settings["profile"],
                              anchor=settings["anchor"], workers=args.workers)
    if args.report is not None:
        report.save(args.report)
    doc = report.as_dict()
    print("\n".join(_summary_lines(doc["verdicts"])))

    code = EXIT_OK
    if args.replay is not None:
        stored = {v["variant"]: v["status"] for v in load_report(args.replay)["verdicts"]}
        fresh = {v.variant: v.status for v in report.verdicts}
        if stored != fresh:
            print(f"replay disagrees with {args.replay}: stored {stored}, now {fresh}", file=sys.stderr)
            code = EXIT_EXPECT
    if args.expect is not None:
        variant = args.variant or TARGETS[settings["target"]].primary
        try:
            status = report.verdict(variant).status
        except KeyError:
            raise UsageError(f"target {settings['target']} has no variant {variant!r}; "
                             f"expected one of {TARGETS[settings['target']].variants}") from None
        wanted = VERIFIED if args.expect == "verified" else REFUTED
        if status != wanted:
            print(f"expectation contradicted: {variant} is {status}, expected {wanted}",
                  file=sys.stderr)
            code = EXIT_EXPECT
    return code


def _cmd_forge(args) -> int:
    config = _load_config(args)
    profile = _profile(args, config)
    data = {}
    if args.spec is not None:
        data = load_json(args.spec)
        if not isinstance(data, dict):
            raise UsageError(f"{args.spec}: expected a ForgeSpec object")
        data = dict(data)
    for key in ("kind", "seed", "dims", "strategy"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if "kind" not in data:
        raise UsageError("forge needs --kind (or --spec)")
    if int(data.get("seed", 0)) < 0:
        raise UsageError("--seed must be >= 0")
    spec = ForgeSpec.from_dict(data)
    _emit(instance_to_json(forge(spec, profile)), args.out)
    return EXIT_OK


def _cmd_report(args) -> int:
    doc = load_report(args.input)
    cfg = doc["config"]
    print(f"ginv report (toolkit {doc['version']})")
    print(f"target={cfg.get('target')} trials={cfg.get('trials')} seed={cfg.get('seed')} "
          f"dims={cfg.get('dims')} tol={cfg.get('tol')}")
    if "tolerance" in cfg:
        print("tolerance: " + ", ".join(f"{k}={v}" for k, v in cfg["tolerance"].items()))
    print("\n".join(_summary_lines(doc["verdicts"])))
    counts = {s: sum(v["status"] == s for v in doc["verdicts"]) for s in (VERIFIED, REFUTED, INAPPLICABLE)}
    print(f"{len(doc['trials'])} trial records; " + ", ".join(f"{k}: {v}" for k, v in counts.items()))
    return EXIT_OK


_COMMANDS = {"compute": _cmd_compute, "verify": _cmd_verify, "forge": _cmd_forge,
             "report": _cmd_report}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help / --version exit 0, errors exit 1
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (ContractViolation, SearchExhausted) as exc:
        print(f"ginv: contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (UsageError, GinvError, ValueError, KeyError, OSError) as exc:
        print(f"ginv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
