"""Command-line front end.

Exit codes: 0 analysis completed (whatever the verdicts), 2 input error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import __version__
from .errors import InvariantViolation, LcmIdentError
from .ident import IdentConfig, ModelAnalyzer, fiber_sample, rank_analysis
from .ioeq import coefficient_map, cross_validate, io_equations, named_coefficients, trial_point
from .mammillary import (
    FAMILIES,
    FamilyId,
    big_sum_check,
    classification_table,
    conjecture_probe_M23,
    family_model,
    family_report,
    lhs_structure,
    min_n,
    rhs_identities,
    vandermonde_check,
)
from .model import load_model, serialize_model, validate
from .report import envelope, render

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3
SEED_MAX = 2**64 - 1

EPILOG = """\
environment:
  LCM_IDENT_THREADS  worker thread cap for fiber starts and table cells (0 = auto)

exit codes:
  0 completed, 2 input error, 3 internal invariant violation
"""


@dataclass
class RunConfig:
    seed: int = 42
    points: int = 5
    starts: int = 200
    method: str = "both"
    format: str = "json"
    output: str | None = None

    def to_dict(self) -> dict:
        return {"seed": self.seed, "points": self.points, "starts": self.starts,
                "method": self.method, "format": self.format}

    def ident_config(self) -> IdentConfig:
        return IdentConfig(points=self.points, starts=self.starts, seed=self.seed,
                           method=self._engine())

    def _engine(self) -> str:
        return "auto" if self.method == "both" else self.method


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _json_model(m) -> dict:
    return json.loads(serialize_model(m))


# -- commands ------------------------------------------------------------------------------

def cmd_analyze(path: str, cfg: RunConfig) -> dict:
    m = load_model(path)
    engine = cfg._engine()
    eqs = io_equations(m, engine)
    cm = coefficient_map(m, engine)
    body = {
        "model": _json_model(m),
        "validation": validate(m).to_dict(),
        "coefficients": {name: p.serialize() for name, p in named_coefficients(eqs)},
        "constant_coefficients": {name: v for name, v in cm.dropped},
    }
    if cfg.method == "both" and validate(m).forest_formula_applicable:
        body["cross_validation"] = cross_validate(m, 20, cfg.seed).to_dict()
        if not body["cross_validation"]["pass"]:
            raise InvariantViolation(f"engines disagree: {body['cross_validation']['first_failure']}")
    an = ModelAnalyzer(m, cfg.ident_config())
    ra = an.rank
    body["model_identifiability"] = {
        "identifiable": ra.model_identifiable, "generic_rank": ra.generic_rank,
        "n_parameters": ra.n_params, "ranks": ra.ranks}
    body["verdicts"] = [an.classify(p).to_dict() for p in m.parameters]
    return envelope("analyze", cfg.to_dict(), body)


def cmd_mammillary(n: int, i: int, j: int, cfg: RunConfig) -> dict:
    rep = family_report(n, i, j, cfg.seed)
    f = FamilyId(n, *rep["family"])
    rows = []
    an = ModelAnalyzer(family_model(f), cfg.ident_config())
    for p in an.model.parameters:
        rows.append(an.classify(p).to_dict())
    rep["verdicts"] = rows
    return envelope("mammillary", cfg.to_dict(), rep)


def cmd_table(n_max: int, cfg: RunConfig) -> dict:
    rows = classification_table(n_max, cfg.ident_config())
    body = {"n_max": n_max, "table": [r.to_dict() for r in rows],
            "mismatches": sum(not r.match for r in rows)}
    body["conjecture_probe"] = [conjecture_probe_M23(n, cfg.points, cfg.seed).to_dict()
                                for n in range(5, n_max + 1)]
    return envelope("table", cfg.to_dict(), body)


def _family_checks(f: FamilyId, cfg: RunConfig) -> dict:
    m = family_model(f)
    xv = cross_validate(m, 20, cfg.seed).to_dict()
    ids = dict(rhs_identities(f))
    ids.update(lhs_structure(f.n).checks)
    if f.pair == (1, 2):
        ids["det(M) = +/- Vandermonde"] = bool(vandermonde_check(f.n))
        ids["alternating-sum identity at 20 points"] = all(
            big_sum_check(f.n, trial_point(m.parameters, cfg.seed, t)) == 0 for t in range(20))
    ok = xv["pass"] and all(ids.values())
    return {"family": [f.input, f.output], "n": f.n, "engines_agree": xv["pass"],
            "first_failure": xv["first_failure"], "identities": ids, "pass": ok}


def cmd_verify(path: str | None, family: str | None, n_max: int, cfg: RunConfig) -> dict:
    if path:
        m = load_model(path)
        xv = cross_validate(m, 20, cfg.seed).to_dict()
        body = {"results": [xv], "pass": xv["pass"]}
    else:
        pairs = list(FAMILIES) if family == "all" else [_parse_family(family)]
        results = [_family_checks(FamilyId(n, *pair), cfg)
                   for pair in pairs for n in range(min_n(pair), n_max + 1)]
        body = {"n_max": n_max, "results": results, "pass": all(r["pass"] for r in results)}
    doc = envelope("verify", cfg.to_dict(), body)
    if not body["pass"]:
        raise InvariantViolation("verification failed:\n" + render(doc, "json"))
    return doc


def cmd_fiber(path: str, cfg: RunConfig) -> dict:
    m = load_model(path)
    rank = rank_analysis(m, cfg.points, cfg.seed, cfg._engine())
    rep = fiber_sample(m, None, cfg.starts, cfg.seed)
    return envelope("fiber", cfg.to_dict(), {
        "model": _json_model(m), "locally_identifiable": rank.local, "fiber": rep.to_dict()})


def _parse_family(text: str | None) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in (text or "").split(","))
    except ValueError:
        raise LcmIdentError(f"--family expects 'all' or 'i,j', got {text!r}") from None
    if (a, b) not in FAMILIES:
        raise LcmIdentError(f"unknown family ({a},{b}); choose from {list(FAMILIES)}")
    return a, b


# -- argument parsing ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=42, help="RNG seed (default 42)")
    common.add_argument("--points", type=_positive, default=5,
                        help="random points for rank tests (default 5)")
    common.add_argument("--starts", type=_positive, default=200,
                        help="fiber solver starts (default 200)")
    common.add_argument("--method", choices=("forest", "det", "both"), default="both",
                        help="coefficient engine (default both: forest when applicable, "
                             "cross-checked against determinants)")
    common.add_argument("--format", choices=("json", "md"), default="json")
    common.add_argument("--output", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(
        prog="lcm-ident", description="Identifiability analysis of linear compartmental models.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="classify every parameter of a model file")
    a.add_argument("model", help="model JSON file")

    mm = sub.add_parser("mammillary", parents=[common],
                        help="analyse the mammillary model with given input and output")
    mm.add_argument("-n", type=int, required=True, help="number of compartments")
    mm.add_argument("--input", type=int, required=True, help="input compartment")
    mm.add_argument("--output-comp", type=int, required=True, help="output compartment")

    t = sub.add_parser("table", parents=[common], help="classification table of all five families")
    t.add_argument("--n-max", type=int, default=6)

    v = sub.add_parser("verify", parents=[common], help="cross-check engines and identities")
    v.add_argument("model", nargs="?", help="model JSON file")
    v.add_argument("--family", help="'all' or 'i,j' (used when no model file is given)")
    v.add_argument("--n-max", type=int, default=7)

    f = sub.add_parser("fiber", parents=[common], help="sample the coefficient-map fiber")
    f.add_argument("model", help="model JSON file")
    return p


def run(args: argparse.Namespace) -> dict:
    cfg = RunConfig(args.seed, args.points, args.starts, args.method, args.format, args.output)
    if args.command == "analyze":
        return cmd_analyze(args.model, cfg)
    if args.command == "mammillary":
        return cmd_mammillary(args.n, args.input, args.output_comp, cfg)
    if args.command == "table":
        return cmd_table(args.n_max, cfg)
    if args.command == "verify":
        if not args.model and not args.family:
            raise LcmIdentError("verify needs a model file or --family")
        return cmd_verify(args.model, args.family, args.n_max, cfg)
    return cmd_fiber(args.model, cfg)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = run(args)
        text = render(doc, args.format)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except InvariantViolation as exc:
        print(f"lcm-ident: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (LcmIdentError, ValueError, KeyError, OSError) as exc:
        print(f"lcm-ident: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
