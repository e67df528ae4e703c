"""Command-line interface.

Exit codes: 0 when the analysis completed (whatever the verdict), 2 for
unreadable or invalid input, 3 when the analysis itself fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from typing import Any, Callable

from .coeffs import derive_seed, io_equation
from .documents import (
    DocumentError,
    dump_lines,
    format_rational,
    load_compose,
    load_model,
    model_to_dict,
    serialize_model,
)
from .engine import analyze, check_icm
from .exact import DegeneratePointError, UniPolynomial
from .graphs import GraphError, cycle_space_basis, is_strongly_connected, simple_cycles
from .model import CompartmentModel, ModelError, param_name, random_point, validate
from .transforms import canonical, scaling_reparam, suggest_variants, tiered_union, verify_tiered

SEED_ENV = "LINIDENT_SEED"
EXIT_OK, EXIT_INPUT, EXIT_ENGINE = 0, 2, 3


class InputError(Exception):
    pass


def _seed(value: str) -> int:
    try:
        s = int(value, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned integer, got {value!r}")
    if not 0 <= s < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return s


def _positive(value: str) -> int:
    try:
        v = int(value, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def resolve_seed(flag: int | None) -> tuple[int, str]:
    """The environment variable wins over ``--seed`` so CI can pin runs."""
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return _seed(env.strip()), "env"
        except argparse.ArgumentTypeError as exc:
            raise InputError(f"{SEED_ENV}: {exc}") from exc
    if flag is not None:
        return flag, "flag"
    return 0, "default"


def _poly(p: UniPolynomial) -> dict:
    return {
        "degree": p.degree,
        "monic": not p.is_zero() and p.lead == 1,
        "coefficients": [format_rational(c) for c in p.coeffs],
        "text": str(p),
    }


def _point(pt) -> dict:
    return {param_name(p): format_rational(v) for p, v in sorted(pt.values.items())}


def _isc(order) -> Any:
    return list(order) if order is not None else "none"


def _applicability(model: CompartmentModel, seed: int, trials: int) -> dict:
    sc = is_strongly_connected(model.graph)
    ancestor = model.with_sets(inputs={1}, outputs={1}, leaks=model.graph.vertices)
    anc = check_icm(ancestor, seed, trials) if sc else None
    own = check_icm(model, seed, trials) if model.inputs and model.outputs else None
    anc_ok = bool(anc and anc.is_icm)
    single = model.inputs == {1} and model.outputs == {1} and len(model.leaks) == 1
    io = 1 in model.inputs & model.outputs and model.leaks <= model.inputs | model.outputs
    return {
        "icm": bool(own and own.is_icm),
        "ancestor_icm": anc_ok,
        "single_leak_guarantee": single and anc_ok,
        "io_leak_guarantee": io and anc_ok,
        "isc_ordering": _isc(anc.isc_ordering if anc else None),
    }


def cmd_analyze(args, model_doc, seed) -> dict:
    model, point = model_doc.model, model_doc.point
    rep = analyze(model, seed, args.trials, point)
    return {
        "verdict": rep.verdict.value,
        "n_params": rep.n_params,
        "n_coeffs": rep.n_coeffs,
        "n_nonconstant": rep.n_nonconstant,
        "rank": rep.rank,
        "trial_ranks": rep.trial_ranks,
        "parameters": [param_name(p) for p in model.parameters],
        "applicability": _applicability(model, seed, args.trials),
        "diagnostics": validate(model),
    }


def cmd_check_icm(args, model_doc, seed) -> dict:
    res = check_icm(model_doc.model, seed, args.trials)
    return {
        "is_icm": res.is_icm,
        "reasons": res.reasons,
        "notes": res.notes,
        "rank": res.rank,
        "target_rank": res.target_rank,
        "isc_ordering": _isc(res.isc_ordering),
        "isc_shortcut": res.isc_shortcut,
    }


def cmd_ioeq(args, model_doc, seed) -> dict:
    model = model_doc.model
    if args.output is not None and args.output not in model.outputs:
        raise ModelError(f"compartment {args.output} is not an output")
    outputs = [args.output] if args.output is not None else sorted(model.outputs)
    point = model_doc.point or random_point(model, derive_seed(seed, "ioeq"))
    eqs = []
    for i in outputs:
        eq = io_equation(model, point, i, seed)
        eqs.append(
            {
                "output": i,
                "lhs": _poly(eq.lhs),
                "rhs": {str(j): _poly(p) for j, p in sorted(eq.rhs.items())},
                "gcd_degree": eq.gcd_degree,
                "point": _point(eq.point),
                "warnings": list(eq.warnings),
            }
        )
    return {"equations": eqs}


def cmd_cycles(args, model_doc, seed) -> dict:
    g = model_doc.model.graph
    out: dict[str, Any] = {
        "cycles": [list(c.vertices) for c in simple_cycles(g)],
        "self_cycles": list(g.vertices),
        "cycle_space_dimension": len(g.edges) - g.n + 1,
    }
    try:
        basis = cycle_space_basis(g)
        out["basis"] = [list(c.vertices) for c in basis]
        out["basis_size"] = len(basis)
    except GraphError as exc:
        out["basis"] = None
        out["basis_size"] = None
        out["note"] = str(exc)
    return out


def cmd_reparam(args, model_doc, seed) -> dict:
    rep = scaling_reparam(model_doc.model, seed)
    entries = []
    for (i, k), m in sorted(rep.entries.items()):
        entries.append(
            {
                "row": i,
                "col": k,
                "exponents": {param_name(p): e for p, e in canonical(m)},
                "verified": rep.verified.get((i, k)),
            }
        )
    return {
        "tree": [[p, v] for v, p in sorted(rep.tree.items())],
        "matrix": rep.matrix_strings(),
        "entries": entries,
        "negative_exponents": [list(x) for x in rep.negative_entries],
    }


def cmd_suggest(args, model_doc, seed) -> dict:
    sugg = suggest_variants(model_doc.model, seed, args.max_extra, args.trials)
    return {
        "suggestions": [
            {
                "description": s.description,
                "model": model_to_dict(s.model),
                "verdict": s.report.verdict.value,
                "rank": s.report.rank,
                "n_params": s.report.n_params,
            }
            for s in sugg
        ]
    }


def cmd_compose(args, spec, seed) -> dict:
    spec, name = spec
    union = tiered_union(spec, name)
    check = verify_tiered(spec, seed, args.trials)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(serialize_model(union))

    def brief(r):
        return {"verdict": r.verdict.value, "rank": r.rank, "n_params": r.n_params}

    return {
        "model": model_to_dict(union),
        "upper_standalone": brief(check.upper),
        "lower_standalone": brief(check.lower),
        "strongly_connected_tiers": check.strongly_connected_tiers,
        "guarantee_applies": check.guarantee_applies,
        "notes": check.notes,
        "analysis": {
            "verdict": check.union.verdict.value,
            "n_params": check.union.n_params,
            "rank": check.union.rank,
            "trial_ranks": check.union.trial_ranks,
        },
    }


COMMANDS: dict[str, tuple[Callable, Callable]] = {
    "analyze": (cmd_analyze, load_model),
    "check-icm": (cmd_check_icm, load_model),
    "ioeq": (cmd_ioeq, load_model),
    "cycles": (cmd_cycles, load_model),
    "reparam": (cmd_reparam, load_model),
    "suggest": (cmd_suggest, load_model),
    "compose": (cmd_compose, load_compose),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linident", description="Structural identifiability of linear compartment models.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("file", help="compose document" if name == "compose" else "model document")
        p.add_argument("--seed", type=_seed, default=None, help=f"u64 seed; {SEED_ENV} takes precedence")
        p.add_argument("--trials", type=_positive, default=3)
        p.add_argument("--format", choices=("json", "text"), default="json")
        if name == "ioeq":
            p.add_argument("--output", type=_positive, default=None, help="output compartment (default: all)")
        if name == "suggest":
            p.add_argument("--max-extra", type=int, default=1)
        if name == "compose":
            p.add_argument("--emit", default=None, help="also write the composed model document here")
    return parser


def render_text(report: dict, indent: str = "") -> str:
    lines = []
    for k, v in report.items():
        if isinstance(v, dict) and v:
            lines.append(f"{indent}{k}:")
            lines.append(render_text(v, indent + "  "))
        elif isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            lines.append(f"{indent}{k}:")
            for x in v:
                lines.append(f"{indent}  -")
                lines.append(render_text(x, indent + "    "))
        else:
            lines.append(f"{indent}{k}: {json.dumps(v, ensure_ascii=False)}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler, loader = COMMANDS[args.command]
    start = time.perf_counter()
    try:
        seed, source = resolve_seed(args.seed)
        doc = loader(args.file)
    except (DocumentError, InputError) as exc:
        print(f"linident: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            body = handler(args, doc, seed)
        except (ModelError, GraphError, DegeneratePointError, ArithmeticError, ValueError, OSError) as exc:
            print(f"linident: analysis error: {exc}", file=sys.stderr)
            return EXIT_ENGINE
    model_echo = model_to_dict(doc.model, doc.point) if args.command != "compose" else None
    report: dict[str, Any] = {"command": args.command}
    if model_echo is not None:
        report["model"] = model_echo
    report["seed"] = seed
    report["seed_source"] = source
    report.update(body)
    report["warnings"] = sorted({str(w.message) for w in caught})
    report["elapsed_seconds"] = round(time.perf_counter() - start, 6)
    for w in report["warnings"]:
        print(f"linident: warning: {w}", file=sys.stderr)
    if args.format == "json":
        sys.stdout.write(dump_lines(report))
    else:
        sys.stdout.write(render_text(report) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
