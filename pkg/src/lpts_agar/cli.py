"""Command-line entry point: ``lpts-agar {check,cegar,agar} MODEL``.

Exit status 0 means the simulation holds, 1 that it fails (a counterexample is
written), 2 that the input or the options are invalid.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from .agar import agar2, agar_n
from .cex import build_cex
from .compose import compose_all, widen_alphabet
from .core import Lpts, complete_spec
from .parse import ModelError, ModelFile, cex_document, emit_cex, format_lpts, parse_model
from .refine import cegar
from .simulate import coarsest_simulation

EXIT_HOLDS, EXIT_FAILS, EXIT_ERROR = 0, 1, 2

log = logging.getLogger("lpts_agar")


class UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpts-agar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("model", help="path to a .lpts model file")
        p.add_argument("--format", choices=["json", "dot", "text"], default="json")
        p.add_argument("-o", "--output", metavar="PATH", help="write the counterexample here instead of stdout")
        p.add_argument("--log", metavar="PATH", help="write the refinement log as JSON lines")

    for name in ("check", "cegar"):
        p = sub.add_parser(name, help=f"{'monolithic simulation check' if name == 'check' else 'CEGAR check'}")
        common(p)
        p.add_argument("--impl", help="implementation LPTS (default: the composed system)")
        p.add_argument("--spec", help="specification LPTS (default: the model's spec)")

    p = sub.add_parser("agar", help="assume-guarantee abstraction refinement")
    common(p)
    p.add_argument("--rule", choices=["asym", "asym-n"], default="asym")
    p.add_argument("--order", help="1-based component order, e.g. 2,1,3")
    p.add_argument("--emit-assumption", metavar="PATH", help="write the final assumption as a model file")
    return parser


def _lookup(model: ModelFile, name: str | None, default: str) -> tuple[str, Lpts]:
    if name is None or name == "system":
        if default == "system":
            comps = model.components()
            return "system", comps[0] if len(comps) == 1 else compose_all(comps)
        name = default
    if name not in model.lpts:
        raise UsageError(f"no LPTS named {name!r} in the model")
    return name, model.lpts[name]


def _prepare(impl: Lpts, spec: Lpts, spec_name: str) -> tuple[Lpts, Lpts]:
    missing = sorted(impl.alphabet - spec.alphabet)
    if missing:
        print(f"note: completing spec {spec_name} with self-loops on {{{', '.join(missing)}}}", file=sys.stderr)
    impl = widen_alphabet(impl, impl.alphabet | spec.alphabet)
    return impl, complete_spec(spec, impl.alphabet)


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_log(path: str | None, events: list[dict]) -> None:
    if path is not None:
        _write(path, "".join(json.dumps(e, sort_keys=True) + "\n" for e in events))


def _cmd_check(args, model: ModelFile) -> int:
    impl_name, impl = _lookup(model, args.impl, "system")
    spec_name, spec = _lookup(model, args.spec, model.spec)
    impl, spec = _prepare(impl, spec, spec_name)
    began = time.perf_counter()
    r = coarsest_simulation(impl, spec, early_exit=True)
    start = (impl.start, spec.start)
    ok = start in r
    elapsed = time.perf_counter() - began
    print(f"impl {impl_name}: {impl.num_states} states; spec {spec_name}: {spec.num_states} states", file=sys.stderr)
    print(f"verdict: {'holds' if ok else 'fails'} ({elapsed:.3f}s)", file=sys.stderr)
    if ok:
        return EXIT_HOLDS
    c = build_cex(r.removal_trace, start, impl)
    meta = {"command": "check", "impl": impl_name, "spec": spec_name, "verdict": "fails"}
    _write(args.output, emit_cex(cex_document(c, impl, meta), args.format))
    return EXIT_FAILS


def _cmd_cegar(args, model: ModelFile) -> int:
    impl_name, impl = _lookup(model, args.impl, "system")
    spec_name, spec = _lookup(model, args.spec, model.spec)
    impl, spec = _prepare(impl, spec, spec_name)
    began = time.perf_counter()
    result = cegar(impl, spec)
    elapsed = time.perf_counter() - began
    print(f"impl {impl_name}: {impl.num_states} states; spec {spec_name}: {spec.num_states} states", file=sys.stderr)
    print(f"refinements: {result.refinements}; final abstraction: {len(result.partition)} states", file=sys.stderr)
    print(f"verdict: {'holds' if result.holds else 'fails'} ({elapsed:.3f}s)", file=sys.stderr)
    _write_log(args.log, result.log)
    if result.holds:
        return EXIT_HOLDS
    meta = {
        "command": "cegar",
        "impl": impl_name,
        "spec": spec_name,
        "verdict": "fails",
        "refinements": result.refinements,
    }
    _write(args.output, emit_cex(cex_document(result.counterexample, impl, meta), args.format))
    return EXIT_FAILS


def _parse_order(text: str | None, n: int) -> list[int] | None:
    if text is None:
        return None
    try:
        order = [int(x) - 1 for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad --order {text!r}") from None
    if sorted(order) != list(range(n)):
        raise UsageError(f"--order must be a permutation of 1..{n}")
    return order


def format_assumption(name: str, a: Lpts) -> str:
    """A standalone model holding the assumption, with states renamed ``q0, q1, ...``."""
    renamed = Lpts(tuple(f"q{i}" for i in range(a.num_states)), a.start, a.alphabet, a.transitions)
    header = "".join(f"# q{i} = {s}\n" for i, s in enumerate(a.states))
    return header + format_lpts(name, renamed) + f"\nsystem = {name};\nspec = {name};\n"


def _cmd_agar(args, model: ModelFile) -> int:
    comps = model.components()
    if len(comps) < 2:
        raise UsageError("agar needs a system of at least two components")
    order = _parse_order(args.order, len(comps))
    names = list(model.system)
    if order is not None:
        comps = [comps[i] for i in order]
        names = [names[i] for i in order]
    spec = model.lpts[model.spec]
    missing = sorted(frozenset().union(*(c.alphabet for c in comps)) - spec.alphabet)
    if missing:
        print(f"note: completing spec {model.spec} with self-loops on {{{', '.join(missing)}}}", file=sys.stderr)
    began = time.perf_counter()
    if args.rule == "asym":
        right = comps[1] if len(comps) == 2 else compose_all(comps[1:])
        result = agar2(comps[0], right, spec)
    else:
        result = agar_n(comps, spec)
    elapsed = time.perf_counter() - began
    print(f"components: {' || '.join(names)} (rule {args.rule})", file=sys.stderr)
    print(f"|A_M| = {result.max_assumption}; |L_M| = {result.max_composed}", file=sys.stderr)
    print(f"refinements per level: {result.refinements}", file=sys.stderr)
    print(f"verdict: {'holds' if result.holds else 'fails'} ({elapsed:.3f}s)", file=sys.stderr)
    _write_log(args.log, result.log)
    if args.emit_assumption:
        _write(args.emit_assumption, format_assumption("A", result.assumptions[0]))
    if result.holds:
        return EXIT_HOLDS
    meta = {
        "command": "agar",
        "rule": args.rule,
        "order": names,
        "verdict": "fails",
        "premise": 1,
        "iterations": result.iterations,
        "refinements": result.refinements,
    }
    doc = cex_document(result.counterexample, result.cex_system, meta)
    _write(args.output, emit_cex(doc, args.format))
    return EXIT_FAILS


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("LPTS_AGAR_LOG", "").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        with open(args.model, encoding="utf-8") as fh:
            model = parse_model(fh.read())
        handler = {"check": _cmd_check, "cegar": _cmd_cegar, "agar": _cmd_agar}[args.command]
        return handler(args, model)
    except ModelError as exc:
        print(f"{args.model}:{exc}", file=sys.stderr)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
