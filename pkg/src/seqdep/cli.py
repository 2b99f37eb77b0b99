"""`seqdep` command line.

Exit discipline: 0 on success, 1 when the work completed but produced
error-severity diagnostics (parse errors, missing sources, constraint
violations), 2 for usage and I/O problems (unknown flags, missing files,
malformed JSON, unknown use case or node ids).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import CorpusParams, gen_corpus, write_corpus
from .edg import build_edg
from .engine import DataDependencyGraph, infer_all, infer_rule_based, inference_targets, validate_ddg
from .evaluation import evaluate, render_report_table
from .llm import LlmParams, RemoteTransport, ReplayTransport, StubTransport, TransportError, infer_with_llm
from .model import Diagnostic, Document, UseCase, make_diagnostic
from .parser import EsdParseError, check_design_rules, parse_document
from .reachability import OracleBudgetError, reachable_predecessors
from .wire import (
    canonical_json,
    ddg_to_json,
    diagnostic_to_json,
    diagnostics_to_json,
    export_graph,
    gold_from_json,
    prune_to_json,
    report_to_json,
)


class UsageError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(diagnostic.message)


def _usage(code: str, message: str, node: str | None = None) -> UsageError:
    return UsageError(make_diagnostic(code, message, node=node))


def _load_document(path: str) -> Document:
    text = Path(path).read_text(encoding="utf-8")
    return parse_document(text, source_path=path)


def _load_json(path: str):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _usage("E_USAGE", f"{path} is not valid JSON: {exc}") from exc


def _pick_usecase(document: Document, name: str | None) -> UseCase:
    if name is None:
        return document.usecases[0]
    try:
        return document.usecase(name)
    except KeyError:
        raise _usage("E_LOOKUP", f"no use case named '{name}'") from None


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_json(value) -> None:
    _emit(canonical_json(value))


def _has_errors(diagnostics) -> bool:
    return any(d.severity == "error" for d in diagnostics)


def _make_transport(spec: str | None):
    if spec is None:
        raise _usage("E_USAGE", "engine 'llm' requires --transport (replay:DIR, stub:FILE, or remote)")
    if spec == "remote":
        try:
            return RemoteTransport()
        except TransportError as exc:
            raise _usage("E_USAGE", str(exc)) from exc
    kind, _, arg = spec.partition(":")
    if kind == "replay" and arg:
        return ReplayTransport(Path(arg))
    if kind == "stub" and arg:
        return StubTransport(responses=(Path(arg).read_text(encoding="utf-8"),))
    raise _usage("E_USAGE", f"unknown transport '{spec}'")


def cmd_parse(args) -> int:
    document = _load_document(args.file)
    diagnostics = check_design_rules(document)
    _emit_json(diagnostics_to_json(diagnostics))
    return 1 if _has_errors(diagnostics) else 0


def cmd_edg(args) -> int:
    document = _load_document(args.file)
    usecase = _pick_usecase(document, args.usecase)
    _emit(export_graph(build_edg(usecase), args.format))
    return 0


def cmd_prune(args) -> int:
    document = _load_document(args.file)
    usecase = _pick_usecase(document, args.usecase)
    edg = build_edg(usecase)
    try:
        pruned = reachable_predecessors(edg, args.target)
    except KeyError:
        raise _usage("E_LOOKUP", f"no node '{args.target}' in use case '{usecase.name}'") from None
    except ValueError as exc:
        raise _usage("E_USAGE", str(exc)) from exc
    _emit_json(prune_to_json(edg, pruned))
    return 0


def cmd_infer(args) -> int:
    document = _load_document(args.file)
    usecase = _pick_usecase(document, args.usecase)
    edg = build_edg(usecase)
    params = LlmParams(temperature=args.temperature, model=args.model)
    transport = _make_transport(args.transport) if args.engine == "llm" else None

    if args.target is not None:
        targets = [args.target]
        if args.target not in edg.nodes:
            raise _usage("E_LOOKUP", f"no node '{args.target}' in use case '{usecase.name}'")
    else:
        targets = inference_targets(usecase, document, edg)

    if args.engine == "rule" and args.target is None:
        ddg = infer_all(usecase, document)
    else:
        edges = set()
        diagnostics = []
        for target in targets:
            try:
                context = reachable_predecessors(edg, target)
            except ValueError as exc:
                raise _usage("E_USAGE", str(exc)) from exc
            if args.engine == "rule":
                target_edges, target_diags = infer_rule_based(usecase, document, target, context)
            else:
                target_edges, target_diags = infer_with_llm(
                    usecase, document, target, transport, params=params, context=context
                )
            edges.update(target_edges)
            diagnostics.extend(target_diags)
        ddg = DataDependencyGraph(usecase=usecase.name, edges=frozenset(edges), diagnostics=tuple(diagnostics))
    _emit_json(ddg_to_json(ddg))
    return 1 if _has_errors(ddg.diagnostics) else 0


def cmd_validate(args) -> int:
    document = _load_document(args.file)
    usecase = _pick_usecase(document, args.usecase)
    if args.edges is not None:
        annotation = _parse_annotation(_load_json(args.edges), args.edges)
        if annotation.usecase != usecase.name:
            raise _usage(
                "E_USAGE",
                f"{args.edges} annotates '{annotation.usecase}', not '{usecase.name}'",
            )
        ddg = DataDependencyGraph(usecase=annotation.usecase, edges=annotation.edges)
        diagnostics = validate_ddg(ddg, build_edg(usecase), usecase, document)
    else:
        diagnostics = list(check_design_rules(document))
        diagnostics.extend(infer_all(usecase, document).diagnostics)
    _emit_json(diagnostics_to_json(diagnostics))
    return 1 if _has_errors(diagnostics) else 0


def _parse_annotation(payload, path: str):
    try:
        return gold_from_json(payload)
    except ValueError as exc:
        raise _usage("E_USAGE", f"{path}: {exc}") from exc


def cmd_eval(args) -> int:
    document = _load_document(args.file)
    predicted = _parse_annotation(_load_json(args.pred), args.pred)
    gold = _parse_annotation(_load_json(args.gold), args.gold)
    if predicted.usecase != gold.usecase:
        raise _usage(
            "E_USAGE",
            f"prediction is for '{predicted.usecase}' but gold is for '{gold.usecase}'",
        )
    _pick_usecase(document, gold.usecase)
    report = evaluate({gold.usecase: (predicted.edges, gold.edges)})
    if args.format == "table":
        _emit(render_report_table(report))
    else:
        _emit_json(report_to_json(report))
    return 0


def cmd_prompt(args) -> int:
    from .llm import PromptBuildError, build_prompt

    document = _load_document(args.file)
    usecase = _pick_usecase(document, args.usecase)
    edg = build_edg(usecase)
    try:
        context = reachable_predecessors(edg, args.target)
    except KeyError:
        raise _usage("E_LOOKUP", f"no node '{args.target}' in use case '{usecase.name}'") from None
    except ValueError as exc:
        raise _usage("E_USAGE", str(exc)) from exc
    try:
        prompt = build_prompt(usecase, document, args.target, context)
    except PromptBuildError as exc:
        _emit_json(diagnostic_to_json(exc.diagnostic))
        return 1
    sys.stdout.write(prompt.rendered)
    return 0


def cmd_gen_corpus(args) -> int:
    try:
        params = CorpusParams(
            n_usecases=args.n_usecases,
            max_nodes=args.max_nodes,
            max_depth=args.max_depth,
            p_alt=args.p_alt,
            p_table=args.p_table,
        )
    except ValueError as exc:
        raise _usage("E_USAGE", str(exc)) from exc
    entries = gen_corpus(args.seed, params)
    out = Path(args.out)
    write_corpus(entries, out, seed=args.seed, params=params)
    _emit_json({"directory": str(out), "usecases": [e.gold.usecase for e in entries]})
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    return serve(
        workspace=Path(args.workspace),
        host=args.host,
        port=args.port,
        ui_dir=Path(args.ui) if args.ui else None,
        transport_spec=args.transport,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqdep",
        description="Dependency analysis over enhanced sequence diagrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name: str, func, help_text: str, with_file: bool = True):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        if with_file:
            p.add_argument("file", help="diagram file (.esd)")
            p.add_argument("--usecase", help="use case name (default: first in the file)")
        return p

    add("parse", cmd_parse, "parse a diagram and report diagnostics")

    p = add("edg", cmd_edg, "export the execution dependency graph")
    p.add_argument("--format", choices=("json", "dot"), default="json")

    p = add("prune", cmd_prune, "reachable predecessors of one node")
    p.add_argument("--target", required=True, help="target node id")

    p = add("infer", cmd_infer, "infer dependency edges")
    p.add_argument("--target", help="infer only this node (default: all consuming nodes)")
    p.add_argument("--all", action="store_true", help="infer every consuming node (default)")
    p.add_argument("--engine", choices=("rule", "llm"), default="rule")
    p.add_argument("--transport", help="llm transport: replay:DIR, stub:FILE, or remote")
    p.add_argument("--temperature", type=float, default=0.1)
    p.add_argument("--model", help="model name passed to the transport")

    p = add("validate", cmd_validate, "check a diagram or an edge file against it")
    p.add_argument("--edges", help="JSON edge annotation to validate (default: self-check)")

    p = add("eval", cmd_eval, "score predicted edges against gold")
    p.add_argument("--pred", required=True, help="predicted edges JSON")
    p.add_argument("--gold", required=True, help="gold edges JSON")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = add("prompt", cmd_prompt, "print the inference prompt for one node")
    p.add_argument("--target", required=True, help="target node id")

    p = add("gen-corpus", cmd_gen_corpus, "generate a synthetic diagram corpus", with_file=False)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="corpus", help="output directory")
    p.add_argument("--n-usecases", type=int, default=12)
    p.add_argument("--max-nodes", type=int, default=25)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--p-alt", type=float, default=0.35)
    p.add_argument("--p-table", type=float, default=0.5)

    p = add("serve", cmd_serve, "serve the HTTP API", with_file=False)
    p.add_argument("workspace", nargs="?", default=".", help="directory holding .esd files")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--ui", help="directory with static UI files to mount at /")
    p.add_argument("--transport", help="llm transport: replay:DIR, stub:FILE, or remote")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(canonical_json(diagnostic_to_json(exc.diagnostic)) + "\n")
        return 2
    except EsdParseError as exc:
        _emit_json(diagnostics_to_json([e.to_diagnostic() for e in exc.errors]))
        return 1
    except OracleBudgetError as exc:
        _emit_json(diagnostics_to_json([exc.diagnostic]))
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
