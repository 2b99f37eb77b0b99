"""Local HTTP service over a workspace of diagram files.

Stateless by design: every request works from the current on-disk state,
with a per-file cache invalidated by modification time and size. Responses
are rendered through `canonical_json`, so identical workspace state and
request yield byte-identical bodies. Every payload carries a schema_version
field; request problems come back as status 400 with a diagnostic payload.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from .edg import build_edg
from .engine import DataDependencyGraph, infer_all, infer_rule_based, inference_targets
from .evaluation import evaluate
from .model import Document, UseCase, make_diagnostic
from .parser import EsdParseError, check_design_rules, parse_document
from .reachability import reachable_predecessors
from .wire import (
    SCHEMA_VERSION,
    canonical_json,
    ddg_to_json,
    diagnostic_to_json,
    diagnostics_to_json,
    document_to_json,
    edg_to_json,
    edge_from_json,
    prune_to_json,
    report_to_json,
    table_to_json,
    api_to_json,
    usecase_to_json,
)


class _WorkspaceCache:
    """Parsed .esd files keyed by path, re-read when mtime or size changes."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self._entries: dict[Path, tuple[tuple[int, int], Optional[Document], str]] = {}

    def _refresh(self) -> list[Path]:
        paths = sorted(self.root.glob("*.esd"))
        for path in paths:
            stat = path.stat()
            key = (stat.st_mtime_ns, stat.st_size)
            cached = self._entries.get(path)
            if cached is not None and cached[0] == key:
                continue
            text = path.read_text(encoding="utf-8")
            try:
                document = parse_document(text, source_path=str(path))
            except EsdParseError:
                document = None
            self._entries[path] = (key, document, text)
        for stale in set(self._entries) - set(paths):
            del self._entries[stale]
        return paths

    def names(self) -> list[str]:
        names: list[str] = []
        for path in self._refresh():
            document = self._entries[path][1]
            if document is None:
                continue
            for uc in document.usecases:
                if uc.name not in names:
                    names.append(uc.name)
        return names

    def lookup(self, name: str) -> Optional[tuple[Document, UseCase, str]]:
        for path in self._refresh():
            _, document, text = self._entries[path]
            if document is None:
                continue
            for uc in document.usecases:
                if uc.name == name:
                    return document, uc, text
        return None


def _respond(payload: dict, status: int = 200) -> Response:
    body = dict(payload)
    body["schema_version"] = SCHEMA_VERSION
    return Response(content=canonical_json(body), media_type="application/json", status_code=status)


def _error(status: int, code: str, message: str, node: Optional[str] = None) -> Response:
    diagnostic = make_diagnostic(code, message, node=node)
    return _respond({"diagnostic": diagnostic_to_json(diagnostic)}, status=status)


def create_app(
    workspace: Path,
    transport_spec: Optional[str] = None,
    ui_dir: Optional[Path] = None,
) -> FastAPI:
    app = FastAPI(title="seqdep", docs_url=None, redoc_url=None, openapi_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    cache = _WorkspaceCache(workspace)

    def _transport():
        if transport_spec is None:
            return None
        from .cli import _make_transport

        return _make_transport(transport_spec)

    @app.get("/api/usecases")
    def list_usecases() -> Response:
        return _respond({"usecases": cache.names()})

    @app.get("/api/usecase/{name}")
    def get_usecase(name: str) -> Response:
        found = cache.lookup(name)
        if found is None:
            return _error(404, "E_LOOKUP", f"no use case named '{name}'")
        document, usecase, text = found
        return _respond(
            {
                "usecase": usecase_to_json(usecase),
                "apis": {n: api_to_json(document.apis[n]) for n in sorted(document.apis)},
                "tables": {t: table_to_json(document.tables[t]) for t in sorted(document.tables)},
                "text": text,
            }
        )

    @app.get("/api/usecase/{name}/edg")
    def get_edg(name: str) -> Response:
        found = cache.lookup(name)
        if found is None:
            return _error(404, "E_LOOKUP", f"no use case named '{name}'")
        _, usecase, _ = found
        return _respond(edg_to_json(build_edg(usecase)))

    @app.get("/api/usecase/{name}/prune")
    def get_prune(name: str, target: Optional[str] = None) -> Response:
        found = cache.lookup(name)
        if found is None:
            return _error(404, "E_LOOKUP", f"no use case named '{name}'")
        _, usecase, _ = found
        if not target:
            return _error(400, "E_USAGE", "query parameter 'target' is required")
        edg = build_edg(usecase)
        try:
            pruned = reachable_predecessors(edg, target)
        except KeyError:
            return _error(400, "E_LOOKUP", f"no node '{target}' in use case '{name}'", node=target)
        except ValueError as exc:
            return _error(400, "E_USAGE", str(exc), node=target)
        payload = prune_to_json(edg, pruned)
        payload.update({"usecase": name, "target": target})
        return _respond(payload)

    async def _body(request: Request) -> Optional[dict]:
        try:
            payload = await request.json()
        except Exception:
            return None
        return payload if isinstance(payload, dict) else None

    @app.post("/api/infer")
    async def post_infer(request: Request) -> Response:
        payload = await _body(request)
        if payload is None or not isinstance(payload.get("usecase"), str):
            return _error(400, "E_USAGE", "body must be JSON with a 'usecase' string")
        engine = payload.get("engine", "rule")
        if engine not in ("rule", "llm"):
            return _error(400, "E_USAGE", f"unknown engine '{engine}'")
        target = payload.get("target")
        if target is not None and not isinstance(target, str):
            return _error(400, "E_USAGE", "'target' must be a string when present")
        found = cache.lookup(payload["usecase"])
        if found is None:
            return _error(400, "E_LOOKUP", f"no use case named '{payload['usecase']}'")
        document, usecase, _ = found
        edg = build_edg(usecase)
        if target is not None and target not in edg.nodes:
            return _error(400, "E_LOOKUP", f"no node '{target}' in use case '{usecase.name}'", node=target)

        transport = None
        if engine == "llm":
            try:
                transport = _transport()
            except Exception as exc:
                return _error(400, "E_USAGE", str(exc))
            if transport is None:
                return _error(400, "E_USAGE", "no llm transport configured on this server")

        targets = [target] if target is not None else inference_targets(usecase, document, edg)
        if engine == "rule" and target is None:
            ddg = infer_all(usecase, document)
        else:
            edges: set = set()
            diagnostics: list = []
            for t in targets:
                try:
                    context = reachable_predecessors(edg, t)
                except ValueError as exc:
                    return _error(400, "E_USAGE", str(exc), node=t)
                if engine == "rule":
                    t_edges, t_diags = infer_rule_based(usecase, document, t, context)
                else:
                    from .llm import infer_with_llm

                    t_edges, t_diags = infer_with_llm(
                        usecase, document, t, transport, context=context
                    )
                edges.update(t_edges)
                diagnostics.extend(t_diags)
            ddg = DataDependencyGraph(
                usecase=usecase.name, edges=frozenset(edges), diagnostics=tuple(diagnostics)
            )
        return _respond(ddg_to_json(ddg))

    @app.post("/api/parse")
    async def post_parse(request: Request) -> Response:
        payload = await _body(request)
        if payload is None or not isinstance(payload.get("text"), str):
            return _error(400, "E_USAGE", "body must be JSON with a 'text' string")
        try:
            document = parse_document(payload["text"])
        except EsdParseError as exc:
            return _respond(
                {
                    "document": None,
                    "diagnostics": diagnostics_to_json([e.to_diagnostic() for e in exc.errors]),
                }
            )
        diagnostics = check_design_rules(document)
        return _respond(
            {
                "document": document_to_json(document),
                "diagnostics": diagnostics_to_json(diagnostics),
            }
        )

    @app.post("/api/eval")
    async def post_eval(request: Request) -> Response:
        payload = await _body(request)
        if payload is None or not isinstance(payload.get("usecase"), str):
            return _error(400, "E_USAGE", "body must be JSON with a 'usecase' string")
        if cache.lookup(payload["usecase"]) is None:
            return _error(400, "E_LOOKUP", f"no use case named '{payload['usecase']}'")
        try:
            predicted = [edge_from_json(e) for e in _edge_list(payload, "predicted")]
            gold = [edge_from_json(e) for e in _edge_list(payload, "gold")]
        except ValueError as exc:
            return _error(400, "E_USAGE", str(exc))
        report = evaluate({payload["usecase"]: (predicted, gold)})
        return _respond(report_to_json(report))

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _edge_list(payload: dict, key: str) -> list:
    value = payload.get(key)
    if not isinstance(value, list):
        raise ValueError(f"'{key}' must be a list of edge objects")
    return value


def serve(
    workspace: Path,
    host: str = "127.0.0.1",
    port: int = 8787,
    ui_dir: Optional[Path] = None,
    transport_spec: Optional[str] = None,
) -> int:
    import uvicorn

    app = create_app(workspace, transport_spec=transport_spec, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        sys.stderr.write(f"error: cannot serve on {host}:{port}: {exc}\n")
        return 1
    return 0
