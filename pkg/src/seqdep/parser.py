"""Parser and serializer for the textual sequence diagram format.

The format is line-oriented only by convention: the tokenizer treats all
whitespace outside string literals the same, and `#` starts a comment that
runs to the end of the line. Identifiers are `[a-z][a-z0-9_]*`; keywords are
contextual, so every construct is introduced by a leading keyword.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    ApiSpec,
    Branch,
    DecisionTable,
    Diagnostic,
    Document,
    Element,
    Field,
    Fragment,
    Message,
    ReturnMessage,
    Rule,
    UseCase,
    make_diagnostic,
    walk_elements,
)

_PUNCT = "{}[]:,"


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    expected: str
    found: str

    def render(self) -> str:
        return f"{self.line}:{self.column}: expected {self.expected}, found {self.found}"

    def to_diagnostic(self) -> Diagnostic:
        return make_diagnostic("E_PARSE", self.render())


class EsdParseError(Exception):
    """Raised when a document cannot be parsed; carries every collected error."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(e.render() for e in errors))


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "string", one of _PUNCT, or "eof"
    value: str
    line: int
    column: int

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        if self.kind == "string":
            return f'string "{self.value}"'
        return f"'{self.value}'"


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            parts: list[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    raise EsdParseError(
                        [ParseError(start_line, start_col, "closing '\"'", "end of line")]
                    )
                c = text[i]
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in ('"', "\\"):
                        raise EsdParseError(
                            [ParseError(line, col, "escape '\\\"' or '\\\\'", repr(text[i : i + 2]))]
                        )
                    parts.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                parts.append(c)
                i += 1
                col += 1
            tokens.append(_Token("string", "".join(parts), start_line, start_col))
            continue
        if "a" <= ch <= "z":
            start_col = col
            j = i
            while j < n and (text[j].isdigit() or "a" <= text[j] <= "z" or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        raise EsdParseError([ParseError(line, col, "a token", f"illegal character {ch!r}")])
    tokens.append(_Token("eof", "", line, col))
    return tokens


@dataclass
class _UseCaseRefs:
    """Names referenced inside one use case, resolved after the structural pass."""

    participants: set[str] = field(default_factory=set)
    participant_refs: list[tuple[str, int, int]] = field(default_factory=list)


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.semantic: list[ParseError] = []
        self.api_refs: list[tuple[str, int, int]] = []
        self.table_refs: list[tuple[str, int, int]] = []

    # -- token plumbing ----------------------------------------------------

    def _peek(self) -> _Token:
        return self.tokens[self.pos]

    def _next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def _fail(self, expected: str, tok: _Token | None = None) -> "NoReturn":  # noqa: F821
        tok = tok or self._peek()
        raise EsdParseError(self.semantic + [ParseError(tok.line, tok.column, expected, tok.describe())])

    def _expect(self, kind: str, expected: str) -> _Token:
        tok = self._peek()
        if tok.kind != kind:
            self._fail(expected)
        return self._next()

    def _keyword(self, word: str) -> _Token:
        tok = self._peek()
        if tok.kind != "ident" or tok.value != word:
            self._fail(f"'{word}'")
        return self._next()

    def _at_keyword(self, *words: str) -> bool:
        tok = self._peek()
        return tok.kind == "ident" and tok.value in words

    def _semantic_error(self, line: int, column: int, expected: str, found: str) -> None:
        self.semantic.append(ParseError(line, column, expected, found))

    # -- grammar -----------------------------------------------------------

    def parse_file(self, source_path: str) -> Document:
        usecases: list[UseCase] = []
        usecase_pos: dict[str, tuple[int, int]] = {}
        apis: dict[str, ApiSpec] = {}
        tables: dict[str, DecisionTable] = {}
        while True:
            tok = self._peek()
            if tok.kind == "eof":
                break
            if self._at_keyword("usecase"):
                uc = self._parse_usecase()
                if uc.name in usecase_pos:
                    self._semantic_error(tok.line, tok.column, f'a unique use case name', f'duplicate use case "{uc.name}"')
                usecase_pos[uc.name] = (tok.line, tok.column)
                usecases.append(uc)
            elif self._at_keyword("api"):
                spec = self._parse_api()
                if spec.name in apis:
                    self._semantic_error(tok.line, tok.column, "a unique api name", f'duplicate api "{spec.name}"')
                apis[spec.name] = spec
            elif self._at_keyword("table"):
                table = self._parse_table()
                if table.table_id in tables:
                    self._semantic_error(tok.line, tok.column, "a unique table id", f"duplicate table '{table.table_id}'")
                tables[table.table_id] = table
            else:
                self._fail("'usecase', 'api', or 'table'")
        for name, line, column in self.api_refs:
            if name not in apis:
                self._semantic_error(line, column, f'api "{name}" to be declared', f'unresolved api "{name}"')
        for table_id, line, column in self.table_refs:
            if table_id not in tables:
                self._semantic_error(line, column, f"table '{table_id}' to be declared", f"unresolved table '{table_id}'")
        if not usecases:
            self._semantic_error(1, 1, "at least one use case", "no use case declaration")
        if self.semantic:
            raise EsdParseError(sorted(self.semantic, key=lambda e: (e.line, e.column)))
        return Document(usecases=tuple(usecases), apis=apis, tables=tables, source_path=source_path)

    def _parse_usecase(self) -> UseCase:
        self._keyword("usecase")
        name = self._expect("string", "use case name string").value
        self._expect("{", "'{'")
        self._keyword("input")
        self._expect("{", "'{'")
        input_fields = self._parse_field_block("input")
        participants: list[str] = []
        first = self._peek()
        if not self._at_keyword("participant"):
            self._fail("'participant'", first)
        while self._at_keyword("participant"):
            self._next()
            participants.append(self._expect("ident", "participant identifier").value)
        refs = _UseCaseRefs(participants=set(participants))
        spans: dict[str, tuple[int, int]] = {}
        node_pos: dict[str, tuple[int, int]] = {}
        body: list[Element] = []
        while not self._peek().kind == "}":
            body.append(self._parse_element(refs, spans, node_pos))
        close = self._expect("}", "'}'")
        if not body or not isinstance(body[-1], ReturnMessage):
            found = f"'{body[-1].node_id}'" if body else "an empty body"
            self._semantic_error(close.line, close.column, "a return message as the final element", found)
        for pname, line, column in refs.participant_refs:
            if pname not in refs.participants:
                self._semantic_error(line, column, f"participant '{pname}' to be declared", f"unresolved participant '{pname}'")
        return UseCase(
            name=name,
            input_fields=input_fields,
            participants=tuple(participants),
            body=tuple(body),
            spans=spans,
        )

    def _parse_element(
        self,
        refs: _UseCaseRefs,
        spans: dict[str, tuple[int, int]],
        node_pos: dict[str, tuple[int, int]],
    ) -> Element:
        tok = self._peek()
        if self._at_keyword("message"):
            return self._parse_message(refs, spans, node_pos)
        if self._at_keyword("opt", "alt", "loop", "break"):
            return self._parse_fragment(refs, spans, node_pos)
        if self._at_keyword("return"):
            return self._parse_return(spans, node_pos)
        self._fail("'message', 'opt', 'alt', 'loop', 'break', or 'return'", tok)

    def _register_node(self, node_id: str, tok: _Token, node_pos: dict[str, tuple[int, int]]) -> None:
        if node_id in node_pos:
            self._semantic_error(tok.line, tok.column, "a unique node id", f"duplicate node id '{node_id}'")
        node_pos[node_id] = (tok.line, tok.column)

    def _parse_message(self, refs, spans, node_pos) -> Message:
        start = self._keyword("message")
        id_tok = self._expect("ident", "message node id")
        self._register_node(id_tok.value, id_tok, node_pos)
        self._keyword("from")
        sender = self._expect("ident", "sender participant")
        refs.participant_refs.append((sender.value, sender.line, sender.column))
        self._keyword("to")
        receiver = self._expect("ident", "receiver participant")
        refs.participant_refs.append((receiver.value, receiver.line, receiver.column))
        self._keyword("api")
        api_tok = self._expect("string", "api name string")
        self.api_refs.append((api_tok.value, api_tok.line, api_tok.column))
        tables, end_line = self._parse_binding(default_line=api_tok.line)
        spans[id_tok.value] = (start.line, end_line)
        return Message(
            node_id=id_tok.value,
            sender=sender.value,
            receiver=receiver.value,
            api=api_tok.value,
            tables=tables,
        )

    def _parse_binding(self, default_line: int) -> tuple[tuple[str, ...], int]:
        if not self._at_keyword("tables"):
            return (), default_line
        self._next()
        self._expect("[", "'['")
        ids: list[str] = []
        while True:
            tok = self._expect("ident", "table id")
            ids.append(tok.value)
            self.table_refs.append((tok.value, tok.line, tok.column))
            if self._peek().kind == ",":
                self._next()
                continue
            break
        close = self._expect("]", "']' or ','")
        return tuple(ids), close.line

    def _parse_fragment(self, refs, spans, node_pos) -> Fragment:
        kind_tok = self._next()
        kind = kind_tok.value
        id_tok = self._expect("ident", "fragment node id")
        self._register_node(id_tok.value, id_tok, node_pos)
        tables, _ = self._parse_binding(default_line=id_tok.line)
        self._expect("{", "'{'")
        branches: list[Branch] = []
        if kind == "alt":
            labels: dict[str, tuple[int, int]] = {}
            while self._at_keyword("branch"):
                self._next()
                label_tok = self._expect("string", "branch label string")
                if label_tok.value in labels:
                    self._semantic_error(
                        label_tok.line, label_tok.column, "a unique branch label", f'duplicate branch "{label_tok.value}"'
                    )
                labels[label_tok.value] = (label_tok.line, label_tok.column)
                self._expect("{", "'{'")
                elements: list[Element] = []
                while self._peek().kind != "}":
                    elements.append(self._parse_element(refs, spans, node_pos))
                self._expect("}", "'}'")
                branches.append(Branch(label=label_tok.value, elements=tuple(elements)))
            if len(branches) < 2:
                self._fail("'branch' (alt needs at least two branches)")
        else:
            elements = []
            while self._peek().kind != "}":
                elements.append(self._parse_element(refs, spans, node_pos))
            branches.append(Branch(label="body", elements=tuple(elements)))
        close = self._expect("}", "'}'")
        spans[id_tok.value] = (kind_tok.line, close.line)
        return Fragment(node_id=id_tok.value, kind=kind, branches=tuple(branches), tables=tables)

    def _parse_return(self, spans, node_pos) -> ReturnMessage:
        start = self._keyword("return")
        id_tok = self._expect("ident", "return node id")
        self._register_node(id_tok.value, id_tok, node_pos)
        self._expect("{", "'{'")
        fields = self._parse_field_block("return")
        close = self.tokens[self.pos - 1]
        spans[id_tok.value] = (start.line, close.line)
        return ReturnMessage(node_id=id_tok.value, fields=fields)

    def _parse_field_block(self, context: str) -> tuple[Field, ...]:
        """Parse `field`* up to and including the closing brace."""
        fields: list[Field] = []
        seen: set[str] = set()
        while self._at_keyword("field"):
            self._next()
            name_tok = self._expect("ident", "field name")
            if name_tok.value in seen:
                self._semantic_error(
                    name_tok.line, name_tok.column, f"a unique field name in the {context} block", f"duplicate field '{name_tok.value}'"
                )
            seen.add(name_tok.value)
            self._expect(":", "':'")
            type_tok = self._expect("ident", "type name")
            dtype = type_tok.value
            if self._peek().kind == "[":
                self._next()
                self._expect("]", "']'")
                dtype += "[]"
            description = ""
            if self._peek().kind == "string":
                description = self._next().value
            fields.append(Field(name=name_tok.value, dtype=dtype, description=description))
        self._expect("}", "'field' or '}'")
        return tuple(fields)

    def _parse_api(self) -> ApiSpec:
        self._keyword("api")
        name = self._expect("string", "api name string").value
        self._expect("{", "'{'")
        self._keyword("description")
        description = self._expect("string", "description string").value
        self._keyword("request")
        self._expect("{", "'{'")
        request = self._parse_field_block("request")
        self._keyword("response")
        self._expect("{", "'{'")
        response = self._parse_field_block("response")
        self._expect("}", "'}'")
        return ApiSpec(name=name, description=description, request=request, response=response)

    def _parse_table(self) -> DecisionTable:
        self._keyword("table")
        table_id = self._expect("ident", "table id").value
        self._expect("{", "'{'")
        rules: list[Rule] = []
        while self._at_keyword("rule"):
            self._next()
            self._expect("{", "'{'")
            condition = None
            condition_reads: tuple[str, ...] = ()
            if self._at_keyword("when"):
                self._next()
                condition = self._expect("string", "condition string").value
                if self._at_keyword("reads"):
                    self._next()
                    condition_reads = self._parse_name_list()
            self._keyword("then")
            action = self._expect("string", "action string").value
            action_reads: tuple[str, ...] = ()
            if self._at_keyword("reads"):
                self._next()
                action_reads = self._parse_name_list()
            action_writes: tuple[Field, ...] = ()
            if self._at_keyword("writes"):
                self._next()
                self._expect("{", "'{'")
                action_writes = self._parse_field_block("writes")
            self._expect("}", "'}'")
            rules.append(
                Rule(
                    action=action,
                    condition=condition,
                    condition_reads=condition_reads,
                    action_reads=action_reads,
                    action_writes=action_writes,
                )
            )
        if not rules:
            self._fail("'rule'")
        self._expect("}", "'rule' or '}'")
        return DecisionTable(table_id=table_id, rules=tuple(rules))

    def _parse_name_list(self) -> tuple[str, ...]:
        self._expect("[", "'['")
        names = [self._expect("ident", "entity name").value]
        while self._peek().kind == ",":
            self._next()
            names.append(self._expect("ident", "entity name").value)
        self._expect("]", "']' or ','")
        return tuple(names)


def parse_document(text: str, source_path: str = "<memory>") -> Document:
    """Parse a diagram file. Raises EsdParseError carrying every ParseError found."""
    return _Parser(_tokenize(text)).parse_file(source_path)


# -- serialization ---------------------------------------------------------


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _field_line(f: Field) -> str:
    suffix = f" {_quote(f.description)}" if f.description else ""
    return f"field {f.name}: {f.dtype}{suffix}"


def _emit_fields(fields: tuple[Field, ...], out: list[str], indent: str) -> None:
    for f in fields:
        out.append(f"{indent}{_field_line(f)}")


def _binding_suffix(tables: tuple[str, ...]) -> str:
    return f" tables [{', '.join(tables)}]" if tables else ""


def _emit_element(element: Element, out: list[str], indent: str) -> None:
    inner = indent + "  "
    if isinstance(element, Message):
        out.append(
            f"{indent}message {element.node_id} from {element.sender} to {element.receiver}"
            f" api {_quote(element.api)}{_binding_suffix(element.tables)}"
        )
    elif isinstance(element, Fragment):
        out.append(f"{indent}{element.kind} {element.node_id}{_binding_suffix(element.tables)} {{")
        if element.kind == "alt":
            for branch in element.branches:
                out.append(f"{inner}branch {_quote(branch.label)} {{")
                for child in branch.elements:
                    _emit_element(child, out, inner + "  ")
                out.append(f"{inner}}}")
        else:
            for branch in element.branches:
                for child in branch.elements:
                    _emit_element(child, out, inner)
        out.append(f"{indent}}}")
    else:
        out.append(f"{indent}return {element.node_id} {{")
        _emit_fields(element.fields, out, inner)
        out.append(f"{indent}}}")


def serialize_document(document: Document) -> str:
    """Render a document in canonical form: 2-space indent, one statement per line.

    API and table blocks are emitted sorted by name so equal documents always
    produce identical bytes.
    """
    out: list[str] = []
    for uc in document.usecases:
        out.append(f"usecase {_quote(uc.name)} {{")
        out.append("  input {")
        _emit_fields(uc.input_fields, out, "    ")
        out.append("  }")
        for p in uc.participants:
            out.append(f"  participant {p}")
        for element in uc.body:
            _emit_element(element, out, "  ")
        out.append("}")
        out.append("")
    for name in sorted(document.apis):
        spec = document.apis[name]
        out.append(f"api {_quote(spec.name)} {{")
        out.append(f"  description {_quote(spec.description)}")
        out.append("  request {")
        _emit_fields(spec.request, out, "    ")
        out.append("  }")
        out.append("  response {")
        _emit_fields(spec.response, out, "    ")
        out.append("  }")
        out.append("}")
        out.append("")
    for table_id in sorted(document.tables):
        table = document.tables[table_id]
        out.append(f"table {table_id} {{")
        for rule in table.rules:
            out.append("  rule {")
            if rule.condition is not None:
                when_line = f"    when {_quote(rule.condition)}"
                if rule.condition_reads:
                    when_line += f" reads [{', '.join(rule.condition_reads)}]"
                out.append(when_line)
            then_line = f"    then {_quote(rule.action)}"
            if rule.action_reads:
                then_line += f" reads [{', '.join(rule.action_reads)}]"
            out.append(then_line)
            if rule.action_writes:
                out.append("    writes {")
                _emit_fields(rule.action_writes, out, "      ")
                out.append("    }")
            out.append("  }")
        out.append("}")
        out.append("")
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"


# -- design rules ----------------------------------------------------------


def _document_field_names(document: Document) -> dict[str, set[str]]:
    """All field names in scope, with the contributions of each table kept separate."""
    base: set[str] = set()
    for uc in document.usecases:
        base.update(f.name for f in uc.input_fields)
        for element, _, _, _ in walk_elements(uc.body):
            if isinstance(element, ReturnMessage):
                base.update(f.name for f in element.fields)
    for spec in document.apis.values():
        base.update(f.name for f in spec.request)
        base.update(f.name for f in spec.response)
    per_table: dict[str, set[str]] = {}
    for table_id, table in document.tables.items():
        per_table[table_id] = {f.name for rule in table.rules for f in rule.action_writes}
    return {"base": base, **per_table}


def check_design_rules(document: Document) -> list[Diagnostic]:
    """Flag violations of the modelling conventions the inference pipeline assumes."""
    diagnostics: list[Diagnostic] = []
    if len(document.usecases) > 1:
        diagnostics.append(
            make_diagnostic(
                "E_DESIGN_RULE",
                f"file declares {len(document.usecases)} use cases; keep one use case per diagram file",
            )
        )
    scopes = _document_field_names(document)
    for uc in document.usecases:
        for element, _, _, _ in walk_elements(uc.body):
            if isinstance(element, Message):
                if not element.api:
                    diagnostics.append(
                        make_diagnostic(
                            "E_DESIGN_RULE",
                            f"message '{element.node_id}' must be refined by exactly one api",
                            node=element.node_id,
                        )
                    )
            elif isinstance(element, Fragment):
                n = len(element.branches)
                if element.kind == "alt" and n < 2:
                    diagnostics.append(
                        make_diagnostic(
                            "E_DESIGN_RULE",
                            f"alt fragment '{element.node_id}' has {n} branch(es); alt requires at least two",
                            node=element.node_id,
                        )
                    )
                elif element.kind != "alt" and n != 1:
                    diagnostics.append(
                        make_diagnostic(
                            "E_DESIGN_RULE",
                            f"{element.kind} fragment '{element.node_id}' has {n} branches; exactly one body expected",
                            node=element.node_id,
                        )
                    )
            bound = getattr(element, "tables", ())
            for table_id in bound:
                table = document.tables.get(table_id)
                if table is None:
                    continue
                touched: set[str] = set()
                for rule in table.rules:
                    touched.update(rule.condition_reads)
                    touched.update(rule.action_reads)
                    touched.update(f.name for f in rule.action_writes)
                in_scope = set(scopes["base"])
                for other_id, names in scopes.items():
                    if other_id not in ("base", table_id):
                        in_scope.update(names)
                if not (touched & in_scope):
                    diagnostics.append(
                        make_diagnostic(
                            "W_DESIGN_RULE",
                            f"table '{table_id}' bound to '{element.node_id}' touches no field in scope",
                            node=element.node_id,
                            entity=table_id,
                        )
                    )
    return diagnostics
