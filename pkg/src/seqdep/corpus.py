"""Seed-deterministic synthetic diagram corpus.

Diagrams are generated live: a terminating element (return message, break
fragment, or a fragment all of whose branches terminate) only ever appears
as the last element of its scope, and at most one alt branch per fragment
terminates. Field names are wired so most consumed entities have a producer
among the use case inputs and earlier API responses, which makes the rule
engine's output a meaningful gold annotation; a few consumers deliberately
reference entities produced nowhere (or only in sibling branches) so
missing-source diagnostics stay exercised.

Gold is defined as the rule engine's inferred edge set. Each entry also
carries a perturbed prediction set for metric tests: every gold edge is
dropped with probability 0.15, each survivor is retargeted with probability
0.10, and for each gold edge a category-rotated copy is added with
probability 0.10.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .engine import infer_all
from .evaluation import GoldAnnotation
from .model import (
    ApiSpec,
    Branch,
    CATEGORIES,
    DecisionTable,
    DependencyEdge,
    Document,
    Element,
    Field,
    Fragment,
    Message,
    ReturnMessage,
    Rule,
    UseCase,
)

P_DROP = 0.15
P_RETARGET = 0.10
P_ADD = 0.10

_VERBS = ("query", "set", "bind", "open", "verify", "clear", "freeze", "sync", "check", "init")
_NOUNS = ("account", "card", "quota", "limit", "balance", "flag", "profile", "key", "order", "wallet")
_PARTICIPANTS = ("client", "gateway", "core", "ledger", "risk", "notify", "audit")
_BRANCH_LABELS = ("ok", "fail", "frozen", "active", "fallback", "retry", "default", "expired")
_ENTITIES = (
    "user_id", "amount", "currency", "account_status", "balance", "card_no",
    "quota_value", "limit_value", "risk_level", "token", "order_id", "flag_state",
    "new_balance", "profile_id", "key_id", "merchant_id", "channel", "fee_rate",
    "region", "device_id", "session_id", "retry_count", "expire_time", "score",
    "tier", "batch_no", "trace_id", "biz_type", "remark", "version_no",
)
_SCALARS = ("uint32", "uint64", "int32", "int64", "string", "bool", "decimal")
# Pairs whose widths differ; used to provoke type-compatibility warnings.
_WIDTH_VARIANT = {"uint32": "uint64", "uint64": "uint32", "int32": "int64", "int64": "int32"}
_MISSING_ONLY = ("result_code", "err_msg")


@dataclass(frozen=True)
class CorpusParams:
    n_usecases: int = 12
    max_nodes: int = 25
    max_depth: int = 4
    p_alt: float = 0.35
    p_table: float = 0.5

    def __post_init__(self) -> None:
        if not 1 <= self.n_usecases <= 64:
            raise ValueError("n_usecases must be in [1, 64]")
        if not 6 <= self.max_nodes <= 40:
            raise ValueError("max_nodes must be in [6, 40]")
        if not 1 <= self.max_depth <= 5:
            raise ValueError("max_depth must be in [1, 5]")
        if not 0.0 <= self.p_alt <= 1.0 or not 0.0 <= self.p_table <= 1.0:
            raise ValueError("probabilities must be in [0, 1]")


@dataclass(frozen=True)
class CorpusEntry:
    document: Document
    gold: GoldAnnotation
    perturbed: frozenset[DependencyEdge]


class _Builder:
    """Accumulates one use case; max_nodes bounds the execution graph size
    including the virtual input node."""

    def __init__(self, rng: random.Random, name: str, params: CorpusParams):
        self.rng = rng
        self.name = name
        self.params = params
        self.apis: dict[str, ApiSpec] = {}
        self.tables: dict[str, DecisionTable] = {}
        self.dtypes: dict[str, str] = {}
        self.live: list[str] = []  # produced outside terminating branches, in order
        self.counters = {"m": 0, "f": 0, "r": 0, "t": 0}
        self.budget = rng.randint(6, params.max_nodes) - 2  # input + final return
        self.input_fields = tuple(
            Field(name=e, dtype=self._dtype(e)) for e in self._fresh_entities(rng.randint(2, 3))
        )
        self.live.extend(f.name for f in self.input_fields)

    def _dtype(self, entity: str) -> str:
        if entity not in self.dtypes:
            self.dtypes[entity] = self.rng.choice(_SCALARS)
        return self.dtypes[entity]

    def _fresh_entities(self, n: int) -> list[str]:
        unused = [e for e in _ENTITIES if e not in self.dtypes]
        self.rng.shuffle(unused)
        return unused[:n]

    def _node_id(self, prefix: str) -> str:
        self.counters[prefix] += 1
        return f"{prefix}{self.counters[prefix]}"

    def _request_fields(self) -> tuple[Field, ...]:
        # Always consume at least one use case input so every message has a
        # guaranteed producer; extras come from anything live so far.
        names = [self.rng.choice([f.name for f in self.input_fields])]
        extra = [e for e in self.live if e not in names]
        if extra and self.rng.random() < 0.7:
            names.append(self.rng.choice(extra))
        fields = []
        for e in names:
            dtype = self._dtype(e)
            if dtype in _WIDTH_VARIANT and self.rng.random() < 0.12:
                dtype = _WIDTH_VARIANT[dtype]
            fields.append(Field(name=e, dtype=dtype))
        return tuple(fields)

    def _response_fields(self) -> tuple[Field, ...]:
        n = self.rng.randint(0, 2)
        fields = []
        for _ in range(n):
            reuse = [e for e in self.live if e not in (f.name for f in self.input_fields)]
            if reuse and self.rng.random() < 0.35:
                e = self.rng.choice(reuse)  # second producer of the same entity
            else:
                fresh = self._fresh_entities(1)
                if not fresh:
                    continue
                e = fresh[0]
            if all(f.name != e for f in fields):
                fields.append(Field(name=e, dtype=self._dtype(e)))
        return tuple(fields)

    def _make_table(self, for_fragment: bool) -> str:
        table_id = self._node_id("t")
        rules = []
        for _ in range(self.rng.randint(1, 2)):
            read = self.rng.choice(self.live)
            condition_reads = (read,)
            if len(self.live) > 1 and self.rng.random() < 0.3:
                second = self.rng.choice([e for e in self.live if e != read])
                condition_reads = (read, second)
            action_reads: tuple[str, ...] = ()
            if not for_fragment and self.rng.random() < 0.4:
                action_reads = (self.rng.choice(self.live),)
            action_writes: tuple[Field, ...] = ()
            if self.rng.random() < 0.25:
                fresh = self._fresh_entities(1)
                if fresh:
                    action_writes = (Field(name=fresh[0], dtype=self._dtype(fresh[0])),)
            rules.append(
                Rule(
                    action=f"route by {read}",
                    condition=f"{read} == {self.rng.choice(('OK', 'FROZEN', 'LIMIT', 'RISK'))}",
                    condition_reads=condition_reads,
                    action_reads=action_reads,
                    action_writes=action_writes,
                )
            )
        self.tables[table_id] = DecisionTable(table_id=table_id, rules=tuple(rules))
        return table_id

    def _make_message(self, participants: tuple[str, ...], in_terminating: bool) -> Message:
        self.budget -= 1
        node_id = self._node_id("m")
        verb, noun = self.rng.choice(_VERBS), self.rng.choice(_NOUNS)
        api_name = f"{verb.capitalize()}{noun.capitalize()}{len(self.apis) + 1}"
        api = ApiSpec(
            name=api_name,
            description=f"{verb} {noun}",
            request=self._request_fields(),
            response=self._response_fields(),
        )
        self.apis[api_name] = api
        tables: tuple[str, ...] = ()
        if self.rng.random() < self.params.p_table * 0.4:
            tables = (self._make_table(for_fragment=False),)
        if not in_terminating:
            for f in api.response:
                if f.name not in self.live:
                    self.live.append(f.name)
            for table_id in tables:
                for rule in self.tables[table_id].rules:
                    for f in rule.action_writes:
                        if f.name not in self.live:
                            self.live.append(f.name)
        sender, receiver = self.rng.sample(list(participants), 2)
        return Message(node_id=node_id, sender=sender, receiver=receiver, api=api_name, tables=tables)

    def _make_return(self, in_branch: bool, charge: bool = True) -> ReturnMessage:
        if charge:
            self.budget -= 1
        node_id = self._node_id("r")
        names: list[str]
        non_input = [e for e in self.live if e not in (f.name for f in self.input_fields)]
        pool = non_input or self.live
        names = [self.rng.choice(pool)]
        if in_branch and self.rng.random() < 0.4:
            # Error-style field nobody produces, like a branch-local failure code.
            missing = [e for e in _MISSING_ONLY if e not in self.dtypes]
            if missing:
                names.append(missing[0])
        fields = tuple(Field(name=e, dtype=self._dtype(e)) for e in names)
        return ReturnMessage(node_id=node_id, fields=fields)

    def _make_terminator(self, participants: tuple[str, ...]) -> Element:
        # The terminator element itself was charged when the branch chose to
        # terminate; only the optional break body message draws on the budget.
        if self.budget >= 1 and self.rng.random() < 0.25:
            body = (self._make_message(participants, in_terminating=True),)
            return Fragment(node_id=self._node_id("f"), kind="break", branches=(Branch("body", body),))
        return self._make_return(in_branch=True, charge=False)

    def _make_fragment(self, participants: tuple[str, ...], depth: int) -> Fragment:
        self.budget -= 1
        node_id = self._node_id("f")
        kind = self.rng.choices(("alt", "opt", "loop"), weights=(6, 2.5, 1.5))[0]
        tables: tuple[str, ...] = ()
        if self.rng.random() < self.params.p_table:
            tables = (self._make_table(for_fragment=True),)
        if kind == "alt":
            n_branches = 2 if self.rng.random() < 0.75 else 3
            labels = self.rng.sample(list(_BRANCH_LABELS), n_branches)
            terminating = -1
            if self.rng.random() < 0.35 and self.budget >= n_branches + 1:
                terminating = self.rng.randrange(n_branches)
                self.budget -= 1  # reserve the terminator element now
            branches = []
            for i, label in enumerate(labels):
                elements = self._scope(participants, depth + 1, min_elements=0 if i == terminating else 1)
                if i == terminating:
                    elements = elements + (self._make_terminator(participants),)
                branches.append(Branch(label=label, elements=elements))
            return Fragment(node_id=node_id, kind=kind, branches=tuple(branches), tables=tables)
        body = self._scope(participants, depth + 1, min_elements=1)
        return Fragment(node_id=node_id, kind=kind, branches=(Branch("body", body),), tables=tables)

    def _scope(
        self, participants: tuple[str, ...], depth: int, min_elements: int
    ) -> tuple[Element, ...]:
        elements: list[Element] = []
        while self.budget > 0:
            if len(elements) >= min_elements:
                # Keep going eagerly while budget remains, tapering at the end.
                p_continue = 0.85 if self.budget >= 5 else 0.5
                if depth > 1:
                    p_continue *= 0.6  # spread the budget across scopes
                if self.rng.random() >= p_continue:
                    break
            can_nest = depth < self.params.max_depth and self.budget >= 4
            if can_nest and self.rng.random() < self.params.p_alt:
                elements.append(self._make_fragment(participants, depth))
            else:
                elements.append(self._make_message(participants, in_terminating=False))
            if len(elements) >= 6:
                break
        return tuple(elements)

    def build(self) -> UseCase:
        participants = tuple(
            self.rng.sample(list(_PARTICIPANTS), self.rng.randint(2, 4))
        )
        body = self._scope(participants, depth=1, min_elements=1)
        body = body + (self._make_return(in_branch=False),)
        return UseCase(
            name=self.name,
            input_fields=self.input_fields,
            participants=participants,
            body=body,
        )


def random_usecase(rng: random.Random, name: str, params: CorpusParams) -> tuple[UseCase, dict, dict]:
    builder = _Builder(rng, name, params)
    usecase = builder.build()
    return usecase, builder.apis, builder.tables


def random_document(rng: random.Random, name: str, params: CorpusParams) -> Document:
    usecase, apis, tables = random_usecase(rng, name, params)
    return Document(usecases=(usecase,), apis=apis, tables=tables)


def _perturb(
    rng: random.Random, gold: frozenset[DependencyEdge], usecase: UseCase
) -> frozenset[DependencyEdge]:
    node_ids = list(usecase.node_index)
    predicted: set[DependencyEdge] = set()
    for edge in sorted(gold, key=lambda e: (e.target, e.data, e.source)):
        if rng.random() < P_DROP:
            pass
        elif rng.random() < P_RETARGET and len(node_ids) > 1:
            others = [n for n in node_ids if n not in (edge.target, edge.source)]
            if others:
                predicted.add(
                    DependencyEdge(edge.source, edge.data, rng.choice(others), edge.category)
                )
            else:
                predicted.add(edge)
        else:
            predicted.add(edge)
        if rng.random() < P_ADD:
            rotated = CATEGORIES[(CATEGORIES.index(edge.category) + 1) % len(CATEGORIES)]
            predicted.add(DependencyEdge(edge.source, edge.data, edge.target, rotated))
    return frozenset(predicted)


def write_corpus(
    entries: list[CorpusEntry],
    directory: Path,
    seed: int | None = None,
    params: CorpusParams | None = None,
) -> list[Path]:
    """Write each entry as <name>.esd plus gold and perturbed prediction JSON."""
    from .parser import serialize_document
    from .wire import canonical_json, edges_to_json, gold_to_json

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    names = []
    for entry in entries:
        name = entry.gold.usecase
        names.append(name)
        esd = directory / f"{name}.esd"
        esd.write_text(serialize_document(entry.document), encoding="utf-8")
        gold = directory / f"{name}.gold.json"
        gold.write_text(canonical_json(gold_to_json(entry.gold)) + "\n", encoding="utf-8")
        pred = directory / f"{name}.pred.json"
        pred.write_text(
            canonical_json({"usecase": name, "edges": edges_to_json(entry.perturbed)}) + "\n",
            encoding="utf-8",
        )
        written.extend([esd, gold, pred])
    manifest = directory / "manifest.json"
    payload: dict = {"usecases": names}
    if seed is not None:
        payload["seed"] = seed
    if params is not None:
        payload["params"] = {
            "n_usecases": params.n_usecases,
            "max_nodes": params.max_nodes,
            "max_depth": params.max_depth,
            "p_alt": params.p_alt,
            "p_table": params.p_table,
        }
    manifest.write_text(canonical_json(payload) + "\n", encoding="utf-8")
    written.append(manifest)
    return written


def gen_corpus(seed: int, params: CorpusParams | None = None) -> list[CorpusEntry]:
    params = params or CorpusParams()
    entries = []
    for index in range(params.n_usecases):
        rng = random.Random(seed * 1_000_003 + index)
        verb = _VERBS[index % len(_VERBS)]
        noun = _NOUNS[(index * 3 + index // len(_VERBS)) % len(_NOUNS)]
        name = f"{verb.capitalize()}{noun.capitalize()}{index + 1:02d}"
        document = random_document(rng, name, params)
        usecase = document.usecases[0]
        ddg = infer_all(usecase, document)
        gold = GoldAnnotation(usecase=usecase.name, edges=ddg.edges)
        perturbed = _perturb(rng, ddg.edges, usecase)
        entries.append(CorpusEntry(document=document, gold=gold, perturbed=perturbed))
    return entries
