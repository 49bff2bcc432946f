"""The ``.lpts`` modeling language, and counterexample serialization.

Grammar::

    model      := lpts_block+ system_line spec_line
    lpts_block := "lpts" NAME "{" "alphabet" namelist ";" "init" NAME ";" trans* "}"
    trans      := NAME "-" NAME "->" "{" prob ":" NAME ("," prob ":" NAME)* "}" ";"
    prob       := INT "/" INT | INT
    system_line:= "system" "=" NAME ("||" NAME)* ";"
    spec_line  := "spec" "=" NAME ";"

``#`` starts a comment running to the end of the line. States are declared by
use and numbered in order of first appearance, the initial state first.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .cex import StochasticTree
from .core import Dist, Lpts, Transition


class ModelError(ValueError):
    """A syntax or semantic error in a model, with its 1-based position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<decimal>\d+\.\d*|\.\d+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>->|\|\||[{};:,/=-])
    """,
    re.VERBOSE,
)

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ModelError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "decimal":
            raise ModelError(f"decimal probability {chunk!r}; write it as a fraction", line, col)
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class ModelFile:
    lpts: dict[str, Lpts]
    system: tuple[str, ...]
    spec: str
    options: dict[str, str] = field(default_factory=dict)

    def components(self) -> list[Lpts]:
        return [self.lpts[name] for name in self.system]


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        return ModelError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.tok
        if tok.text != text or tok.kind == "eof":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        self.i += 1
        return tok

    def name(self, what: str = "name") -> Token:
        tok = self.tok
        if tok.kind != "name":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise self.error(f"expected {what}, found {found}")
        self.i += 1
        return tok

    def integer(self) -> Token:
        tok = self.tok
        if tok.kind != "int":
            raise self.error(f"expected a probability, found {tok.text!r}")
        self.i += 1
        return tok

    def model(self) -> ModelFile:
        blocks: dict[str, Lpts] = {}
        if self.tok.text != "lpts":
            raise self.error("expected 'lpts'")
        while self.tok.text == "lpts" and self.tok.kind == "name":
            start = self.tok
            name, l = self.lpts_block()
            if name in blocks:
                raise self.error(f"LPTS {name!r} defined twice", start)
            blocks[name] = l
        self.expect("system")
        self.expect("=")
        system = [self.name("component name")]
        while self.tok.text == "||":
            self.i += 1
            system.append(self.name("component name"))
        self.expect(";")
        self.expect("spec")
        self.expect("=")
        spec = self.name("spec name")
        self.expect(";")
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after spec line")
        seen = set()
        for tok in system:
            if tok.text not in blocks:
                raise self.error(f"unknown LPTS {tok.text!r}", tok)
            if tok.text in seen:
                raise self.error(f"component {tok.text!r} listed twice", tok)
            seen.add(tok.text)
        if spec.text not in blocks:
            raise self.error(f"unknown LPTS {spec.text!r}", spec)
        return ModelFile(blocks, tuple(t.text for t in system), spec.text)

    def lpts_block(self) -> tuple[str, Lpts]:
        self.expect("lpts")
        name = self.name("LPTS name").text
        self.expect("{")
        self.expect("alphabet")
        alphabet: list[str] = []
        if self.tok.text != ";":
            alphabet.append(self.name("action").text)
            while self.tok.text == ",":
                self.i += 1
                alphabet.append(self.name("action").text)
        self.expect(";")
        self.expect("init")
        init = self.name("initial state").text
        self.expect(";")
        states = {init: 0}

        def state(tok: Token) -> int:
            return states.setdefault(tok.text, len(states))

        trans = []
        while self.tok.text != "}":
            src = state(self.name("state"))
            self.expect("-")
            act = self.name("action")
            if act.text not in alphabet:
                raise self.error(f"action {act.text!r} is not in the alphabet of {name!r}", act)
            self.expect("->")
            brace = self.expect("{")
            weights: dict[int, Fraction] = {}
            while True:
                prob_tok = self.tok
                p = self.prob()
                self.expect(":")
                target = self.name("state")
                s = state(target)
                if p == 0:
                    raise self.error("zero probability", prob_tok)
                if s in weights:
                    raise self.error(f"state {target.text!r} listed twice in one distribution", target)
                weights[s] = p
                if self.tok.text != ",":
                    break
                self.i += 1
            self.expect("}")
            self.expect(";")
            total = sum(weights.values(), Fraction(0))
            if total != 1:
                raise self.error(f"distribution sums to {total}", brace)
            trans.append(Transition(src, act.text, Dist(weights)))
        self.expect("}")
        return name, Lpts(tuple(states), 0, frozenset(alphabet), tuple(trans))

    def prob(self) -> Fraction:
        num = self.integer()
        if self.tok.text == "/":
            self.i += 1
            den = self.integer()
            if int(den.text) == 0:
                raise self.error("zero denominator", den)
            return Fraction(int(num.text), int(den.text))
        return Fraction(int(num.text))


def parse_model(text: str) -> ModelFile:
    return _Parser(text).model()


def format_prob(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def format_lpts(name: str, l: Lpts) -> str:
    """Render one LPTS block; state names must be plain identifiers."""
    bad = [s for s in l.states if not NAME_RE.match(s)]
    if bad or not NAME_RE.match(name):
        raise ValueError(f"not printable as identifiers: {bad or [name]}")
    lines = [f"lpts {name} {{", f"  alphabet {', '.join(l.sorted_alphabet())};", f"  init {l.states[l.start]};"]
    for t in l.transitions:
        support = ", ".join(f"{format_prob(p)}: {l.states[s]}" for s, p in t.dist.items())
        lines.append(f"  {l.states[t.src]} -{t.action}-> {{ {support} }};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_model(model: ModelFile) -> str:
    blocks = [format_lpts(name, l) for name, l in model.lpts.items()]
    tail = f"system = {' || '.join(model.system)};\nspec = {model.spec};\n"
    return "\n".join(blocks) + "\n" + tail


# counterexample documents


@dataclass(frozen=True)
class CexDocument:
    """A counterexample tree, where each of its states lands in the system, and run metadata."""

    tree: Lpts
    maps_to: tuple[str, ...]  # per tree state, the name of the system state
    meta: dict = field(default_factory=dict)


def cex_document(c: StochasticTree, system: Lpts, meta: dict | None = None) -> CexDocument:
    tree = c.lpts
    used = frozenset(t.action for t in tree.transitions)
    tree = Lpts(tree.states, tree.start, used, tree.transitions)
    return CexDocument(tree, tuple(system.states[s] for s in c.exec_map), dict(meta or {}))


CEX_SCHEMA = {
    "type": "object",
    "required": ["root", "states", "transitions", "meta"],
    "additionalProperties": False,
    "properties": {
        "root": {"type": "string"},
        "states": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "maps_to"],
                "additionalProperties": False,
                "properties": {"id": {"type": "string"}, "maps_to": {"type": "string"}},
            },
        },
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "action", "support"],
                "additionalProperties": False,
                "properties": {
                    "from": {"type": "string"},
                    "action": {"type": "string"},
                    "support": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["prob", "to"],
                            "additionalProperties": False,
                            "properties": {
                                "prob": {"type": "string", "pattern": r"^[0-9]+/[1-9][0-9]*$"},
                                "to": {"type": "string"},
                            },
                        },
                    },
                },
            },
        },
        "meta": {"type": "object"},
    },
}


def _json(doc: CexDocument) -> str:
    tree = doc.tree
    obj = {
        "root": tree.states[tree.start],
        "states": [{"id": name, "maps_to": m} for name, m in zip(tree.states, doc.maps_to)],
        "transitions": [
            {
                "from": tree.states[t.src],
                "action": t.action,
                "support": [{"prob": f"{p.numerator}/{p.denominator}", "to": tree.states[s]} for s, p in t.dist.items()],
            }
            for t in tree.transitions
        ],
        "meta": {k: doc.meta[k] for k in sorted(doc.meta)},
    }
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot(doc: CexDocument) -> str:
    tree = doc.tree
    lines = ["digraph counterexample {", "  rankdir=TB;", "  node [shape=circle];"]
    for s, (name, m) in enumerate(zip(tree.states, doc.maps_to)):
        style = ", style=filled, fillcolor=gray" if s == tree.start else ""
        lines.append(f"  {_quote(name)} [label={_quote(f'{name} ({m})')}{style}];")
    for k, t in enumerate(tree.transitions):
        hub = _quote(f"{tree.states[t.src]}#{k}")
        lines.append(f"  {hub} [shape=point];")
        lines.append(f"  {_quote(tree.states[t.src])} -> {hub} [label={_quote(t.action)}, arrowhead=none];")
        for s, p in t.dist.items():
            lines.append(f"  {hub} -> {_quote(tree.states[s])} [label={_quote(format_prob(p))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _text(doc: CexDocument) -> str:
    tree = doc.tree
    out = []

    def walk(s: int, depth: int) -> None:
        pad = "  " * depth
        out.append(f"{pad}{tree.states[s]} ({doc.maps_to[s]})")
        for k in tree.outgoing(s):
            t = tree.transitions[k]
            out.append(f"{pad}  -{t.action}->")
            for child, p in t.dist.items():
                out.append(f"{pad}    {format_prob(p)}:")
                walk(child, depth + 3)

    walk(tree.start, 0)
    return "\n".join(out) + "\n"


def emit_cex(doc: CexDocument, format: str = "json") -> str:
    if format == "json":
        return _json(doc)
    if format == "dot":
        return _dot(doc)
    if format == "text":
        return _text(doc)
    raise ValueError(f"unknown format {format!r}")


def load_cex(text: str) -> CexDocument:
    obj = json.loads(text)
    names = [s["id"] for s in obj["states"]]
    index = {name: i for i, name in enumerate(names)}
    trans = []
    for t in obj["transitions"]:
        dist = Dist((index[e["to"]], Fraction(e["prob"])) for e in t["support"])
        trans.append(Transition(index[t["from"]], t["action"], dist))
    alphabet = frozenset(t.action for t in trans)
    tree = Lpts(tuple(names), index[obj["root"]], alphabet, tuple(trans))
    return CexDocument(tree, tuple(s["maps_to"] for s in obj["states"]), obj["meta"])
