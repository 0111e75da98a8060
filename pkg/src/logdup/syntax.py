"""Immutable syntax model and parser for a definite-clause Prolog subset.

The accepted language is deliberately small: facts and rules built from
atoms, variables, integers/floats, compound terms, list sugar and the
operators ``:-``, ``,``, ``=``, ``is``, comparisons and arithmetic.
Clauses containing cut, negation, disjunction or if-then-else make the
whole owning predicate unusable for analysis; such predicates are skipped
with a warning rather than rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


class PrologSyntaxError(Exception):
    """Raised on malformed input, with 1-based line/column information."""

    def __init__(self, message: str, line: int, column: int, filename: str = "<string>"):
        super().__init__(f"{filename}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.filename = filename


# ---------------------------------------------------------------------------
# Term model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Num:
    """Numeric constant.  Counts as a leaf node but carries no symbol."""

    value: Union[int, float]

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True)
class Struct:
    """Compound term; constants are 0-ary structs."""

    functor: str
    args: tuple = ()

    def __post_init__(self):
        if not self.functor:
            raise ValueError("functor names must be non-empty")

    def __repr__(self):
        return render_term(self)


Term = Union[Var, Num, Struct]


@dataclass(frozen=True)
class PredSymbol:
    name: str
    arity: int

    def __str__(self):
        return f"{self.name}/{self.arity}"

    def __repr__(self):
        return str(self)


@dataclass(frozen=True)
class Atom:
    pred: PredSymbol
    args: tuple = ()

    def __post_init__(self):
        if len(self.args) != self.pred.arity:
            raise ValueError(f"arity mismatch for {self.pred}: got {len(self.args)} args")

    def __repr__(self):
        return render_atom(self)


@dataclass(frozen=True)
class Goal:
    """Conjunction of atoms.  Source order is kept for rendering and
    normalization determinism; the measures treat it as a multiset."""

    atoms: tuple = ()

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return ", ".join(render_atom(a) for a in self.atoms) or "true"


EMPTY_GOAL = Goal(())


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: Goal = EMPTY_GOAL
    origin: tuple = ("<string>", 0)

    def __repr__(self):
        return render_clause(self)


@dataclass
class Program:
    """Predicate-indexed clause store.  Treated as immutable once built."""

    predicates: dict = field(default_factory=dict)  # PredSymbol -> tuple[Clause, ...]
    warnings: tuple = ()
    excluded: frozenset = frozenset()

    def clauses(self, pred: PredSymbol) -> tuple:
        return self.predicates.get(pred, ())

    def all_clauses(self) -> Iterator[Clause]:
        for clauses in self.predicates.values():
            yield from clauses


# Equality is the only non-arithmetic builtin the analysis knows about.
EQ = PredSymbol("=", 2)

# Arithmetic builtins keep their compound arguments un-flattened during
# normalization and are never dependency-graph nodes.
ARITH_BUILTINS = frozenset({
    ("is", 2), ("<", 2), (">", 2), ("=<", 2), (">=", 2), ("=:=", 2), ("=\\=", 2),
})

BUILTIN_PREDS = frozenset({("=", 2)}) | ARITH_BUILTINS


def is_builtin(pred: PredSymbol) -> bool:
    return (pred.name, pred.arity) in BUILTIN_PREDS


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>%[^\n]*)
    | (?P<num>\d+(?:\.\d+)?)
    | (?P<name>[a-z]\w*)
    | (?P<var>[_A-Z]\w*)
    | (?P<quoted>'(?:[^']|'')*')
    | (?P<punct>:-|=:=|=\\=|=<|>=|->|\\\+|[()\[\]|,;!=<>+\-*/.])
    """,
    re.X,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num' | 'name' | 'var' | 'punct' | 'end'
    value: str
    line: int
    col: int


def _tokenize(text: str, filename: str) -> list:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PrologSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1, filename)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = pos + value.rfind("\n") + 1
        elif kind == "comment":
            pass
        elif kind == "quoted":
            tokens.append(_Token("name", value[1:-1].replace("''", "'"), line, col))
        elif kind == "punct" and value == ".":
            # A '.' is a clause terminator when followed by layout or EOF.
            nxt = text[m.end():m.end() + 1]
            if nxt == "" or nxt.isspace() or nxt == "%":
                tokens.append(_Token("end", ".", line, col))
            else:
                tokens.append(_Token("punct", ".", line, col))
        else:
            tokens.append(_Token(kind, value, line, col))
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# Parser (precedence climbing over a fixed operator table)
# ---------------------------------------------------------------------------

# name -> (priority, type); the set is fixed, no operator directives.
_INFIX_OPS = {
    ":-": (1200, "xfx"),
    ";": (1100, "xfy"),
    "->": (1050, "xfy"),
    ",": (1000, "xfy"),
    "=": (700, "xfx"),
    "is": (700, "xfx"),
    "<": (700, "xfx"),
    ">": (700, "xfx"),
    "=<": (700, "xfx"),
    ">=": (700, "xfx"),
    "=:=": (700, "xfx"),
    "=\\=": (700, "xfx"),
    "+": (500, "yfx"),
    "-": (500, "yfx"),
    "*": (400, "yfx"),
    "/": (400, "yfx"),
}


class _Parser:
    def __init__(self, tokens: list, filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename
        self.fresh_counter = 0

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self):
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("end", "", 1, 1)
            raise PrologSyntaxError("unexpected end of input", last.line, last.col, self.filename)
        self.pos += 1
        return tok

    def _expect(self, value: str):
        tok = self._next()
        if tok.value != value:
            raise PrologSyntaxError(
                f"expected {value!r}, found {tok.value!r}", tok.line, tok.col, self.filename)
        return tok

    def _error(self, msg: str, tok: _Token):
        raise PrologSyntaxError(msg, tok.line, tok.col, self.filename)

    def _fresh_var(self) -> Var:
        self.fresh_counter += 1
        return Var(f"_G{self.fresh_counter}")

    def parse_term(self, maxprec: int):
        left = self._primary()
        while True:
            tok = self._peek()
            if tok is None or tok.kind == "end":
                break
            op = tok.value if tok.kind in ("punct", "name") else None
            if op not in _INFIX_OPS:
                break
            prec, optype = _INFIX_OPS[op]
            if prec > maxprec:
                break
            self._next()
            rightmax = prec if optype == "xfy" else prec - 1
            right = self.parse_term(rightmax)
            if op == ":-" and isinstance(left, Struct) and left.functor == ":-" and len(left.args) == 2:
                self._error("chained ':-'", tok)
            left = Struct(op, (left, right))
        return left

    def _primary(self):
        tok = self._next()
        if tok.kind == "num":
            return Num(float(tok.value) if "." in tok.value else int(tok.value))
        if tok.kind == "var":
            if tok.value == "_":
                return self._fresh_var()
            return Var(tok.value)
        if tok.kind == "name":
            nxt = self._peek()
            if nxt is not None and nxt.kind == "punct" and nxt.value == "(":
                self._next()
                args = self._arglist()
                return Struct(tok.value, tuple(args))
            return Struct(tok.value)
        if tok.kind == "punct":
            if tok.value == "(":
                term = self.parse_term(1200)
                self._expect(")")
                return term
            if tok.value == "[":
                return self._list()
            if tok.value == "!":
                return Struct("!")
            if tok.value == "\\+":
                arg = self.parse_term(900)
                return Struct("\\+", (arg,))
            if tok.value == "-":
                nxt = self._peek()
                if nxt is not None and nxt.kind == "num":
                    self._next()
                    return Num(-(float(nxt.value) if "." in nxt.value else int(nxt.value)))
                arg = self.parse_term(200)
                return Struct("-", (arg,))
        self._error(f"unexpected token {tok.value!r}", tok)

    def _arglist(self) -> list:
        args = [self.parse_term(999)]
        while True:
            tok = self._next()
            if tok.value == ")":
                return args
            if tok.value != ",":
                self._error(f"expected ',' or ')', found {tok.value!r}", tok)
            args.append(self.parse_term(999))

    def _list(self):
        tok = self._peek()
        if tok is not None and tok.value == "]":
            self._next()
            return Struct("[]")
        elems = [self.parse_term(999)]
        tail = Struct("[]")
        while True:
            tok = self._next()
            if tok.value == "]":
                break
            if tok.value == "|":
                tail = self.parse_term(999)
                self._expect("]")
                break
            if tok.value != ",":
                self._error(f"expected ',', '|' or ']', found {tok.value!r}", tok)
            elems.append(self.parse_term(999))
        result = tail
        for e in reversed(elems):
            result = Struct(".", (e, result))
        return result


# ---------------------------------------------------------------------------
# Program construction
# ---------------------------------------------------------------------------

_NON_DEFINITE = {";": "';'", "->": "'->'", "\\+": "'\\+'", "!": "'!'"}


def _flatten_conj(term) -> list:
    if isinstance(term, Struct) and term.functor == "," and len(term.args) == 2:
        return _flatten_conj(term.args[0]) + _flatten_conj(term.args[1])
    return [term]


def _term_to_atom(term) -> Atom:
    if isinstance(term, Struct):
        return Atom(PredSymbol(term.functor, len(term.args)), term.args)
    raise ValueError(f"not a callable term: {term!r}")


def parse_term(text: str, filename: str = "<string>"):
    """Parse a single term (no trailing '.')."""
    parser = _Parser(_tokenize(text, filename), filename)
    term = parser.parse_term(1200)
    tok = parser._peek()
    if tok is not None:
        parser._error(f"trailing input {tok.value!r}", tok)
    return term


def parse_goal(text: str, filename: str = "<string>") -> Goal:
    """Parse a comma-separated conjunction of atoms."""
    term = parse_term(text, filename)
    return Goal(tuple(_term_to_atom(t) for t in _flatten_conj(term)))


def parse_clause(text: str, filename: str = "<string>") -> Clause:
    """Parse a single clause (trailing '.' optional)."""
    prog = parse_program(text if text.rstrip().endswith(".") else text + ".", filename)
    clauses = list(prog.all_clauses())
    if len(clauses) != 1:
        raise ValueError(f"expected exactly one definite clause, found {len(clauses)}")
    return clauses[0]


def parse_program(text: str, filename: str = "<string>") -> Program:
    """Parse a clause corpus into a Program.

    Clauses using non-definite constructs (cut, negation, disjunction,
    if-then-else) cause the whole owning predicate to be excluded from
    analysis, with a warning naming the construct.  Top-level directives
    are skipped with a warning.  Empty input yields an empty program.
    """
    tokens = _tokenize(text, filename)
    parser = _Parser(tokens, filename)
    predicates: dict = {}
    order: list = []
    warnings: list = []
    tainted: dict = {}  # PredSymbol -> reason

    while parser._peek() is not None:
        first = parser._peek()
        if first.kind == "punct" and first.value == ":-":
            parser._next()
            parser.parse_term(1200)
            parser._expect(".")
            warnings.append(f"{filename}:{first.line}: directive skipped")
            continue
        parser.fresh_counter = 0
        term = parser.parse_term(1200)
        parser._expect(".")
        origin = (filename, first.line)
        if isinstance(term, Struct) and term.functor == ":-" and len(term.args) == 2:
            head_term, body_term = term.args
        else:
            head_term, body_term = term, None
        if not isinstance(head_term, Struct) or head_term.functor in _NON_DEFINITE:
            raise PrologSyntaxError("clause head must be an atom", first.line, first.col, filename)
        head = _term_to_atom(head_term)
        offender = None
        body_atoms = []
        if body_term is not None:
            for conjunct in _flatten_conj(body_term):
                if not isinstance(conjunct, Struct):
                    offender = repr(conjunct)
                    break
                if conjunct.functor in _NON_DEFINITE and (
                        len(conjunct.args) in (0, 1, 2)):
                    offender = _NON_DEFINITE[conjunct.functor]
                    break
                body_atoms.append(_term_to_atom(conjunct))
        pred = head.pred
        if pred not in predicates:
            predicates[pred] = []
            order.append(pred)
        if offender is not None:
            tainted.setdefault(pred, (offender, origin))
            continue
        predicates[pred].append(Clause(head, Goal(tuple(body_atoms)), origin))

    excluded = frozenset(tainted)
    for pred, (offender, origin) in tainted.items():
        warnings.append(
            f"{origin[0]}:{origin[1]}: predicate {pred} excluded from analysis "
            f"(non-definite construct {offender})")
    result = {}
    for pred in order:
        if pred in excluded:
            continue
        result[pred] = tuple(predicates[pred])
    return Program(result, tuple(warnings), excluded)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

_PLAIN_NAME_RE = re.compile(r"[a-z]\w*$")
_SPACED_OPS = {"=", "is", "<", ">", "=<", ">=", "=:=", "=\\="}


def _render_name(name: str) -> str:
    if _PLAIN_NAME_RE.match(name) or name in ("[]", "!", ";", ",") or name in _INFIX_OPS:
        return name
    return "'" + name.replace("'", "''") + "'"


def _close_list(term) -> str:
    elems = []
    while isinstance(term, Struct) and term.functor == "." and len(term.args) == 2:
        elems.append(render_term(term.args[0], 999))
        term = term.args[1]
    inner = ",".join(elems)
    if isinstance(term, Struct) and term.functor == "[]" and not term.args:
        return f"[{inner}]"
    return f"[{inner}|{render_term(term, 999)}]"


def render_term(term, maxprec: int = 1200) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Num):
        return str(term.value)
    if isinstance(term, Struct):
        if term.functor == "." and len(term.args) == 2:
            return _close_list(term)
        if term.functor in _INFIX_OPS and len(term.args) == 2:
            prec, optype = _INFIX_OPS[term.functor]
            lmax = prec if optype == "yfx" else prec - 1
            rmax = prec if optype == "xfy" else prec - 1
            op = f" {term.functor} " if term.functor in _SPACED_OPS else term.functor
            text = f"{render_term(term.args[0], lmax)}{op}{render_term(term.args[1], rmax)}"
            return f"({text})" if prec > maxprec else text
        if not term.args:
            return _render_name(term.functor)
        args = ",".join(render_term(a, 999) for a in term.args)
        return f"{_render_name(term.functor)}({args})"
    raise TypeError(f"cannot render {term!r}")


def render_atom(atom: Atom) -> str:
    return render_term(Struct(atom.pred.name, atom.args) if atom.args else Struct(atom.pred.name))


def render_clause(clause: Clause) -> str:
    head = render_atom(clause.head)
    if not clause.body.atoms:
        return f"{head}."
    body = ", ".join(render_atom(a) for a in clause.body.atoms)
    return f"{head} :- {body}."


def render_program(program: Program) -> str:
    lines = []
    for clauses in program.predicates.values():
        for c in clauses:
            lines.append(render_clause(c))
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Structural helpers shared by the analysis modules
# ---------------------------------------------------------------------------

def var_names(entity) -> list:
    """Variable names in order of first occurrence."""
    seen: dict = {}

    def walk(e):
        if isinstance(e, Var):
            seen.setdefault(e.name, None)
        elif isinstance(e, Struct):
            for a in e.args:
                walk(a)
        elif isinstance(e, Atom):
            for a in e.args:
                walk(a)
        elif isinstance(e, Goal):
            for a in e.atoms:
                walk(a)
        elif isinstance(e, Clause):
            walk(e.head)
            walk(e.body)

    walk(entity)
    return list(seen)


def rename_vars(entity, mapping: dict):
    """Apply a variable-name substitution; unmapped variables stay."""
    if isinstance(entity, Var):
        target = mapping.get(entity.name)
        return entity if target is None else (target if isinstance(target, (Var, Num, Struct)) else Var(target))
    if isinstance(entity, Num):
        return entity
    if isinstance(entity, Struct):
        return Struct(entity.functor, tuple(rename_vars(a, mapping) for a in entity.args))
    if isinstance(entity, Atom):
        return Atom(entity.pred, tuple(rename_vars(a, mapping) for a in entity.args))
    if isinstance(entity, Goal):
        return Goal(tuple(rename_vars(a, mapping) for a in entity.atoms))
    if isinstance(entity, Clause):
        return Clause(rename_vars(entity.head, mapping), rename_vars(entity.body, mapping), entity.origin)
    raise TypeError(f"cannot rename {entity!r}")
