"""Circuit intermediate representation: parse, render, instantiate.

The IR is the deployable body of a function.  It replaces vendor SDK code
with a small, safe language; ``dialect_tag`` records which SDK a function
claims to target but is never executed, purely metadata.

Grammar (version header, then ';'-terminated statements, whitespace-free
form allowed):

    program   := "qir" "1" ";" statement*
    statement := "qubits" expr ";"
               | ("h" | "x" | "y" | "z") expr ";"
               | "p" "(" expr ")" expr ";"
               | "u" "(" expr "," expr "," expr ")" expr ";"
               | "cx" expr "," expr ";"
               | "measure" "all" ";"
    expr      := term (("+" | "-") term)*
    term      := factor (("*" | "/") factor)*
    factor    := NUMBER | IDENT | "-" factor | "(" expr ")"

``pi`` is a reserved constant.  Any other identifier is a template
parameter bound to the invocation input.  STATIC and PARAMETRIC programs
must open with ``qubits`` and close with ``measure all;``; builtin
templates may be header-only because their circuits come from the builders
in :mod:`qfaas.builtins`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from .config import DEFAULT_MAX_QUBITS
from .errors import (
    CircuitSyntaxError,
    IndexOutOfRange,
    InputOutOfRange,
    QubitLimitExceeded,
    UndeclaredParameter,
    UnknownGate,
)
from .simulator import Gate, GateKind

MAX_SOURCE_BYTES = 64 * 1024

IR_HEADER = "qir 1;"


class DialectTag(str, enum.Enum):
    QISKIT = "qiskit"
    CIRQ = "cirq"
    QSHARP = "qsharp"
    BRAKET = "braket"


class TemplateKind(str, enum.Enum):
    STATIC = "static"
    PARAMETRIC = "parametric"
    BUILTIN_QRNG = "builtin_qrng"
    BUILTIN_DJ = "builtin_dj"
    BUILTIN_SHOR = "builtin_shor"


BUILTIN_KINDS = (
    TemplateKind.BUILTIN_QRNG,
    TemplateKind.BUILTIN_DJ,
    TemplateKind.BUILTIN_SHOR,
)


# --- expression and statement nodes ------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Union[int, float]


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Name, Neg, BinOp]


@dataclass(frozen=True)
class QubitsStmt:
    expr: Expr


@dataclass(frozen=True)
class GateStmt:
    name: str
    params: Tuple[Expr, ...]
    args: Tuple[Expr, ...]


@dataclass(frozen=True)
class MeasureStmt:
    pass


Stmt = Union[QubitsStmt, GateStmt, MeasureStmt]


@dataclass(frozen=True)
class Circuit:
    """A concrete, runnable circuit.  Immutable once constructed.

    measured_qubits[j] supplies bit j of every result key, so listing
    qubits in ascending order renders the most-significant qubit first.
    meta carries builder facts (e.g. Shor's modulus) for post-processing.
    """

    num_qubits: int
    gates: Tuple[Gate, ...]
    measured_qubits: Tuple[int, ...]
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise QubitLimitExceeded("circuit must have at least 1 qubit")
        if not self.measured_qubits:
            raise IndexOutOfRange("circuit measures no qubits")
        if len(set(self.measured_qubits)) != len(self.measured_qubits):
            raise IndexOutOfRange("circuit measures a qubit twice")
        for q in self.measured_qubits:
            if not 0 <= q < self.num_qubits:
                raise IndexOutOfRange(f"measured qubit {q} out of range")
        for gate in self.gates:
            gate.validate(self.num_qubits)


@dataclass(frozen=True)
class CircuitTemplate:
    """Parsed function body plus its deployment metadata."""

    source: str
    declared_params: Tuple[str, ...]
    dialect_tag: DialectTag
    kind: TemplateKind
    statements: Tuple[Stmt, ...]


# --- tokenizer ----------------------------------------------------------------

_SYMBOLS = set("();,+-*/")

_GATE_WORDS = {"h", "x", "y", "z", "p", "u", "cx"}
_KEYWORDS = {"qir", "qubits", "measure", "all"} | _GATE_WORDS


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "number" | symbol itself | "eof"
    text: str
    line: int
    column: int


def _tokenize(source: str) -> List[_Token]:
    tokens: List[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(_Token("number", text, line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            tokens.append(_Token("ident", text, line, col))
            col += j - i
            i = j
            continue
        raise CircuitSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# --- parser -------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise CircuitSyntaxError(
                f"expected {what}, found {tok.text or 'end of source'!r}",
                tok.line,
                tok.column,
            )
        return tok

    def expect_word(self, word: str) -> _Token:
        tok = self.next()
        if tok.kind != "ident" or tok.text != word:
            raise CircuitSyntaxError(
                f"expected '{word}', found {tok.text or 'end of source'!r}",
                tok.line,
                tok.column,
            )
        return tok

    # expr := term (("+"|"-") term)*
    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.peek().kind in ("*", "/"):
            op = self.next().kind
            node = BinOp(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Expr:
        tok = self.next()
        if tok.kind == "number":
            if "." in tok.text or "e" in tok.text or "E" in tok.text:
                return Num(float(tok.text))
            return Num(int(tok.text))
        if tok.kind == "ident":
            return Name(tok.text)
        if tok.kind == "-":
            return Neg(self.parse_factor())
        if tok.kind == "(":
            node = self.parse_expr()
            self.expect(")", "')'")
            return node
        raise CircuitSyntaxError(
            f"expected an expression, found {tok.text or 'end of source'!r}",
            tok.line,
            tok.column,
        )

    def parse_statement(self) -> Stmt:
        tok = self.next()
        if tok.kind != "ident":
            raise CircuitSyntaxError(
                f"expected a statement, found {tok.text!r}", tok.line, tok.column
            )
        word = tok.text
        if word == "qubits":
            expr = self.parse_expr()
            self.expect(";", "';'")
            return QubitsStmt(expr)
        if word == "measure":
            self.expect_word("all")
            self.expect(";", "';'")
            return MeasureStmt()
        if word in ("h", "x", "y", "z"):
            target = self.parse_expr()
            self.expect(";", "';'")
            return GateStmt(word, (), (target,))
        if word == "p":
            self.expect("(", "'('")
            theta = self.parse_expr()
            self.expect(")", "')'")
            target = self.parse_expr()
            self.expect(";", "';'")
            return GateStmt("p", (theta,), (target,))
        if word == "u":
            self.expect("(", "'('")
            theta = self.parse_expr()
            self.expect(",", "','")
            phi = self.parse_expr()
            self.expect(",", "','")
            lam = self.parse_expr()
            self.expect(")", "')'")
            target = self.parse_expr()
            self.expect(";", "';'")
            return GateStmt("u", (theta, phi, lam), (target,))
        if word == "cx":
            control = self.parse_expr()
            self.expect(",", "','")
            target = self.parse_expr()
            self.expect(";", "';'")
            return GateStmt("cx", (), (control, target))
        raise UnknownGate(f"unknown gate '{word}'", tok.line, tok.column)

    def parse_program(self) -> Tuple[Stmt, ...]:
        head = self.next()
        if head.kind != "ident" or head.text != "qir":
            raise CircuitSyntaxError(
                "source must start with the 'qir 1;' header", head.line, head.column
            )
        version = self.expect("number", "the IR version")
        if version.text != "1":
            raise CircuitSyntaxError(
                f"unsupported IR version {version.text}", version.line, version.column
            )
        self.expect(";", "';'")
        statements: List[Stmt] = []
        while self.peek().kind != "eof":
            statements.append(self.parse_statement())
        return tuple(statements)


def _free_params(statements: Sequence[Stmt]) -> Tuple[str, ...]:
    seen: List[str] = []

    def walk(expr: Expr) -> None:
        if isinstance(expr, Name):
            if expr.ident != "pi" and expr.ident not in seen:
                seen.append(expr.ident)
        elif isinstance(expr, Neg):
            walk(expr.operand)
        elif isinstance(expr, BinOp):
            walk(expr.left)
            walk(expr.right)

    for stmt in statements:
        if isinstance(stmt, QubitsStmt):
            walk(stmt.expr)
        elif isinstance(stmt, GateStmt):
            for expr in (*stmt.params, *stmt.args):
                walk(expr)
    return tuple(seen)


def _check_shape(statements: Sequence[Stmt]) -> None:
    """STATIC/PARAMETRIC programs: one leading qubits, one trailing measure."""
    if not statements or not isinstance(statements[0], QubitsStmt):
        raise CircuitSyntaxError("program must declare 'qubits' first")
    if not isinstance(statements[-1], MeasureStmt):
        raise CircuitSyntaxError("program must end with 'measure all;'")
    for stmt in statements[1:-1]:
        if isinstance(stmt, QubitsStmt):
            raise CircuitSyntaxError("'qubits' may appear only once")
        if isinstance(stmt, MeasureStmt):
            raise CircuitSyntaxError("'measure all;' must be the last statement")


def parse_template(
    source: str,
    dialect_tag: Union[DialectTag, str] = DialectTag.QISKIT,
    kind: Optional[Union[TemplateKind, str]] = None,
    declared_params: Optional[Sequence[str]] = None,
) -> CircuitTemplate:
    """Parse and validate circuit source into a template.

    kind=None infers STATIC or PARAMETRIC from the free parameters; builtin
    kinds must be requested explicitly.  When declared_params is given it
    must exactly cover the parameters the source references.
    """
    if len(source.encode("utf-8")) > MAX_SOURCE_BYTES:
        raise CircuitSyntaxError("source exceeds 64 KiB")
    try:
        dialect = DialectTag(dialect_tag)
    except ValueError:
        raise CircuitSyntaxError(
            f"unknown dialect tag {dialect_tag!r}; "
            f"expected one of {sorted(t.value for t in DialectTag)}"
        ) from None
    statements = _Parser(_tokenize(source)).parse_program()
    free = _free_params(statements)

    if declared_params is not None:
        missing = [name for name in free if name not in declared_params]
        if missing:
            raise UndeclaredParameter(f"source references undeclared {missing[0]!r}")
        unused = [name for name in declared_params if name not in free]
        if unused:
            raise CircuitSyntaxError(f"declared parameter {unused[0]!r} is never used")

    if kind is None:
        resolved = TemplateKind.PARAMETRIC if free else TemplateKind.STATIC
    else:
        try:
            resolved = TemplateKind(kind)
        except ValueError:
            raise CircuitSyntaxError(f"unknown template kind {kind!r}") from None

    if resolved in BUILTIN_KINDS:
        # Body is advisory for builtins; the builders produce the circuit.
        return CircuitTemplate(source, free, dialect, resolved, statements)

    if resolved is TemplateKind.STATIC and free:
        raise UndeclaredParameter(
            f"static template references parameter {free[0]!r}"
        )
    if resolved is TemplateKind.PARAMETRIC:
        if not free:
            raise CircuitSyntaxError("parametric template references no parameter")
        if len(free) > 1:
            raise CircuitSyntaxError(
                "templates may reference at most one parameter, "
                f"found {', '.join(free)}"
            )
    _check_shape(statements)
    return CircuitTemplate(source, free, dialect, resolved, statements)


# --- renderer -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _render_expr(expr: Expr, min_prec: int = 0) -> str:
    if isinstance(expr, Num):
        return repr(expr.value) if isinstance(expr.value, float) else str(expr.value)
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, Neg):
        text = "-" + _render_expr(expr.operand, 3)
        return f"({text})" if min_prec > 3 else text
    prec = _PREC[expr.op]
    text = (
        _render_expr(expr.left, prec)
        + f" {expr.op} "
        + _render_expr(expr.right, prec + 1)
    )
    return f"({text})" if prec < min_prec else text


def _render_stmt(stmt: Stmt) -> str:
    if isinstance(stmt, QubitsStmt):
        return f"qubits {_render_expr(stmt.expr)};"
    if isinstance(stmt, MeasureStmt):
        return "measure all;"
    args = ", ".join(_render_expr(a) for a in stmt.args)
    if stmt.params:
        params = ", ".join(_render_expr(p) for p in stmt.params)
        return f"{stmt.name}({params}) {args};"
    return f"{stmt.name} {args};"


def render(template: CircuitTemplate) -> str:
    """Canonical source text; parse -> render -> parse is a fixed point."""
    lines = [IR_HEADER]
    lines.extend(_render_stmt(stmt) for stmt in template.statements)
    return "\n".join(lines) + "\n"


# --- instantiation ----------------------------------------------------------------

def _eval(expr: Expr, env: Dict[str, float]) -> Union[int, float]:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Name):
        if expr.ident not in env:
            raise UndeclaredParameter(f"unbound parameter {expr.ident!r}")
        return env[expr.ident]
    if isinstance(expr, Neg):
        return -_eval(expr.operand, env)
    left = _eval(expr.left, env)
    right = _eval(expr.right, env)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0:
        raise InputOutOfRange("division by zero in circuit expression")
    return left / right


def _eval_int(expr: Expr, env: Dict[str, float], what: str) -> int:
    value = _eval(expr, env)
    if isinstance(value, float):
        if not value.is_integer():
            raise InputOutOfRange(f"{what} must be an integer, got {value}")
        value = int(value)
    return value


def _build_from_statements(
    statements: Sequence[Stmt], env: Dict[str, float], max_qubits: int
) -> Circuit:
    num_qubits = _eval_int(statements[0].expr, env, "qubit count")
    if num_qubits < 1:
        raise InputOutOfRange(f"qubit count must be >= 1, got {num_qubits}")
    if num_qubits > max_qubits:
        raise QubitLimitExceeded(
            f"circuit needs {num_qubits} qubits, limit is {max_qubits}"
        )
    gates: List[Gate] = []
    for stmt in statements[1:-1]:
        assert isinstance(stmt, GateStmt)
        angles = tuple(float(_eval(p, env)) for p in stmt.params)
        if stmt.name == "cx":
            control = _eval_int(stmt.args[0], env, "control qubit")
            target = _eval_int(stmt.args[1], env, "target qubit")
            gates.append(Gate(GateKind.CNOT, (target,), controls=(control,)))
        else:
            target = _eval_int(stmt.args[0], env, "target qubit")
            gates.append(Gate(GateKind(stmt.name), (target,), angles))
    return Circuit(num_qubits, tuple(gates), tuple(range(num_qubits)))


def instantiate(
    template: CircuitTemplate,
    input: int,
    config: Optional[Dict[str, Any]] = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> Circuit:
    """Bind the invocation input and produce a runnable circuit.

    config supplies builtin knobs recorded at deployment time: "oracle" for
    Deutsch-Jozsa, "base" for Shor.  Static templates ignore the input.
    """
    from . import builtins as _builtins

    config = config or {}
    if template.kind is TemplateKind.BUILTIN_QRNG:
        if input < 1:
            raise InputOutOfRange(f"qrng needs input >= 1, got {input}")
        return _builtins.build_qrng_circuit(input, max_qubits=max_qubits)
    if template.kind is TemplateKind.BUILTIN_DJ:
        if input < 1:
            raise InputOutOfRange(f"deutsch-jozsa needs input >= 1, got {input}")
        oracle = _builtins.OracleKind(config.get("oracle", "balanced_xor"))
        return _builtins.build_dj_circuit(input, oracle, max_qubits=max_qubits)
    if template.kind is TemplateKind.BUILTIN_SHOR:
        _builtins.validate_shor_modulus(input)
        base = config.get("base") or _builtins.default_shor_base(input)
        return _builtins.build_shor_circuit(input, int(base), max_qubits=max_qubits)

    env: Dict[str, float] = {"pi": math.pi}
    for name in template.declared_params:
        env[name] = input
    return _build_from_statements(template.statements, env, max_qubits)
