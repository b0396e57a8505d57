"""A small pulse-program language and its compiler.

Grammar (whitespace-insensitive, '#' starts a comment to end of line):

    program   := { statement }
    statement := block | sel | hard | crush
    block     := "block" "{" sel { ";" sel } "}"
    sel       := "sel" INT INT axis ANGLE
    hard      := "hard" ( "all" | INT ) axis ANGLE
    crush     := "crush" [ "ideal" | "order" ]
    axis      := "x" | "y" | "z"        ANGLE := decimal degrees

A block applies its selective pulses simultaneously: one generator, one
exponential.  A bare sel statement is shorthand for a one-pulse block.
Sequential statements are separate unitaries, which is a physically
different program from putting the pulses in one block.

Programs may also hold UnitaryRef statements naming a registered operator
("walsh" is built in).  Those are created programmatically; the textual
grammar has no production for them, so pretty() rejects such programs.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import SpinSystem, crush, evolve, expm_unitary, generator, is_unitary, spin_op
from .errors import CompileError, InputError, ParseError
from .hogg import walsh

CRUSH_KEYWORDS = {"ideal": "all_off_diagonal", "order": "coherence_order"}
_CRUSH_WORDS = {v: k for k, v in CRUSH_KEYWORDS.items()}


@dataclass(frozen=True)
class SelPulse:
    m: int
    k: int
    axis: str
    angle_deg: float


@dataclass(frozen=True)
class Block:
    pulses: tuple[SelPulse, ...]


@dataclass(frozen=True)
class HardPulse:
    spin: int | None  # None means all spins
    axis: str
    angle_deg: float


@dataclass(frozen=True)
class Crush:
    mode: str = "all_off_diagonal"


@dataclass(frozen=True)
class UnitaryRef:
    name: str


Statement = Block | HardPulse | Crush | UnitaryRef


@dataclass(frozen=True)
class PulseProgram:
    statements: tuple[Statement, ...]
    lines: tuple[int, ...] = field(default=(), compare=False)

    def line_of(self, index: int) -> int | None:
        return self.lines[index] if index < len(self.lines) else None


@dataclass(frozen=True, eq=False)
class Unitary:
    op: np.ndarray


@dataclass(frozen=True)
class CrushEvent:
    mode: str


@dataclass(frozen=True, eq=False)
class ChannelSequence:
    events: tuple
    dim: int


# ---------------------------------------------------------------------------
# parsing

class _Token:
    __slots__ = ("text", "line", "col")

    def __init__(self, text: str, line: int, col: int):
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        col = 0
        while col < len(line):
            ch = line[col]
            if ch.isspace():
                col += 1
            elif ch in "{};":
                tokens.append(_Token(ch, lineno, col + 1))
                col += 1
            else:
                end = col
                while end < len(line) and not line[end].isspace() and line[end] not in "{};":
                    end += 1
                tokens.append(_Token(line[col:end], lineno, col + 1))
                col = end
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expect: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of program, expected {expect or 'a token'}")
        self.pos += 1
        if expect is not None and tok.text != expect:
            raise ParseError(f"expected {expect!r}, got {tok.text!r}", tok.line, tok.col)
        return tok

    def int_token(self, what: str) -> int:
        tok = self.next(None)
        try:
            return int(tok.text)
        except ValueError:
            raise ParseError(f"expected {what}, got {tok.text!r}", tok.line, tok.col) from None

    def angle_token(self) -> float:
        tok = self.next(None)
        try:
            value = float(tok.text)
        except ValueError:
            raise ParseError(f"malformed angle {tok.text!r}", tok.line, tok.col) from None
        if not np.isfinite(value):
            raise ParseError(f"malformed angle {tok.text!r}", tok.line, tok.col)
        return value

    def axis_token(self) -> str:
        tok = self.next(None)
        if tok.text not in ("x", "y", "z"):
            raise ParseError(f"axis must be x, y or z, got {tok.text!r}", tok.line, tok.col)
        return tok.text

    def sel(self) -> SelPulse:
        tok = self.next("sel")
        m = self.int_token("a level number")
        k = self.int_token("a level number")
        axis = self.axis_token()
        angle = self.angle_token()
        if m == k:
            raise ParseError(f"degenerate transition ({m}, {k})", tok.line, tok.col)
        return SelPulse(m, k, axis, angle)

    def block(self) -> Block:
        tok = self.next("block")
        self.next("{")
        pulses = [self.sel()]
        while self.peek() is not None and self.peek().text == ";":
            self.next(";")
            pulses.append(self.sel())
        self.next("}")
        seen = set()
        for p in pulses:
            key = frozenset((p.m, p.k))
            if key in seen:
                raise ParseError(
                    f"transition ({p.m}, {p.k}) appears twice in one block", tok.line, tok.col
                )
            seen.add(key)
        return Block(tuple(pulses))

    def hard(self) -> HardPulse:
        self.next("hard")
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of program in hard pulse")
        if tok.text == "all":
            self.next("all")
            spin = None
        else:
            spin = self.int_token("a spin number or 'all'")
        return HardPulse(spin, self.axis_token(), self.angle_token())

    def crush_stmt(self) -> Crush:
        self.next("crush")
        tok = self.peek()
        if tok is not None and tok.text in CRUSH_KEYWORDS:
            self.next(tok.text)
            return Crush(CRUSH_KEYWORDS[tok.text])
        return Crush()

    def program(self) -> PulseProgram:
        statements: list[Statement] = []
        lines: list[int] = []
        while (tok := self.peek()) is not None:
            if tok.text == "block":
                stmt = self.block()
            elif tok.text == "sel":
                stmt = Block((self.sel(),))
            elif tok.text == "hard":
                stmt = self.hard()
            elif tok.text == "crush":
                stmt = self.crush_stmt()
            else:
                raise ParseError(f"unknown keyword {tok.text!r}", tok.line, tok.col)
            statements.append(stmt)
            lines.append(tok.line)
        return PulseProgram(tuple(statements), tuple(lines))


def parse(text: str) -> PulseProgram:
    return _Parser(_tokenize(text)).program()


def _fmt_angle(value: float) -> str:
    out = repr(float(value))
    return out[:-2] if out.endswith(".0") else out


def pretty(program: PulseProgram) -> str:
    """Render a program back to source (inverse of parse up to layout)."""
    out = []
    for stmt in program.statements:
        if isinstance(stmt, Block):
            body = " ; ".join(
                f"sel {p.m} {p.k} {p.axis} {_fmt_angle(p.angle_deg)}" for p in stmt.pulses
            )
            out.append(f"block {{ {body} }}")
        elif isinstance(stmt, HardPulse):
            who = "all" if stmt.spin is None else str(stmt.spin)
            out.append(f"hard {who} {stmt.axis} {_fmt_angle(stmt.angle_deg)}")
        elif isinstance(stmt, Crush):
            word = _CRUSH_WORDS[stmt.mode]
            out.append("crush" if word == "ideal" else f"crush {word}")
        elif isinstance(stmt, UnitaryRef):
            raise InputError(f"unitary reference {stmt.name!r} has no textual form")
        else:
            raise InputError(f"unknown statement type {type(stmt).__name__}")
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# compilation

UNITARY_REGISTRY: dict[str, Callable[[SpinSystem], np.ndarray]] = {
    "walsh": lambda system: walsh(system.n_spins),
}


def register_unitary(name: str, factory: Callable[[SpinSystem], np.ndarray]) -> None:
    UNITARY_REGISTRY[str(name)] = factory


def _compile_block(stmt: Block, system: SpinSystem, where: str) -> np.ndarray:
    dim = system.dim
    pulses = []
    for p in stmt.pulses:
        if not (1 <= p.m <= dim and 1 <= p.k <= dim):
            raise CompileError(f"{where}: levels ({p.m}, {p.k}) out of range 1..{dim}")
        d = (p.m - 1) ^ (p.k - 1)
        if d == 0 or d & (d - 1):
            raise CompileError(
                f"{where}: transition ({p.m}, {p.k}) does not flip exactly one bit, "
                "not a resolvable line"
            )
        pulses.append(((p.m, p.k), p.axis, np.radians(p.angle_deg)))
    return expm_unitary(generator(pulses, system.n_spins))


def _compile_hard(stmt: HardPulse, system: SpinSystem, where: str) -> np.ndarray:
    n = system.n_spins
    if stmt.spin is not None and not 1 <= stmt.spin <= n:
        raise CompileError(f"{where}: spin {stmt.spin} out of range 1..{n}")
    spins = range(1, n + 1) if stmt.spin is None else (stmt.spin,)
    H = sum(spin_op(i, stmt.axis, n) for i in spins) * np.radians(stmt.angle_deg)
    return expm_unitary(H)


def compile(program: PulseProgram, system: SpinSystem) -> ChannelSequence:
    """Lower a program to an ordered list of unitaries and crusher events."""
    events = []
    for idx, stmt in enumerate(program.statements):
        line = program.line_of(idx)
        where = f"statement {idx + 1}" + (f" (line {line})" if line else "")
        if isinstance(stmt, Block):
            events.append(Unitary(_compile_block(stmt, system, where)))
        elif isinstance(stmt, HardPulse):
            events.append(Unitary(_compile_hard(stmt, system, where)))
        elif isinstance(stmt, Crush):
            events.append(CrushEvent(stmt.mode))
        elif isinstance(stmt, UnitaryRef):
            factory = UNITARY_REGISTRY.get(stmt.name)
            if factory is None:
                raise CompileError(f"{where}: unknown unitary {stmt.name!r}")
            op = np.asarray(factory(system), dtype=complex)
            if op.shape != (system.dim, system.dim) or not is_unitary(op):
                raise CompileError(f"{where}: registered operator {stmt.name!r} is not unitary")
            events.append(Unitary(op))
        else:
            raise CompileError(f"{where}: unknown statement type {type(stmt).__name__}")
    return ChannelSequence(tuple(events), system.dim)


def run(seq: ChannelSequence, rho0: np.ndarray) -> np.ndarray:
    """Fold a channel sequence over an initial matrix."""
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (seq.dim, seq.dim):
        raise InputError(f"state shape {rho.shape} does not match sequence dim {seq.dim}")
    for event in seq.events:
        if isinstance(event, Unitary):
            rho = evolve(rho, event.op)
        else:
            rho = crush(rho, event.mode)
    return rho
