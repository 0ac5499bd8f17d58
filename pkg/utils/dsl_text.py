"""
Parsing and printing of the textual model notation (.bsd files).

The grammar lives in ``model_grammar.lark``. Constructors are applied by a
transformer that runs inline with the LALR parser, so models are built bottom-up
while the text is read and nesting depth never recurses through Python frames
during parsing.
"""

import logging
import re
from functools import lru_cache
from typing import Any, List, NamedTuple, Optional

import lark
from lark.exceptions import LarkError, UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from models.errors import PlantSpaceError
from models.invariant import (
    FALSE, TRUE, And, BigAnd, ComponentState, Edge, Event, EventRelativeTime, FalseAtom,
    Implies, Invariant, Not, OccupyBox, OccupyCircle, OccupyPoint, Or, Owner, Prob,
    TimeInterval, TimePoint, TimeStamp, Transition, TrueAtom, normalize,
)
from models.temporal import SECONDS_PER_DAY, clock_fields, gmt_day_tick

logger = logging.getLogger(__name__)


class SourceSpan(NamedTuple):
    """1-based position of the offending text; ``length`` covers the offending token."""
    line: int
    column: int
    length: int


class ParseError(PlantSpaceError):
    """Raised by parse_model for any text that is not a well-formed model."""

    def __init__(self, span: SourceSpan, expected: str, found: str):
        self.span = span
        self.expected = expected or "a model term"
        self.found = found or "nothing"
        super().__init__(f"{span.line}:{span.column}: expected {self.expected}, found {self.found}")


# Values passed between transformer callbacks

class _Arg(NamedTuple):
    value: Any
    token: Optional[lark.Token]


class _ClockTick(int):
    """A tick written as TStandardGMTDay(h, m, s)."""


class _Nil:
    def __repr__(self):
        return "Nil"


NIL = _Nil()


class _BuildError(Exception):
    def __init__(self, token, expected, found):
        super().__init__(expected)
        self.token = token
        self.expected = expected
        self.found = found


# Constructor signatures: argument kinds and the builder

def _prob(p):
    return Prob(float(p))


def _clock(h, m, s):
    return _ClockTick(gmt_day_tick(h, m, s))


_SIGNATURES = {
    "AND": (("term", "term"), And),
    "OR": (("term", "term"), Or),
    "NOT": (("term",), Not),
    "IMPLIES": (("term", "term"), Implies),
    "BIGAND": (("list",), lambda terms: BigAnd(tuple(terms))),
    "TimePoint": (("tick",), TimePoint),
    "TimeInterval": (("tick", "tick"), TimeInterval),
    "TimeStamp": (("ert",), TimeStamp),
    "TERTP": (("str", "tick"), EventRelativeTime),
    "Event": (("str",), Event),
    "Owner": (("str",), Owner),
    "Prob": (("real",), _prob),
    "ComponentState": (("str",), ComponentState),
    "OccupyPoint": (("int", "int"), OccupyPoint),
    "OccupyBox": (("int", "int", "int", "int"), OccupyBox),
    "OccupyCircle": (("int", "int", "int"), OccupyCircle),
    "Edge": (("str", "str"), Edge),
    "Transition": (("str", "str", "str"), Transition),
    "TStandardGMTDay": (("int", "int", "int"), _clock),
}

_KIND_NAMES = {
    "term": "a model term",
    "tick": "a tick or TStandardGMTDay(...)",
    "int": "an integer",
    "real": "a number",
    "str": "a string",
    "ert": "TERTP(...)",
    "list": "a list [..] or a :: Nil list",
}


def _describe(value) -> str:
    if isinstance(value, _ClockTick):
        return "TStandardGMTDay(...)"
    if isinstance(value, int):
        return f"integer {value}"
    if isinstance(value, float):
        return f"number {value!r}"
    if isinstance(value, str):
        return f"string {_quote(value)}"
    if isinstance(value, EventRelativeTime):
        return "TERTP(...)"
    if isinstance(value, list) or value is NIL:
        return "a list"
    if isinstance(value, Invariant):
        return type(value).__name__
    return repr(value)


def _accepts(kind: str, value) -> bool:
    if kind == "term":
        return isinstance(value, Invariant)
    if kind == "tick":
        return isinstance(value, int)
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, _ClockTick)
    if kind == "real":
        return isinstance(value, (int, float)) and not isinstance(value, _ClockTick)
    if kind == "str":
        return isinstance(value, str)
    if kind == "ert":
        return isinstance(value, EventRelativeTime)
    if kind == "list":
        return isinstance(value, list) or value is NIL
    return False


def _unescape(token: lark.Token) -> str:
    body = token[1:-1]
    out = []
    i = 0
    while i < len(body):
        char = body[i]
        if char == "\\":
            following = body[i + 1] if i + 1 < len(body) else ""
            if following not in ('"', "\\"):
                raise _BuildError(token, "an escape \\\" or \\\\", f"\\{following}")
            out.append(following)
            i += 2
        else:
            out.append(char)
            i += 1
    return "".join(out)


def _plain(value):
    if value is NIL:
        return []
    if isinstance(value, _ClockTick):
        return int(value)
    return value


_INTEGER = re.compile(r"^-?[0-9]+$")


@lark.v_args(inline=True)
class _ModelBuilder(lark.Transformer):
    """Applies constructors as the parser reduces each rule."""

    def number(self, token):
        if _INTEGER.match(token):
            return _Arg(int(token), token)
        return _Arg(float(token), token)

    def string(self, token):
        return _Arg(_unescape(token), token)

    def bare(self, token):
        if token == "TRUE":
            return _Arg(TRUE, token)
        if token == "FALSE":
            return _Arg(FALSE, token)
        if token == "Nil":
            return _Arg(NIL, token)
        raise _BuildError(token, "TRUE, FALSE or a constructor call", str(token))

    def arglist(self, *args):
        return list(args)

    def items(self, *args):
        return list(args)

    def seq(self, items=None):
        items = items or []
        for item in items:
            if not isinstance(item.value, Invariant):
                raise _BuildError(item.token, "a model term in the list", _describe(item.value))
        return _Arg([item.value for item in items], items[0].token if items else None)

    def cons(self, *args):
        *heads, last = args
        if last.value is not NIL:
            raise _BuildError(last.token, "Nil at the end of a :: list", _describe(last.value))
        for head in heads:
            if not isinstance(head.value, Invariant):
                raise _BuildError(head.token, "a model term in the list", _describe(head.value))
        return _Arg([head.value for head in heads], heads[0].token)

    def call(self, name, arglist=None):
        args = arglist or []
        signature = _SIGNATURES.get(str(name))
        if signature is None:
            raise _BuildError(name, "a constructor name", str(name))
        kinds, build = signature
        if len(args) != len(kinds):
            raise _BuildError(name, f"{len(kinds)} argument(s) for {name}", f"{len(args)} argument(s)")
        for position, (kind, arg) in enumerate(zip(kinds, args), start=1):
            if not _accepts(kind, arg.value):
                raise _BuildError(arg.token or name, f"{_KIND_NAMES[kind]} as argument {position} of {name}",
                                  _describe(arg.value))
        values = [_plain(arg.value) for arg in args]
        try:
            return _Arg(build(*values), name)
        except ValueError as exc:
            raise _BuildError(name, f"valid arguments for {name}", str(exc)) from exc


@lru_cache(maxsize=None)
def _parser() -> lark.Lark:
    """Create/retrieve the singleton LALR parser with the inline model builder."""
    return lark.Lark.open(
        "model_grammar.lark",
        rel_to=__file__,
        parser="lalr",
        transformer=_ModelBuilder(),
        maybe_placeholders=True,
    )


# Error spans

def _span(src: str, line, column, length) -> SourceSpan:
    """Clamp a position into the bounds of ``src``."""
    lines = src.split("\n")
    line = min(max(line or 1, 1), len(lines))
    width = len(lines[line - 1])
    column = min(max(column or 1, 1), width + 1)
    length = max(0, min(length or 0, width + 1 - column))
    return SourceSpan(line, column, length)


def _end_span(src: str) -> SourceSpan:
    lines = src.split("\n")
    return _span(src, len(lines), len(lines[-1]) + 1, 0)


def _token_span(src: str, token) -> SourceSpan:
    if token is None or getattr(token, "line", None) is None:
        return _end_span(src)
    return _span(src, token.line, token.column, len(str(token)))


_TERMINAL_NAMES = {
    "LPAR": "'('",
    "RPAR": "')'",
    "COMMA": "','",
    "LSQB": "'['",
    "RSQB": "']'",
    "_CONS": "'::'",
    "NAME": "a name",
    "NUMBER": "a number",
    "STRING": "a string",
    "$END": "end of input",
}


def _expected(names) -> str:
    labels = sorted({_TERMINAL_NAMES.get(name, name.lower()) for name in names})
    return " or ".join(labels) if labels else "a model term"


def _from_lark(src: str, exc: LarkError) -> ParseError:
    if isinstance(exc, UnexpectedToken):
        token = exc.token
        if token.type == "$END":
            return ParseError(_end_span(src), _expected(exc.expected), "end of input")
        return ParseError(_token_span(src, token), _expected(exc.expected), repr(str(token)))
    if isinstance(exc, UnexpectedCharacters):
        return ParseError(_span(src, exc.line, exc.column, 1), _expected(exc.allowed or ()),
                          repr(exc.char))
    if isinstance(exc, UnexpectedInput):
        return ParseError(_end_span(src), _expected(getattr(exc, "expected", ()) or ()), "end of input")
    return ParseError(_end_span(src), "a model term", str(exc) or type(exc).__name__)


def parse_model(src: str) -> Invariant:
    """
    Parse model text into a normalized Invariant.

    Args:
        src (str): Model text in constructor-call notation

    Returns:
        Invariant: The normalized model

    Raises:
        ParseError: On any malformed input; no other exception escapes
    """
    try:
        result = _parser().parse(src)
        if not isinstance(result.value, Invariant):
            raise _BuildError(result.token, "a model term", _describe(result.value))
        return normalize(result.value)
    except _BuildError as exc:
        raise ParseError(_token_span(src, exc.token), exc.expected, exc.found) from None
    except VisitError as exc:
        inner = exc.orig_exc
        if isinstance(inner, _BuildError):
            raise ParseError(_token_span(src, inner.token), inner.expected, inner.found) from None
        raise ParseError(_end_span(src), "a model term", str(inner) or type(inner).__name__) from None
    except LarkError as exc:
        raise _from_lark(src, exc) from None
    except RecursionError:
        raise ParseError(_span(src, 1, 1, 0), "a model term", "nesting too deep") from None


# Printing

def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _tick(t: int, clock: bool) -> str:
    if clock and 0 <= t < SECONDS_PER_DAY:
        hours, minutes, seconds = clock_fields(t)
        return f"TStandardGMTDay({hours:02d}, {minutes:02d}, {seconds:02d})"
    return str(t)


def _atom_text(a, clock: bool) -> str:
    if isinstance(a, TrueAtom):
        return "TRUE"
    if isinstance(a, FalseAtom):
        return "FALSE"
    if isinstance(a, TimePoint):
        return f"TimePoint({_tick(a.t, clock)})"
    if isinstance(a, TimeInterval):
        return f"TimeInterval({_tick(a.start, clock)}, {_tick(a.end, clock)})"
    if isinstance(a, TimeStamp):
        return f"TimeStamp(TERTP({_quote(a.ert.event)}, {a.ert.offset}))"
    if isinstance(a, Prob):
        return f"Prob({float(a.p)!r})"
    if isinstance(a, (Event, Owner)):
        return f"{type(a).__name__}({_quote(a.name)})"
    if isinstance(a, ComponentState):
        return f"ComponentState({_quote(a.state)})"
    if isinstance(a, OccupyPoint):
        return f"OccupyPoint({a.x}, {a.y})"
    if isinstance(a, OccupyBox):
        return f"OccupyBox({a.x1}, {a.y1}, {a.x2}, {a.y2})"
    if isinstance(a, OccupyCircle):
        return f"OccupyCircle({a.cx}, {a.cy}, {a.radius})"
    if isinstance(a, Edge):
        return f"Edge({_quote(a.source)}, {_quote(a.target)})"
    if isinstance(a, Transition):
        return f"Transition({_quote(a.source)}, {_quote(a.event)}, {_quote(a.target)})"
    raise TypeError(f"not an atom: {a!r}")


_CONNECTIVES = {And: "AND", Or: "OR", Implies: "IMPLIES"}


def _block(opening: str, parts: List[List[str]], closing: str) -> List[str]:
    lines = [opening]
    for i, part in enumerate(parts):
        indented = ["  " + line for line in part]
        if i < len(parts) - 1:
            indented[-1] += ","
        lines.extend(indented)
    lines.append(closing)
    return lines


def _lines(m: Invariant, clock: bool) -> List[str]:
    if isinstance(m, BigAnd):
        if not m.terms:
            return ["BIGAND([])"]
        return _block("BIGAND([", [_lines(t, clock) for t in m.terms], "])")
    if isinstance(m, Not):
        return _block("NOT(", [_lines(m.term, clock)], ")")
    if isinstance(m, (And, Or)):
        return _block(f"{_CONNECTIVES[type(m)]}(", [_lines(m.left, clock), _lines(m.right, clock)], ")")
    if isinstance(m, Implies):
        return _block("IMPLIES(", [_lines(m.antecedent, clock), _lines(m.consequent, clock)], ")")
    return [_atom_text(m, clock)]


def print_model(m: Invariant, clock: bool = False) -> str:
    """
    Render ``m`` as canonical text that parse_model reads back.

    Atoms stay on one line, connectives open one indented line per operand
    (two spaces per level). With ``clock=True`` ticks within one GMT day print
    as TStandardGMTDay(hh, mm, ss).
    """
    return "\n".join(_lines(m, clock))
