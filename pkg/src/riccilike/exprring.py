"""Exact scalar arithmetic for frame components.

Elements are polynomials over Q in coordinate symbols ``x1 .. xm`` and in
circular pairs ``(sin_k, cos_k)`` bound to a coordinate, taken modulo
``sin_k^2 + cos_k^2 - 1``.  The stored representative never contains
``sin_k`` to a power above one, so two ring elements are equal exactly when
their term dictionaries are equal.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

Monomial = tuple[int, ...]
Number = Union[int, Fraction]


class SymbolTableMismatch(ValueError):
    """Raised when two expressions over different symbol tables are combined."""


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int | None = None):
        where = f" at column {pos + 1}" if pos is not None else ""
        detail = f" in {text!r}" if text else ""
        super().__init__(f"{message}{where}{detail}")
        self.pos = pos


@dataclass(frozen=True)
class SymbolTable:
    """Ordered coordinate symbols plus circular pairs.

    ``circular_pairs`` holds ``(sin_name, cos_name, coordinate_index)``.
    Symbol indices: coordinates first, then ``sin, cos`` for each pair.
    """

    coordinates: tuple[str, ...] = ()
    circular_pairs: tuple[tuple[str, str, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(
            self, "circular_pairs", tuple(tuple(p) for p in self.circular_pairs)
        )
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in {names}")
        bound = set()
        for sin_name, cos_name, k in self.circular_pairs:
            if not 0 <= k < len(self.coordinates):
                raise ValueError(f"circular pair ({sin_name}, {cos_name}) bound to invalid coordinate {k}")
            if k in bound:
                raise ValueError(f"coordinate {self.coordinates[k]} carries more than one circular pair")
            bound.add(k)
        for name in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                raise ValueError(f"invalid symbol name {name!r}")

    @property
    def names(self) -> tuple[str, ...]:
        out = list(self.coordinates)
        for sin_name, cos_name, _ in self.circular_pairs:
            out += [sin_name, cos_name]
        return tuple(out)

    @property
    def size(self) -> int:
        return len(self.coordinates) + 2 * len(self.circular_pairs)

    @property
    def n_coordinates(self) -> int:
        return len(self.coordinates)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown symbol {name!r}") from None

    def coordinate_index(self, coord: int | str) -> int:
        if isinstance(coord, str):
            try:
                return self.coordinates.index(coord)
            except ValueError:
                raise KeyError(f"unknown coordinate {coord!r}") from None
        if not 0 <= coord < len(self.coordinates):
            raise IndexError(f"coordinate index {coord} out of range")
        return coord

    def _sin_positions(self) -> tuple[int, ...]:
        m = len(self.coordinates)
        return tuple(m + 2 * p for p in range(len(self.circular_pairs)))


@lru_cache(maxsize=None)
def _reduce_monomial(mono: Monomial, sin_positions: tuple[int, ...]) -> tuple[tuple[Monomial, int], ...]:
    """Rewrite ``sin^e`` as ``sin^(e mod 2) * (1 - cos^2)^(e // 2)`` for every pair."""
    expansions: list[tuple[list[int], int]] = [(list(mono), 1)]
    for s in sin_positions:
        e = mono[s]
        if e < 2:
            continue
        half, rest = divmod(e, 2)
        nxt = []
        for exps, coeff in expansions:
            for j in range(half + 1):
                new = list(exps)
                new[s] = rest
                new[s + 1] += 2 * j
                nxt.append((new, coeff * math.comb(half, j) * (-1) ** j))
        expansions = nxt
    return tuple((tuple(e), c) for e, c in expansions)


def _coerce_number(value) -> Fraction:
    if isinstance(value, bool):
        raise TypeError("booleans are not ring elements")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} in exact arithmetic")


class ScalarExpr:
    """Immutable element of Q[x, sin, cos] / (sin^2 + cos^2 - 1)."""

    __slots__ = ("table", "terms", "_hash")

    def __init__(self, table: SymbolTable, terms: Mapping[Monomial, Fraction] | None = None):
        # terms must already be canonical; use _from_raw otherwise
        self.table = table
        self.terms: dict[Monomial, Fraction] = dict(terms) if terms else {}
        self._hash = None

    # construction -------------------------------------------------------

    @classmethod
    def _from_raw(cls, table: SymbolTable, raw: Iterable[tuple[Monomial, Fraction]]) -> ScalarExpr:
        sin_pos = table._sin_positions()
        acc: dict[Monomial, Fraction] = {}
        for mono, coeff in raw:
            if not coeff:
                continue
            if any(mono[s] >= 2 for s in sin_pos):
                for red, c in _reduce_monomial(mono, sin_pos):
                    acc[red] = acc.get(red, 0) + coeff * c
            else:
                acc[mono] = acc.get(mono, 0) + coeff
        return cls(table, {m: Fraction(c) for m, c in acc.items() if c})

    @classmethod
    def constant(cls, table: SymbolTable, value: Number) -> ScalarExpr:
        value = _coerce_number(value)
        if not value:
            return cls(table)
        return cls(table, {(0,) * table.size: value})

    @classmethod
    def zero(cls, table: SymbolTable) -> ScalarExpr:
        return cls(table)

    @classmethod
    def symbol(cls, table: SymbolTable, name: str) -> ScalarExpr:
        idx = table.index(name)
        mono = [0] * table.size
        mono[idx] = 1
        return cls(table, {tuple(mono): Fraction(1)})

    # arithmetic ---------------------------------------------------------

    def _lift(self, other) -> ScalarExpr:
        if isinstance(other, ScalarExpr):
            if other.table is not self.table and other.table != self.table:
                raise SymbolTableMismatch("operands are over different symbol tables")
            return other
        return ScalarExpr.constant(self.table, _coerce_number(other))

    def __add__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        acc = dict(self.terms)
        for m, c in other.terms.items():
            v = acc.get(m, 0) + c
            if v:
                acc[m] = v
            else:
                acc.pop(m, None)
        return ScalarExpr(self.table, acc)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr(self.table, {m: -c for m, c in self.terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return ScalarExpr(self.table)
            return ScalarExpr(self.table, {m: c * other for m, c in self.terms.items()})
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        if not self.terms or not other.terms:
            return ScalarExpr(self.table)
        raw = []
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                raw.append((tuple(a + b for a, b in zip(m1, m2)), c1 * c2))
        return ScalarExpr._from_raw(self.table, raw)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScalarExpr):
            if not other.is_constant():
                raise ZeroDivisionError("division only by nonzero constants")
            other = other.constant_value()
        other = _coerce_number(other)
        if not other:
            raise ZeroDivisionError("division by zero")
        return self * (1 / other)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = ScalarExpr.constant(self.table, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # comparison ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, ScalarExpr):
            return self.table == other.table and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return not self.terms
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            if self.is_constant():
                self._hash = hash(self.constant_value())
            else:
                self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        zero = (0,) * self.table.size
        return all(m == zero for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"expression {self} is not constant")
        return next(iter(self.terms.values()))

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def circular_degree(self) -> int:
        m0 = self.table.n_coordinates
        return max((sum(m[m0:]) for m in self.terms), default=0)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms, reverse=True)

    # calculus -----------------------------------------------------------

    def partial(self, coord: int | str) -> ScalarExpr:
        """Partial derivative with respect to one coordinate."""
        k = self.table.coordinate_index(coord)
        m0 = self.table.n_coordinates
        pair_slots = [
            m0 + 2 * p for p, (_, _, bound) in enumerate(self.table.circular_pairs) if bound == k
        ]
        raw = []
        for mono, coeff in self.terms.items():
            e = mono[k]
            if e:
                new = list(mono)
                new[k] -= 1
                raw.append((tuple(new), coeff * e))
            for s in pair_slots:
                a, b = mono[s], mono[s + 1]
                if a:  # d sin = cos
                    new = list(mono)
                    new[s] -= 1
                    new[s + 1] += 1
                    raw.append((tuple(new), coeff * a))
                if b:  # d cos = -sin
                    new = list(mono)
                    new[s] += 1
                    new[s + 1] -= 1
                    raw.append((tuple(new), -coeff * b))
        return ScalarExpr._from_raw(self.table, raw)

    def evaluate(self, point: Mapping[str | int, float]) -> float:
        table = self.table
        values = []
        for idx, name in enumerate(table.coordinates):
            if name in point:
                values.append(float(point[name]))
            elif idx in point:
                values.append(float(point[idx]))
            else:
                if not self.terms or self._uses_coordinate(idx):
                    raise ValueError(f"coordinate {name!r} is not assigned")
                values.append(0.0)
        for _, _, k in table.circular_pairs:
            values += [math.sin(values[k]), math.cos(values[k])]
        total = 0.0
        for mono, coeff in self.terms.items():
            term = float(coeff)
            for v, e in zip(values, mono):
                if e:
                    term *= v**e
            total += term
        return total

    def _uses_coordinate(self, k: int) -> bool:
        m0 = self.table.n_coordinates
        slots = [k] + [
            m0 + 2 * p + j
            for p, (_, _, bound) in enumerate(self.table.circular_pairs)
            if bound == k
            for j in (0, 1)
        ]
        return any(mono[s] for mono in self.terms for s in slots)

    # text ---------------------------------------------------------------

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        names = self.table.names
        parts = []
        for mono in self.monomials():
            coeff = self.terms[mono]
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono) if e]
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{mag}*" + "*".join(factors)
            parts.append(("-" if coeff < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    __str__ = to_string

    def __repr__(self):
        return f"ScalarExpr({self.to_string()!r})"


def as_expr(table: SymbolTable, value) -> ScalarExpr:
    if isinstance(value, ScalarExpr):
        if value.table != table:
            raise SymbolTableMismatch("expression belongs to a different symbol table")
        return value
    return ScalarExpr.constant(table, value)


# parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ExprSyntaxError(f"unexpected character {ch!r}", text, m.start(3))
            tokens.append(("op", ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, table: SymbolTable, params: Mapping[str, Number]):
        self.text = text
        self.table = table
        self.params = params
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ExprSyntaxError(f"expected {value!r}", self.text, tok[2])

    def parse(self) -> ScalarExpr:
        if self.peek()[0] == "end":
            raise ExprSyntaxError("empty expression", self.text, 0)
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", self.text, tok[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            e = e + t if op == "+" else e - t
        return e

    def term(self):
        e = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()
            f = self.factor()
            if op[1] == "*":
                e = e * f
            else:
                if not f.is_constant() or f.is_zero():
                    raise ExprSyntaxError("division only by nonzero constants", self.text, op[2])
                e = e / f
        return e

    def factor(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise ExprSyntaxError("exponent must be a non-negative integer", self.text, tok[2])
            base = base ** int(tok[1])
        return base

    def atom(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "int":
            return ScalarExpr.constant(self.table, int(value))
        if kind == "name":
            if value in self.params:
                return ScalarExpr.constant(self.table, _coerce_number(self.params[value]))
            if value in self.table.names:
                return ScalarExpr.symbol(self.table, value)
            raise ExprSyntaxError(f"unknown symbol {value!r}", self.text, pos)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"unexpected token {value!r}" if value else "unexpected end", self.text, pos)


def parse_expr(text: str, table: SymbolTable, params: Mapping[str, Number] | None = None) -> ScalarExpr:
    """Parse expression text over ``table``; ``params`` names map to rationals."""
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return ScalarExpr.constant(table, text)
    return _Parser(str(text), table, params or {}).parse()


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        raise ValueError(f"floating-point value {text!r} is not exact; write it as 'p/q'")
    return Fraction(str(text).strip())
