"""Dense tensors over a moving frame with exact components.

A :class:`FrameTensor` carries a variance string, one character per slot
(``"u"`` contravariant, ``"d"`` covariant), and a numpy object array of
:class:`~riccilike.exprring.ScalarExpr`.  Covariant derivatives *prepend* the
direction slot: ``covariant_derivative(T)[i, ...]`` is ``(nabla_{e_i} T)[...]``.

Conventions used across the package::

    nabla_{e_i} e_j       = gamma[i, j, k] e_k
    [e_i, e_j]            = c[i][j][k] e_k
    R(x, y) z             = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z
    R13[l, i, j, k]       = (R(e_i, e_j) e_k)^l
    R04[i, j, k, l]       = g(R(e_i, e_j) e_k, e_l)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .exprring import ScalarExpr, SymbolTable, as_expr
from .ratlinalg import inverse


def _zeros(shape: tuple[int, ...], table: SymbolTable) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    zero = ScalarExpr.zero(table)
    for idx in np.ndindex(shape):
        out[idx] = zero
    return out


class FrameTensor:
    """Immutable dense tensor; ``components[idx]`` is a ScalarExpr."""

    __slots__ = ("variance", "components", "table")

    def __init__(self, variance: str, components: np.ndarray, table: SymbolTable):
        if set(variance) - {"u", "d"}:
            raise ValueError(f"bad variance string {variance!r}")
        components = np.asarray(components, dtype=object)
        if components.ndim != len(variance):
            raise ValueError("component array rank does not match variance")
        if len(set(components.shape)) > 1:
            raise ValueError("all slots must have the frame dimension")
        self.variance = variance
        self.components = components
        self.table = table

    @classmethod
    def zeros(cls, variance: str, dim: int, table: SymbolTable) -> FrameTensor:
        return cls(variance, _zeros((dim,) * len(variance), table), table)

    @classmethod
    def from_function(cls, variance: str, dim: int, table: SymbolTable, fn: Callable) -> FrameTensor:
        out = np.empty((dim,) * len(variance), dtype=object)
        for idx in np.ndindex(out.shape):
            out[idx] = as_expr(table, fn(*idx))
        return cls(variance, out, table)

    @classmethod
    def from_array(cls, variance: str, values, table: SymbolTable) -> FrameTensor:
        arr = np.asarray(values, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        for idx in np.ndindex(arr.shape):
            out[idx] = as_expr(table, arr[idx])
        return cls(variance, out, table)

    @classmethod
    def scalar(cls, value: ScalarExpr) -> FrameTensor:
        arr = np.empty((), dtype=object)
        arr[()] = value
        return cls("", arr, value.table)

    # shape --------------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def dim(self) -> int:
        return self.components.shape[0] if self.rank else 0

    @property
    def shape(self) -> tuple[int, ...]:
        return self.components.shape

    def __getitem__(self, idx) -> ScalarExpr:
        return self.components[idx]

    def value(self) -> ScalarExpr:
        if self.rank:
            raise ValueError("not a scalar")
        return self.components[()]

    # algebra ------------------------------------------------------------

    def _check(self, other: FrameTensor):
        if self.variance != other.variance or self.shape != other.shape:
            raise ValueError(f"incompatible tensors {self.variance} vs {other.variance}")

    def __add__(self, other: FrameTensor) -> FrameTensor:
        self._check(other)
        return FrameTensor(self.variance, self.components + other.components, self.table)

    def __sub__(self, other: FrameTensor) -> FrameTensor:
        self._check(other)
        return FrameTensor(self.variance, self.components - other.components, self.table)

    def __neg__(self) -> FrameTensor:
        return FrameTensor(self.variance, -self.components, self.table)

    def __mul__(self, k) -> FrameTensor:
        if isinstance(k, FrameTensor):
            return NotImplemented
        k = as_expr(self.table, k)
        return self.map(lambda c: c * k)

    __rmul__ = __mul__

    def map(self, fn: Callable[[ScalarExpr], ScalarExpr]) -> FrameTensor:
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(self.shape):
            out[idx] = fn(self.components[idx])
        return FrameTensor(self.variance, out, self.table)

    def tensor(self, other: FrameTensor) -> FrameTensor:
        out = np.empty(self.shape + other.shape, dtype=object)
        for a in np.ndindex(self.shape):
            for b in np.ndindex(other.shape):
                out[a + b] = self.components[a] * other.components[b]
        return FrameTensor(self.variance + other.variance, out, self.table)

    def permute(self, order: Sequence[int]) -> FrameTensor:
        """New tensor whose slot ``k`` is this tensor's slot ``order[k]``."""
        order = list(order)
        return FrameTensor(
            "".join(self.variance[o] for o in order),
            np.transpose(self.components, order),
            self.table,
        )

    def insert(self, slot: int, vector: FrameTensor) -> FrameTensor:
        """Feed a vector (into a covariant slot) or covector (contravariant slot)."""
        want = "u" if self.variance[slot] == "d" else "d"
        if vector.variance != want:
            raise ValueError(f"slot {slot} needs a rank-1 tensor of variance {want!r}")
        moved = np.moveaxis(self.components, slot, 0)
        acc = _zeros(moved.shape[1:], self.table)
        for m in range(self.dim):
            w = vector.components[m]
            if w:
                acc = acc + moved[m] * w
        return FrameTensor(self.variance[:slot] + self.variance[slot + 1 :], acc, self.table)

    # inspection ---------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components.flat)

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.components.flat)

    def nonzero_items(self) -> Iterator[tuple[tuple[int, ...], ScalarExpr]]:
        for idx in np.ndindex(self.shape):
            c = self.components[idx]
            if not c.is_zero():
                yield idx, c

    def worst_component(self) -> tuple[tuple[int, ...], ScalarExpr] | None:
        """Nonzero component of maximal total degree (first in index order)."""
        best = None
        for idx, c in self.nonzero_items():
            if best is None or c.degree() > best[1].degree():
                best = (idx, c)
        return best

    def is_symmetric(self, a: int = 0, b: int = 1) -> bool:
        order = list(range(self.rank))
        order[a], order[b] = order[b], order[a]
        return (self - self.permute(order)).is_zero()

    def evaluate(self, point) -> np.ndarray:
        out = np.empty(self.shape, dtype=float)
        for idx in np.ndindex(self.shape):
            out[idx] = self.components[idx].evaluate(point)
        return out

    def __eq__(self, other):
        if not isinstance(other, FrameTensor):
            return NotImplemented
        return (
            self.variance == other.variance
            and self.shape == other.shape
            and all(a == b for a, b in zip(self.components.flat, other.components.flat))
        )

    __hash__ = None

    def format(self, name: str = "T") -> list[str]:
        """``T[i,j,...] = expr`` lines, zeros omitted, index order."""
        lines = []
        for idx, c in self.nonzero_items():
            lines.append(f"{name}[{','.join(str(i) for i in idx)}] = {c}")
        return lines

    def __repr__(self):
        body = "; ".join(self.format("T")) or "0"
        return f"FrameTensor({self.variance!r}, {body})"


@dataclass(frozen=True)
class MetricData:
    """Constant rational frame components of a metric and its inverse."""

    G: tuple[tuple[Fraction, ...], ...]
    Ginv: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence]) -> MetricData:
        G = tuple(tuple(Fraction(x) for x in row) for row in rows)
        n = len(G)
        if any(len(row) != n for row in G):
            raise ValueError("metric matrix is not square")
        for i, j in itertools.product(range(n), repeat=2):
            if G[i][j] != G[j][i]:
                raise ValueError(f"metric is not symmetric at ({i},{j})")
        Ginv = tuple(tuple(row) for row in inverse(G))
        return cls(G, Ginv)

    @property
    def dim(self) -> int:
        return len(self.G)

    def tensor(self, table: SymbolTable) -> FrameTensor:
        return FrameTensor.from_array("dd", self.G, table)

    def inverse_tensor(self, table: SymbolTable) -> FrameTensor:
        return FrameTensor.from_array("uu", self.Ginv, table)

    def lower(self, vector: FrameTensor) -> FrameTensor:
        return self.tensor(vector.table).insert(0, vector)

    def raise_index(self, covector: FrameTensor) -> FrameTensor:
        return self.inverse_tensor(covector.table).insert(0, covector)

    def inner(self, x: FrameTensor, y: FrameTensor) -> ScalarExpr:
        return self.tensor(x.table).insert(0, x).insert(0, y).value()


class Frame:
    """A frame ``e_1..e_N`` given by structure constants and an optional
    coordinate realization ``e_i = A[i][a] d/dx^a``."""

    def __init__(
        self,
        table: SymbolTable,
        structure_constants: Sequence,
        realization: Sequence[Sequence[ScalarExpr]] | None = None,
    ):
        self.table = table
        self.c = tuple(
            tuple(tuple(Fraction(x) for x in row) for row in plane) for plane in structure_constants
        )
        self.realization = (
            None if realization is None else tuple(tuple(as_expr(table, a) for a in row) for row in realization)
        )
        self._cache: dict[tuple[int, ScalarExpr], ScalarExpr] = {}

    @property
    def dim(self) -> int:
        return len(self.c)

    def derive(self, i: int, f: ScalarExpr) -> ScalarExpr:
        """Frame derivation ``e_i(f)``."""
        key = (i, f)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if f.is_constant():
            out = ScalarExpr.zero(self.table)
        elif self.realization is None:
            raise ValueError(
                "non-constant scalar on a frame without coordinate realization"
            )
        else:
            out = ScalarExpr.zero(self.table)
            for a, coeff in enumerate(self.realization[i]):
                if coeff:
                    out = out + coeff * f.partial(a)
        self._cache[key] = out
        return out

    def derivative_form(self, f: ScalarExpr) -> FrameTensor:
        """``df`` as a covector: components ``e_i(f)``."""
        return FrameTensor.from_function("d", self.dim, self.table, lambda i: self.derive(i, f))

    def bracket(self, x: FrameTensor, y: FrameTensor) -> FrameTensor:
        """Lie bracket of two vector fields, computed from the frame data only."""
        dim = self.dim

        def comp(k):
            val = ScalarExpr.zero(self.table)
            for i in range(dim):
                if x[i]:
                    val = val + x[i] * self.derive(i, y[k])
                if y[i]:
                    val = val - y[i] * self.derive(i, x[k])
            for i, j in itertools.product(range(dim), repeat=2):
                if self.c[i][j][k] and x[i] and y[j]:
                    val = val + x[i] * y[j] * self.c[i][j][k]
            return val

        return FrameTensor.from_function("u", dim, self.table, comp)

    def basis_vector(self, i: int) -> FrameTensor:
        return FrameTensor.from_function("u", self.dim, self.table, lambda k: int(k == i))


@dataclass(frozen=True)
class Connection:
    """Connection coefficients in a frame, ``nabla_{e_i} e_j = gamma[i,j,k] e_k``."""

    gamma: np.ndarray = field(compare=False)
    frame: Frame = field(compare=False)

    @property
    def dim(self) -> int:
        return self.frame.dim

    def nabla(self, x: FrameTensor, y: FrameTensor) -> FrameTensor:
        """``nabla_x y`` for vector fields."""
        return covariant_derivative(y, self).insert(0, x)


def contract(t: FrameTensor, slot_a: int, slot_b: int, metric: MetricData | None = None) -> FrameTensor:
    """Trace over two slots; two covariant (or two contravariant) slots use the metric."""
    if slot_a == slot_b or not (0 <= slot_a < t.rank and 0 <= slot_b < t.rank):
        raise IndexError(f"invalid contraction slots ({slot_a}, {slot_b}) for rank {t.rank}")
    va, vb = t.variance[slot_a], t.variance[slot_b]
    dim = t.dim
    if va != vb:
        weights = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    else:
        if metric is None:
            raise ValueError("a metric is required to contract two slots of equal variance")
        weights = metric.Ginv if va == "d" else metric.G
    moved = np.moveaxis(t.components, (slot_a, slot_b), (0, 1))
    acc = _zeros(moved.shape[2:], t.table)
    for i in range(dim):
        for j in range(dim):
            w = weights[i][j]
            if w:
                acc = acc + moved[i, j] * w
    rest = "".join(v for k, v in enumerate(t.variance) if k not in (slot_a, slot_b))
    return FrameTensor(rest, acc, t.table)


def covariant_derivative(t: FrameTensor, conn: Connection) -> FrameTensor:
    """Rank-raising covariant derivative; the new (covariant) slot comes first."""
    frame = conn.frame
    gamma = conn.gamma
    dim = frame.dim
    comps = t.components
    out = np.empty((dim,) + t.shape, dtype=object)
    for i in range(dim):
        for idx in np.ndindex(t.shape):
            val = frame.derive(i, comps[idx])
            for slot, var in enumerate(t.variance):
                for m in range(dim):
                    if var == "u":
                        g = gamma[i, m, idx[slot]]
                        if g:
                            other = comps[idx[:slot] + (m,) + idx[slot + 1 :]]
                            if other:
                                val = val + g * other
                    else:
                        g = gamma[i, idx[slot], m]
                        if g:
                            other = comps[idx[:slot] + (m,) + idx[slot + 1 :]]
                            if other:
                                val = val - g * other
            out[(i,) + idx] = val
    return FrameTensor("d" + t.variance, out, t.table)


def lie_derivative(t: FrameTensor, v: FrameTensor, conn: Connection) -> FrameTensor:
    """Lie derivative of any tensor along ``v`` for a torsion-free connection.

    ``L_v T = nabla_v T - sum_up T(.., nabla v, ..) + sum_down T(.., nabla_. v, ..)``.
    """
    if v.variance != "u":
        raise ValueError("potential must be a vector field")
    dt = covariant_derivative(t, conn)
    dv = covariant_derivative(v, conn).components  # dv[j, k] = (nabla_{e_j} v)^k
    comps = t.components
    out = dt.insert(0, v).components.copy()
    dim = t.dim
    for idx in np.ndindex(t.shape):
        val = out[idx]
        for slot, var in enumerate(t.variance):
            for m in range(dim):
                other = comps[idx[:slot] + (m,) + idx[slot + 1 :]]
                if not other:
                    continue
                if var == "u":
                    w = dv[m, idx[slot]]
                    if w:
                        val = val - other * w
                else:
                    w = dv[idx[slot], m]
                    if w:
                        val = val + other * w
        out[idx] = val
    return FrameTensor(t.variance, out, t.table)


def lie_derivative_metric(v: FrameTensor, conn: Connection, metric: MetricData) -> FrameTensor:
    """``(L_v g)(x, y) = g(nabla_x v, y) + g(x, nabla_y v)``."""
    if v.variance != "u":
        raise ValueError("potential must be a vector field")
    dv = covariant_derivative(v, conn).components
    G = metric.G
    dim = conn.dim

    def comp(i, j):
        val = ScalarExpr.zero(v.table)
        for k in range(dim):
            if G[j][k]:
                val = val + dv[i, k] * G[j][k]
            if G[i][k]:
                val = val + dv[j, k] * G[i][k]
        return val

    return FrameTensor.from_function("dd", dim, v.table, comp)


def lie_derivative_sym2(T: FrameTensor, v: FrameTensor, conn: Connection) -> FrameTensor:
    """``(L_v T)(x, y) = (nabla_v T)(x, y) + T(nabla_x v, y) + T(x, nabla_y v)``."""
    if T.variance != "dd":
        raise ValueError("expected a covariant 2-tensor")
    if v.variance != "u":
        raise ValueError("potential must be a vector field")
    nabla_v_T = covariant_derivative(T, conn).insert(0, v)
    dv = covariant_derivative(v, conn).components
    dim = conn.dim

    def comp(i, j):
        val = nabla_v_T[i, j]
        for m in range(dim):
            if dv[i, m] and T[m, j]:
                val = val + dv[i, m] * T[m, j]
            if dv[j, m] and T[i, m]:
                val = val + dv[j, m] * T[i, m]
        return val

    return FrameTensor.from_function("dd", dim, T.table, comp)


def lie_derivative_connection(v: FrameTensor, conn: Connection, R13: FrameTensor) -> FrameTensor:
    """``(L_v nabla)(x, y) = nabla_x nabla_y v - nabla_{nabla_x y} v + R(v, x) y``.

    Returned with variance ``"ddu"``: ``out[i, j, k] = ((L_v nabla)(e_i, e_j))^k``.
    """
    second = covariant_derivative(covariant_derivative(v, conn), conn)  # [i, j, k]
    r_v = R13.insert(1, v)  # [k, i, j] = (R(v, e_i) e_j)^k
    return second + r_v.permute([1, 2, 0])
