"""Small dense linear algebra over Q (fractions.Fraction)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def inverse(matrix: Sequence[Sequence]) -> Matrix:
    """Gauss-Jordan inverse; raises ZeroDivisionError for singular input."""
    a = to_fraction_matrix(matrix)
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not square")
    inv = identity(n)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            raise ZeroDivisionError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return inv


def determinant(matrix: Sequence[Sequence]) -> Fraction:
    a = to_fraction_matrix(matrix)
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def inertia(matrix: Sequence[Sequence]) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric rational matrix.

    Exact congruence diagonalisation; Sylvester's law makes the counts
    basis independent.
    """
    a = to_fraction_matrix(matrix)
    n = len(a)
    for i in range(n):
        for j in range(n):
            if a[i][j] != a[j][i]:
                raise ValueError("matrix is not symmetric")
    diag = []
    k = 0
    while k < n:
        if not a[k][k]:
            j = next((j for j in range(k + 1, n) if a[j][j]), None)
            if j is not None:
                _swap(a, k, j)
            else:
                j = next((j for j in range(k + 1, n) if a[k][j]), None)
                if j is None:
                    diag.append(Fraction(0))
                    k += 1
                    continue
                # row/col k += row/col j makes the pivot 2*a[k][j]
                for c in range(n):
                    a[k][c] += a[j][c]
                for r in range(n):
                    a[r][k] += a[r][j]
        p = a[k][k]
        col = [a[r][k] for r in range(n)]
        for r in range(k + 1, n):
            for c in range(k + 1, n):
                a[r][c] -= col[r] * col[c] / p
            a[r][k] = a[k][r] = Fraction(0)
        diag.append(p)
        k += 1
    pos = sum(1 for d in diag if d > 0)
    neg = sum(1 for d in diag if d < 0)
    return pos, neg, n - pos - neg


def _swap(a: Matrix, i: int, j: int) -> None:
    a[i], a[j] = a[j], a[i]
    for row in a:
        row[i], row[j] = row[j], row[i]


class IncrementalSolver:
    """Row-by-row Gaussian elimination for ``A u = b`` over Q.

    Rows are added one at a time so the first row that makes the system
    inconsistent can be reported as a witness.  Pivoting is deterministic:
    the lowest unknown index with a nonzero coefficient.
    """

    def __init__(self, n_unknowns: int):
        self.n = n_unknowns
        self.pivots: dict[int, list[Fraction]] = {}  # pivot col -> normalised row (len n+1)
        self.inconsistent_tag = None

    def add_row(self, coeffs: Sequence, rhs, tag=None) -> bool:
        """Add one equation; returns False if it contradicts earlier rows."""
        row = [Fraction(c) for c in coeffs] + [Fraction(rhs)]
        for col in sorted(self.pivots):
            if row[col]:
                f = row[col]
                prow = self.pivots[col]
                row = [x - f * y for x, y in zip(row, prow)]
        lead = next((c for c in range(self.n) if row[c]), None)
        if lead is None:
            if row[self.n]:
                if self.inconsistent_tag is None:
                    self.inconsistent_tag = tag
                return False
            return True
        p = row[lead]
        row = [x / p for x in row]
        for col, prow in self.pivots.items():
            if prow[lead]:
                f = prow[lead]
                self.pivots[col] = [x - f * y for x, y in zip(prow, row)]
        self.pivots[lead] = row
        return True

    @property
    def consistent(self) -> bool:
        return self.inconsistent_tag is None

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def solution(self) -> list[Fraction] | None:
        """Unique solution, or None when inconsistent or rank deficient."""
        if not self.consistent or self.rank < self.n:
            return None
        return [self.pivots[c][self.n] for c in range(self.n)]
