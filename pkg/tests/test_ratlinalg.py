import random
from fractions import Fraction

import numpy as np
import pytest

from riccilike.ratlinalg import IncrementalSolver, determinant, identity, inertia, inverse


def rand_matrix(rng, n):
    return [[Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(n)] for _ in range(n)]


def test_inverse_roundtrip():
    rng = random.Random(1)
    for _ in range(20):
        m = rand_matrix(rng, 4)
        if determinant(m) == 0:
            continue
        inv = inverse(m)
        prod = [[sum(m[i][k] * inv[k][j] for k in range(4)) for j in range(4)] for i in range(4)]
        assert prod == identity(4)


def test_singular_inverse_raises():
    with pytest.raises(ZeroDivisionError):
        inverse([[1, 2], [2, 4]])


def test_determinant_matches_numpy():
    rng = random.Random(2)
    for _ in range(10):
        m = rand_matrix(rng, 5)
        assert float(determinant(m)) == pytest.approx(np.linalg.det(np.array(m, dtype=float)), abs=1e-9)


@pytest.mark.parametrize(
    "matrix, expected",
    [
        ([[1, 0, 0], [0, -1, 0], [0, 0, 1]], (2, 1, 0)),
        ([[0, 1], [1, 0]], (1, 1, 0)),
        ([[1, 1], [1, 1]], (1, 0, 1)),
        ([[0, 0], [0, 0]], (0, 0, 2)),
        ([[2, 1, 0], [1, 2, 0], [0, 0, -3]], (2, 1, 0)),
    ],
)
def test_inertia(matrix, expected):
    assert inertia(matrix) == expected


def test_inertia_agrees_with_eigenvalues():
    rng = random.Random(3)
    for _ in range(20):
        a = rand_matrix(rng, 4)
        s = [[a[i][j] + a[j][i] for j in range(4)] for i in range(4)]
        eig = np.linalg.eigvalsh(np.array(s, dtype=float))
        if np.min(np.abs(eig)) < 1e-9:
            continue
        assert inertia(s)[:2] == (int((eig > 0).sum()), int((eig < 0).sum()))


def test_solver_unique_solution():
    s = IncrementalSolver(3)
    for row, rhs in [([1, 0, 0], 2), ([1, 1, 0], 3), ([0, 1, 1], 4), ([1, 1, 1], 6)]:
        assert s.add_row(row, rhs)
    assert s.solution() == [2, 1, 3]


def test_solver_reports_first_inconsistent_row():
    s = IncrementalSolver(2)
    s.add_row([1, 0], 1, tag="a")
    s.add_row([0, 1], 1, tag="b")
    assert s.add_row([1, 1], 2, tag="c")
    assert not s.add_row([1, 1], 3, tag="d")
    s.add_row([1, -1], 7, tag="e")
    assert s.inconsistent_tag == "d"
    assert s.solution() is None


def test_solver_rank_deficient():
    s = IncrementalSolver(3)
    s.add_row([1, 1, 0], 1)
    s.add_row([2, 2, 0], 2)
    assert s.consistent and s.rank == 1
    assert s.solution() is None
