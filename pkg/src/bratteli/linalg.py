"""Small exact linear algebra over Fractions (and plain ints).

Matrices are tuples of row tuples.  Everything here is pure and allocation
light; sizes stay in the single digits for the diagrams this package
handles, so clarity wins over cleverness.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ArgumentError


def mat(rows):
    """Coerce a nested iterable to an immutable matrix of Fractions."""
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def int_mat(rows):
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity(k):
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(k))
                 for i in range(k))


def transpose(a):
    return tuple(zip(*a)) if a else ()


def mat_mul(a, b):
    """a @ b for row-major matrices; works for int or Fraction entries."""
    if a and b and len(a[0]) != len(b):
        raise ArgumentError(f"shape mismatch {len(a[0])} vs {len(b)}")
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt)
                 for row in a)


def mat_vec(a, x):
    if a and len(a[0]) != len(x):
        raise ArgumentError(f"shape mismatch {len(a[0])} vs {len(x)}")
    return tuple(sum(c * v for c, v in zip(row, x)) for row in a)


def vec_mat(x, a):
    """Row vector times matrix."""
    if len(x) != len(a):
        raise ArgumentError(f"shape mismatch {len(x)} vs {len(a)}")
    cols = len(a[0]) if a else 0
    return tuple(sum(x[i] * a[i][j] for i in range(len(a)))
                 for j in range(cols))


def mat_pow(a, k):
    if k < 0:
        raise ArgumentError("negative matrix power")
    result = identity(len(a))
    base = mat(a)
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


def det(a):
    """Determinant by fraction-free-ish Gaussian elimination."""
    n = len(a)
    if any(len(row) != n for row in a):
        raise ArgumentError("determinant of a non-square matrix")
    m = [[Fraction(x) for x in row] for row in a]
    sign = 1
    out = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            sign = -sign
        out *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return sign * out


def rank(a):
    if not a:
        return 0
    m = [[Fraction(x) for x in row] for row in a]
    rows, cols = len(m), len(m[0])
    rk = 0
    for col in range(cols):
        pivot = next((r for r in range(rk, rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rk], m[pivot] = m[pivot], m[rk]
        inv = Fraction(1) / m[rk][col]
        for r in range(rows):
            if r != rk and m[r][col] != 0:
                factor = m[r][col] * inv
                for c in range(col, cols):
                    m[r][c] -= factor * m[rk][c]
        rk += 1
        if rk == rows:
            break
    return rk


def nullspace(a):
    """Basis of the right kernel {x : a x = 0}, as Fraction tuples."""
    if not a:
        return ()
    rows, cols = len(a), len(a[0])
    m = [[Fraction(x) for x in row] for row in a]
    pivots = []
    rk = 0
    for col in range(cols):
        pivot = next((r for r in range(rk, rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rk], m[pivot] = m[pivot], m[rk]
        inv = Fraction(1) / m[rk][col]
        m[rk] = [x * inv for x in m[rk]]
        for r in range(rows):
            if r != rk and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[rk])]
        pivots.append(col)
        rk += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * cols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -m[r][fc]
        basis.append(tuple(vec))
    return tuple(basis)


def l1_dist(u, v):
    return sum(abs(x - y) for x, y in zip(u, v))


def row_diff_diameter(a):
    """Max over row pairs of the L1 distance between rows."""
    best = Fraction(0)
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            d = l1_dist(a[i], a[j])
            if d > best:
                best = d
    return best


def affine_rank(vectors):
    """Dimension of the affine hull of the given points, exactly."""
    if len(vectors) <= 1:
        return 0
    base = vectors[0]
    diffs = [tuple(x - b for x, b in zip(v, base)) for v in vectors[1:]]
    return rank(diffs)
