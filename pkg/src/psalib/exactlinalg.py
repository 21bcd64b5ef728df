"""Exact linear algebra over Q and over the symbolic scalar field.

QMatrix holds Fraction entries; rank comes from fraction-free Bareiss
elimination with deterministic first-nonzero pivoting, and a second,
independently coded elimination (plain Gauss-Jordan, largest-pivot
strategy) is exposed so results can be cross-checked without sharing
code paths.  ExprMatrix holds DiffExpr entries; inversion is cofactor-based
with subset-memoized Laplace determinants, sized for the small matrices
that occur here.
"""

from __future__ import annotations

from fractions import Fraction

from .exprcore import ChartContext, DiffExpr

__all__ = [
    "QMatrix",
    "ExprMatrix",
    "SingularMatrixError",
    "rank",
    "rank_second_opinion",
    "kernel_basis",
    "rref",
    "solve",
    "invert",
    "expr_rank",
    "expr_kernel_basis",
    "expr_solve",
]


class SingularMatrixError(Exception):
    def __init__(self, determinant):
        super().__init__(f"singular matrix (determinant = {determinant})")
        self.determinant = determinant


class QMatrix:
    """Immutable rational matrix."""

    __slots__ = ("rows", "nrows", "ncols")

    def __init__(self, rows):
        rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise ValueError("ragged rows")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0

    @staticmethod
    def zeros(n, m):
        return QMatrix([[0] * m for _ in range(n)])

    @staticmethod
    def identity(n):
        return QMatrix([[1 if i == j else 0 for j in range(n)]
                        for i in range(n)])

    def transpose(self):
        return QMatrix(list(zip(*self.rows))) if self.rows else QMatrix([])

    def mulvec(self, v):
        return tuple(sum(r[j] * v[j] for j in range(self.ncols))
                     for r in self.rows)

    def matmul(self, other: "QMatrix") -> "QMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        ot = other.transpose().rows
        return QMatrix([[sum(r[k] * c[k] for k in range(self.ncols))
                         for c in ot] for r in self.rows])

    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"QMatrix({[list(map(str, r)) for r in self.rows]})"


def rank(m: QMatrix) -> int:
    """Rank by fraction-free Bareiss elimination, first-nonzero pivots.

    Entries stay integral multiples of leading minors, so no rational
    blowup beyond what the minors themselves carry.
    """
    a = [list(r) for r in m.rows]
    n, w = m.nrows, m.ncols
    prev = Fraction(1)
    r = 0
    for col in range(w):
        piv = None
        for i in range(r, n):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
        p = a[r][col]
        for i in range(r + 1, n):
            for j in range(col + 1, w):
                a[i][j] = (a[i][j] * p - a[i][col] * a[r][j]) / prev
            a[i][col] = Fraction(0)
        prev = p
        r += 1
        if r == n:
            break
    return r


def rank_second_opinion(m: QMatrix) -> int:
    """Independent rank oracle: Gauss-Jordan with largest-|pivot| strategy."""
    a = [list(r) for r in m.rows]
    n, w = m.nrows, m.ncols
    r = 0
    for col in range(w):
        piv, best = None, Fraction(0)
        for i in range(r, n):
            if abs(a[i][col]) > best:
                best = abs(a[i][col])
                piv = i
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][col]
        a[r] = [x / p for x in a[r]]
        for i in range(n):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == n:
            break
    return r


def rref(m: QMatrix):
    """Reduced row echelon form; returns (matrix, pivot column list)."""
    a = [list(r) for r in m.rows]
    n, w = m.nrows, m.ncols
    pivots = []
    r = 0
    for col in range(w):
        piv = None
        for i in range(r, n):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][col]
        a[r] = [x / p for x in a[r]]
        for i in range(n):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == n:
            break
    return QMatrix(a), pivots


def kernel_basis(m: QMatrix):
    """Basis of the right kernel, deterministic (one vector per free column,
    unit in that column)."""
    red, pivots = rref(m)
    pivset = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * m.ncols
        v[free] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red.rows[r][free]
        basis.append(tuple(v))
    return basis


def solve(m: QMatrix, rhs):
    """One solution of m x = rhs, or None if inconsistent."""
    aug = QMatrix([list(r) + [rhs[i]] for i, r in enumerate(m.rows)])
    red, pivots = rref(aug)
    if m.ncols in pivots:
        return None
    x = [Fraction(0)] * m.ncols
    for r, pc in enumerate(pivots):
        x[pc] = red.rows[r][m.ncols]
    return tuple(x)


def qinvert(m: QMatrix) -> QMatrix:
    if m.nrows != m.ncols:
        raise ValueError("not square")
    n = m.nrows
    aug = QMatrix([list(m.rows[i]) + [1 if j == i else 0 for j in range(n)]
                   for i in range(n)])
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrixError(Fraction(0))
    return QMatrix([r[n:] for r in red.rows])


# ---------------------------------------------------------------------------
# symbolic matrices


class ExprMatrix:
    """Immutable matrix of symbolic scalars over one chart context."""

    __slots__ = ("ctx", "rows", "nrows", "ncols")

    def __init__(self, ctx: ChartContext, rows):
        conv = []
        for r in rows:
            conv.append(tuple(
                x if isinstance(x, DiffExpr) else ctx.number(x) for x in r))
        rows = tuple(conv)
        if rows:
            w = len(rows[0])
            if any(len(r) != w for r in rows):
                raise ValueError("ragged rows")
        self.ctx = ctx
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0

    @staticmethod
    def identity(ctx, n):
        one, zero = ctx.one(), ctx.zero()
        return ExprMatrix(ctx, [[one if i == j else zero for j in range(n)]
                                for i in range(n)])

    def transpose(self):
        if not self.rows:
            return self
        return ExprMatrix(self.ctx, list(zip(*self.rows)))

    def matmul(self, other: "ExprMatrix") -> "ExprMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        ot = other.transpose().rows
        z = self.ctx.zero()
        return ExprMatrix(self.ctx, [
            [sum((r[k] * c[k] for k in range(self.ncols)), z) for c in ot]
            for r in self.rows])

    def mulvec(self, v):
        z = self.ctx.zero()
        return tuple(sum((r[j] * v[j] for j in range(self.ncols)), z)
                     for r in self.rows)

    def scale(self, s) -> "ExprMatrix":
        return ExprMatrix(self.ctx, [[x * s for x in r] for r in self.rows])

    def add(self, other: "ExprMatrix") -> "ExprMatrix":
        return ExprMatrix(self.ctx, [
            [a + b for a, b in zip(r1, r2)]
            for r1, r2 in zip(self.rows, other.rows)])

    def sub(self, other: "ExprMatrix") -> "ExprMatrix":
        return ExprMatrix(self.ctx, [
            [a - b for a, b in zip(r1, r2)]
            for r1, r2 in zip(self.rows, other.rows)])

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.rows for x in r)

    def __eq__(self, other):
        return (isinstance(other, ExprMatrix)
                and self.nrows == other.nrows and self.ncols == other.ncols
                and all(a == b for r1, r2 in zip(self.rows, other.rows)
                        for a, b in zip(r1, r2)))

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"ExprMatrix({[[str(x) for x in r] for r in self.rows]})"


def determinant(m: ExprMatrix) -> DiffExpr:
    """Laplace expansion with memoization over (depth, column subset)."""
    if m.nrows != m.ncols:
        raise ValueError("not square")
    n = m.nrows
    if n == 0:
        return m.ctx.one()
    rows = m.rows
    memo: dict = {}

    def sub_det(depth: int, cols: tuple) -> DiffExpr:
        if len(cols) == 1:
            return rows[depth][cols[0]]
        got = memo.get((depth, cols))
        if got is not None:
            return got
        total = m.ctx.zero()
        for k, c in enumerate(cols):
            a = rows[depth][c]
            if a.is_zero():
                continue
            rest = cols[:k] + cols[k + 1:]
            term = a * sub_det(depth + 1, rest)
            total = total + term if k % 2 == 0 else total - term
        memo[(depth, cols)] = total
        return total

    return sub_det(0, tuple(range(n)))


def invert(m: ExprMatrix) -> ExprMatrix:
    """Adjugate inverse; raises SingularMatrixError with the vanishing
    determinant if the matrix is not invertible over the scalar field."""
    if m.nrows != m.ncols:
        raise ValueError("not square")
    det = determinant(m)
    if det.is_zero():
        raise SingularMatrixError(det)
    n = m.nrows
    if n == 0:
        return m
    if n == 1:
        return ExprMatrix(m.ctx, [[m.ctx.one() / det]])
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            # adj[i][j] = (-1)^(i+j) * minor deleting row j, column i
            minor = ExprMatrix(m.ctx, [
                [m.rows[r][c] for c in range(n) if c != i]
                for r in range(n) if r != j])
            cof = determinant(minor)
            if (i + j) % 2:
                cof = -cof
            row.append(cof / det)
        out.append(row)
    return ExprMatrix(m.ctx, out)


def _expr_echelon(m: ExprMatrix):
    """Gauss-Jordan over the symbolic field, first symbolically nonzero
    pivot.  Returns (rows, pivot columns)."""
    a = [list(r) for r in m.rows]
    n, w = m.nrows, m.ncols
    pivots = []
    r = 0
    for col in range(w):
        piv = None
        for i in range(r, n):
            if not a[i][col].is_zero():
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][col]
        a[r] = [x / p for x in a[r]]
        for i in range(n):
            if i != r and not a[i][col].is_zero():
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(col)
        r += 1
        if r == n:
            break
    return a, pivots


def expr_rank(m: ExprMatrix) -> int:
    """Generic rank over the symbolic scalar field (valid off the vanishing
    loci of the pivots' denominators)."""
    return len(_expr_echelon(m)[1])


def expr_kernel_basis(m: ExprMatrix):
    red, pivots = _expr_echelon(m)
    pivset = set(pivots)
    basis = []
    for free in range(m.ncols):
        if free in pivset:
            continue
        v = [m.ctx.zero()] * m.ncols
        v[free] = m.ctx.one()
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][free]
        basis.append(tuple(v))
    return basis


def expr_solve(m: ExprMatrix, rhs):
    """One solution of m x = rhs over the symbolic field, or None."""
    aug = ExprMatrix(m.ctx, [list(r) + [rhs[i]]
                             for i, r in enumerate(m.rows)])
    red, pivots = _expr_echelon(aug)
    if m.ncols in pivots:
        return None
    x = [m.ctx.zero()] * m.ncols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][m.ncols]
    return tuple(x)
