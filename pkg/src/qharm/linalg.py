"""Sparse and dense exact linear algebra over the scalar field.

Everything here is internal plumbing: weight-graded module matrices are thin
sparse dicts, and the dense routines (solve, inverse, kernel) run textbook
Gaussian elimination over the exact field, which is cheap at the per-weight
block sizes this package produces.
"""

from __future__ import annotations

from .scalars import Scalar

_ZERO = Scalar.zero()
_ONE = Scalar.one()


class SpMat:
    """Sparse matrix over Scalar: dict[(row, col)] with no stored zeros."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: dict | None = None):
        self.rows = rows
        self.cols = cols
        self.data = {}
        if data:
            for (r, c), v in data.items():
                if not v.is_zero():
                    self.data[(r, c)] = v

    @staticmethod
    def identity(n: int) -> "SpMat":
        return SpMat(n, n, {(i, i): _ONE for i in range(n)})

    @staticmethod
    def diagonal(values) -> "SpMat":
        values = list(values)
        n = len(values)
        return SpMat(n, n, {(i, i): v for i, v in enumerate(values) if not v.is_zero()})

    def __eq__(self, other):
        return (isinstance(other, SpMat) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def is_zero(self) -> bool:
        return not self.data

    def copy(self) -> "SpMat":
        out = SpMat(self.rows, self.cols)
        out.data = dict(self.data)
        return out

    def get(self, r: int, c: int) -> Scalar:
        return self.data.get((r, c), _ZERO)

    def set(self, r: int, c: int, v: Scalar):
        if v.is_zero():
            self.data.pop((r, c), None)
        else:
            self.data[(r, c)] = v

    def add_to(self, r: int, c: int, v: Scalar):
        s = self.data.get((r, c), _ZERO) + v
        self.set(r, c, s)

    def __add__(self, other: "SpMat") -> "SpMat":
        out = self.copy()
        for (r, c), v in other.data.items():
            out.add_to(r, c, v)
        return out

    def __sub__(self, other: "SpMat") -> "SpMat":
        out = self.copy()
        for (r, c), v in other.data.items():
            out.add_to(r, c, -v)
        return out

    def scale(self, s: Scalar) -> "SpMat":
        if s.is_zero():
            return SpMat(self.rows, self.cols)
        out = SpMat(self.rows, self.cols)
        out.data = {k: v * s for k, v in self.data.items()}
        return out

    def __matmul__(self, other: "SpMat") -> "SpMat":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row: dict = {}
        for (r, c), v in other.data.items():
            by_row.setdefault(r, []).append((c, v))
        out = SpMat(self.rows, other.cols)
        acc: dict = {}
        for (r, k), v in self.data.items():
            hits = by_row.get(k)
            if not hits:
                continue
            for c, w in hits:
                key = (r, c)
                cur = acc.get(key)
                acc[key] = v * w if cur is None else cur + v * w
        out.data = {k: v for k, v in acc.items() if not v.is_zero()}
        return out

    def transpose(self) -> "SpMat":
        out = SpMat(self.cols, self.rows)
        out.data = {(c, r): v for (r, c), v in self.data.items()}
        return out

    def matvec(self, vec: dict) -> dict:
        """Apply to a sparse column vector {index: Scalar}."""
        out: dict = {}
        cols = {}
        for c, v in vec.items():
            if not v.is_zero():
                cols[c] = v
        for (r, c), m in self.data.items():
            v = cols.get(c)
            if v is not None:
                cur = out.get(r)
                out[r] = m * v if cur is None else cur + m * v
        return {r: v for r, v in out.items() if not v.is_zero()}

    def column(self, c: int) -> dict:
        return {r: v for (r, cc), v in self.data.items() if cc == c}

    def row(self, r: int) -> dict:
        return {c: v for (rr, c), v in self.data.items() if rr == r}

    def kron(self, other: "SpMat") -> "SpMat":
        out = SpMat(self.rows * other.rows, self.cols * other.cols)
        for (r1, c1), v1 in self.data.items():
            for (r2, c2), v2 in other.data.items():
                out.data[(r1 * other.rows + r2, c1 * other.cols + c2)] = v1 * v2
        return out

    def to_dense(self):
        return [[self.get(r, c) for c in range(self.cols)] for r in range(self.rows)]

    def __repr__(self):
        return f"SpMat({self.rows}x{self.cols}, nnz={len(self.data)})"


def kron_list(mats) -> SpMat:
    out = mats[0]
    for m in mats[1:]:
        out = out.kron(m)
    return out


# ---------------------------------------------------------------------------
# Dense routines (lists of lists of Scalar)
# ---------------------------------------------------------------------------

def dense_solve(A, B):
    """Solve A X = B for dense A (n x n, invertible) and B (n x m)."""
    n = len(A)
    m = len(B[0]) if B else 0
    aug = [list(A[i]) + list(B[i]) for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not aug[r][col].is_zero():
                piv = r
                break
        if piv is None:
            raise ArithmeticError("singular matrix in dense_solve")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                row = aug[r]
                prow = aug[col]
                aug[r] = [x - f * y for x, y in zip(row, prow)]
    return [row[n:n + m] for row in aug]


def dense_inverse(A):
    n = len(A)
    eye = [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)]
    return dense_solve(A, eye)


def dense_kernel(A, cols: int):
    """Basis of the right kernel of A (rows are equations over `cols` unknowns).

    Returns a list of dict-vectors {col_index: Scalar}."""
    rows = [list(r) for r in A]
    n = len(rows)
    pivots = {}
    rank = 0
    for col in range(cols):
        piv = None
        for r in range(rank, n):
            if not rows[r][col].is_zero():
                piv = r
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(n):
            if r != rank and not rows[r][col].is_zero():
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        pivots[col] = rank
        rank += 1
    basis = []
    free = [c for c in range(cols) if c not in pivots]
    for fc in free:
        vec = {fc: _ONE}
        for pc, pr in pivots.items():
            coef = rows[pr][fc]
            if not coef.is_zero():
                vec[pc] = -coef
        basis.append(vec)
    return basis


class RowSpanFilter:
    """Incremental greedy row-independence filter (Gram-rank selection).

    Rows are added in order; `offer` reports whether the new row increases
    the span of the previously accepted rows."""

    def __init__(self, width: int):
        self.width = width
        self.echelon = []  # list of (pivot_col, row list) in echelon form

    def offer(self, row) -> bool:
        row = list(row)
        for pcol, erow in self.echelon:
            f = row[pcol]
            if not f.is_zero():
                row = [x - f * y for x, y in zip(row, erow)]
        for col in range(self.width):
            if not row[col].is_zero():
                inv = row[col].inverse()
                row = [x * inv for x in row]
                self.echelon.append((col, row))
                return True
        return False
