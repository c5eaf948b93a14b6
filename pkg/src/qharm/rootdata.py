"""Cartan and Weyl machinery.

Weights are integer coordinate tuples in the fundamental-weight basis, so
integrality of module weights is manifest.  The bilinear form is the Killing
form rescaled so the shortest root has square length 2; the exponent
denominator L is the lcm of the denominators of its Gram matrix on the
fundamental weights, which makes every pairing q-power an integer power
of v = q^(1/L).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

from .scalars import RAT, NonIntegralExponentError, Scalar, q_pow, qint_gauss

Weight = tuple


def _series_cartan(series: str, rank: int) -> list[list[int]]:
    A = [[2 * (i == j) for j in range(rank)] for i in range(rank)]

    def link(i, j, aij=-1, aji=-1):
        A[i][j] = aij
        A[j][i] = aji

    if series == "A":
        for i in range(rank - 1):
            link(i, i + 1)
    elif series == "B":
        # last simple root short
        if rank < 2:
            raise ValueError("B series needs rank >= 2")
        for i in range(rank - 2):
            link(i, i + 1)
        link(rank - 2, rank - 1, -1, -2)
    elif series == "C":
        if rank < 2:
            raise ValueError("C series needs rank >= 2")
        for i in range(rank - 2):
            link(i, i + 1)
        link(rank - 2, rank - 1, -2, -1)
    elif series == "D":
        if rank < 3:
            raise ValueError("D series needs rank >= 3")
        for i in range(rank - 3):
            link(i, i + 1)
        link(rank - 3, rank - 2)
        link(rank - 3, rank - 1)
    elif series == "G":
        if rank != 2:
            raise ValueError("G series has rank 2")
        link(0, 1, -3, -1)
    elif series == "F":
        if rank != 4:
            raise ValueError("F series has rank 4")
        link(0, 1)
        link(1, 2, -1, -2)
        link(2, 3)
    elif series == "E":
        if rank not in (6, 7, 8):
            raise ValueError("E series has rank 6, 7 or 8")
        for i in range(rank - 2):
            link(i, i + 1)
        link(2, rank - 1)
    else:
        raise ValueError(f"unknown series {series!r}")
    return A


def _symmetrizers(cartan) -> tuple:
    """Minimal positive integers d with d_i a_ij = d_j a_ji, min d = 1."""
    n = len(cartan)
    d = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = RAT(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i != j and cartan[i][j] and d[j] is None:
                    d[j] = d[i] * cartan[i][j] / cartan[j][i]
                    stack.append(j)
    lcm = 1
    for x in d:
        lcm = math.lcm(lcm, int(x.denominator))
    ints = [int(x * lcm) for x in d]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    ints = [x // g for x in ints]
    for i in range(n):
        for j in range(n):
            if ints[i] * cartan[i][j] != ints[j] * cartan[j][i]:
                raise ValueError("Cartan matrix is not symmetrizable")
    return tuple(ints)


def _mat_inv_rational(M):
    n = len(M)
    aug = [[RAT(M[i][j]) for j in range(n)] + [RAT(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


@dataclass(frozen=True)
class WeylElement:
    """Group element stored as a reduced word with its weight-coordinate
    action matrix (rows of the matrix act on coordinate columns)."""

    word: tuple
    matrix: tuple
    length: int

    @property
    def sign(self) -> int:
        return -1 if self.length % 2 else 1

    def act(self, lam: Weight) -> Weight:
        return tuple(sum(row[j] * lam[j] for j in range(len(lam))) for row in self.matrix)


class RootDatum:
    """Cartan matrix data, bilinear form, positive roots, rho, Weyl group."""

    def __init__(self, cartan, label: str | None = None):
        cartan = [list(map(int, row)) for row in cartan]
        n = len(cartan)
        for i in range(n):
            if cartan[i][i] != 2:
                raise ValueError("Cartan diagonal must be 2")
            for j in range(n):
                if i != j and cartan[i][j] > 0:
                    raise ValueError("off-diagonal Cartan entries must be <= 0")
                if (cartan[i][j] == 0) != (cartan[j][i] == 0):
                    raise ValueError("Cartan zero pattern must be symmetric")
        self.rank = n
        self.cartan = tuple(tuple(row) for row in cartan)
        self.d = _symmetrizers(cartan)
        self._check_finite_type()
        ainv = _mat_inv_rational(cartan)
        # form[i][j] = (varpi_i, varpi_j) = d_i * (A^{-1})_{ij} ... B = D A^{-1}
        self.form = tuple(tuple(RAT(self.d[i]) * ainv[i][j] for j in range(n))
                          for i in range(n))
        L = 1
        for row in self.form:
            for x in row:
                L = math.lcm(L, int(x.denominator))
        self.L = L
        self._ainv = tuple(tuple(row) for row in ainv)
        self.rho = (1,) * n
        self.simple_roots = tuple(tuple(cartan[i][j] for i in range(n)) for j in range(n))
        self.pos_roots = self._positive_roots()
        self.label = label or f"rank{n}"
        self._weyl = None
        self._weyl_by_matrix = None

    # -- construction ---------------------------------------------------------

    @staticmethod
    @lru_cache(maxsize=None)
    def from_series(spec: str) -> "RootDatum":
        spec = spec.strip().upper()
        series, rank = spec[0], int(spec[1:])
        return RootDatum(_series_cartan(series, rank), label=spec)

    def _check_finite_type(self):
        # symmetrized Cartan matrix positive definite (leading minors > 0)
        n = self.rank
        S = [[RAT(self.d[i] * self.cartan[i][j]) for j in range(n)] for i in range(n)]
        for k in range(1, n + 1):
            M = [row[:k] for row in S[:k]]
            det = _det_rational(M)
            if det <= 0:
                raise ValueError("Cartan matrix is not of finite type")

    def _positive_roots(self):
        # closure of the simple roots under simple reflections, positive part
        seen = set(self.simple_roots)
        frontier = list(self.simple_roots)
        while frontier:
            nxt = []
            for beta in frontier:
                for i in range(self.rank):
                    img = self.simple_reflection_act(i, beta)
                    if img not in seen:
                        seen.add(img)
                        nxt.append(img)
            frontier = nxt
        pos = [beta for beta in seen if self._is_positive_root(beta)]
        pos.sort(key=lambda b: (self.height(b), b))
        return tuple(pos)

    def _is_positive_root(self, beta) -> bool:
        coords = self.root_coords(beta)
        return all(c >= 0 for c in coords)

    # -- weights and the form --------------------------------------------------

    def root_coords(self, lam: Weight):
        """Coordinates of lam in the simple-root basis (rational)."""
        return tuple(sum(self._ainv[i][j] * lam[j] for j in range(self.rank))
                     for i in range(self.rank))

    def height(self, beta: Weight):
        return sum(self.root_coords(beta))

    def pairing(self, lam: Weight, mu: Weight) -> RAT:
        total = RAT(0)
        for i, li in enumerate(lam):
            if li:
                for j, mj in enumerate(mu):
                    if mj:
                        total += li * mj * self.form[i][j]
        return total

    def q_power(self, lam: Weight, mu: Weight) -> Scalar:
        return q_pow(self.pairing(lam, mu), self.L)

    def q_pow(self, x) -> Scalar:
        return q_pow(x, self.L)

    def qint(self, n: int, i: int) -> Scalar:
        """[n] at base q_i = q^{d_i}, as a Laurent polynomial in v."""
        return qint_gauss(n, self.L * self.d[i])

    def is_dominant(self, lam: Weight) -> bool:
        return all(c >= 0 for c in lam)

    def weight_add(self, a: Weight, b: Weight) -> Weight:
        return tuple(x + y for x, y in zip(a, b))

    def weight_sub(self, a: Weight, b: Weight) -> Weight:
        return tuple(x - y for x, y in zip(a, b))

    def weight_neg(self, a: Weight) -> Weight:
        return tuple(-x for x in a)

    def zero_weight(self) -> Weight:
        return (0,) * self.rank

    def simple_reflection_act(self, i: int, lam: Weight) -> Weight:
        # s_i(lam) = lam - lam_i * alpha_i; (lam, alpha_i^vee) = lam_i
        li = lam[i]
        if not li:
            return tuple(lam)
        alpha = self.simple_roots[i]
        return tuple(x - li * a for x, a in zip(lam, alpha))

    # -- Weyl group -------------------------------------------------------------

    def weyl_group(self) -> list[WeylElement]:
        """Full enumeration by breadth-first closure; identity first,
        elements keyed by action matrix, length = BFS depth."""
        if self._weyl is not None:
            return self._weyl
        n = self.rank
        ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        gens = []
        for i in range(n):
            alpha = self.simple_roots[i]
            gens.append(tuple(tuple(int(r == c) - alpha[r] * int(c == i)
                                    for c in range(n)) for r in range(n)))
        elements = {ident: WeylElement((), ident, 0)}
        frontier = [elements[ident]]
        while frontier:
            nxt = []
            for w in sorted(frontier, key=lambda e: e.word):
                for i in range(n):
                    mat = _mat_mul_int(gens[i], w.matrix)
                    if mat not in elements:
                        el = WeylElement((i,) + w.word, mat, w.length + 1)
                        elements[mat] = el
                        nxt.append(el)
            frontier = nxt
            if len(elements) > 1 << 22:
                raise ValueError("Weyl group too large; not finite type?")
        out = sorted(elements.values(), key=lambda e: (e.length, e.word))
        self._weyl = out
        self._weyl_by_matrix = {e.matrix: e for e in out}
        return out

    @property
    def weyl_order(self) -> int:
        return len(self.weyl_group())

    def longest_element(self) -> WeylElement:
        return max(self.weyl_group(), key=lambda e: e.length)

    def compose(self, w1: WeylElement, w2: WeylElement) -> WeylElement:
        self.weyl_group()
        return self._weyl_by_matrix[_mat_mul_int(w1.matrix, w2.matrix)]

    def shifted_action(self, w: WeylElement, lam: Weight) -> Weight:
        """w.lam = w(lam + rho) - rho."""
        shifted = w.act(self.weight_add(lam, self.rho))
        return self.weight_sub(shifted, self.rho)

    def dual_weight(self, lam: Weight) -> Weight:
        """-w0(lam): the highest weight of the dual of V(lam)."""
        return self.weight_neg(self.longest_element().act(lam))

    # -- oracles ----------------------------------------------------------------

    def weyl_dim(self, lam: Weight) -> int:
        """Weyl dimension formula; independent of module construction."""
        num = RAT(1)
        den = RAT(1)
        lam_rho = self.weight_add(lam, self.rho)
        for alpha in self.pos_roots:
            num *= self.pairing(lam_rho, alpha)
            den *= self.pairing(self.rho, alpha)
        val = num / den
        if val.denominator != 1:
            raise ArithmeticError("Weyl dimension did not come out integral")
        return int(val)

    def dominant_weights_up_to_dim(self, max_dim: int):
        """All dominant weights with Weyl dimension <= max_dim."""
        out = []
        bound = max_dim  # coordinate bound: dim grows at least linearly per coord
        def rec(prefix):
            if len(prefix) == self.rank:
                if self.weyl_dim(tuple(prefix)) <= max_dim:
                    out.append(tuple(prefix))
                return
            for c in range(bound + 1):
                cand = prefix + [c]
                probe = tuple(cand + [0] * (self.rank - len(cand)))
                if self.weyl_dim(probe) > max_dim:
                    break
                rec(cand)
        rec([])
        out.sort(key=lambda w: (self.weyl_dim(w), w))
        return out

    # -- serialization ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "kind": "root_datum",
            "label": self.label,
            "cartan": [list(r) for r in self.cartan],
            "symmetrizers": list(self.d),
            "form": [[str(x) for x in row] for row in self.form],
            "positive_roots": [list(r) for r in self.pos_roots],
            "rho": list(self.rho),
            "L": self.L,
            "weyl_order": self.weyl_order,
        }

    def dump(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    def __repr__(self):
        return f"RootDatum({self.label}, rank={self.rank}, L={self.L})"


def _det_rational(M) -> RAT:
    n = len(M)
    M = [[RAT(x) for x in row] for row in M]
    det = RAT(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if M[r][col]:
                piv = r
                break
        if piv is None:
            return RAT(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        inv = 1 / M[col][col]
        for r in range(col + 1, n):
            if M[r][col]:
                f = M[r][col] * inv
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return det


def _mat_mul_int(A, B):
    n = len(A)
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n))
                 for i in range(n))


def parse_weight(text: str, rank: int) -> Weight:
    """Parse CLI weight syntax: comma-separated integer coordinates in the
    fundamental-weight basis.  For rank 1, a half-integer like '3/2' or '1/2'
    is accepted as the spin label and doubled into the coordinate."""
    text = text.strip()
    if rank == 1 and "/" in text:
        coord = RAT(text) * 2
        if coord.denominator != 1:
            raise ValueError(f"bad half-integer weight {text!r}")
        return (int(coord),)
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != rank:
        raise ValueError(f"expected {rank} coordinates, got {text!r}")
    return tuple(int(p) for p in parts)
