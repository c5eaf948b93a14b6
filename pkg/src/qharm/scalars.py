"""Exact coefficient arithmetic.

Scalars are reduced fractions of Laurent polynomials in a formal variable v
with rational coefficients.  The deformation parameter is q = v^L, where the
integer L is supplied by the root datum so that every exponent q^(lam, mu)
arising from weight pairings is an integer power of v.  Fourier polynomials
are finite sums of torus characters nu -> q^(i nu, lam) indexed by lattice
weights.  A multiprecision numeric backend (mpmath) evaluates both at real
q > 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import mpmath

try:
    from gmpy2 import mpq as RAT
except ImportError:  # pragma: no cover
    from fractions import Fraction as RAT

import math


class NonIntegralExponentError(ValueError):
    """Raised when a requested q-exponent is not an integer power of v."""


class ScalarPoleError(ArithmeticError):
    """Raised when a denominator evaluates below the numeric precision floor."""


def parse_rat(text) -> RAT:
    if isinstance(text, str):
        return RAT(text.strip())
    return RAT(text)


# ---------------------------------------------------------------------------
# Laurent polynomial helpers.  Polynomials are dicts {exponent: coefficient}
# with no stored zeros; coefficients are exact rationals.
# ---------------------------------------------------------------------------

def _pnormal(p: dict) -> dict:
    return {k: c for k, c in p.items() if c}


def _padd(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _pmul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka + kb
            s = out.get(k, 0) + ca * cb
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def _pscale(a: dict, c) -> dict:
    if not c:
        return {}
    return {k: v * c for k, v in a.items()}


def _pshift(a: dict, t: int) -> dict:
    if t == 0:
        return dict(a)
    return {k + t: v for k, v in a.items()}


def _pneg(a: dict) -> dict:
    return {k: -v for k, v in a.items()}


def _to_int_list(p: dict) -> list:
    # Plain polynomial dict (min exp 0) -> dense integer coefficient list,
    # cleared of rational denominators and integer content.
    deg = max(p)
    den_lcm = 1
    for c in p.values():
        den_lcm = math.lcm(den_lcm, int(c.denominator))
    out = [0] * (deg + 1)
    for k, c in p.items():
        out[k] = int(c.numerator) * (den_lcm // int(c.denominator))
    g = 0
    for c in out:
        g = math.gcd(g, c)
    if g > 1:
        out = [c // g for c in out]
    return out


def _ideg(a: list) -> int:
    return len(a) - 1


def _itrim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _iprim(a: list) -> list:
    g = 0
    for c in a:
        g = math.gcd(g, c)
    if g > 1:
        a = [c // g for c in a]
    if a and a[-1] < 0:
        a = [-c for c in a]
    return a


def _iprem(a: list, b: list) -> list:
    # Pseudo-remainder of dense integer polynomials, a mod b.
    a = list(a)
    db, lb = _ideg(b), b[-1]
    while _ideg(a) >= db and a:
        da, la = _ideg(a), a[-1]
        a = [c * lb for c in a]
        shift = da - db
        for i, c in enumerate(b):
            a[i + shift] -= la * c
        a = _itrim(a)
        if not a:
            break
    return a


def _pgcd(pa: dict, pb: dict) -> dict:
    """GCD of two plain polynomials (min exponent 0), monic over Q."""
    if not pa or not pb:
        return {}
    a = _iprim(_to_int_list(pa))
    b = _iprim(_to_int_list(pb))
    if _ideg(a) < _ideg(b):
        a, b = b, a
    while b:
        r = _iprim(_iprem(a, b))
        a, b = b, r
    lead = a[-1]
    return {k: RAT(c, lead) for k, c in enumerate(a) if c}


def _pdivexact(pa: dict, pb: dict) -> dict:
    """Exact division of plain polynomials over Q; raises if not divisible."""
    if not pa:
        return {}
    da = max(pa)
    db = max(pb)
    lb = pb[db]
    rem = dict(pa)
    out: dict = {}
    for k in range(da - db, -1, -1):
        c = rem.get(k + db, 0)
        if c:
            q = c / lb
            out[k] = q
            for kb, cb in pb.items():
                s = rem.get(k + kb, 0) - q * cb
                if s:
                    rem[k + kb] = s
                else:
                    rem.pop(k + kb, None)
    if rem:
        raise ArithmeticError("polynomial division is not exact")
    return out


_ONE_POLY = ((0, RAT(1)),)


class Scalar:
    """Element of Q(v): a reduced fraction of Laurent polynomials.

    Canonical form: the denominator is a genuine polynomial with nonzero
    constant term and leading coefficient 1; the numerator carries the
    v-power; numerator and denominator share no polynomial factor.  Equality
    and hashing are structural.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Mapping[int, RAT], den: Mapping[int, RAT], *, _reduced=False):
        if _reduced:
            self.num = tuple(sorted(num.items()))
            self.den = tuple(sorted(den.items()))
            self._hash = None
            return
        num = _pnormal(dict(num))
        den = _pnormal(dict(den))
        if not den:
            raise ZeroDivisionError("scalar with zero denominator")
        if not num:
            self.num = ()
            self.den = _ONE_POLY
            self._hash = None
            return
        tn = min(num)
        td = min(den)
        pn = _pshift(num, -tn)
        pd = _pshift(den, -td)
        g = _pgcd(pn, pd)
        if len(g) > 1 or (g and 0 not in g):
            pn = _pdivexact(pn, g)
            pd = _pdivexact(pd, g)
        lead = pd[max(pd)]
        if lead != 1:
            inv = 1 / lead
            pn = _pscale(pn, inv)
            pd = _pscale(pd, inv)
        self.num = tuple(sorted(_pshift(pn, tn - td).items()))
        self.den = tuple(sorted(pd.items()))
        self._hash = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "Scalar":
        return _ZERO

    @staticmethod
    def one() -> "Scalar":
        return _ONE

    @staticmethod
    def from_rat(c) -> "Scalar":
        c = RAT(c)
        if not c:
            return _ZERO
        return Scalar({0: c}, {0: RAT(1)}, _reduced=True)

    @staticmethod
    def v_pow(k: int) -> "Scalar":
        return Scalar({int(k): RAT(1)}, {0: RAT(1)}, _reduced=True)

    @staticmethod
    def from_poly(p: Mapping[int, RAT]) -> "Scalar":
        return Scalar(p, {0: RAT(1)})

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == _ONE_POLY and self.den == _ONE_POLY

    def __bool__(self):
        return bool(self.num)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, RAT)):
            return self == Scalar.from_rat(other)
        return NotImplemented

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "Scalar") -> "Scalar":
        if not isinstance(other, Scalar):
            return NotImplemented
        if not self.num:
            return other
        if not other.num:
            return self
        a, b = dict(self.num), dict(self.den)
        c, d = dict(other.num), dict(other.den)
        if self.den == other.den:
            s = _padd(a, c)
            if not s:
                return _ZERO
            return Scalar(s, b)
        return Scalar(_padd(_pmul(a, d), _pmul(c, b)), _pmul(b, d))

    def __neg__(self) -> "Scalar":
        if not self.num:
            return self
        out = Scalar.__new__(Scalar)
        out.num = tuple((k, -c) for k, c in self.num)
        out.den = self.den
        out._hash = None
        return out

    def __sub__(self, other: "Scalar") -> "Scalar":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, RAT)):
            other = Scalar.from_rat(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        if not self.num or not other.num:
            return _ZERO
        if other.is_one():
            return self
        if self.is_one():
            return other
        return Scalar(_pmul(dict(self.num), dict(other.num)),
                      _pmul(dict(self.den), dict(other.den)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, RAT)):
            other = Scalar.from_rat(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError("division by zero scalar")
        if not self.num:
            return _ZERO
        return Scalar(_pmul(dict(self.num), dict(other.den)),
                      _pmul(dict(self.den), dict(other.num)))

    def inverse(self) -> "Scalar":
        if not self.num:
            raise ZeroDivisionError("inverse of zero scalar")
        return Scalar(dict(self.den), dict(self.num))

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = _ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    @staticmethod
    def sum(items: Iterable["Scalar"]) -> "Scalar":
        total = _ZERO
        for s in items:
            total = total + s
        return total

    def subst_v_inverse(self) -> "Scalar":
        """The image under the bar involution v -> v^{-1}."""
        return Scalar({-k: c for k, c in self.num}, {-k: c for k, c in self.den})

    # -- serialization -------------------------------------------------------

    def __repr__(self):
        return f"Scalar({self.to_str()!r})"

    def to_str(self) -> str:
        num = _poly_str(self.num)
        if self.den == _ONE_POLY:
            return num
        return num + " / " + _poly_str(self.den)

    @staticmethod
    def from_str(text: str) -> "Scalar":
        parts = text.split(" / ")
        if len(parts) == 1:
            return Scalar(_poly_parse(parts[0]), {0: RAT(1)})
        if len(parts) == 2:
            return Scalar(_poly_parse(parts[0]), _poly_parse(parts[1]))
        raise ValueError(f"malformed scalar string: {text!r}")

    def to_qstr(self, L: int) -> str:
        """Display in terms of q = v^L when all exponents allow it."""
        if all(k % L == 0 for k, _ in self.num) and all(k % L == 0 for k, _ in self.den):
            num = _poly_qstr(self.num, L)
            if self.den == _ONE_POLY:
                return num
            return "(" + num + ") / (" + _poly_qstr(self.den, L) + ")"
        return self.to_str()

    # -- numerics ------------------------------------------------------------

    def eval_numeric(self, ctx: "NumericContext"):
        """Value at v = q^(1/L) as an mpmath real at ctx precision."""
        with mpmath.workdps(ctx.precision):
            v = ctx._v()
            num = _poly_eval(self.num, v)
            den = _poly_eval(self.den, v)
            floor = mpmath.mpf(10) ** (-(ctx.precision - 10))
            if abs(den) < floor:
                raise ScalarPoleError("denominator below precision floor")
            return num / den


def _poly_str(p) -> str:
    if not p:
        return "0"
    terms = [f"{c}*v^{k}" for k, c in sorted(p, key=lambda t: -t[0])]
    return " + ".join(terms)


def _poly_qstr(p, L: int) -> str:
    if not p:
        return "0"
    out = []
    for k, c in sorted(p, key=lambda t: -t[0]):
        e = k // L
        if e == 0:
            out.append(f"{c}")
        else:
            mag = "q" if e == 1 else f"q^{e}"
            if c == 1:
                out.append(mag)
            elif c == -1:
                out.append("-" + mag)
            else:
                out.append(f"{c}*{mag}")
    return " + ".join(out)


def _poly_parse(text: str) -> dict:
    text = text.strip()
    if text == "0":
        return {}
    out: dict = {}
    for term in text.split(" + "):
        coeff, _, exp = term.partition("*v^")
        if not exp:
            raise ValueError(f"malformed polynomial term: {term!r}")
        out[int(exp)] = out.get(int(exp), 0) + RAT(coeff)
    return _pnormal(out)


def _poly_eval(p, v):
    total = mpmath.mpf(0)
    for k, c in p:
        total += mpmath.mpf(int(c.numerator)) / int(c.denominator) * v ** k
    return total


_ZERO = Scalar.__new__(Scalar)
_ZERO.num = ()
_ZERO.den = _ONE_POLY
_ZERO._hash = None

_ONE = Scalar.__new__(Scalar)
_ONE.num = _ONE_POLY
_ONE.den = _ONE_POLY
_ONE._hash = None


def q_pow(x, L: int) -> Scalar:
    """q^x as a scalar, i.e. v^(L x); x may be rational with L*x integral."""
    x = RAT(x)
    k = x * L
    if k.denominator != 1:
        raise NonIntegralExponentError(f"q^{x} is not an integer power of v (L={L})")
    return Scalar.v_pow(int(k))


def qnum(z, L: int) -> Scalar:
    """The q-number (q^z - q^-z)/(q - q^-1), with q = v^L."""
    z = RAT(z)
    k = z * L
    if k.denominator != 1:
        raise NonIntegralExponentError(f"[{z}]_q needs q^{z} integral in v (L={L})")
    k = int(k)
    if k == 0:
        return _ZERO
    num = Scalar.v_pow(k) - Scalar.v_pow(-k)
    den = Scalar.v_pow(L) - Scalar.v_pow(-L)
    return num / den


def qint_gauss(n: int, step: int) -> Scalar:
    """[n] at base v^step as the Laurent polynomial sum v^(step(n-1-2t))."""
    if n == 0:
        return _ZERO
    sign = 1
    if n < 0:
        n, sign = -n, -1
    coeffs = {step * (n - 1 - 2 * t): RAT(sign) for t in range(n)}
    return Scalar.from_poly(coeffs)


def qfact_gauss(n: int, step: int) -> Scalar:
    out = Scalar.one()
    for t in range(2, n + 1):
        out = out * qint_gauss(t, step)
    return out


def qbinom_gauss(n: int, k: int, step: int) -> Scalar:
    """Gaussian binomial [n choose k] at base v^step (a Laurent polynomial)."""
    num = Scalar.one()
    for t in range(k):
        num = num * qint_gauss(n - t, step)
    return num / qfact_gauss(k, step)


# ---------------------------------------------------------------------------
# Fourier polynomials on the compact torus
# ---------------------------------------------------------------------------

class FourierPoly:
    """Finite sum of torus characters nu -> q^(i nu, lam), lam in the weight
    lattice, with Scalar coefficients.  Keys are integer coordinate tuples in
    the fundamental-weight basis."""

    __slots__ = ("rank", "coeffs")

    def __init__(self, rank: int, coeffs: Mapping[tuple, Scalar] | None = None):
        self.rank = rank
        out = {}
        for lam, c in (coeffs or {}).items():
            if len(lam) != rank or not all(isinstance(x, int) for x in lam):
                raise ValueError(f"non-lattice Fourier index: {lam!r}")
            if not c.is_zero():
                out[tuple(lam)] = c
        self.coeffs = out

    @staticmethod
    def zero(rank: int) -> "FourierPoly":
        return FourierPoly(rank)

    @staticmethod
    def constant(rank: int, c: Scalar) -> "FourierPoly":
        return FourierPoly(rank, {(0,) * rank: c})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return (isinstance(other, FourierPoly) and self.rank == other.rank
                and self.coeffs == other.coeffs)

    def __add__(self, other: "FourierPoly") -> "FourierPoly":
        out = dict(self.coeffs)
        for lam, c in other.coeffs.items():
            s = out.get(lam, _ZERO) + c
            if s.is_zero():
                out.pop(lam, None)
            else:
                out[lam] = s
        return FourierPoly(self.rank, out)

    def __sub__(self, other: "FourierPoly") -> "FourierPoly":
        return self + other.scale(Scalar.from_rat(-1))

    def scale(self, c: Scalar) -> "FourierPoly":
        if c.is_zero():
            return FourierPoly(self.rank)
        return FourierPoly(self.rank, {lam: v * c for lam, v in self.coeffs.items()})

    def __mul__(self, other: "FourierPoly") -> "FourierPoly":
        out: dict = {}
        for la, ca in self.coeffs.items():
            for lb, cb in other.coeffs.items():
                lam = tuple(x + y for x, y in zip(la, lb))
                s = out.get(lam, _ZERO) + ca * cb
                if s.is_zero():
                    out.pop(lam, None)
                else:
                    out[lam] = s
        return FourierPoly(self.rank, out)

    def conjugate(self) -> "FourierPoly":
        """Index conjugation lam -> -lam (complex conjugation on characters)."""
        return FourierPoly(self.rank, {tuple(-x for x in lam): c
                                       for lam, c in self.coeffs.items()})

    def integrate(self) -> Scalar:
        """Exact integral over the torus with normalized Lebesgue measure."""
        return self.coeffs.get((0,) * self.rank, _ZERO)

    def relabel(self, f: Callable[[tuple], tuple]) -> "FourierPoly":
        out: dict = {}
        for lam, c in self.coeffs.items():
            key = f(lam)
            s = out.get(key, _ZERO) + c
            if not s.is_zero():
                out[key] = s
            else:
                out.pop(key, None)
        return FourierPoly(self.rank, out)

    def eval_exact(self, q_pow_of_index: Callable[[tuple], Scalar]) -> Scalar:
        """Substitute an exact character value q^(lam, .) per index."""
        return Scalar.sum(c * q_pow_of_index(lam) for lam, c in self.coeffs.items())

    def eval_numeric(self, ctx: "NumericContext"):
        """Complex value at the context's torus point nu (mpmath mpc)."""
        if ctx.nu is None:
            raise ValueError("numeric context has no torus sample point")
        with mpmath.workdps(ctx.precision):
            h = mpmath.log(mpmath.mpf(ctx.q))
            total = mpmath.mpc(0)
            for lam, c in self.coeffs.items():
                t = mpmath.mpf(0)
                for x, nx in zip(lam, ctx.nu):
                    t += x * mpmath.mpf(nx)
                total += c.eval_numeric(ctx) * mpmath.expjpi(h * t / mpmath.pi)
            return total

    def to_json(self) -> dict:
        return {",".join(map(str, lam)): c.to_str()
                for lam, c in sorted(self.coeffs.items())}

    @staticmethod
    def from_json(rank: int, data: Mapping[str, str]) -> "FourierPoly":
        out = {}
        for key, val in data.items():
            lam = tuple(int(x) for x in key.split(","))
            out[lam] = Scalar.from_str(val)
        return FourierPoly(rank, out)

    def __repr__(self):
        inner = ", ".join(f"{lam}: {c.to_str()}" for lam, c in sorted(self.coeffs.items()))
        return f"FourierPoly({{{inner}}})"


@dataclass(frozen=True)
class NumericContext:
    """Evaluation point: real q > 0 (not 1), digits of working precision,
    the root-datum exponent denominator L, and optionally a torus point nu
    given by its pairings with the fundamental weights."""

    q: float | str
    L: int
    precision: int = 50
    nu: tuple | None = None

    def __post_init__(self):
        qv = mpmath.mpf(self.q)
        if not qv > 0 or qv == 1:
            raise ValueError("q must be a positive real different from 1")
        if self.precision < 30:
            raise ValueError("precision must be at least 30 digits")
        if self.L < 1:
            raise ValueError("L must be a positive integer")

    def _v(self):
        return mpmath.root(mpmath.mpf(self.q), self.L)

    def with_nu(self, nu) -> "NumericContext":
        return NumericContext(self.q, self.L, self.precision, tuple(nu))
