"""Rational polynomials, number fields, exact field arithmetic and embeddings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

import mpmath

from . import linalg

DEFAULT_PRECISION = 30


class FieldMismatchError(ValueError):
    pass


class DegenerateBasisError(ValueError):
    pass


class EmbeddingError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


class FactorizationError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class RatPolynomial:
    """Polynomial over Q; ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def x(cls) -> "RatPolynomial":
        return cls([0, 1])

    @classmethod
    def constant(cls, c) -> "RatPolynomial":
        return cls([c])

    @classmethod
    def from_roots(cls, roots: Iterable) -> "RatPolynomial":
        return reduce(lambda acc, r: acc * cls([-_frac(r), 1]), roots, cls([1]))

    @classmethod
    def parse(cls, text: str) -> "RatPolynomial":
        """Parse ``"(x-1)(x-2)"``, ``"x^2-2"`` and similar expressions in ``x``."""
        import sympy
        from sympy.parsing.sympy_parser import (
            convert_xor,
            implicit_multiplication_application,
            parse_expr,
            standard_transformations,
        )

        x = sympy.Symbol("x")
        tr = standard_transformations + (implicit_multiplication_application, convert_xor)
        expr = parse_expr(text, local_dict={"x": x}, transformations=tr)
        poly = sympy.Poly(sympy.expand(expr), x)
        if not poly.domain.is_QQ and not poly.domain.is_ZZ:
            raise ValueError(f"polynomial {text!r} does not have rational coefficients")
        return cls(Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs()))

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "RatPolynomial":
        return cls(Fraction(s) for s in data)

    def to_json(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.leading == 1

    def monic(self) -> "RatPolynomial":
        lc = self.leading
        return RatPolynomial(c / lc for c in self.coeffs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_numeric(self, z):
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
        return acc

    def __add__(self, other) -> "RatPolynomial":
        if not isinstance(other, RatPolynomial):
            other = RatPolynomial([other])
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return RatPolynomial(x + y for x, y in zip(a, b))

    def __neg__(self) -> "RatPolynomial":
        return RatPolynomial(-c for c in self.coeffs)

    def __sub__(self, other) -> "RatPolynomial":
        if not isinstance(other, RatPolynomial):
            other = RatPolynomial([other])
        return self + (-other)

    __radd__ = __add__

    def __rsub__(self, other) -> "RatPolynomial":
        return (-self) + other

    def __mul__(self, other) -> "RatPolynomial":
        if not isinstance(other, RatPolynomial):
            return RatPolynomial(c * _frac(other) for c in self.coeffs)
        if self.is_zero() or other.is_zero():
            return RatPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RatPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "RatPolynomial":
        return reduce(lambda acc, _: acc * self, range(k), RatPolynomial([1]))

    def divmod(self, other: "RatPolynomial") -> tuple["RatPolynomial", "RatPolynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.leading
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] / lc
            if c:
                quot[k - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= c * b
        return RatPolynomial(quot), RatPolynomial(rem[:dq] if dq > 0 else [])

    def __mod__(self, other: "RatPolynomial") -> "RatPolynomial":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "RatPolynomial") -> "RatPolynomial":
        return self.divmod(other)[0]

    def derivative(self) -> "RatPolynomial":
        return RatPolynomial(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def gcd(self, other: "RatPolynomial") -> "RatPolynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def is_squarefree(self) -> bool:
        return self.gcd(self.derivative()).degree == 0

    def primitive_integer_coeffs(self) -> list[int]:
        """Integer multiple with content 1, lowest degree first."""
        den = reduce(math.lcm, (c.denominator for c in self.coeffs), 1)
        ints = [int(c * den) for c in self.coeffs]
        g = reduce(math.gcd, ints, 0) or 1
        return [v // g for v in ints]

    def rational_roots(self) -> list[Fraction]:
        """Distinct rational roots, ascending."""
        if self.degree <= 0:
            return []
        ints = self.primitive_integer_coeffs()
        roots = set()
        k = 0
        while ints[k] == 0:
            k += 1
        if k:
            roots.add(Fraction(0))
        ints = ints[k:]
        if len(ints) > 1:
            for p in _divisors(abs(ints[0])):
                for q in _divisors(abs(ints[-1])):
                    for s in (1, -1):
                        r = Fraction(s * p, q)
                        if self(r) == 0:
                            roots.add(r)
        return sorted(roots)

    def __str__(self) -> str:
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and c == 1:
                terms.append(mono)
            elif mono and c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}{'*' + mono if mono else ''}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


def _divisors(n: int) -> list[int]:
    if n == 0:
        return [1]
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


# ---------------------------------------------------------------------------
# number fields


@dataclass(frozen=True)
class NumberField:
    """Q[x]/(q) for a monic irreducible q, with numeric embeddings.

    Embeddings are ordered: real roots ascending, then for each complex pair
    the root with positive imaginary part followed by its conjugate.
    """

    poly: RatPolynomial
    precision: int = field(default=DEFAULT_PRECISION, compare=False)

    def __post_init__(self):
        if not self.poly.is_monic():
            raise ValueError(f"defining polynomial {self.poly} must be monic")
        if self.poly.degree < 1:
            raise ValueError("defining polynomial must have positive degree")

    @classmethod
    def from_string(cls, text: str, precision: int = DEFAULT_PRECISION) -> "NumberField":
        return cls(RatPolynomial.parse(text), precision)

    @property
    def degree(self) -> int:
        return self.poly.degree

    @cached_property
    def roots(self) -> tuple:
        return tuple(embeddings(self, self.precision))

    @property
    def r(self) -> int:
        return sum(1 for z in self.roots if mpmath.im(z) == 0)

    @property
    def s(self) -> int:
        return (self.degree - self.r) // 2

    def roots_complex(self) -> list[complex]:
        return [complex(z) for z in self.roots]

    # element constructors
    def element(self, coords: Iterable) -> "FieldElement":
        cs = [_frac(c) for c in coords]
        if len(cs) < self.degree:
            cs += [Fraction(0)] * (self.degree - len(cs))
        return FieldElement(self, tuple(cs))

    def one(self) -> "FieldElement":
        return self.element([1])

    def zero(self) -> "FieldElement":
        return self.element([])

    def gen(self) -> "FieldElement":
        if self.degree == 1:
            return self.element([-self.poly.coeffs[0]])
        return self.element([0, 1])

    def power_basis(self) -> list["FieldElement"]:
        return [self.element([0] * k + [1]) for k in range(self.degree)]

    def from_poly(self, poly: RatPolynomial) -> "FieldElement":
        return self.element((poly % self.poly).coeffs)

    @cached_property
    def _mult_table(self) -> list[list[Fraction]]:
        # coords of theta^k for k < 2l - 1
        l = self.degree
        out = []
        for k in range(2 * l - 1):
            out.append(list(self.from_poly(RatPolynomial([0] * k + [1])).coords))
        return out

    def to_json(self) -> dict:
        return {"poly": self.poly.to_json(), "degree": self.degree, "r": self.r, "s": self.s}


@dataclass(frozen=True)
class FieldElement:
    owner: NumberField
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != self.owner.degree:
            raise ValueError("coordinate length must equal field degree")

    def _check(self, other: "FieldElement"):
        if other.owner != self.owner:
            raise FieldMismatchError("elements belong to different fields")

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            self._check(other)
            return other
        return self.owner.element([other])

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.owner, tuple(a + b for a, b in zip(self.coords, o.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.owner, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        return field_mul(self, self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        acc = self.owner.one()
        for _ in range(k):
            acc = acc * self
        return acc

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral_power_basis(self) -> bool:
        """Coordinates are integers, i.e. the element lies in Z[theta]."""
        return all(c.denominator == 1 for c in self.coords)

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        rep = regular_rep(self)
        e1 = [Fraction(int(k == 0)) for k in range(self.owner.degree)]
        return FieldElement(self.owner, tuple(linalg.solve(rep, e1)))

    def norm(self) -> Fraction:
        return field_norm(self)

    def trace(self) -> Fraction:
        return field_trace(self)

    def embed(self, k: int):
        """Image under the k-th embedding (mpmath complex)."""
        z = self.owner.roots[k]
        with mpmath.workdps(self.owner.precision + 10):
            acc = mpmath.mpf(0)
            for c in reversed(self.coords):
                acc = acc * z + mpmath.mpf(c.numerator) / c.denominator
            return +acc

    def embed_all(self) -> list:
        return [self.embed(k) for k in range(self.owner.degree)]

    def __repr__(self) -> str:
        return f"FieldElement({[str(c) for c in self.coords]} mod {self.owner.poly})"


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    if a.owner != b.owner:
        raise FieldMismatchError("elements belong to different fields")
    l = a.owner.degree
    table = a.owner._mult_table
    out = [Fraction(0)] * l
    for i, x in enumerate(a.coords):
        if not x:
            continue
        for j, y in enumerate(b.coords):
            if not y:
                continue
            xy = x * y
            for k, t in enumerate(table[i + j]):
                if t:
                    out[k] += xy * t
    return FieldElement(a.owner, tuple(out))


def _power_mult_matrix(a: FieldElement) -> linalg.Matrix:
    # column j holds coords of a * theta^j
    theta = a.owner.gen() if a.owner.degree > 1 else None
    cols = []
    cur = a
    for j in range(a.owner.degree):
        cols.append(list(cur.coords))
        if theta is not None:
            cur = cur * theta
    return linalg.transpose(cols)


def regular_rep(a: FieldElement, basis: Sequence[FieldElement] | None = None) -> linalg.Matrix:
    """Matrix R with R @ coords_basis(b) == coords_basis(a * b)."""
    mpow = _power_mult_matrix(a)
    if basis is None:
        return mpow
    for v in basis:
        a._check(v)
    if len(basis) != a.owner.degree:
        raise DegenerateBasisError("basis length differs from field degree")
    p = linalg.transpose([list(v.coords) for v in basis])
    if linalg.det(p) == 0:
        raise DegenerateBasisError("basis elements are linearly dependent over Q")
    return linalg.matmul(linalg.inverse(p), linalg.matmul(mpow, p))


def field_norm(a: FieldElement) -> Fraction:
    return linalg.det(regular_rep(a))


def field_trace(a: FieldElement) -> Fraction:
    rep = regular_rep(a)
    return sum((rep[i][i] for i in range(len(rep))), Fraction(0))


def embeddings(field: NumberField, precision: int = DEFAULT_PRECISION) -> list:
    """All complex roots of the defining polynomial, ordered as documented on NumberField."""
    if precision < 15:
        raise ValueError("precision must be at least 15 digits")
    q = field.poly
    bound = mpmath.mpf(10) ** (-precision + 2)
    with mpmath.workdps(precision + 10):
        coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(q.coeffs)]
        if q.degree == 1:
            raw = [-coeffs[1] / coeffs[0]]
        else:
            raw = None
            for steps in (100, 400, 2000):
                try:
                    raw = mpmath.polyroots(coeffs, maxsteps=steps, extraprec=4 * precision + 20)
                    break
                except mpmath.libmp.NoConvergence:
                    continue
            if raw is None:
                raise EmbeddingError("root refinement did not converge", float("inf"))
        scale = max(mpmath.mpf(1), *[abs(c) for c in coeffs])
        realtol = mpmath.mpf(10) ** (-(precision // 2))
        reals, cplx = [], []
        for z in raw:
            z = mpmath.mpc(z)
            if abs(mpmath.im(z)) <= realtol * max(1, abs(z)):
                reals.append(mpmath.mpf(mpmath.re(z)))
            elif mpmath.im(z) > 0:
                cplx.append(z)
        reals.sort()
        cplx.sort(key=lambda z: (mpmath.re(z), mpmath.im(z)))
        ordered = list(reals)
        for z in cplx:
            ordered += [z, mpmath.conj(z)]
        if len(ordered) != q.degree:
            raise EmbeddingError("could not pair complex roots", float("nan"))
        worst = max(abs(q.eval_numeric(z)) / scale for z in ordered)
        if worst > bound:
            raise EmbeddingError("root residual exceeds precision bound", float(worst))
    return ordered


# ---------------------------------------------------------------------------
# factorization checks


@dataclass
class FactorizationReport:
    poly: RatPolynomial
    split_roots: list[Fraction]
    aniso_factors: list[RatPolynomial]
    irreducibility: list[str]

    @property
    def l0(self) -> int:
        return len(self.split_roots)

    @property
    def a0(self) -> int:
        return len(self.aniso_factors)

    @property
    def N(self) -> int:
        return self.poly.degree

    @property
    def ok(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {
            "poly": self.poly.to_json(),
            "l0": self.l0,
            "a0": self.a0,
            "split_roots": [str(r) for r in self.split_roots],
            "aniso_factors": [f.to_json() for f in self.aniso_factors],
            "irreducibility": list(self.irreducibility),
        }


SMALL_PRIMES = [p for p in range(2, 200) if all(p % d for d in range(2, int(p**0.5) + 1))]


def irreducibility_status(f: RatPolynomial) -> str:
    """"irreducible", "reducible" or "unverified-irreducible" over Q."""
    if f.degree <= 1:
        return "irreducible"
    if f.rational_roots():
        return "reducible"
    if f.degree <= 3:
        return "irreducible"
    return _modular_pattern_status(f)


def _modular_pattern_status(f: RatPolynomial) -> str:
    # A factorization over Q reduces mod p, so the degree of any rational factor
    # must be a subset sum of the mod-p factor degrees for every good prime.
    import sympy

    x = sympy.Symbol("x")
    ints = f.primitive_integer_coeffs()
    n = f.degree
    possible = set(range(1, n))
    for p in SMALL_PRIMES:
        if ints[-1] % p == 0:
            continue
        fp = sympy.Poly(list(reversed(ints)), x, modulus=p)
        if not fp.is_sqf:
            continue
        degs = [fac.degree() for fac, mult in fp.factor_list()[1] for _ in range(mult)]
        sums = {0}
        for d in degs:
            sums |= {s + d for s in sums}
        possible &= sums
        if not possible:
            return "irreducible"
    return "unverified-irreducible"


def verify_factorization(p: RatPolynomial, factors: Sequence[RatPolynomial]) -> FactorizationReport:
    """Check p = product(factors), squarefree, split part rational, rest root-free."""
    prod = reduce(lambda a, b: a * b, factors, RatPolynomial([1]))
    if prod != p:
        raise FactorizationError(f"product of factors {prod} differs from {p}")
    if not p.is_squarefree():
        raise FactorizationError(f"{p} has a repeated root")
    split_roots: list[Fraction] = []
    aniso: list[RatPolynomial] = []
    flags: list[str] = []
    for f in factors:
        if f.degree < 1:
            continue
        roots = f.rational_roots()
        if len(roots) == f.degree:
            split_roots.extend(roots)
        elif roots:
            raise FactorizationError(
                f"factor {f} has rational roots {[str(r) for r in roots]} but does not split; "
                "separate its linear factors"
            )
        else:
            status = irreducibility_status(f)
            if status == "reducible":
                raise FactorizationError(f"factor {f} is reducible over Q")
            aniso.append(f.monic())
            flags.append(status)
    return FactorizationReport(p, sorted(split_roots), aniso, flags)
