"""Exact multivariate Laurent polynomials and rational functions.

Coefficients live in the integers or in Z/2.  The ring and the ordered variable
list form a context (:class:`PolyRing`) shared by every value built in it, and
arithmetic between values of different contexts raises :class:`RingMismatch`.

Terms are kept in a dict keyed by exponent tuples.  The canonical term order is
graded-lexicographic: a term is larger when its total degree is larger, ties
broken lexicographically on the exponent vector in context variable order.
"""

from __future__ import annotations

import ast
import enum
from dataclasses import dataclass
from operator import add, sub
from typing import Iterable, Mapping

__all__ = [
    "CoeffRing",
    "PolyRing",
    "LaurentPoly",
    "RationalFn",
    "Indivisible",
    "RingMismatch",
    "lp_add",
    "lp_mul",
    "lp_exact_div",
    "rf_is_laurent",
    "rf_substitute",
    "parse_rational",
]

# modulus and evaluation point for hashing rational functions
_HASH_PRIME = (1 << 61) - 1


class CoeffRing(enum.Enum):
    Z = "z"
    Z2 = "z2"


class Indivisible(ArithmeticError):
    """Raised when an exact division has no Laurent polynomial quotient."""


class RingMismatch(TypeError):
    """Raised when values from different contexts meet in one operation."""


@dataclass(frozen=True)
class PolyRing:
    """Ordered variable names plus coefficient ring."""

    variables: tuple[str, ...]
    coeffs: CoeffRing = CoeffRing.Z

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names in {self.variables}")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def zero(self) -> LaurentPoly:
        return LaurentPoly(self, {})

    def one(self) -> LaurentPoly:
        return self.const(1)

    def const(self, c: int) -> LaurentPoly:
        return LaurentPoly(self, {(0,) * self.nvars: c})

    def var(self, name: str | int) -> LaurentPoly:
        i = name if isinstance(name, int) else self.index(name)
        exp = [0] * self.nvars
        exp[i] = 1
        return LaurentPoly(self, {tuple(exp): 1})

    def gens(self) -> list[LaurentPoly]:
        return [self.var(i) for i in range(self.nvars)]

    def monomial(self, exps: Iterable[int], c: int = 1) -> LaurentPoly:
        exps = tuple(exps)
        if len(exps) != self.nvars:
            raise ValueError("exponent vector length does not match the variables")
        return LaurentPoly(self, {exps: c})

    def with_coeffs(self, coeffs: CoeffRing) -> PolyRing:
        return PolyRing(self.variables, coeffs)

    def parse(self, text: str) -> RationalFn:
        return parse_rational(text, self)


def _order_key(exp: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    return (sum(exp), exp)


class LaurentPoly:
    """Immutable Laurent polynomial over a :class:`PolyRing`."""

    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: PolyRing, terms: Mapping[tuple[int, ...], int]):
        mod2 = ring.coeffs is CoeffRing.Z2
        clean = {}
        for exp, c in terms.items():
            if mod2:
                c %= 2
            if c:
                clean[exp] = c
        self.ring = ring
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, ring: PolyRing, terms: dict) -> LaurentPoly:
        # trusted constructor: terms already reduced and free of zeros
        p = cls.__new__(cls)
        p.ring = ring
        p._terms = terms
        p._hash = None
        return p

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, ...], int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_constant(self) -> bool:
        zero = (0,) * self.ring.nvars
        return not self._terms or (len(self._terms) == 1 and zero in self._terms)

    def constant_value(self) -> int:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self._terms.get((0,) * self.ring.nvars, 0)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms from largest to smallest in the canonical order."""
        return sorted(self._terms.items(), key=lambda t: _order_key(t[0]), reverse=True)

    def leading_term(self) -> tuple[tuple[int, ...], int]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        exp = max(self._terms, key=_order_key)
        return exp, self._terms[exp]

    def min_exponents(self) -> tuple[int, ...]:
        """Componentwise minimum exponent: the monomial content."""
        if not self._terms:
            return (0,) * self.ring.nvars
        return tuple(map(min, zip(*self._terms)))

    def max_exponents(self) -> tuple[int, ...]:
        if not self._terms:
            return (0,) * self.ring.nvars
        return tuple(map(max, zip(*self._terms)))

    def support_vars(self) -> set[int]:
        used = set()
        for exp in self._terms:
            used.update(i for i, e in enumerate(exp) if e)
        return used

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: LaurentPoly) -> None:
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring} vs {other.ring}")

    def _coerce(self, other) -> LaurentPoly:
        if isinstance(other, LaurentPoly):
            self._check(other)
            return other
        if isinstance(other, int):
            return self.ring.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        mod2 = self.ring.coeffs is CoeffRing.Z2
        for exp, c in other._terms.items():
            s = terms.get(exp, 0) + c
            if mod2:
                s %= 2
            if s:
                terms[exp] = s
            else:
                terms.pop(exp, None)
        return LaurentPoly._raw(self.ring, terms)

    __radd__ = __add__

    def __neg__(self):
        if self.ring.coeffs is CoeffRing.Z2:
            return self
        return LaurentPoly._raw(self.ring, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, RationalFn):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        terms: dict = {}
        get = terms.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(map(add, ea, eb))
                terms[e] = get(e, 0) + ca * cb
        mod2 = self.ring.coeffs is CoeffRing.Z2
        if mod2:
            terms = {e: c % 2 for e, c in terms.items()}
        return LaurentPoly._raw(self.ring, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def scale_monomial(self, exps: tuple[int, ...], c: int = 1) -> LaurentPoly:
        """Multiply by the monomial c * x^exps."""
        if c == 1:
            return LaurentPoly._raw(
                self.ring, {tuple(map(add, e, exps)): v for e, v in self._terms.items()}
            )
        return LaurentPoly(
            self.ring, {tuple(map(add, e, exps)): v * c for e, v in self._terms.items()}
        )

    def __pow__(self, n: int) -> LaurentPoly:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if not self.is_monomial():
                raise Indivisible("negative power of a non-monomial")
            (exp, c), = self._terms.items()
            if c not in (1, -1):
                raise Indivisible("negative power of a non-unit coefficient")
            return LaurentPoly(self.ring, {tuple(e * n for e in exp): c ** (-n)})
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, (LaurentPoly, int)):
            return RationalFn(self, other)
        return NotImplemented

    # -- comparison and display -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.const(other)
        if isinstance(other, RationalFn):
            return other == self
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.ring == other.ring and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(RationalFn(self))
        return self._hash

    def eval_mod(self, point: list[int], p: int = _HASH_PRIME) -> int:
        total = 0
        for exp, c in self._terms.items():
            term = c
            for x, e in zip(point, exp):
                if e:
                    term = term * pow(x, e, p) % p
            total += term
        return total % p

    def __str__(self):
        if not self._terms:
            return "0"
        names = self.ring.variables
        out = ""
        for exp, c in self.sorted_terms():
            factors = [names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exp) if e]
            if abs(c) != 1 or not factors:
                factors.insert(0, str(abs(c)))
            body = "*".join(factors)
            if not out:
                out = body if c > 0 else "-" + body
            else:
                out += (" + " if c > 0 else " - ") + body
        return out

    def __repr__(self):
        return f"LaurentPoly({self})"


def lp_add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    a._check(b)
    return a + b


def lp_mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    a._check(b)
    return a * b


def _divmod_coeff(a: int, b: int, mod2: bool) -> int | None:
    if mod2:
        return a  # b is 1 in Z/2
    q, r = divmod(a, b)
    return None if r else q


def lp_exact_div(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Return q with q*b == a, or raise :class:`Indivisible`.

    The monomial content of both operands is stripped first, so the core is
    long division of ordinary polynomials by the leading term in the canonical
    order.  Stripping is harmless because monomials are units.
    """
    a._check(b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if a.is_zero():
        return a
    ring = a.ring
    mod2 = ring.coeffs is CoeffRing.Z2
    ca, cb = a.min_exponents(), b.min_exponents()
    neg_ca = tuple(-e for e in ca)
    neg_cb = tuple(-e for e in cb)
    rem = {tuple(map(add, e, neg_ca)): c for e, c in a.items()}
    div = [(tuple(map(add, e, neg_cb)), c) for e, c in b.items()]
    div.sort(key=lambda t: _order_key(t[0]), reverse=True)
    lead_exp, lead_c = div[0]
    rest = div[1:]
    quot = {}
    while rem:
        exp = max(rem, key=_order_key)
        c = rem[exp]
        shift = tuple(map(sub, exp, lead_exp))
        if min(shift) < 0:
            raise Indivisible(f"({a}) / ({b})")
        qc = _divmod_coeff(c, lead_c, mod2)
        if qc is None:
            raise Indivisible(f"({a}) / ({b})")
        quot[shift] = qc
        del rem[exp]
        for e, v in rest:
            t = tuple(map(add, e, shift))
            s = rem.get(t, 0) - qc * v
            if mod2:
                s %= 2
            if s:
                rem[t] = s
            else:
                rem.pop(t, None)
    q = LaurentPoly._raw(ring, quot).scale_monomial(tuple(map(sub, ca, cb)))
    if q * b != a:
        raise AssertionError("exact division failed the re-multiplication check")
    return q


def _eval_point(nvars: int) -> list[int]:
    # fixed pseudo-random nonzero residues; any fixed choice keeps hash == consistent
    return [(6364136223846793005 * (i + 1) + 1442695040888963407) % _HASH_PRIME or 1
            for i in range(nvars)]


class RationalFn:
    """Quotient of two Laurent polynomials, normalized without a gcd.

    Normalization moves the monomial content of the denominator into the
    numerator, replaces num/den by the quotient whenever the division is exact
    and makes the leading denominator coefficient positive.  Equality is decided
    by cross-multiplication, so it is exact even when the fraction is not fully
    reduced.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: LaurentPoly | int, den: LaurentPoly | int = 1):
        if isinstance(num, int):
            if not isinstance(den, LaurentPoly):
                raise TypeError("an integer numerator needs a polynomial denominator")
            num = den.ring.const(num)
        if isinstance(den, int):
            den = num.ring.const(den)
        num._check(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        content = den.min_exponents()
        if any(content):
            neg = tuple(-e for e in content)
            den = den.scale_monomial(neg)
            num = num.scale_monomial(neg)
        if not den.is_constant() or den.constant_value() != 1:
            try:
                num = lp_exact_div(num, den)
                den = num.ring.one()
            except Indivisible:
                pass
        if num.ring.coeffs is CoeffRing.Z and den.leading_term()[1] < 0:
            num, den = -num, -den
        if num.is_zero():
            den = num.ring.one()
        self.num = num
        self.den = den
        self._hash = None

    @property
    def ring(self) -> PolyRing:
        return self.num.ring

    @classmethod
    def lift(cls, x) -> RationalFn:
        return x if isinstance(x, RationalFn) else cls(x)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_laurent(self) -> bool:
        return rf_is_laurent(self)

    def as_laurent(self) -> LaurentPoly:
        if not self.is_laurent():
            raise Indivisible(f"{self} is not a Laurent polynomial")
        return self.num

    def _coerce(self, other) -> RationalFn:
        if isinstance(other, RationalFn):
            self.num._check(other.num)
            return other
        if isinstance(other, LaurentPoly):
            self.num._check(other)
            return RationalFn(other)
        if isinstance(other, int):
            return RationalFn(self.ring.const(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int) -> RationalFn:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return RationalFn(self.den ** -n, self.num ** -n)
        return RationalFn(self.num ** n, self.den ** n)

    def __eq__(self, other):
        if isinstance(other, (LaurentPoly, int)):
            other = self._coerce(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        if self.ring != other.ring:
            return False
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        if self._hash is None:
            pt = _eval_point(self.ring.nvars)
            p = _HASH_PRIME
            d = self.den.eval_mod(pt, p)
            if d == 0:
                self._hash = 0
            else:
                self._hash = hash((self.ring, self.num.eval_mod(pt, p) * pow(d, -1, p) % p))
        return self._hash

    def __str__(self):
        if self.den.is_constant() and self.den.constant_value() == 1:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def __repr__(self):
        return f"RationalFn({self})"


def _is_unit_monomial(p: LaurentPoly) -> bool:
    if not p.is_monomial():
        return False
    (_, c), = p.items()
    return c in (1, -1)


def rf_is_laurent(f: RationalFn) -> bool:
    """True iff the normalized denominator is a unit times a monomial."""
    return _is_unit_monomial(f.den)


def _powers(p: LaurentPoly, top: int, cache: dict) -> LaurentPoly:
    # cache[k] holds p**k; fill upward
    k = max(cache)
    while k < top:
        cache[k + 1] = cache[k] * p
        k += 1
    return cache[top]


def _substitute_poly(p: LaurentPoly, values: list[RationalFn], target: PolyRing):
    """Evaluate p at the given values; returns (numerator, denominator)."""
    lo, hi = p.min_exponents(), p.max_exponents()
    n = p.ring.nvars
    plan = []
    for i in range(n):
        v = values[i]
        if lo[i] == 0 and hi[i] == 0:
            plan.append(None)
            continue
        num_unit = _is_unit_monomial(v.num)
        low = 0 if num_unit else max(-lo[i], 0)
        high = max(hi[i], 0)
        plan.append((v, num_unit, low, high, {0: target.one()}, {0: target.one()}))
    num = target.zero()
    for exp, c in p.items():
        term = target.const(c)
        for i, e in enumerate(exp):
            if plan[i] is None:
                continue
            v, num_unit, low, high, npow, dpow = plan[i]
            if num_unit:
                factor = v.num ** e if e else target.one()
            else:
                factor = _powers(v.num, e + low, npow)
            term = term * factor * _powers(v.den, high - e, dpow)
        num = num + term
    den = target.one()
    for i in range(n):
        if plan[i] is None:
            continue
        v, num_unit, low, high, npow, dpow = plan[i]
        den = den * _powers(v.den, high, dpow)
        if not num_unit:
            den = den * _powers(v.num, low, npow)
    return num, den


def rf_substitute(f: RationalFn | LaurentPoly, assignment: Mapping[str, RationalFn | LaurentPoly]
                  ) -> RationalFn:
    """Simultaneously replace every variable of f and normalize.

    Every variable of f's context must be assigned; values must share one
    target context.
    """
    f = RationalFn.lift(f)
    src = f.ring
    missing = [v for v in src.variables if v not in assignment]
    if missing:
        raise KeyError(f"unassigned variables: {missing}")
    values = [RationalFn.lift(assignment[v]) for v in src.variables]
    if not values:
        return f
    target = values[0].ring
    for v in values:
        if v.ring != target:
            raise RingMismatch("assigned values live in different contexts")
        if v.is_zero():
            # zero is legal only for variables absent from f
            pass
    used = f.num.support_vars() | f.den.support_vars()
    for i in used:
        if values[i].is_zero():
            raise ZeroDivisionError(f"variable {src.variables[i]} assigned zero")
    n1, d1 = _substitute_poly(f.num, values, target)
    n2, d2 = _substitute_poly(f.den, values, target)
    if n2.is_zero():
        raise ZeroDivisionError("denominator vanishes after substitution")
    return RationalFn(n1 * d2, d1 * n2)


_BINOPS = {ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow}


def parse_rational(text: str, ring: PolyRing) -> RationalFn:
    """Parse an arithmetic expression in the ring's variables.

    Accepts integers, variable names, + - * / and integer powers written
    with ``^`` or ``**``; the canonical serialization is a special case.
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}: {exc.msg}") from None

    def walk(node) -> RationalFn:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return RationalFn(ring.const(node.value))
        if isinstance(node, ast.Name):
            if node.id not in ring.variables:
                raise ValueError(f"unknown variable {node.id!r} in {text!r}")
            return RationalFn(ring.var(node.id))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = walk(node.operand)
            return -inner if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            if isinstance(node.op, ast.Pow):
                exp = node.right
                sign = 1
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    sign, exp = -1, exp.operand
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise ValueError(f"non-integer exponent in {text!r}")
                return walk(node.left) ** (sign * exp.value)
            left, right = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            return left / right
        raise ValueError(f"unsupported syntax in {text!r}")

    return walk(tree)
