"""Exact dyadic arithmetic, the standard enumeration of binary strings,
and the growth hierarchy.

A dyadic rational is kept as mantissa / 2**precision with precision >= 0 and
the representation eagerly normalized (odd mantissa unless the value is 0,
in which case precision is 0).  All arithmetic is exact; the only lossy
operation is `round_at`, the canonical rounding onto a coarser grid, and its
direction (half toward +infinity) is part of the contract because canonical
computations at different precisions must agree deterministically.

Binary strings are plain Python `str` over {'0','1'}; the empty string is
the root of Cantor space.  `bton`/`ntob` give the standard length-then-lex
enumeration with bton('') == 0.
"""

from __future__ import annotations

from fractions import Fraction

from .config import check_magnitude
from .errors import DomainError, ResourceError

__all__ = [
    "Dyadic",
    "Approximable",
    "ZERO",
    "ONE",
    "HALF",
    "parse_dyadic",
    "frac_round_at",
    "as_fraction",
    "bton",
    "ntob",
    "succ",
    "pred",
    "succ_pred",
    "smash",
    "growth",
    "dyadic_arith",
    "validate_string",
    "is_prefix",
    "strings_of_length",
]


class Dyadic:
    """An exact dyadic rational mantissa / 2**precision.

    Instances are immutable and normalized on construction.  Arithmetic
    (+, -, *, comparisons) is closed and exact.  Comparisons also accept
    ints.  Division is deliberately absent: quotients of dyadics need not
    be dyadic — go through Fraction for that.
    """

    __slots__ = ("mantissa", "precision")

    def __init__(self, mantissa: int, precision: int = 0):
        if precision < 0:
            raise DomainError("precision must be >= 0")
        if mantissa == 0:
            precision = 0
        elif precision and mantissa % 2 == 0:
            # strip shared powers of two, but never push precision below 0
            tz = ((mantissa & -mantissa).bit_length() - 1)
            k = tz if tz < precision else precision
            mantissa >>= k
            precision -= k
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):  # pragma: no cover - immutability
        raise AttributeError("Dyadic is immutable")

    # -- conversions ---------------------------------------------------

    @classmethod
    def from_fraction(cls, q: Fraction | int) -> "Dyadic":
        q = Fraction(q)
        d = q.denominator
        if d & (d - 1):
            raise DomainError(f"{q} is not dyadic")
        return cls(q.numerator, d.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.precision)

    def __float__(self) -> float:
        return self.mantissa / (1 << self.precision)

    # -- arithmetic ----------------------------------------------------

    def _align(self, other: "Dyadic"):
        p = self.precision if self.precision >= other.precision else other.precision
        return (self.mantissa << (p - self.precision),
                other.mantissa << (p - other.precision), p)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, p = self._align(other)
        return Dyadic(a + b, p)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, p = self._align(other)
        return Dyadic(a - b, p)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Dyadic(self.mantissa * other.mantissa,
                      self.precision + other.precision)

    __rmul__ = __mul__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.precision)

    def __abs__(self):
        return Dyadic(abs(self.mantissa), self.precision)

    # -- comparisons ---------------------------------------------------

    def _cmp(self, other) -> int:
        a, b, _ = self._align(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.mantissa == other.mantissa and self.precision == other.precision

    def __hash__(self):
        return hash((self.mantissa, self.precision))

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) >= 0

    def __bool__(self):
        return self.mantissa != 0

    # -- rounding / rendering ------------------------------------------

    def round_at(self, r: int) -> "Dyadic":
        """Canonical rounding onto the grid with denominator 2**r.

        Round half toward +infinity; exact (identity) when already on the
        grid.  Error is at most 2**-(r+1).
        """
        if r < 0:
            raise DomainError("rounding precision must be >= 0")
        if self.precision <= r:
            return self
        shift = self.precision - r
        m = (self.mantissa + (1 << (shift - 1))) >> shift
        return Dyadic(m, r)

    def mantissa_at(self, r: int) -> int:
        """Mantissa on the 2**-r grid; requires the value to lie on it."""
        if self.precision > r:
            raise DomainError(f"value {self!r} not on grid 2^-{r}")
        return self.mantissa << (r - self.precision)

    def render(self, precision: int | None = None) -> str:
        """`mantissa/2^precision`, or a bare integer at precision 0.

        With an explicit `precision`, the value is shown un-normalized on
        that grid (canonical computations report at the precision they were
        asked for).
        """
        if precision is None:
            if self.precision == 0:
                return str(self.mantissa)
            return f"{self.mantissa}/2^{self.precision}"
        if precision == 0:
            return str(self.mantissa_at(0))
        return f"{self.mantissa_at(precision)}/2^{precision}"

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.precision})"

    def __str__(self):
        return self.render()


def _coerce(x):
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, int):
        return Dyadic(x, 0)
    return NotImplemented


ZERO = Dyadic(0, 0)
ONE = Dyadic(1, 0)
HALF = Dyadic(1, 1)


def parse_dyadic(text: str) -> Dyadic:
    """Parse `m/2^p`, `p/q` with q a power of two, or a plain integer."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            if den.startswith("2^"):
                return Dyadic(int(num), int(den[2:]))
            return Dyadic.from_fraction(Fraction(int(num), int(den)))
        return Dyadic(int(text), 0)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse dyadic {text!r}: {exc}") from None


def frac_round_at(q: Fraction | Dyadic | int, r: int) -> Dyadic:
    """Canonical rounding of an arbitrary rational onto the 2**-r grid.

    Same convention as Dyadic.round_at (half toward +infinity); exact when
    q already lies on the grid.
    """
    if isinstance(q, Dyadic):
        return q.round_at(r)
    q = Fraction(q)
    n, d = q.numerator, q.denominator
    # floor((n * 2^r) / d + 1/2) computed in integers
    m = (2 * (n << r) + d) // (2 * d)
    return Dyadic(m, r)


def as_fraction(x) -> Fraction:
    if isinstance(x, Dyadic):
        return x.to_fraction()
    if isinstance(x, Approximable):
        return x.exact
    return Fraction(x)


class Approximable:
    """An exact rational exposed through canonical approximations.

    Quotients that fall off the dyadic grid are still exactly known here;
    `approx(r)` returns the canonical rounding at precision r and `exact`
    is the underlying Fraction.
    """

    __slots__ = ("exact",)

    def __init__(self, value: Fraction | int | Dyadic):
        object.__setattr__(self, "exact", as_fraction(value))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("Approximable is immutable")

    def approx(self, r: int) -> Dyadic:
        return frac_round_at(self.exact, r)

    def is_dyadic(self) -> bool:
        d = self.exact.denominator
        return not (d & (d - 1))

    def as_dyadic(self) -> Dyadic:
        return Dyadic.from_fraction(self.exact)

    def __eq__(self, other):
        if isinstance(other, Approximable):
            return self.exact == other.exact
        return self.exact == as_fraction(other)

    def __hash__(self):
        return hash(self.exact)

    def __repr__(self):
        return f"Approximable({self.exact})"


# ---------------------------------------------------------------------------
# binary strings and the standard enumeration
# ---------------------------------------------------------------------------

_BITS = frozenset("01")


def validate_string(w: str) -> str:
    if w and not _BITS.issuperset(w):
        raise DomainError(f"not a binary string: {w!r}")
    return w


def is_prefix(u: str, w: str) -> bool:
    return w.startswith(u)


def strings_of_length(n: int):
    """All binary strings of length exactly n, in lexicographic order."""
    return (format(i, f"0{n}b") if n else "" for i in range(1 << n))


def bton(w: str) -> int:
    """Index of w in the length-then-lexicographic enumeration ('' -> 0)."""
    validate_string(w)
    return int("1" + w, 2) - 1


def ntob(n: int) -> str:
    """Inverse of bton."""
    if n < 0:
        raise DomainError("enumeration index must be >= 0")
    return bin(n + 1)[3:]


def succ(w: str) -> str:
    return ntob(bton(w) + 1)


def pred(w: str) -> str:
    n = bton(w)
    return ntob(n - 1) if n else ""


def succ_pred(w: str) -> tuple[str, str]:
    """Both neighbours in the enumeration; predecessor of '' is ''."""
    return succ(w), pred(w)


def smash(u: str, v: str) -> str:
    """All-ones string of length |u| * |v|."""
    validate_string(u)
    validate_string(v)
    n = len(u) * len(v)
    check_magnitude(n, "smash output")
    return "1" * n


# ---------------------------------------------------------------------------
# growth hierarchy
# ---------------------------------------------------------------------------

def _floor_log2(n: int) -> int:
    return n.bit_length() - 1 if n >= 2 else 0


def growth(i: int, n: int) -> int:
    """Level-i growth function: 2n, then n**2, then iterated exponentials.

    Levels >= 2 apply the previous level to floor(log2 n) and exponentiate,
    so growth(2, 2**k) == 2**(k*k).  Results whose bit-length would exceed
    the magnitude cap raise ResourceError instead of being built.
    """
    if i < 0:
        raise DomainError("growth level must be >= 0")
    if n < 0:
        raise DomainError("growth argument must be >= 0")
    if i == 0:
        return 2 * n
    if i == 1:
        r = n * n
        check_magnitude(r.bit_length(), "growth value")
        return r
    e = growth(i - 1, _floor_log2(n))
    check_magnitude(e + 1, "growth value")
    return 1 << e


_ARITH_OPS = ("add", "sub", "mul", "cmp", "min", "max")


def dyadic_arith(a: Dyadic, b: Dyadic, op: str):
    """Tiny dispatcher over exact dyadic arithmetic (used by the CLI)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "cmp":
        c = a._cmp(b)
        return "less" if c < 0 else ("greater" if c > 0 else "equal")
    if op == "min":
        return a if a <= b else b
    if op == "max":
        return a if a >= b else b
    raise DomainError(f"unknown operation {op!r}; expected one of {_ARITH_OPS}")
