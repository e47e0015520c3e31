"""Computable real functions with moduli of uniform continuity: the pasting
combinator, weighted averages, and the Robin Hood transfer function.

Functions carry an `approx(n, point)` evaluator accurate to 2**-n, a modulus
of uniform continuity, and (for every function built here) an exact rational
evaluator used by the kernel and by cross-tests.  The Robin Hood function has
two routes: a direct four-case evaluation used by the regularization kernel,
and a reference route assembled from nested pastes; the two agree on the
function's domain and the test suite holds them together.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .core import Dyadic, frac_round_at, as_fraction
from .errors import DomainError

__all__ = [
    "RealFunction",
    "from_exact",
    "weighted_avg",
    "paste",
    "robin_hood_exact",
    "robin_hood",
    "robin_hood_pipeline",
    "identity1",
    "negate1",
    "constant",
    "absolute_value",
    "ceil_log2",
]

Point = tuple
Exact = Callable[[tuple], tuple]


def ceil_log2(q) -> int:
    """Least k >= 0 with q <= 2**k (q a positive rational)."""
    q = as_fraction(q)
    if q <= 0:
        raise DomainError("ceil_log2 needs a positive argument")
    k = 0
    while (q.denominator << k) < q.numerator:
        k += 1
    return k


@dataclass
class RealFunction:
    """A uniformly continuous function with a certified evaluator.

    approx(n, xs) is within 2**-n of the true value componentwise; moving
    every input by at most 2**-modulus(n) moves the value by at most 2**-n.
    exact_fn, when present, evaluates the function precisely on rationals.
    """

    arity: int
    coarity: int
    modulus: Callable[[int], int]
    approx_fn: Callable[[int, Point], Point]
    exact_fn: Optional[Exact] = None

    def approx(self, n: int, xs: Point) -> Point:
        if n < 0:
            raise DomainError("precision must be >= 0")
        if len(xs) != self.arity:
            raise DomainError(f"expected {self.arity} arguments, got {len(xs)}")
        return self.approx_fn(n, tuple(xs))

    def exact(self, xs: Point) -> tuple:
        if self.exact_fn is None:
            raise DomainError("no exact evaluator for this function")
        if len(xs) != self.arity:
            raise DomainError(f"expected {self.arity} arguments, got {len(xs)}")
        return self.exact_fn(tuple(as_fraction(x) for x in xs))


def from_exact(arity: int, coarity: int, exact_fn: Exact,
               modulus: Callable[[int], int]) -> RealFunction:
    """Wrap an exact rational function; approx rounds canonically at n."""

    def approx_fn(n, xs):
        vals = exact_fn(tuple(as_fraction(x) for x in xs))
        return tuple(frac_round_at(v, n) for v in vals)

    return RealFunction(arity, coarity, modulus, approx_fn, exact_fn)


def identity1() -> RealFunction:
    return from_exact(1, 1, lambda xs: xs, lambda n: n)


def negate1() -> RealFunction:
    return from_exact(1, 1, lambda xs: (-xs[0],), lambda n: n)


def constant(arity: int, value) -> RealFunction:
    v = as_fraction(value)
    return from_exact(arity, 1, lambda xs: (v,), lambda n: n)


def weighted_avg(alpha) -> RealFunction:
    """The two-point mean s, t -> alpha*s + (1-alpha)*t.

    A convex combination moves no faster than its arguments, so the modulus
    is the identity.
    """
    a = as_fraction(alpha)
    if not (0 < a < 1):
        raise DomainError("weight must lie strictly between 0 and 1")
    return from_exact(2, 1, lambda xs: (a * xs[0] + (1 - a) * xs[1],),
                      lambda n: n)


def paste(f: RealFunction, g: RealFunction, k: RealFunction) -> RealFunction:
    """Glue f (where k >= 0) and g (where k < 0) into one function.

    The caller vouches that the glued function is continuous across the
    k = 0 seam; under that hypothesis the evaluator below is accurate to
    2**-n: it asks k for a sign at precision m(n)+1 and answers from the
    chosen branch at the same precision, where m is the pointwise max of
    the three moduli (floored at n).
    """
    if not (f.arity == g.arity == k.arity):
        raise DomainError("paste requires a shared arity")
    if f.coarity != g.coarity:
        raise DomainError("paste branches must share a coarity")
    if k.coarity != 1:
        raise DomainError("paste guard must be scalar")

    def modulus(n):
        return max(n, f.modulus(n), g.modulus(n), k.modulus(n))

    def approx_fn(n, xs):
        p = modulus(n) + 1
        sign = k.approx(p, xs)[0]
        branch = f if sign >= 0 else g
        return branch.approx(p, xs)

    exact_fn = None
    if f.exact_fn and g.exact_fn and k.exact_fn:
        def exact_fn(xs):
            return f.exact_fn(xs) if k.exact_fn(xs)[0] >= 0 else g.exact_fn(xs)

    return RealFunction(f.arity, f.coarity, modulus, approx_fn, exact_fn)


def absolute_value() -> RealFunction:
    """|x| as the textbook paste of the identity and its negation."""
    return paste(identity1(), negate1(), identity1())


# ---------------------------------------------------------------------------
# Robin Hood
# ---------------------------------------------------------------------------

def _in_domain(a: Fraction, s: Fraction, t: Fraction) -> bool:
    return (s >= 0 and t >= 0) or a * s + (1 - a) * t >= 1


def robin_hood_exact(alpha, s, t) -> tuple[Fraction, Fraction]:
    """Four-case transfer: average-preserving, floors winners at 1.

    Cases, on the domain [0,inf)^2 union {mean >= 1}:
      * both coordinates already in [0,1]: unchanged;
      * mean >= 1: both get the mean;
      * mean < 1 and s >= 1: s gives its excess, pinned to 1;
      * mean < 1 and t >= 1: symmetric.
    """
    a = as_fraction(alpha)
    if not (0 < a < 1):
        raise DomainError("transfer weight must lie strictly in (0,1)")
    s = as_fraction(s)
    t = as_fraction(t)
    if not _in_domain(a, s, t):
        raise DomainError(f"({s}, {t}) outside the transfer domain for {a}")
    m = a * s + (1 - a) * t
    if 0 <= s <= 1 and 0 <= t <= 1:
        return (s, t)
    if m >= 1:
        return (m, m)
    if s >= 1:
        return (Fraction(1), (m - a) / (1 - a))
    # m < 1 inside the quadrant and not in the unit square forces t >= 1 here
    assert t >= 1
    return ((m - (1 - a)) / a, Fraction(1))


def robin_hood(alpha) -> RealFunction:
    """The transfer function as a RealFunction (direct evaluation route)."""
    a = as_fraction(alpha)
    if not (0 < a < 1):
        raise DomainError("transfer weight must lie strictly in (0,1)")
    lip = max(Fraction(1), 1 / a, 1 / (1 - a))
    bits = ceil_log2(lip)

    def exact_fn(xs):
        return robin_hood_exact(a, xs[0], xs[1])

    return from_exact(2, 2, exact_fn, lambda n: n + bits)


def robin_hood_pipeline(alpha, box_bits: int = 6) -> RealFunction:
    """Reference route: the same function assembled from nested pastes.

    Branch order: identity inside the unit square; mean-to-both when the
    mean clears 1; then the two give-to-the-poorer triangles; (1,1) as the
    join of the remaining seams.  Guard moduli are valid on the box
    |s|, |t| <= 2**box_bits, which is all the tests (and the kernel) use.
    """
    a = as_fraction(alpha)
    if not (0 < a < 1):
        raise DomainError("transfer weight must lie strictly in (0,1)")
    B = box_bits

    def fn2(exact, modulus):
        return from_exact(2, 2, exact, modulus)

    def guard(exact, modulus):
        return from_exact(2, 1, exact, modulus)

    mean = lambda xs: a * xs[0] + (1 - a) * xs[1]

    ident = fn2(lambda xs: xs, lambda n: n)
    both_mean = fn2(lambda xs: (mean(xs), mean(xs)), lambda n: n)
    give_right = fn2(lambda xs: (Fraction(1), (mean(xs) - a) / (1 - a)),
                     lambda n: n + ceil_log2(max(Fraction(1), 1 / (1 - a))))
    give_left = fn2(lambda xs: ((mean(xs) - (1 - a)) / a, Fraction(1)),
                    lambda n: n + ceil_log2(max(Fraction(1), 1 / a)))
    corner = fn2(lambda xs: (Fraction(1), Fraction(1)), lambda n: n)

    inside = guard(lambda xs: (min((1 - xs[0]) * xs[0], (1 - xs[1]) * xs[1]),),
                   lambda n: n + B + 2)
    mean_high = guard(lambda xs: (mean(xs) - 1,), lambda n: n)
    tri_s = guard(lambda xs: ((xs[0] - 1) * xs[1] * (1 - mean(xs)),),
                  lambda n: n + 2 * B + 6)
    tri_t = guard(lambda xs: ((xs[1] - 1) * xs[0] * (1 - mean(xs)),),
                  lambda n: n + 2 * B + 6)

    last = paste(give_left, corner, tri_t)
    mid = paste(give_right, last, tri_s)
    low = paste(both_mean, mid, mean_high)
    return paste(ident, low, inside)
