"""Martingales over a measure: exact tables, sums, cover diagnostics,
regularity, and the regularization functional.

Every martingale here has an exact rational value at every string, plus a
canonical finite-precision evaluator `approx(r, w)` accurate to 2**-r on
the 2**-r grid.  Tables extend below their depth by copying the parent
value, which keeps the averaging identity valid under any measure.

Regularization rebalances each split with the Robin Hood transfer so that
capital, once it reaches 1, never drops below 1 again, without changing
the root value or the averaging identity.  It is computed two ways: an
exact rational recursion (the reference), and a finite-precision recursion
that rounds at every level and decides degenerate splits by comparing
masses against the positivity witness's threshold — the route a
resource-bounded evaluator would take.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (
    Dyadic, ZERO, ONE, frac_round_at, validate_string, strings_of_length,
)
from .errors import DomainError, MeasureMismatchError, ParseError
from .measure import ProbabilityMeasure, uniform, biased
from .realfun import robin_hood_exact, ceil_log2

__all__ = [
    "Martingale",
    "TableMartingale",
    "ConstantMartingale",
    "SumMartingale",
    "RegularizedMartingale",
    "unit",
    "add",
    "covers",
    "is_regular",
    "regularize",
    "max_capital",
    "min_tail_capital",
    "load_martingale",
    "dump_martingale",
    "default_measure_resolver",
]


class Martingale:
    """Base: exact value plus canonical approximation."""

    measure: ProbabilityMeasure | None = None

    def value(self, w: str) -> Fraction:
        raise NotImplementedError

    def approx(self, r: int, w: str) -> Dyadic:
        """Canonical 2**-r approximation (default: round the exact value)."""
        if r < 0:
            raise DomainError("precision must be >= 0")
        return frac_round_at(self.value(w), r)


def _compatible(a: ProbabilityMeasure | None, b: ProbabilityMeasure | None):
    if a is None:
        return b
    if b is None or a is b or a == b:
        return a
    raise MeasureMismatchError("martingales disagree about their measure")


class ConstantMartingale(Martingale):
    """The same capital at every node; the unit martingale is the case 1."""

    def __init__(self, value: Fraction | int = 1, measure=None):
        v = Fraction(value)
        if v < 0:
            raise DomainError("martingale values must be >= 0")
        self._value = v
        self.measure = measure

    def value(self, w: str) -> Fraction:
        validate_string(w)
        return self._value


def unit(measure: ProbabilityMeasure | None = None) -> ConstantMartingale:
    """The unit martingale: capital 1 everywhere, for every measure."""
    return ConstantMartingale(1, measure)


class TableMartingale(Martingale):
    """Exact dyadic table to a depth, parent-copy extension below."""

    def __init__(self, table: dict[str, Dyadic], depth: int,
                 measure: ProbabilityMeasure, validate: bool = True):
        if depth < 0:
            raise DomainError("depth must be >= 0")
        self.table = dict(table)
        self.depth = depth
        self.measure = measure
        for n in range(depth + 1):
            for w in strings_of_length(n):
                if w not in self.table:
                    raise DomainError(f"martingale table missing {w!r}")
                if self.table[w] < 0:
                    raise DomainError(f"negative capital at {w!r}")
        if validate:
            bad = self.first_identity_violation()
            if bad is not None:
                raise DomainError(
                    f"martingale identity fails at {bad if bad else 'the root'!r}")

    def first_identity_violation(self, depth: int | None = None) -> str | None:
        """First internal node (length-lex order) breaking the identity.

        `depth` restricts the check to parents of length < depth; by default
        the whole table is examined.
        """
        nu = self.measure
        limit = self.depth if depth is None else min(depth, self.depth)
        if limit < 0:
            raise DomainError("depth must be >= 0")
        for n in range(limit):
            for w in strings_of_length(n):
                lhs = self.table[w] * nu.mass(w)
                rhs = (self.table[w + "0"] * nu.mass(w + "0")
                       + self.table[w + "1"] * nu.mass(w + "1"))
                if lhs != rhs:
                    return w
        return None

    def value(self, w: str) -> Fraction:
        validate_string(w)
        if len(w) > self.depth:
            w = w[:self.depth]
        return self.table[w].to_fraction()

    def dyadic_value(self, w: str) -> Dyadic:
        validate_string(w)
        if len(w) > self.depth:
            w = w[:self.depth]
        return self.table[w]


class SumMartingale(Martingale):
    """Pointwise sum; the approximation queries both terms one bit finer."""

    def __init__(self, d1: Martingale, d2: Martingale):
        self.d1 = d1
        self.d2 = d2
        self.measure = _compatible(d1.measure, d2.measure)

    def value(self, w: str) -> Fraction:
        return self.d1.value(w) + self.d2.value(w)

    def approx(self, r: int, w: str) -> Dyadic:
        if r < 0:
            raise DomainError("precision must be >= 0")
        s = self.d1.approx(r + 1, w) + self.d2.approx(r + 1, w)
        return s.round_at(r)


def add(d1: Martingale, d2: Martingale) -> SumMartingale:
    return SumMartingale(d1, d2)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def covers(d: Martingale, prefix: str) -> bool:
    """Has capital reached 1 somewhere along (or at) this prefix?"""
    validate_string(prefix)
    return any(d.value(prefix[:i]) >= 1 for i in range(len(prefix) + 1))


def is_regular(d: Martingale, depth: int) -> bool:
    """Once capital reaches 1 it never drops below 1 again (to `depth`)."""
    stack = [("", d.value("") >= 1)]
    while stack:
        w, reached = stack.pop()
        if len(w) >= depth:
            continue
        for b in "01":
            v = d.value(w + b)
            if reached and v < 1:
                return False
            stack.append((w + b, reached or v >= 1))
    return True


def max_capital(d: Martingale, prefix: str) -> Fraction:
    """Largest capital along the prefix (a finite success diagnostic)."""
    validate_string(prefix)
    return max(d.value(prefix[:i]) for i in range(len(prefix) + 1))


def min_tail_capital(d: Martingale, prefix: str, horizon: int) -> Fraction:
    """Smallest capital in the subtree under `prefix`, `horizon` levels deep
    (a finite strong-success diagnostic)."""
    validate_string(prefix)
    if horizon < 0:
        raise DomainError("horizon must be >= 0")
    best = d.value(prefix)
    frontier = [prefix]
    for _ in range(horizon):
        frontier = [w + b for w in frontier for b in "01"]
        for w in frontier:
            v = d.value(w)
            if v < best:
                best = v
    return best


# ---------------------------------------------------------------------------
# regularization
# ---------------------------------------------------------------------------

class RegularizedMartingale(Martingale):
    """Robin-Hood rebalanced version of a base martingale.

    Recursion down the tree: the root keeps its value; a degenerate split
    (null node, or a child owning none/all of the mass) copies the parent's
    value to both children; otherwise the children receive the transfer of
    (parent + what the base gives each child - what the base held), with
    the split's own conditional as the weight.  The transfer preserves the
    weighted average, so the averaging identity survives; its floor-at-1
    behaviour is what makes the result regular.
    """

    def __init__(self, base: Martingale, nu: ProbabilityMeasure):
        self.base = base
        self.measure = _compatible(base.measure, nu) or nu
        self._nu = nu
        self._memo: dict[str, Fraction] = {"": base.value("")}

    # -- exact route ---------------------------------------------------

    def value(self, w: str) -> Fraction:
        validate_string(w)
        memo = self._memo
        if w in memo:
            return memo[w]
        for i in range(len(w)):
            child = w[:i + 1]
            if child not in memo:
                self._children(w[:i])
        return memo[w]

    def _children(self, w: str) -> None:
        nu = self._nu
        cur = self.value(w) if w not in self._memo else self._memo[w]
        mw = nu.mass(w)
        if mw == ZERO:
            self._memo[w + "0"] = cur
            self._memo[w + "1"] = cur
            return
        m0 = nu.mass(w + "0")
        alpha = m0.to_fraction() / mw.to_fraction()
        if alpha == 0 or alpha == 1:
            self._memo[w + "0"] = cur
            self._memo[w + "1"] = cur
            return
        dw = self.base.value(w)
        g0 = cur - dw + self.base.value(w + "0")
        g1 = cur - dw + self.base.value(w + "1")
        out0, out1 = robin_hood_exact(alpha, g0, g1)
        self._memo[w + "0"] = out0
        self._memo[w + "1"] = out1

    # -- finite-precision route ----------------------------------------

    def _level_bits(self, w: str) -> int:
        """Total transfer-slope bits along the path to w."""
        nu = self._nu
        total = 0
        for i in range(len(w)):
            p = w[:i]
            mp = nu.mass(p)
            if mp == ZERO:
                continue
            m0 = nu.mass(p + "0")
            alpha = m0.to_fraction() / mp.to_fraction()
            if alpha == 0 or alpha == 1:
                continue
            total += ceil_log2(max(Fraction(1), 1 / alpha, 1 / (1 - alpha)))
        return total

    def approx(self, r: int, w: str) -> Dyadic:
        """Level-by-level rounded recursion with threshold-based zero tests.

        Internal precision covers the accumulated transfer slope plus the
        per-level rounding, so the final answer is within 2**-r.  Masses
        are compared against the witness threshold exactly — for a weakly
        positive measure that test recognizes null and degenerate splits
        precisely.
        """
        if r < 0:
            raise DomainError("precision must be >= 0")
        validate_string(w)
        nu = self._nu
        q = r + 3 + self._level_bits(w) + (3 * (len(w) + 2)).bit_length()
        cur = self.base.approx(q, "").to_fraction()
        for i in range(len(w)):
            p, child = w[:i], w[:i + 1]
            thr_p = nu.witness.threshold(len(p))
            thr_c = nu.witness.threshold(len(p) + 1)
            if (nu.mass(p) < thr_p or nu.mass(p + "0") < thr_c
                    or nu.mass(p + "1") < thr_c):
                continue  # degenerate: the child inherits the parent value
            alpha = nu.mass(p + "0").to_fraction() / nu.mass(p).to_fraction()
            dp = self.base.approx(q, p).to_fraction()
            g0 = cur - dp + self.base.approx(q, p + "0").to_fraction()
            g1 = cur - dp + self.base.approx(q, p + "1").to_fraction()
            if alpha * g0 + (1 - alpha) * g1 < 1:
                # rounding can nudge a boundary point out of the transfer
                # domain; clamping is sound because the ideal inputs are >= 0
                g0 = max(g0, Fraction(0))
                g1 = max(g1, Fraction(0))
            pair = robin_hood_exact(alpha, g0, g1)
            cur = frac_round_at(pair[0 if child[-1] == "0" else 1],
                                q).to_fraction()
        return frac_round_at(cur, r)


def regularize(d: Martingale, nu: ProbabilityMeasure) -> RegularizedMartingale:
    return RegularizedMartingale(d, nu)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------
#   martingale measure=SPEC depth=N
#   w mantissa precision        (λ written as ~)
# SPEC is `uniform`, `biased:P` with P dyadic, or a name the caller's
# resolver understands (the CLI resolves file paths).

def default_measure_resolver(spec: str) -> ProbabilityMeasure:
    from .core import parse_dyadic

    if spec == "uniform":
        return uniform()
    if spec.startswith("biased:"):
        return biased(parse_dyadic(spec.split(":", 1)[1]))
    raise ParseError(f"unknown measure spec {spec!r} "
                     "(pass a resolver that can load files)")


def dump_martingale(d: TableMartingale, measure_spec: str) -> str:
    lines = [f"martingale measure={measure_spec} depth={d.depth}"]
    for n in range(d.depth + 1):
        for w in strings_of_length(n):
            v = d.table[w]
            lines.append(f"{w if w else '~'} {v.mantissa} {v.precision}")
    return "\n".join(lines) + "\n"


def load_martingale(text: str, resolver=None,
                    validate: bool = True) -> TableMartingale:
    resolver = resolver or default_measure_resolver
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty martingale file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "martingale":
        raise ParseError(f"bad martingale header: {lines[0]!r}")
    try:
        kv = dict(part.split("=", 1) for part in head[1:])
        spec = kv["measure"]
        depth = int(kv["depth"])
    except (ValueError, KeyError):
        raise ParseError(f"bad martingale header: {lines[0]!r}") from None
    nu = resolver(spec)
    table: dict[str, Dyadic] = {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ParseError(f"bad martingale line: {ln!r}")
        try:
            w = "" if parts[0] == "~" else validate_string(parts[0])
            table[w] = Dyadic(int(parts[1]), int(parts[2]))
        except (DomainError, ValueError) as exc:
            raise ParseError(f"bad martingale line {ln!r}: {exc}") from None
    try:
        d = TableMartingale(table, depth, nu, validate=validate)
    except DomainError:
        raise
    d.measure_spec = spec
    return d
