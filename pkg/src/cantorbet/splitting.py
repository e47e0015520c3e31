"""Splitting operators: measurements of sets by martingale pairs.

A splitting operator sends (precision, martingale) to a pair of martingales
(plus, minus) that divide the input's initial capital between a set and its
complement: successes inside the set are inherited by `plus`, successes
outside by `minus`, and the two root values never exceed the input's root
by more than 2**-precision.  The measured value of the set is then read off
the plus component started from the unit martingale.

This module builds the concrete measurements the theory promises:
cylinders (null and positive mass), complements, finite intersections and
unions assembled from the four sign-composition components, subsets of null
sets, unions of null sequences, and modulated limits of eventually-constant
measurement sequences.
"""

from __future__ import annotations

from fractions import Fraction

from .core import Dyadic, ZERO, frac_round_at, validate_string, is_prefix
from .errors import (
    DomainError, MeasureMismatchError, ModulusViolationError, ParseError,
    PreconditionError,
)
from .measure import ProbabilityMeasure
from .martingale import (
    Martingale, SumMartingale, add, unit, regularize, RegularizedMartingale,
)

__all__ = [
    "SplittingOperator",
    "ModulatedSequence",
    "cylinder_null",
    "cylinder_pos",
    "cylinder",
    "complement",
    "theta",
    "intersect_union",
    "complete_null",
    "union_sequence",
    "modulated",
    "limit_measurement",
    "measure_value",
    "capital_sum_check",
    "initial_capital_surplus",
    "parse_operator",
    "NULL_GATE_PRECISION",
]

# precision at which "measures a null set" preconditions are checked
NULL_GATE_PRECISION = 10


def _same_measure(a: ProbabilityMeasure, b: ProbabilityMeasure):
    if a is b or a == b:
        return a
    raise MeasureMismatchError("operators disagree about their measure")


class SplittingOperator:
    """Interface: plus(r, d) and minus(r, d) return martingales over `measure`."""

    measure: ProbabilityMeasure

    def plus(self, r: int, d: Martingale) -> Martingale:
        raise NotImplementedError

    def minus(self, r: int, d: Martingale) -> Martingale:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# martingale nodes used by the operators
# ---------------------------------------------------------------------------

class IndicatorMartingale(Martingale):
    """Indicator of a cylinder; a martingale exactly when the cylinder is null."""

    def __init__(self, w: str, nu: ProbabilityMeasure):
        self.w = validate_string(w)
        self.measure = nu

    def value(self, v: str) -> Fraction:
        validate_string(v)
        return Fraction(1 if is_prefix(self.w, v) else 0)


class SliceMartingale(Martingale):
    """Capital of `inner` at the cylinder root, spread along the way there.

    Inside the cylinder it follows `inner`; on the way down it holds
    inner(w) * nu(w | v), scaled mass that bets everything on reaching w;
    elsewhere 0.  The conditional honours the positivity witness: a mass
    below threshold reads as 0.
    """

    def __init__(self, w: str, nu: ProbabilityMeasure, inner: Martingale):
        self.w = validate_string(w)
        self.measure = nu
        self.inner = inner
        mw = nu.mass(w)
        self._above = mw >= nu.witness.threshold(len(w))
        self._mw = mw.to_fraction()

    def value(self, v: str) -> Fraction:
        validate_string(v)
        if is_prefix(v, self.w):        # on the way down (or at the root w)
            if not self._above:
                return Fraction(0)
            return (self.inner.value(self.w) * self._mw
                    / self.measure.mass(v).to_fraction())
        if is_prefix(self.w, v):        # strictly inside the cylinder
            return self.inner.value(v)
        return Fraction(0)


class DiffMartingale(Martingale):
    """Pointwise difference (whole minus part)."""

    def __init__(self, whole: Martingale, part: Martingale):
        self.whole = whole
        self.part = part
        self.measure = whole.measure

    def value(self, w: str) -> Fraction:
        return self.whole.value(w) - self.part.value(w)


class PassThroughOperator(SplittingOperator):
    """plus ignores the input and returns a fixed martingale; minus is identity."""

    def __init__(self, fixed: Martingale, nu: ProbabilityMeasure):
        self.fixed = fixed
        self.measure = nu

    def plus(self, r: int, d: Martingale) -> Martingale:
        return self.fixed

    def minus(self, r: int, d: Martingale) -> Martingale:
        return d


# ---------------------------------------------------------------------------
# cylinder measurements
# ---------------------------------------------------------------------------

class CylinderNull(SplittingOperator):
    """Measurement of a mass-zero cylinder: indicator / identity."""

    def __init__(self, w: str, nu: ProbabilityMeasure):
        validate_string(w)
        if w == "":
            raise PreconditionError("the root cylinder has mass 1, never 0")
        if nu.mass(w) != ZERO:
            raise PreconditionError(f"cylinder {w!r} has positive mass")
        self.w = w
        self.measure = nu

    def plus(self, r: int, d: Martingale) -> Martingale:
        return IndicatorMartingale(self.w, self.measure)

    def minus(self, r: int, d: Martingale) -> Martingale:
        return d


class CylinderPos(SplittingOperator):
    """Measurement of a positive-mass cylinder through regularization."""

    def __init__(self, w: str, nu: ProbabilityMeasure):
        validate_string(w)
        if nu.mass(w) == ZERO:
            raise PreconditionError(f"cylinder {w!r} has mass zero")
        self.w = w
        self.measure = nu

    def plus(self, r: int, d: Martingale) -> Martingale:
        return SliceMartingale(self.w, self.measure,
                               regularize(d, self.measure))

    def minus(self, r: int, d: Martingale) -> Martingale:
        lam = regularize(d, self.measure)
        return DiffMartingale(lam, SliceMartingale(self.w, self.measure, lam))


def cylinder_null(w: str, nu: ProbabilityMeasure) -> CylinderNull:
    return CylinderNull(w, nu)


def cylinder_pos(w: str, nu: ProbabilityMeasure) -> CylinderPos:
    return CylinderPos(w, nu)


def cylinder(w: str, nu: ProbabilityMeasure) -> SplittingOperator:
    """Dispatch on the cylinder's mass."""
    return cylinder_null(w, nu) if nu.mass(w) == ZERO else cylinder_pos(w, nu)


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

class Complement(SplittingOperator):
    def __init__(self, inner: SplittingOperator):
        self.inner = inner
        self.measure = inner.measure

    def plus(self, r: int, d: Martingale) -> Martingale:
        return self.inner.minus(r, d)

    def minus(self, r: int, d: Martingale) -> Martingale:
        return self.inner.plus(r, d)


def complement(op: SplittingOperator) -> SplittingOperator:
    if isinstance(op, Complement):
        return op.inner
    return Complement(op)


def theta(a: str, b: str, phi: SplittingOperator, psi: SplittingOperator):
    """Sign-composition component: psi's b-side of phi's a-side, one and two
    precision bits in."""
    if a not in "+-" or b not in "+-":
        raise DomainError("theta signs must be '+' or '-'")
    _same_measure(phi.measure, psi.measure)
    first = phi.plus if a == "+" else phi.minus
    second = psi.plus if b == "+" else psi.minus

    def run(r: int, d: Martingale) -> Martingale:
        return second(r + 2, first(r + 1, d))

    return run


class IntersectUnion(SplittingOperator):
    def __init__(self, phi: SplittingOperator, psi: SplittingOperator,
                 which: str):
        if which not in ("cap", "cup"):
            raise DomainError("which must be 'cap' or 'cup'")
        self.measure = _same_measure(phi.measure, psi.measure)
        self.which = which
        self._parts = {ab: theta(ab[0], ab[1], phi, psi)
                       for ab in ("++", "+-", "-+", "--")}

    def _sum(self, keys, r, d):
        outs = [self._parts[k](r, d) for k in keys]
        acc = outs[0]
        for m in outs[1:]:
            acc = add(acc, m)
        return acc

    def plus(self, r: int, d: Martingale) -> Martingale:
        if self.which == "cap":
            return self._parts["++"](r, d)
        return self._sum(("++", "+-", "-+"), r, d)

    def minus(self, r: int, d: Martingale) -> Martingale:
        if self.which == "cap":
            return self._sum(("+-", "-+", "--"), r, d)
        return self._parts["--"](r, d)


def intersect_union(phi: SplittingOperator, psi: SplittingOperator,
                    which: str) -> IntersectUnion:
    return IntersectUnion(phi, psi, which)


# ---------------------------------------------------------------------------
# null sets: subsets and countable unions
# ---------------------------------------------------------------------------

def _require_null(op: SplittingOperator, what: str,
                  gate: int = NULL_GATE_PRECISION) -> None:
    v = measure_value(op, gate)
    if v > Dyadic(1, gate):
        raise PreconditionError(
            f"{what}: operator value {v} at precision {gate} is not null")


def complete_null(op: SplittingOperator,
                  gate: int = NULL_GATE_PRECISION) -> SplittingOperator:
    """Measurement of an arbitrary subset of a null set."""
    _require_null(op, "complete_null", gate)
    nu = op.measure

    class _Sub(SplittingOperator):
        measure = nu

        def plus(self, r: int, d: Martingale) -> Martingale:
            return op.plus(r, unit(nu))

        def minus(self, r: int, d: Martingale) -> Martingale:
            return d

    return _Sub()


class ModulatedSequence:
    """A measurement sequence with a convergence modulus.

    stage_plus/stage_minus give the k-th stage's components; gamma(t,r,d,w)
    returns an index from which the plus values at w sit within 2**-t of
    their limit.  The library ships eventually-constant families, whose
    modulus is a constant.
    """

    def __init__(self, stage_plus, stage_minus, gamma, measure):
        self.stage_plus = stage_plus
        self.stage_minus = stage_minus
        self.gamma = gamma
        self.measure = measure


def modulated(operators, gamma: int | None = None) -> ModulatedSequence:
    """Eventually-constant family: stages clamp to the last operator."""
    ops = list(operators)
    if not ops:
        raise DomainError("modulated family must have at least one stage")
    measure = ops[0].measure
    for op in ops[1:]:
        _same_measure(measure, op.measure)
    const_from = len(ops) - 1 if gamma is None else gamma

    def stage(k):
        return ops[min(k, len(ops) - 1)]

    return ModulatedSequence(
        stage_plus=lambda k, r, d: stage(k).plus(r, d),
        stage_minus=lambda k, r, d: stage(k).minus(r, d),
        gamma=lambda t, r, d, w: const_from,
        measure=measure,
    )


def union_sequence(operators,
                   gate: int = NULL_GATE_PRECISION) -> ModulatedSequence:
    """Union of a (finite, hence eventually-empty) family of null sets.

    Stage k's plus component restarts each member measurement from the unit
    martingale at precision j+r+1 and adds them up; the minus component is
    the input itself.  Members past the end of the list contribute nothing.
    """
    ops = list(operators)
    if not ops:
        raise DomainError("union family must have at least one member")
    measure = ops[0].measure
    for j, op in enumerate(ops):
        _same_measure(measure, op.measure)
        _require_null(op, f"union_sequence member {j}", gate)

    def stage_plus(k, r, d):
        acc = None
        for j in range(k + 1):
            if j >= len(ops):
                break
            m = ops[j].plus(j + r + 1, unit(measure))
            acc = m if acc is None else add(acc, m)
        return acc

    return ModulatedSequence(
        stage_plus=stage_plus,
        stage_minus=lambda k, r, d: d,
        gamma=lambda t, r, d, w: len(ops) - 1,
        measure=measure,
    )


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------

class LimitPlusMartingale(Martingale):
    """The limit of the stage plus-components, queried through the modulus.

    Exact values take the modulus at face value (sound for the library's
    eventually-constant families).  Approximations also probe a couple of
    later stages and refuse to answer if they wander outside the promised
    envelope.
    """

    PROBES = 2

    def __init__(self, seq: ModulatedSequence, rr: int, d: Martingale):
        self.seq = seq
        self.rr = rr
        self.d = d
        self.measure = seq.measure

    def _stage(self, k: int) -> Martingale:
        return self.seq.stage_plus(k, self.rr, self.d)

    def value(self, w: str) -> Fraction:
        k = self.seq.gamma(1, self.rr, self.d, w)
        return self._stage(k).value(w)

    def approx(self, t: int, w: str) -> Dyadic:
        if t < 0:
            raise DomainError("precision must be >= 0")
        k = self.seq.gamma(t + 1, self.rr, self.d, w)
        got = self._stage(k).approx(t + 1, w)
        envelope = Fraction(2, 2 ** t)  # 4 * 2^-(t+1)
        for extra in range(1, self.PROBES + 1):
            probe = self._stage(k + extra).approx(t + 1, w)
            if abs(probe.to_fraction() - got.to_fraction()) > envelope:
                raise ModulusViolationError(
                    f"stage {k + extra} at {w!r} is {probe}, "
                    f"outside the 2^-{t} envelope around {got}")
        return got.round_at(t)


class LimitMeasurement(SplittingOperator):
    def __init__(self, seq: ModulatedSequence):
        self.seq = seq
        self.measure = seq.measure

    def plus(self, r: int, d: Martingale) -> Martingale:
        return LimitPlusMartingale(self.seq, r + 1, d)

    def minus(self, r: int, d: Martingale) -> Martingale:
        m = self.seq.gamma(r + 1, r + 1, d, "")
        return self.seq.stage_minus(m, r + 1, d)


def limit_measurement(seq: ModulatedSequence) -> LimitMeasurement:
    return LimitMeasurement(seq)


# ---------------------------------------------------------------------------
# values and checks
# ---------------------------------------------------------------------------

def measure_value(op: SplittingOperator, r: int) -> Dyadic:
    """The measured value of the set, canonical at precision r."""
    if r < 0:
        raise DomainError("precision must be >= 0")
    d = op.plus(r + 1, unit(op.measure))
    return d.approx(r + 1, "").round_at(r)


def capital_sum_check(phi: SplittingOperator, psi: SplittingOperator,
                      j: int, k: int) -> bool:
    """Two measurements of one set can't both start below half a unit:
    the sum of their restarted plus-capitals at the root reaches 1, up to
    the precision slack of the smaller index."""
    d = add(phi.plus(j, unit(phi.measure)), psi.plus(k, unit(psi.measure)))
    return d.value("") >= 1 - Fraction(1, 2 ** min(j, k))


def initial_capital_surplus(op: SplittingOperator, r: int,
                            d: Martingale) -> Fraction:
    """plus(λ) + minus(λ) - d(λ): axiom (iii) demands this <= 2**-r."""
    return (op.plus(r, d).value("") + op.minus(r, d).value("")
            - d.value(""))


# ---------------------------------------------------------------------------
# operator expressions
# ---------------------------------------------------------------------------
#   (cyl w)    (compl E)    (cap E F)    (cup E F)    (limit E0 E1 ... K)
# where w is a bit string (~ for the empty string) and K is the index from
# which the limit family is constant.

def _tokenize(text: str):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_sexpr(tokens, pos):
    if pos >= len(tokens):
        raise ParseError("unexpected end of operator expression")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            node, pos = _parse_sexpr(tokens, pos)
            items.append(node)
        if pos >= len(tokens):
            raise ParseError("missing ')' in operator expression")
        return items, pos + 1
    if tok == ")":
        raise ParseError("unexpected ')' in operator expression")
    return tok, pos + 1


def _build_operator(node, nu: ProbabilityMeasure) -> SplittingOperator:
    if not isinstance(node, list) or not node:
        raise ParseError(f"expected an operator form, got {node!r}")
    head = node[0]
    if head == "cyl":
        if len(node) != 2 or not isinstance(node[1], str):
            raise ParseError("(cyl w) takes exactly one string")
        w = "" if node[1] == "~" else node[1]
        try:
            return cylinder(validate_string(w), nu)
        except DomainError as exc:
            raise ParseError(str(exc)) from None
    if head == "compl":
        if len(node) != 2:
            raise ParseError("(compl E) takes exactly one operator")
        return complement(_build_operator(node[1], nu))
    if head in ("cap", "cup"):
        if len(node) != 3:
            raise ParseError(f"({head} E F) takes exactly two operators")
        return intersect_union(_build_operator(node[1], nu),
                               _build_operator(node[2], nu), head)
    if head == "limit":
        if len(node) < 3 or not isinstance(node[-1], str):
            raise ParseError("(limit E0 E1 ... K) needs stages and an index")
        try:
            k = int(node[-1])
        except ValueError:
            raise ParseError(f"bad limit index {node[-1]!r}") from None
        if k < 0:
            raise ParseError("limit index must be >= 0")
        stages = [_build_operator(sub, nu) for sub in node[1:-1]]
        return limit_measurement(modulated(stages, k))
    raise ParseError(f"unknown operator head {head!r}")


def parse_operator(text: str, nu: ProbabilityMeasure) -> SplittingOperator:
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty operator expression")
    node, pos = _parse_sexpr(tokens, 0)
    if pos != len(tokens):
        raise ParseError("trailing tokens after operator expression")
    return _build_operator(node, nu)
