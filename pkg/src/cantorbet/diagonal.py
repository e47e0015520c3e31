"""Constructors and the capital-conservation diagonalization.

A constructor is a map on bit strings that strictly extends its input;
iterating it from the empty string pins down a single infinite sequence.
`diagonalize` turns a martingale into the constructor that first rushes
through a designated cylinder and afterwards always walks into the child
the (approximated) martingale values less — dodging the bettor's capital.
`conservation_check` runs that walk for finitely many steps and reports
the capital trajectory, witnessing that it never climbs back to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Dyadic, validate_string, is_prefix
from .errors import DomainError, MeasureMismatchError, PreconditionError
from .martingale import Martingale
from .measure import ProbabilityMeasure


class Constructor:
    """A strict-extension step function on bit strings."""

    __slots__ = ("_step",)

    def __init__(self, step):
        self._step = step

    def __call__(self, x: str) -> str:
        validate_string(x)
        y = self._step(x)
        validate_string(y)
        if len(y) <= len(x) or not is_prefix(x, y):
            raise DomainError(
                f"constructor step must strictly extend its input; "
                f"{x!r} -> {y!r}")
        return y


def result_prefix(delta: Constructor, n: int) -> str:
    """First n bits of the sequence the constructor converges to."""
    if n < 0:
        raise DomainError("prefix length must be >= 0")
    x = ""
    while len(x) < n:
        x = delta(x)
    return x[:n]


def query_precision(x: str, m: int) -> int:
    """Precision at which the diagonalizer inspects the children of x."""
    return len(x) + m + 2


def diagonalize(d: Martingale, m: int, w: str) -> Constructor:
    """Constructor that enters the cylinder of w, then starves d.

    Past w, each step compares the two children at precision
    ``query_precision(x, m)`` and extends by the cheaper one; ties go
    to the 0 side.
    """
    validate_string(w)
    if m < 0:
        raise DomainError("margin index must be >= 0")

    def step(x: str) -> str:
        if is_prefix(x, w) and len(x) < len(w):
            return w
        a = query_precision(x, m)
        if d.approx(a, x + "0") <= d.approx(a, x + "1"):
            return x + "0"
        return x + "1"

    return Constructor(step)


def capital_margin(d: Martingale, w: str) -> int:
    """Least m with d(w') <= 1 - 2**(1-m) on every prefix w' of w."""
    validate_string(w)
    worst = max(d.value(w[:k]) for k in range(len(w) + 1))
    if worst >= 1:
        raise PreconditionError(
            "no margin exists: capital reaches 1 on a prefix of "
            f"{w or 'the root'!r}")
    m = 0
    while Fraction(2, 2 ** m) > 1 - worst:
        m += 1
    return m


@dataclass(frozen=True)
class TrajectoryStep:
    index: int
    bit: str
    capital: Dyadic

    def render(self) -> str:
        return (f"{self.index} {self.bit} "
                f"{self.capital.mantissa} {self.capital.precision}")


@dataclass(frozen=True)
class ConservationReport:
    prefix: str
    steps: tuple[TrajectoryStep, ...]
    max_capital: Fraction

    def render(self) -> str:
        return "\n".join(s.render() for s in self.steps)


def conservation_check(d: Martingale, nu: ProbabilityMeasure, w: str,
                       m: int, depth: int) -> ConservationReport:
    """Walk the diagonalized sequence and certify the capital stays < 1.

    Requires d(root) < nu(w) exactly; that is the regime in which the
    walk provably escapes the bettor.  Each report line shows the bit
    taken and the capital approximation at the precision the walk
    itself used at that step.
    """
    validate_string(w)
    if depth < 0:
        raise DomainError("depth must be >= 0")
    if d.measure is not None and not (d.measure is nu or d.measure == nu):
        raise MeasureMismatchError(
            "martingale was built against a different measure")
    if d.value("") >= nu.mass(w).to_fraction():
        raise PreconditionError(
            "initial capital must be strictly below the cylinder mass")

    bits = result_prefix(diagonalize(d, m, w), depth)
    steps = []
    peak = d.value("")
    for i in range(depth):
        prefix = bits[: i + 1]
        a = query_precision(bits[:i], m)
        exact = d.value(prefix)
        peak = max(peak, exact)
        if exact >= 1:
            raise PreconditionError(
                f"capital reached 1 at step {i}; the margin index {m} "
                "is too small for this martingale")
        steps.append(TrajectoryStep(i, bits[i], d.approx(a, prefix)))
    return ConservationReport(bits, tuple(steps), peak)
