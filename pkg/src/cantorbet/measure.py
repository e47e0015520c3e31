"""Probability measures on Cantor space as finite tables plus an extension
rule, with weak-positivity witnesses and the conditional functional.

A measure assigns exact dyadic mass to every cylinder.  The table covers all
strings up to a depth N; below that, each subtree continues with a constant
child-conditional: 1/2 (`half`), a fixed parameter (built-in biased coins),
or a copy of the split that produced the subtree's boundary node (`copy`).
Weak positivity — every nonzero mass at depth n is at least 2**-l(n) — is
carried by an affine witness l and is what makes conditional values and
martingale thresholds decidable by exact comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (
    Dyadic, Approximable, ZERO, ONE, HALF, strings_of_length, validate_string,
    is_prefix,
)
from .errors import DomainError, ParseError, PreconditionError

__all__ = [
    "PositivityWitness",
    "ProbabilityMeasure",
    "Cylinder",
    "uniform",
    "biased",
    "from_table",
    "conditional_scaled",
    "load_measure",
    "dump_measure",
]


@dataclass(frozen=True)
class PositivityWitness:
    """Affine lower-bound exponent l(n) = c0 + c1*n for nonzero masses."""

    c0: int
    c1: int

    def __post_init__(self):
        if self.c0 < 0 or self.c1 < 0:
            raise DomainError("witness coefficients must be >= 0")

    def __call__(self, n: int) -> int:
        return self.c0 + self.c1 * n

    def threshold(self, n: int) -> Dyadic:
        """2**-l(n) as an exact dyadic."""
        return Dyadic(1, self(n))


@dataclass(frozen=True)
class Cylinder:
    """The set of sequences extending w."""

    w: str

    def __post_init__(self):
        validate_string(self.w)

    def matches(self, x: str) -> bool:
        """Does the cylinder contain every extension of x?"""
        return is_prefix(self.w, x)


class ProbabilityMeasure:
    """Exact measure: table to depth N, constant-conditional extension below.

    `ext` is one of:
      * ("const", c): every below-table split sends mass c to the 0-child;
      * ("copy",): each boundary node continues with the conditional of the
        split that produced it (must be dyadic, checked on construction).
    """

    def __init__(self, table: dict[str, Dyadic], depth: int,
                 ext=("const", HALF), witness: PositivityWitness | None = None):
        if depth < 0:
            raise DomainError("depth must be >= 0")
        self.depth = depth
        self.table = dict(table)
        self.witness = witness if witness is not None else PositivityWitness(0, 1)
        kind = ext[0]
        if kind == "const":
            c = ext[1]
            if not (ZERO <= c <= ONE):
                raise DomainError("extension conditional must lie in [0,1]")
            self.ext = ("const", c)
        elif kind == "copy":
            self.ext = ("copy",)
        else:
            raise DomainError(f"unknown extension rule {kind!r}")
        self._validate()
        if kind == "copy":
            self._copy_conditionals = self._boundary_conditionals()

    # -- construction-time checks --------------------------------------

    def _validate(self):
        for n in range(self.depth + 1):
            for w in strings_of_length(n):
                if w not in self.table:
                    raise DomainError(f"table incomplete: missing {w!r} "
                                      f"(depth {self.depth})")
                if self.table[w] < 0:
                    raise DomainError(f"negative mass at {w!r}")
        if self.table[""] != ONE:
            raise DomainError("root mass must be exactly 1")
        for n in range(self.depth):
            for w in strings_of_length(n):
                if self.table[w] != self.table[w + "0"] + self.table[w + "1"]:
                    raise DomainError(f"additivity fails at {w!r}")

    def _boundary_conditionals(self) -> dict[str, Dyadic]:
        """Per-boundary-node conditional for the copy rule.

        For a depth-N node u with positive mass, the subtree below u keeps
        splitting with conditional mass(parent(u)0)/mass(parent(u)); this
        quotient must be dyadic for masses to stay exact.
        """
        if self.depth == 0:
            raise DomainError("ext=copy needs a table of depth >= 1")
        out = {}
        for u in strings_of_length(self.depth):
            if self.table[u] == ZERO:
                continue
            p = u[:-1]
            q = Fraction(self.table[p + "0"].to_fraction(),
                         self.table[p].to_fraction())
            d = q.denominator
            if d & (d - 1):
                raise DomainError(
                    f"ext=copy: boundary conditional {q} at {u!r} is not dyadic")
            out[u] = Dyadic.from_fraction(q)
        return out

    # -- queries -------------------------------------------------------

    def mass(self, w: str) -> Dyadic:
        """Exact cylinder mass, at any depth."""
        validate_string(w)
        if len(w) <= self.depth:
            return self.table[w]
        u = w[:self.depth]
        m = self.table[u]
        if m == ZERO:
            return ZERO
        if self.ext[0] == "const":
            c = self.ext[1]
        else:
            c = self._copy_conditionals[u]
        for b in w[self.depth:]:
            m = m * (c if b == "0" else ONE - c)
            if m == ZERO:
                return ZERO
        return m

    def conditional(self, w: str, b: str) -> Fraction:
        """nu(wb | w) as an exact fraction; requires nu(w) > 0."""
        m = self.mass(w)
        if m == ZERO:
            raise DomainError(f"conditional undefined below null cylinder {w!r}")
        return self.mass(w + b).to_fraction() / m.to_fraction()

    def weakly_positive(self, depth: int) -> bool:
        for n in range(depth + 1):
            t = self.witness.threshold(n)
            for w in strings_of_length(n):
                m = self.mass(w)
                if m != ZERO and m < t:
                    return False
        return True

    def __repr__(self):
        return (f"ProbabilityMeasure(depth={self.depth}, ext={self.ext[0]}, "
                f"l(n)={self.witness.c0}+{self.witness.c1}n)")

    def __eq__(self, other):
        if not isinstance(other, ProbabilityMeasure):
            return NotImplemented
        return (self.depth == other.depth and self.ext == other.ext
                and self.witness == other.witness and self.table == other.table)

    __hash__ = None  # content-compared, mutable-looking; keep unhashable


def uniform() -> ProbabilityMeasure:
    """The coin-flipping measure: mass(w) = 2**-|w|."""
    return ProbabilityMeasure({"": ONE}, 0, ("const", HALF),
                              PositivityWitness(0, 1))


def biased(p: Dyadic) -> ProbabilityMeasure:
    """Independent biased bits: p is the probability of a 0 at every step."""
    if not (ZERO < p < ONE):
        raise DomainError("bias must lie strictly between 0 and 1")
    k = max(p.precision, (ONE - p).precision)
    return ProbabilityMeasure({"": ONE}, 0, ("const", p),
                              PositivityWitness(0, k))


def from_table(table: dict[str, Dyadic], depth: int, ext=("const", HALF),
               witness: PositivityWitness | None = None) -> ProbabilityMeasure:
    return ProbabilityMeasure(table, depth, ext, witness)


def conditional_scaled(nu: ProbabilityMeasure, w: str, v: str):
    """Three-case conditional value B(w, v) under nu's witness.

    nu(w|v) when v extends to w and nu(w) clears the positivity threshold;
    1 when w is a prefix of v under the same threshold; 0 otherwise.
    Returns a Dyadic when the quotient is dyadic, else an Approximable.
    """
    validate_string(w)
    validate_string(v)
    mw = nu.mass(w)
    above = mw >= nu.witness.threshold(len(w))
    if is_prefix(v, w) and above:
        q = mw.to_fraction() / nu.mass(v).to_fraction()
        d = q.denominator
        if d & (d - 1):
            return Approximable(q)
        return Dyadic.from_fraction(q)
    if is_prefix(w, v) and above:
        return ONE
    return ZERO


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------
#   measure depth=N ext=half|copy
#   w mantissa precision          (one line per string, λ written as ~)
#   l poly c0 c1

def _string_token(w: str) -> str:
    return w if w else "~"


def _parse_string_token(tok: str) -> str:
    return "" if tok == "~" else validate_string(tok)


def dump_measure(nu: ProbabilityMeasure) -> str:
    if nu.ext[0] == "const" and nu.ext[1] != HALF:
        raise DomainError("file format only covers ext=half and ext=copy")
    ext = "half" if nu.ext[0] == "const" else "copy"
    lines = [f"measure depth={nu.depth} ext={ext}"]
    for n in range(nu.depth + 1):
        for w in strings_of_length(n):
            m = nu.table[w]
            lines.append(f"{_string_token(w)} {m.mantissa} {m.precision}")
    lines.append(f"l poly {nu.witness.c0} {nu.witness.c1}")
    return "\n".join(lines) + "\n"


def load_measure(text: str) -> ProbabilityMeasure:
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty measure file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "measure":
        raise ParseError(f"bad measure header: {lines[0]!r}")
    try:
        kv = dict(part.split("=", 1) for part in head[1:])
        depth = int(kv["depth"])
        ext_name = kv["ext"]
    except (ValueError, KeyError) as exc:
        raise ParseError(f"bad measure header: {lines[0]!r} ({exc})") from None
    if ext_name not in ("half", "copy"):
        raise ParseError(f"unknown extension {ext_name!r}")
    table: dict[str, Dyadic] = {}
    witness = None
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "l":
            if len(parts) != 4 or parts[1] != "poly":
                raise ParseError(f"bad witness line: {ln!r}")
            witness = PositivityWitness(int(parts[2]), int(parts[3]))
            continue
        if len(parts) != 3:
            raise ParseError(f"bad table line: {ln!r}")
        try:
            w = _parse_string_token(parts[0])
            table[w] = Dyadic(int(parts[1]), int(parts[2]))
        except (DomainError, ValueError) as exc:
            raise ParseError(f"bad table line {ln!r}: {exc}") from None
    if witness is None:
        raise ParseError("missing witness line `l poly c0 c1`")
    ext = ("const", HALF) if ext_name == "half" else ("copy",)
    try:
        nu = ProbabilityMeasure(table, depth, ext, witness)
    except DomainError as exc:
        raise ParseError(str(exc)) from None
    if not nu.weakly_positive(depth + 2):
        raise PreconditionError("measure is not weakly positive for its witness")
    return nu
