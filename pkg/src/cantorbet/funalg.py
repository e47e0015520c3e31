"""Typed term language for oracle-carrying function algebras.

Terms denote functionals over bit strings.  A term's signature is a pair
(oracle slots, string slots); oracles are total bit-string functions and
are passed positionally at evaluation time.  The combinators are
functional composition, expansion (adding ignored slots), recursion on
notation limited by a length bound, and numeric recursion limited by a
value bound.  Evaluation is metered: step count, largest intermediate
string, and the oracle query log.

The growth-padding primitive (`pad`) and the two recursion schemata are
what separate the algebra families; `closure_construct` builds a checker
for a chosen family.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .config import check_magnitude
from .core import bton, growth, ntob, pred, smash, succ, validate_string
from .errors import (
    BoundViolationError, DomainError, ParseError, PreconditionError,
)

# ---------------------------------------------------------------------------
# meters and oracles
# ---------------------------------------------------------------------------


@dataclass(eq=True)
class Meter:
    """Evaluation cost ledger: a stand-in for machine time and space.

    Steps grow with every node visited plus every symbol produced;
    max_len tracks the longest string ever materialized; the oracle log
    keeps (query, answer length) pairs in call order.
    """

    steps: int = 0
    max_len: int = 0
    oracle_log: list = field(default_factory=list)

    def charge(self, produced: str) -> None:
        self.steps += 1 + len(produced)
        if len(produced) > self.max_len:
            self.max_len = len(produced)

    def tick(self) -> None:
        self.steps += 1

    def saw(self, s: str) -> None:
        if len(s) > self.max_len:
            self.max_len = len(s)

    def record_query(self, query: str, answer: str) -> None:
        self.oracle_log.append((query, len(answer)))
        self.saw(query)
        self.saw(answer)

    @property
    def queried_radius(self) -> int:
        return max((len(q) for q, _ in self.oracle_log), default=0)


class Oracle:
    """A total function on bit strings.

    Finitely presented as a table with a default answer, or wrapped
    around a callable for builtins; either way every answer is checked
    to be a bit string.
    """

    def __init__(self, fn, *, table=None, default=None):
        self._fn = fn
        self.table = table
        self.default = default

    @classmethod
    def from_table(cls, table: dict, default: str = "") -> "Oracle":
        validate_string(default)
        clean = {}
        for q, a in table.items():
            validate_string(q)
            validate_string(a)
            clean[q] = a
        return cls(lambda w: clean.get(w, default), table=clean,
                   default=default)

    @classmethod
    def from_function(cls, fn) -> "Oracle":
        return cls(fn)

    def __call__(self, query: str) -> str:
        validate_string(query)
        answer = self._fn(query)
        validate_string(answer)
        return answer


def _render_word(w: str) -> str:
    return w if w else "~"


def _read_word(tok: str) -> str:
    w = "" if tok == "~" else tok
    validate_string(w)
    return w


def load_oracle(text: str) -> Oracle:
    """Table format: lines ``query answer``, final line ``default answer``."""
    table = {}
    default = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"oracle line {lineno}: expected two fields")
        key, answer = parts
        if default is not None:
            raise ParseError(
                f"oracle line {lineno}: default must be the final line")
        try:
            if key == "default":
                default = _read_word(answer)
            else:
                table[_read_word(key)] = _read_word(answer)
        except DomainError as e:
            raise ParseError(f"oracle line {lineno}: {e}") from e
    if default is None:
        raise ParseError("oracle table needs a final 'default' line")
    return Oracle.from_table(table, default)


def dump_oracle(oracle: Oracle) -> str:
    if oracle.table is None:
        raise DomainError("only table oracles can be serialized")
    lines = [f"{_render_word(q)} {_render_word(a)}"
             for q, a in sorted(oracle.table.items())]
    lines.append(f"default {_render_word(oracle.default)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------


class Term:
    """Immutable, well-typed by construction."""

    signature: tuple[int, int]

    def run(self, fs, xs, meter: Meter) -> str:
        raise NotImplementedError

    def to_sexpr(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<Term {self.to_sexpr()}>"

    def evaluate(self, oracles=(), args=(), meter: Meter | None = None) -> str:
        k, l = self.signature
        if len(oracles) != k:
            raise PreconditionError(
                f"term wants {k} oracle(s), got {len(oracles)}")
        if len(args) != l:
            raise PreconditionError(
                f"term wants {l} string argument(s), got {len(args)}")
        for x in args:
            validate_string(x)
        if meter is None:
            meter = Meter()
        for x in args:
            meter.saw(x)
        return self.run(tuple(oracles), tuple(args), meter)


class _Leaf(Term):
    """Primitive with a fixed signature; subclasses fill in apply()."""

    __slots__ = ()
    head = ""

    def to_sexpr(self):
        return f"({self.head})"

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(type(self))

    def run(self, fs, xs, meter):
        out = self.apply(fs, xs, meter)
        meter.charge(out)
        return out


class Const(_Leaf):
    head = "const"
    signature = (0, 0)

    def apply(self, fs, xs, meter):
        return ""


class S0(_Leaf):
    head = "s0"
    signature = (0, 1)

    def apply(self, fs, xs, meter):
        return xs[0] + "0"


class S1(_Leaf):
    head = "s1"
    signature = (0, 1)

    def apply(self, fs, xs, meter):
        return xs[0] + "1"


class Succ(_Leaf):
    head = "succ"
    signature = (0, 1)

    def apply(self, fs, xs, meter):
        return succ(xs[0])


class Pred(_Leaf):
    head = "pred"
    signature = (0, 1)

    def apply(self, fs, xs, meter):
        return pred(xs[0])


class Smash(_Leaf):
    head = "smash"
    signature = (0, 2)

    def apply(self, fs, xs, meter):
        return smash(xs[0], xs[1])


class Ap(_Leaf):
    """The application functional: feed the string to the first oracle."""

    head = "ap"
    signature = (1, 1)

    def apply(self, fs, xs, meter):
        answer = fs[0](xs[0])
        meter.record_query(xs[0], answer)
        return answer


@dataclass(frozen=True)
class Proj(Term):
    """j-th of `arity` string arguments."""

    j: int
    arity: int = -1  # defaults to the minimum, j + 1

    def __post_init__(self):
        if self.arity == -1:
            object.__setattr__(self, "arity", self.j + 1)
        if self.j < 0 or self.arity <= self.j:
            raise DomainError(
                f"projection: index {self.j} outside arity {self.arity}")
        object.__setattr__(self, "signature", (0, self.arity))

    def to_sexpr(self):
        if self.arity == self.j + 1:
            return f"(proj {self.j})"
        return f"(proj {self.j} {self.arity})"

    def run(self, fs, xs, meter):
        out = xs[self.j]
        meter.charge(out)
        return out


@dataclass(frozen=True)
class Pad(Term):
    """x -> a run of ones of length growth(i, |x|)."""

    i: int
    signature = (0, 1)

    def __post_init__(self):
        if self.i < 0:
            raise DomainError("pad: growth index must be >= 0")

    def to_sexpr(self):
        return f"(pad {self.i})"

    def run(self, fs, xs, meter):
        out = "1" * growth(self.i, len(xs[0]))
        meter.charge(out)
        return out


@dataclass(frozen=True)
class OracleRef(Term):
    """Apply the j-th of `slots` oracles to the single string argument."""

    j: int
    slots: int = -1

    def __post_init__(self):
        if self.slots == -1:
            object.__setattr__(self, "slots", self.j + 1)
        if self.j < 0 or self.slots <= self.j:
            raise DomainError(
                f"oracle reference: slot {self.j} outside {self.slots}")
        object.__setattr__(self, "signature", (self.slots, 1))

    def to_sexpr(self):
        if self.slots == self.j + 1:
            return f"(oracle {self.j})"
        return f"(oracle {self.j} {self.slots})"

    def run(self, fs, xs, meter):
        answer = fs[self.j](xs[0])
        meter.record_query(xs[0], answer)
        meter.charge(answer)
        return answer


@dataclass(frozen=True)
class Comp(Term):
    """Functional composition: outer(fs, inner_1(fs, xs), ...)."""

    outer: Term
    inners: tuple

    def __post_init__(self):
        object.__setattr__(self, "inners", tuple(self.inners))
        if not self.inners:
            raise DomainError("composition: needs at least one inner term")
        ko, lo = self.outer.signature
        if lo != len(self.inners):
            raise DomainError(
                f"composition: outer term takes {lo} string(s), "
                f"got {len(self.inners)} inner term(s)")
        sigs = {t.signature for t in self.inners}
        if len(sigs) != 1:
            raise DomainError(
                "composition: inner terms must share one signature, "
                f"saw {sorted(sigs)}")
        ki, li = next(iter(sigs))
        if ki != ko:
            raise DomainError(
                f"composition: outer term uses {ko} oracle slot(s), "
                f"inner terms use {ki}")
        object.__setattr__(self, "signature", (ko, li))

    def to_sexpr(self):
        parts = " ".join(t.to_sexpr() for t in self.inners)
        if isinstance(self.outer, _Leaf):
            return f"({self.outer.head} {parts})"
        return f"(comp {self.outer.to_sexpr()} {parts})"

    def run(self, fs, xs, meter):
        vals = tuple(t.run(fs, xs, meter) for t in self.inners)
        meter.tick()
        return self.outer.run(fs, vals, meter)


@dataclass(frozen=True)
class Expand(Term):
    """Add ignored trailing slots: extra oracle slots and string slots."""

    inner: Term
    extra_oracles: int
    extra_args: int

    def __post_init__(self):
        if self.extra_oracles < 0 or self.extra_args < 0:
            raise DomainError("expansion: slot counts must be >= 0")
        k, l = self.inner.signature
        object.__setattr__(
            self, "signature",
            (k + self.extra_oracles, l + self.extra_args))

    def to_sexpr(self):
        return (f"(expand {self.inner.to_sexpr()} "
                f"{self.extra_oracles} {self.extra_args})")

    def run(self, fs, xs, meter):
        k, l = self.inner.signature
        return self.inner.run(fs[:k], xs[:l], meter)


def _check_schema(name, base: Term, step: Term, bound: Term):
    k, l = base.signature
    if step.signature != (k, l + 2):
        raise DomainError(
            f"{name}: step term must have signature {(k, l + 2)} "
            f"(base plus recursion argument and previous value), "
            f"got {step.signature}")
    if bound.signature != (k, l + 1):
        raise DomainError(
            f"{name}: bound term must have signature {(k, l + 1)}, "
            f"got {bound.signature}")
    return k, l


@dataclass(frozen=True)
class Lrn(Term):
    """Recursion on notation, peeling the last bit, length-limited.

    value(xs, empty) = base(xs); value(xs, w·b) = step(xs, w·b, value(xs, w));
    at every stage |value| <= |bound(xs, stage)|, the empty stage included.
    """

    base: Term
    step: Term
    bound: Term

    def __post_init__(self):
        k, l = _check_schema("recursion on notation", self.base, self.step,
                             self.bound)
        object.__setattr__(self, "signature", (k, l + 1))

    def to_sexpr(self):
        return (f"(lrn {self.base.to_sexpr()} {self.step.to_sexpr()} "
                f"{self.bound.to_sexpr()})")

    def run(self, fs, xs, meter):
        front, w = xs[:-1], xs[-1]
        val = self.base.run(fs, front, meter)
        for stop in range(len(w) + 1):
            prefix = w[:stop]
            if stop > 0:
                meter.tick()
                val = self.step.run(fs, front + (prefix, val), meter)
            limit = self.bound.run(fs, front + (prefix,), meter)
            if len(val) > len(limit):
                raise BoundViolationError("lrn", prefix, len(val), len(limit))
        return val


@dataclass(frozen=True)
class Br(Term):
    """Numeric recursion, value-limited.

    The last argument is read as a number n; value(xs, 0) = base(xs),
    value(xs, t+1) = step(xs, t, value(xs, t)), and numerically
    value(xs, t) <= bound(xs, t) at every t up to n.
    """

    base: Term
    step: Term
    bound: Term

    def __post_init__(self):
        k, l = _check_schema("bounded recursion", self.base, self.step,
                             self.bound)
        object.__setattr__(self, "signature", (k, l + 1))

    def to_sexpr(self):
        return (f"(br {self.base.to_sexpr()} {self.step.to_sexpr()} "
                f"{self.bound.to_sexpr()})")

    def run(self, fs, xs, meter):
        front, n = xs[:-1], bton(xs[-1])
        check_magnitude(n, "bounded recursion counter")
        val = self.base.run(fs, front, meter)
        for t in range(n + 1):
            if t > 0:
                meter.tick()
                val = self.step.run(fs, front + (ntob(t - 1), val), meter)
            limit = self.bound.run(fs, front + (ntob(t),), meter)
            if bton(val) > bton(limit):
                raise BoundViolationError("br", t, bton(val), bton(limit))
        return val


def evaluate(term: Term, oracles=(), args=(), meter: Meter | None = None):
    return term.evaluate(oracles, args, meter)


# ---------------------------------------------------------------------------
# s-expression grammar
# ---------------------------------------------------------------------------

_LEAVES = {cls.head: cls for cls in (Const, S0, S1, Succ, Pred, Smash, Ap)}

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def _tokenize_term(text: str):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"bad character at position {pos}")
    return out


def _take_ints(toks, i, head, minimum, maximum):
    """Read between minimum and maximum leading integer parameters."""
    ints = []
    while len(ints) < maximum and i < len(toks):
        tok, pos = toks[i]
        if not tok.isdigit():
            break
        ints.append(int(tok))
        i += 1
    if len(ints) < minimum:
        raise ParseError(
            f"'{head}' needs {minimum} numeric parameter(s) "
            f"(at position {toks[i - 1][1] if i else 0})")
    return ints, i

def _parse_term(toks, i):
    if i >= len(toks):
        raise ParseError("unexpected end of input")
    tok, pos = toks[i]
    if tok != "(":
        raise ParseError(f"expected '(' at position {pos}")
    i += 1
    if i >= len(toks):
        raise ParseError("unexpected end of input after '('")
    head, hpos = toks[i]
    if head in ("(", ")"):
        raise ParseError(f"expected an operator name at position {hpos}")
    i += 1

    params: list[int] = []
    if head == "proj" or head == "oracle":
        params, i = _take_ints(toks, i, head, 1, 2)
    elif head == "pad":
        params, i = _take_ints(toks, i, head, 1, 1)
    elif head == "expand":
        pass  # the two counts come after the inner term

    children = []
    while i < len(toks) and toks[i][0] == "(":
        child, i = _parse_term(toks, i)
        children.append(child)

    if head == "expand":
        if len(children) != 1:
            raise ParseError(
                f"'expand' takes one inner term (at position {hpos})")
        params, i = _take_ints(toks, i, head, 2, 2)

    if i >= len(toks) or toks[i][0] != ")":
        where = toks[i][1] if i < len(toks) else len(toks)
        raise ParseError(f"expected ')' closing '{head}' (position {where})")
    i += 1

    try:
        term = _build_term(head, params, children, hpos)
    except DomainError:
        raise
    return term, i


def _build_term(head, params, children, pos):
    if head in _LEAVES:
        leaf = _LEAVES[head]()
        if not children:
            return leaf
        return Comp(leaf, tuple(children))
    if head == "proj":
        t = Proj(*params)
    elif head == "oracle":
        t = OracleRef(*params)
    elif head == "pad":
        t = Pad(params[0])
    elif head == "comp":
        if len(children) < 2:
            raise ParseError(
                f"'comp' needs an outer term and at least one inner "
                f"(position {pos})")
        return Comp(children[0], tuple(children[1:]))
    elif head == "expand":
        return Expand(children[0], params[0], params[1])
    elif head == "lrn":
        if len(children) != 3:
            raise ParseError(f"'lrn' takes three terms (position {pos})")
        return Lrn(*children)
    elif head == "br":
        if len(children) != 3:
            raise ParseError(f"'br' takes three terms (position {pos})")
        return Br(*children)
    else:
        raise ParseError(f"unknown operator '{head}' at position {pos}")
    if children:
        return Comp(t, tuple(children))
    return t


def parse_term(text: str) -> Term:
    toks = _tokenize_term(text)
    if not toks:
        raise ParseError("empty term")
    term, i = _parse_term(toks, 0)
    if i != len(toks):
        raise ParseError(f"trailing input at position {toks[i][1]}")
    return term


# ---------------------------------------------------------------------------
# algebra families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraChecker:
    """Decides whether a term is formable in one algebra family."""

    family: str
    pad_limit: int
    notation_recursion: bool
    numeric_recursion: bool
    oracle_slots: int

    def check(self, term: Term) -> tuple[int, int]:
        self._walk(term)
        k, l = term.signature
        if k > self.oracle_slots:
            raise DomainError(
                f"{term.to_sexpr()} uses {k} oracle slot(s); "
                f"{self.family} was given {self.oracle_slots}")
        return term.signature

    def accepts(self, term: Term) -> bool:
        try:
            self.check(term)
        except DomainError:
            return False
        return True

    def _walk(self, term: Term) -> None:
        if isinstance(term, Pad) and term.i > self.pad_limit:
            raise DomainError(
                f"(pad {term.i}) is not available in {self.family}")
        if isinstance(term, Lrn) and not self.notation_recursion:
            raise DomainError(
                f"lrn is not available in {self.family}")
        if isinstance(term, Br) and not self.numeric_recursion:
            raise DomainError(
                f"br is not available in {self.family}")
        for child in _children(term):
            self._walk(child)


def _children(term: Term):
    if isinstance(term, Comp):
        return (term.outer, *term.inners)
    if isinstance(term, Expand):
        return (term.inner,)
    if isinstance(term, (Lrn, Br)):
        return (term.base, term.step, term.bound)
    return ()


_FAMILY = re.compile(r"(bff|bfsf)(?:_(\d+))?\Z")


def closure_construct(base: str, extra_oracles: int = 0) -> AlgebraChecker:
    """Checker for the time family (with or without growth index) or the
    space family; the index caps which pads are admitted."""
    m = _FAMILY.match(base)
    if not m:
        raise DomainError(f"unknown algebra family {base!r}")
    kind, idx = m.group(1), m.group(2)
    if extra_oracles < 0:
        raise DomainError("oracle count must be >= 0")
    if idx is None:
        if kind == "bfsf":
            raise DomainError("the space family needs a growth index")
        return AlgebraChecker(base, 0, True, False, extra_oracles)
    i = int(idx)
    if i < 1:
        raise DomainError("growth index must be >= 1")
    if kind == "bff":
        return AlgebraChecker(base, i, True, False, extra_oracles)
    return AlgebraChecker(base, i, False, True, extra_oracles)


# ---------------------------------------------------------------------------
# a small combinator library, used for the length functional
# ---------------------------------------------------------------------------


def ones_term() -> Term:
    """x -> 1^|x|, by smashing against a single 1."""
    one = Comp(S1(), (Expand(Const(), 0, 1),))
    return Comp(Smash(), (Proj(0), one))


def binary_length_term() -> Term:
    """x -> the numeral for |x| (notation recursion, one succ per bit)."""
    return Lrn(Const(), Comp(Succ(), (Proj(1, 2),)), Proj(0))


def monus_term() -> Term:
    """(a, b) -> numeral for max(a - b, 0), numerically."""
    base = Proj(0)                       # a
    step = Comp(Pred(), (Proj(2, 3),))   # pred(previous)
    bound = Proj(0, 2)                   # never exceeds a
    return Br(base, step, bound)


def if_zero_term() -> Term:
    """(a, b, c) -> a when c encodes 0, else b.

    Numeric recursion on c: stage 0 yields a, any later stage yields b.
    The bound is an all-ones string longer than both candidates.
    """
    base = Proj(0, 2)
    step = Proj(1, 4)
    big = Comp(Smash(), (Comp(S1(), (Proj(0, 3),)),
                         Comp(S1(), (Proj(1, 3),))))
    return Br(base, step, big)


def _lift(term: Term, oracles: int = 1) -> Term:
    return Expand(term, oracles, 0)


def longest_answer_index_term(space_pure: bool = False) -> Term:
    """(f; n) -> numerically least y <= n maximizing |f(y)|.

    Walks y = 0..n keeping the best index so far; the kept index never
    exceeds the stage number, which is the recursion bound.  Answer
    lengths are compared through their numerals by default; with
    space_pure they are compared through unary encodings instead, so
    the whole term uses numeric recursion only (slower, but formable
    in the space family).
    """
    pr_n = Expand(Proj(0, 2), 1, 0)
    pr_prev = Expand(Proj(1, 2), 1, 0)
    candidate = Comp(Expand(Succ(), 1, 0), (pr_n,))
    ask = Ap()
    len_of = _lift(ones_term() if space_pure else binary_length_term())
    longer_gap = Comp(_lift(monus_term()), (
        Comp(len_of, (Comp(ask, (candidate,)),)),
        Comp(len_of, (Comp(ask, (pr_prev,)),)),
    ))
    keep = Comp(_lift(if_zero_term()), (pr_prev, candidate, longer_gap))
    return Br(Expand(Const(), 1, 0), keep, Expand(Proj(0), 1, 0))


def length_term(space_pure: bool = False) -> Term:
    """(f; x) -> 1^(max |f(w)| over |w| <= |x|), entirely in the algebra.

    All strings of length <= |x| sit numerically below the all-ones
    string of length |x|, so the search radius is ones(x).
    """
    ones = _lift(ones_term())
    radius = Comp(ones, (Expand(Proj(0), 1, 0),))
    best = Comp(longest_answer_index_term(space_pure), (radius,))
    return Comp(ones, (Comp(Ap(), (best,)),))


def length_functional(f: Oracle, x: str, method: str = "term",
                      meter: Meter | None = None) -> str:
    """1^(max |f(w)| over all |w| <= |x|), by algebra term or brute force."""
    validate_string(x)
    if method == "term":
        return length_term().evaluate((f,), (x,), meter)
    if method != "brute":
        raise DomainError(f"unknown method {method!r}")
    check_magnitude(2 ** (len(x) + 1), "brute-force search space")
    best = 0
    for n in range(len(x) + 1):
        for i in range(1 << n):
            w = format(i, f"0{n}b") if n else ""
            best = max(best, len(f(w)))
    return "1" * best


# ---------------------------------------------------------------------------
# growth-bound expressions
# ---------------------------------------------------------------------------


class SecPoly:
    """Second-order growth expressions over numbers and length functions."""

    def evaluate(self, lengths=(), nvals=()) -> int:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<SecPoly {self.to_text()}>"


@dataclass(frozen=True)
class SPConst(SecPoly):
    c: int

    def __post_init__(self):
        if self.c < 0:
            raise DomainError("constants must be natural numbers")

    def evaluate(self, lengths=(), nvals=()):
        return self.c

    def to_text(self):
        return str(self.c)


@dataclass(frozen=True)
class SPVar(SecPoly):
    """First-order variable n_j (1-indexed)."""

    j: int

    def evaluate(self, lengths=(), nvals=()):
        if not 1 <= self.j <= len(nvals):
            raise DomainError(f"unbound variable n{self.j}")
        return nvals[self.j - 1]

    def to_text(self):
        return f"n{self.j}"


@dataclass(frozen=True)
class SPAdd(SecPoly):
    p: SecPoly
    q: SecPoly

    def evaluate(self, lengths=(), nvals=()):
        return self.p.evaluate(lengths, nvals) + self.q.evaluate(lengths, nvals)

    def to_text(self):
        return f"{self.p.to_text()} + {self.q.to_text()}"


@dataclass(frozen=True)
class SPMul(SecPoly):
    p: SecPoly
    q: SecPoly

    def _factor(self, side):
        text = side.to_text()
        if isinstance(side, SPAdd):
            return f"({text})"
        return text

    def evaluate(self, lengths=(), nvals=()):
        return self.p.evaluate(lengths, nvals) * self.q.evaluate(lengths, nvals)

    def to_text(self):
        return f"{self._factor(self.p)} * {self._factor(self.q)}"


@dataclass(frozen=True)
class SPApp(SecPoly):
    """Second-order variable applied to a subexpression: L_j(P)."""

    j: int
    p: SecPoly

    def evaluate(self, lengths=(), nvals=()):
        if not 1 <= self.j <= len(lengths):
            raise DomainError(f"unbound variable L{self.j}")
        return lengths[self.j - 1](self.p.evaluate(lengths, nvals))

    def to_text(self):
        return f"L{self.j}({self.p.to_text()})"


@dataclass(frozen=True)
class SPGrow(SecPoly):
    """Growth-scale application: g_i(P)."""

    i: int
    p: SecPoly

    def __post_init__(self):
        if self.i < 0:
            raise DomainError("growth index must be >= 0")

    def evaluate(self, lengths=(), nvals=()):
        return growth(self.i, self.p.evaluate(lengths, nvals))

    def to_text(self):
        return f"g{self.i}({self.p.to_text()})"


_SP_TOKEN = re.compile(r"\s*([nLg]\d+|\d+|[()+*])")


def _tokenize_secpoly(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _SP_TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError(f"bad character at position {pos}")
            break
        toks.append((m.group(1), m.start(1)))
        pos = m.end()
    return toks


class _SPParser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, expect=None):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of expression")
        tok, pos = self.toks[self.i]
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r} at position {pos}")
        self.i += 1
        return tok, pos

    def expr(self):
        p = self.product()
        while self.peek() == "+":
            self.take()
            p = SPAdd(p, self.product())
        return p

    def product(self):
        p = self.atom()
        while self.peek() == "*":
            self.take()
            p = SPMul(p, self.atom())
        return p

    def atom(self):
        tok, pos = self.take()
        if tok == "(":
            p = self.expr()
            self.take(")")
            return p
        if tok.isdigit():
            return SPConst(int(tok))
        if tok[0] == "n":
            return SPVar(int(tok[1:]))
        if tok[0] in "Lg":
            self.take("(")
            p = self.expr()
            self.take(")")
            if tok[0] == "L":
                return SPApp(int(tok[1:]), p)
            return SPGrow(int(tok[1:]), p)
        raise ParseError(f"unexpected token {tok!r} at position {pos}")


def parse_secpoly(text: str) -> SecPoly:
    toks = _tokenize_secpoly(text)
    if not toks:
        raise ParseError("empty expression")
    parser = _SPParser(toks)
    p = parser.expr()
    if parser.i != len(parser.toks):
        raise ParseError(
            f"trailing input at position {parser.toks[parser.i][1]}")
    return p


def eval_secpoly(poly: SecPoly, lengths=(), nvals=()) -> int:
    return poly.evaluate(tuple(lengths), tuple(nvals))


# ---------------------------------------------------------------------------
# metered bound checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    result: str
    steps: int
    max_len: int
    allowed: int
    radius: int
    within_steps: bool
    within_length: bool

    @property
    def within(self) -> bool:
        return self.within_steps and self.within_length

    def render(self) -> str:
        flag = "within" if self.within else "VIOLATED"
        return (f"steps={self.steps} max_len={self.max_len} "
                f"allowed={self.allowed} radius={self.radius} {flag}")


def restricted_length(f: Oracle, radius: int):
    """|f| by brute force, frozen outside the queried radius."""
    check_magnitude(2 ** (radius + 1), "brute-force search space")
    best = [0] * (radius + 1)
    seen = 0
    for n in range(radius + 1):
        for i in range(1 << n):
            w = format(i, f"0{n}b") if n else ""
            seen = max(seen, len(f(w)))
        best[n] = seen

    def length(n: int) -> int:
        if n < 0:
            raise DomainError("length argument must be >= 0")
        return best[min(n, radius)]

    return length


def check_bound(term: Term, poly: SecPoly, oracles=(), args=()) -> BoundReport:
    """Metered evaluation against a growth bound.

    The expression is evaluated with n_j = |x_j| and L_j = the j-th
    oracle's length function (brute-forced up to the radius actually
    queried).  Both the step meter and the longest intermediate string
    are compared against the bound's value.
    """
    meter = Meter()
    result = term.evaluate(oracles, args, meter)
    radius = meter.queried_radius
    lengths = [restricted_length(f, radius) for f in oracles]
    nvals = [len(x) for x in args]
    allowed = eval_secpoly(poly, lengths, nvals)
    return BoundReport(
        result=result,
        steps=meter.steps,
        max_len=meter.max_len,
        allowed=allowed,
        radius=radius,
        within_steps=meter.steps <= allowed,
        within_length=meter.max_len <= allowed,
    )
