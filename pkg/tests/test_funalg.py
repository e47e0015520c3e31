"""Term language: typing, evaluation, metering, recursion bounds,
growth expressions, and algebra-family checkers."""

from __future__ import annotations

import random

import pytest

from cantorbet.config import set_magnitude_cap
from cantorbet.errors import (
    BoundViolationError, DomainError, ParseError, PreconditionError,
    ResourceError,
)
from cantorbet.funalg import (
    Ap, Br, BoundReport, Comp, Const, Expand, Lrn, Meter, Oracle, OracleRef,
    Pad, Pred, Proj, S0, S1, Smash, Succ, binary_length_term, check_bound,
    dump_oracle, eval_secpoly, evaluate, if_zero_term, length_functional,
    length_term, load_oracle, monus_term, ones_term, parse_secpoly,
    parse_term, closure_construct, restricted_length,
)
from cantorbet.calibration import EVALUATOR_MARGIN, recalibrate
from cantorbet.core import bton, ntob


IDENT = Oracle.from_function(lambda w: w)
DOUBLE = Oracle.from_function(lambda w: w + w)
EMPTY = Oracle.from_function(lambda w: "")


def random_oracle(rng, radius=4, answer_len=8):
    table = {}
    for n in range(radius):
        for i in range(1 << n):
            w = format(i, f"0{n}b") if n else ""
            if rng.random() < 0.6:
                table[w] = "".join(
                    rng.choice("01") for _ in range(rng.randrange(answer_len)))
    default = "".join(rng.choice("01")
                      for _ in range(rng.randrange(answer_len)))
    return Oracle.from_table(table, default)


# ---------------------------------------------------------------------------
# primitives and signatures
# ---------------------------------------------------------------------------

def test_primitive_values():
    assert Const().evaluate((), ()) == ""
    assert S0().evaluate((), ("1",)) == "10"
    assert S1().evaluate((), ("1",)) == "11"
    assert Succ().evaluate((), ("0",)) == "1"
    assert Pred().evaluate((), ("1",)) == "0"
    assert Smash().evaluate((), ("11", "111")) == "1" * 6
    assert Proj(1).evaluate((), ("0", "1")) == "1"
    assert Ap().evaluate((IDENT,), ("010",)) == "010"


def test_pad_growth():
    assert Pad(0).evaluate((), ("111",)) == "1" * 6
    assert Pad(1).evaluate((), ("111",)) == "1" * 9
    assert Pad(2).evaluate((), ("1111",)) == "1" * 16
    assert Pad(1).evaluate((), ("",)) == ""


def test_signatures():
    assert Const().signature == (0, 0)
    assert Smash().signature == (0, 2)
    assert Proj(2).signature == (0, 3)
    assert Proj(0, 4).signature == (0, 4)
    assert Ap().signature == (1, 1)
    assert OracleRef(1).signature == (2, 1)
    assert Expand(Smash(), 2, 1).signature == (2, 3)
    assert ones_term().signature == (0, 1)
    assert length_term().signature == (1, 1)


def test_bad_constructions():
    with pytest.raises(DomainError):
        Proj(3, 2)
    with pytest.raises(DomainError):
        OracleRef(2, 1)
    with pytest.raises(DomainError):
        Pad(-1)
    with pytest.raises(DomainError):
        Expand(Const(), -1, 0)
    with pytest.raises(DomainError):
        Comp(Smash(), (Proj(0),))  # outer wants two strings
    with pytest.raises(DomainError):
        Comp(Smash(), (Proj(0, 1), Proj(0, 2)))  # differing signatures
    with pytest.raises(DomainError):
        Comp(Ap(), (Proj(0),))  # oracle arity mismatch
    with pytest.raises(DomainError):
        Lrn(Const(), S0(), Proj(0))  # step must take two extra strings
    with pytest.raises(DomainError):
        Br(Const(), Smash(), Const())


def test_evaluate_preconditions():
    with pytest.raises(PreconditionError):
        S0().evaluate((), ())
    with pytest.raises(PreconditionError):
        Ap().evaluate((), ("0",))
    with pytest.raises(DomainError):
        S0().evaluate((), ("2",))


# ---------------------------------------------------------------------------
# parsing and printing
# ---------------------------------------------------------------------------

def test_parse_examples():
    t = parse_term("(s1 (s0 (const)))")
    assert t.evaluate((), ()) == "01"
    t = parse_term("(comp (smash) (proj 0) (proj 0))")
    assert t.evaluate((), ("11",)) == "1111"
    t = parse_term("(smash (proj 0) (proj 0))")
    assert t.evaluate((), ("111",)) == "1" * 9
    t = parse_term("(pad 1)")
    assert t.evaluate((), ("11",)) == "1111"
    t = parse_term("(expand (const) 1 2)")
    assert t.signature == (1, 2)
    t = parse_term("(oracle 1 2)")
    assert t.evaluate((IDENT, DOUBLE), ("01",)) == "0101"


def test_parse_errors():
    for bad in ["", "(", ")", "(boom)", "(s0", "(proj)", "(pad x)",
                "(comp (s0))", "(lrn (const) (const))", "(const) junk",
                "(expand (const) 1)", "(proj 0) (proj 1)"]:
        with pytest.raises(ParseError):
            parse_term(bad)
    with pytest.raises(DomainError):
        parse_term("(lrn (const) (smash) (const))")  # bound arity wrong


def test_parse_error_positions():
    with pytest.raises(ParseError) as e:
        parse_term("(comp (s0) (boom))")
    assert "position" in str(e.value)


def test_print_parse_round_trip():
    samples = [
        ones_term(), binary_length_term(), monus_term(), if_zero_term(),
        length_term(), Pad(2), Proj(1, 3), OracleRef(0, 2),
        Comp(Smash(), (Proj(0, 2), Proj(1, 2))),
        Expand(Comp(S1(), (Proj(0),)), 1, 1),
    ]
    for t in samples:
        assert parse_term(t.to_sexpr()) == t
        assert parse_term(t.to_sexpr()).to_sexpr() == t.to_sexpr()


# ---------------------------------------------------------------------------
# recursion on notation
# ---------------------------------------------------------------------------

def test_ones_term():
    t = ones_term()
    for w in ["", "0", "10110", "1" * 8]:
        assert t.evaluate((), (w,)) == "1" * len(w)


def test_binary_length_term():
    t = binary_length_term()
    for w in ["", "0", "11", "10110"]:
        assert bton(t.evaluate((), (w,))) == len(w)


def test_lrn_peels_last_bit():
    log = []

    def spy(w):
        log.append(w)
        return ""

    t = Lrn(Expand(Const(), 1, 0),
            Comp(OracleRef(0), (Expand(Proj(0, 2), 1, 0),)),
            Expand(Proj(0), 1, 0))
    t.evaluate((Oracle.from_function(spy),), ("0110",))
    assert log == ["0", "01", "011", "0110"]


def test_lrn_bound_violation():
    grow = Lrn(Const(), Comp(S1(), (Proj(1, 2),)), Expand(Const(), 0, 1))
    with pytest.raises(BoundViolationError) as e:
        grow.evaluate((), ("0",))
    assert e.value.schema == "lrn"
    assert e.value.step == "0"
    assert (e.value.got, e.value.allowed) == (1, 0)


def test_lrn_bound_checked_at_base():
    t = Lrn(Comp(S0(), (Const(),)), Comp(S1(), (Proj(1, 2),)),
            Expand(Const(), 0, 1))
    with pytest.raises(BoundViolationError) as e:
        t.evaluate((), ("11",))
    assert e.value.step == ""


def test_lrn_matches_iterative_expansion():
    rng = random.Random(21)
    lift3 = lambda t: Expand(t, 3, 0)
    keep_prev = Comp(lift3(S0()), (Expand(Proj(1, 2), 3, 0),))
    read_stage = Comp(OracleRef(1, 3), (Expand(Proj(0, 2), 3, 0),))
    wide = Comp(lift3(Smash()), (
        Comp(lift3(Pad(0)), (Comp(lift3(S1()), (lift3(Proj(0)),)),)),
        Comp(lift3(Pad(0)), (Comp(lift3(S1()), (lift3(Proj(0)),)),)),
    ))
    base = Comp(OracleRef(0, 3), (Expand(Const(), 3, 0),))
    for _ in range(20):
        fs = tuple(random_oracle(rng, radius=3, answer_len=4)
                   for _ in range(3))
        for step_kind in (0, 1):
            h = keep_prev if step_kind == 0 else read_stage
            term = Lrn(base, h, wide)
            for size in range(7):
                w = "".join(rng.choice("01") for _ in range(size))
                got = term.evaluate(fs, (w,))
                want = fs[0]("")
                for j in range(1, len(w) + 1):
                    want = want + "0" if step_kind == 0 else fs[1](w[:j])
                assert got == want, (step_kind, w)


# ---------------------------------------------------------------------------
# bounded numeric recursion
# ---------------------------------------------------------------------------

def doubling_counter():
    # value(t) = numeral for 2t; bound n11 is numerically 4n + 6
    base = Const()
    step = Comp(Succ(), (Comp(Succ(), (Proj(1, 2),)),))
    bound = Comp(S1(), (Comp(S1(), (Proj(0),)),))
    return Br(base, step, bound)


def test_br_counts_numerically():
    t = doubling_counter()
    for n in range(41):
        assert bton(t.evaluate((), (ntob(n),))) == 2 * n


def test_br_bound_violation():
    t = Br(Const(), Comp(Succ(), (Comp(Succ(), (Proj(1, 2),)),)), Proj(0))
    with pytest.raises(BoundViolationError) as e:
        t.evaluate((), (ntob(3),))
    assert e.value.schema == "br"
    assert e.value.step == 1
    assert (e.value.got, e.value.allowed) == (2, 1)


def test_br_bound_checked_at_base():
    t = Br(Comp(S1(), (Const(),)), Proj(1, 2), Expand(Const(), 0, 1))
    with pytest.raises(BoundViolationError) as e:
        t.evaluate((), ("",))
    assert e.value.step == 0


def test_br_counter_hits_magnitude_cap():
    t = doubling_counter()
    with pytest.raises(ResourceError):
        t.evaluate((), ("1" * 25,))


def test_monus_and_if_zero():
    ms = monus_term()
    for a, b in [(0, 0), (5, 3), (3, 5), (7, 7), (12, 1)]:
        assert bton(ms.evaluate((), (ntob(a), ntob(b)))) == max(a - b, 0)
    iz = if_zero_term()
    assert iz.evaluate((), ("01", "10", "")) == "01"
    assert iz.evaluate((), ("01", "10", ntob(3))) == "10"


# ---------------------------------------------------------------------------
# the length functional
# ---------------------------------------------------------------------------

def test_length_examples():
    assert length_functional(IDENT, "101") == "111"
    assert length_functional(EMPTY, "101") == ""
    assert length_functional(DOUBLE, "11") == "1111"
    assert length_functional(DOUBLE, "11", "brute") == "1111"
    with pytest.raises(DomainError):
        length_functional(IDENT, "0", "guess")


def test_length_term_matches_brute_force():
    rng = random.Random(77)
    for _ in range(15):
        f = random_oracle(rng)
        for n in (0, 1, 3, 5):
            x = "".join(rng.choice("01") for _ in range(n))
            assert (length_functional(f, x)
                    == length_functional(f, x, "brute")), (f.table, x)


def test_brute_force_respects_cap():
    set_magnitude_cap(256)
    try:
        with pytest.raises(ResourceError):
            length_functional(IDENT, "1" * 10, "brute")
    finally:
        set_magnitude_cap(None)


# ---------------------------------------------------------------------------
# growth expressions
# ---------------------------------------------------------------------------

def test_secpoly_examples():
    assert eval_secpoly(parse_secpoly("L1(n1) + 3"), [lambda m: 2 * m], [5]) == 13
    assert eval_secpoly(parse_secpoly("g1(n1)"), [], [4]) == 16
    assert eval_secpoly(parse_secpoly("L1(L1(n1))"), [lambda m: m + 1], [0]) == 2
    assert eval_secpoly(parse_secpoly("2 * n1 + n2 * n2"), [], [3, 4]) == 22
    assert eval_secpoly(parse_secpoly("(n1 + 1) * (n1 + 2)"), [], [2]) == 12


def test_secpoly_unbound():
    with pytest.raises(DomainError):
        eval_secpoly(parse_secpoly("n2"), [], [5])
    with pytest.raises(DomainError):
        eval_secpoly(parse_secpoly("L1(3)"), [], [])


def test_secpoly_parse_errors():
    for bad in ["", "L1(", "3 +", "n1 n2", "%", "g1 4", ")("]:
        with pytest.raises(ParseError):
            parse_secpoly(bad)


def test_secpoly_round_trip():
    for text in ["L1(n1) + 3", "g1(n1)", "(n1 + 2) * L1(3)",
                 "g2(L1(n1) * n2 + 1)"]:
        p = parse_secpoly(text)
        assert parse_secpoly(p.to_text()) == p


def test_secpoly_monotone_in_lengths():
    rng = random.Random(5)

    def rand_poly(depth):
        pick = rng.randrange(6 if depth else 2)
        if pick == 0:
            return parse_secpoly(str(rng.randrange(4)))
        if pick == 1:
            return parse_secpoly("n1")
        if pick == 2:
            return parse_secpoly(f"L1({rand_poly(depth - 1).to_text()})")
        if pick == 3:
            return parse_secpoly(f"g1({rand_poly(depth - 1).to_text()})")
        a, b = rand_poly(depth - 1), rand_poly(depth - 1)
        op = "+" if pick == 4 else "*"
        return parse_secpoly(f"({a.to_text()}) {op} ({b.to_text()})")

    lo = lambda m: m + 1
    hi = lambda m: 3 * m + 2
    for _ in range(40):
        p = rand_poly(3)
        for n in (0, 2, 5):
            assert (eval_secpoly(p, [lo], [n])
                    <= eval_secpoly(p, [hi], [n]))


# ---------------------------------------------------------------------------
# metering and bound checks
# ---------------------------------------------------------------------------

def test_meter_contents():
    m = Meter()
    Ap().evaluate((DOUBLE,), ("010",), m)
    assert m.oracle_log == [("010", 6)]
    assert m.max_len == 6
    assert m.queried_radius == 3
    assert m.steps == 1 + 6


def test_expansion_costs_nothing_extra():
    base, expanded = Meter(), Meter()
    S0().evaluate((), ("01",), base)
    Expand(S0(), 1, 1).evaluate((IDENT,), ("01", "1111"), expanded)
    assert expanded.steps == base.steps


def test_determinism():
    rng = random.Random(3)
    f = random_oracle(rng)
    m1, m2 = Meter(), Meter()
    a = length_term().evaluate((f,), ("1011",), m1)
    b = length_term().evaluate((f,), ("1011",), m2)
    assert a == b
    assert m1 == m2


def test_check_bound_pad_within():
    poly = parse_secpoly(f"g1(n1) + {EVALUATOR_MARGIN}")
    rep = check_bound(Pad(1), poly, (), ("1" * 6,))
    assert rep.within and rep.within_steps and rep.within_length
    assert rep.result == "1" * 36


def test_check_bound_flags_violation():
    quartic = parse_term(
        "(smash (smash (proj 0) (proj 0)) (smash (proj 0) (proj 0)))")
    poly = parse_secpoly(f"g1(n1) + {EVALUATOR_MARGIN}")
    rep = check_bound(quartic, poly, (), ("1" * 3,))
    assert not rep.within_length and not rep.within_steps
    assert "VIOLATED" in rep.render()


def test_check_bound_length_term_space_only():
    rng = random.Random(11)
    f = random_oracle(rng)
    poly = parse_secpoly(f"g1(L1(n1) + n1 + {EVALUATOR_MARGIN})")
    rep = check_bound(length_term(), poly, (f,), ("1" * 6,))
    assert rep.within_length          # space stays quadratic
    assert not rep.within_steps       # time is exponential, and flagged
    assert rep.radius == 6


def test_restricted_length():
    table = {"": "1", "0": "111", "11": "11111"}
    f = Oracle.from_table(table, "")
    ln = restricted_length(f, 2)
    assert ln(0) == 1
    assert ln(1) == 3
    assert ln(2) == 5
    assert ln(9) == 5  # frozen beyond the radius
    with pytest.raises(DomainError):
        ln(-1)


def test_calibration_margin_still_covers():
    measured = recalibrate()
    assert set(measured) == {"pad_steps", "length_space"}
    assert all(v <= EVALUATOR_MARGIN for v in measured.values())


# ---------------------------------------------------------------------------
# algebra families
# ---------------------------------------------------------------------------

def test_family_pad_rules():
    bff = closure_construct("bff", 1)
    assert bff.accepts(Pad(0))
    assert not bff.accepts(Pad(1))
    with pytest.raises(DomainError) as e:
        bff.check(Pad(2))
    assert "(pad 2)" in str(e.value)
    assert closure_construct("bff_2", 0).accepts(Pad(2))
    assert not closure_construct("bff_2", 0).accepts(Pad(3))
    assert closure_construct("bfsf_1", 0).accepts(Pad(1))


def test_family_recursion_rules():
    lrn_term = binary_length_term()
    br_term = doubling_counter()
    assert closure_construct("bff", 0).accepts(lrn_term)
    assert not closure_construct("bff", 0).accepts(br_term)
    assert not closure_construct("bff_3", 0).accepts(br_term)
    space = closure_construct("bfsf_1", 0)
    assert space.accepts(br_term)
    with pytest.raises(DomainError) as e:
        space.check(lrn_term)
    assert "lrn" in str(e.value)


def test_family_oracle_slots():
    checker0 = closure_construct("bff", 0)
    checker1 = closure_construct("bff", 1)
    assert not checker0.accepts(Ap())
    assert checker1.accepts(Ap())


def test_length_term_lives_in_the_space_family():
    fast, pure = length_term(), length_term(space_pure=True)
    space = closure_construct("bfsf_1", 1)
    # numeric recursion keeps both out of the time family
    assert not closure_construct("bff_2", 1).accepts(fast)
    assert not closure_construct("bff_2", 1).accepts(pure)
    # the default build leans on notation recursion for speed; the pure
    # build compares lengths in unary and passes the space checker
    assert not space.accepts(fast)
    assert space.accepts(pure)
    rng = random.Random(13)
    for _ in range(3):
        f = random_oracle(rng, radius=3, answer_len=4)
        for x in ("", "1", "01"):
            assert (pure.evaluate((f,), (x,))
                    == length_functional(f, x, "brute"))


def test_family_idempotence():
    bff = closure_construct("bff", 1)
    accepted = [ones_term(), Comp(S0(), (Proj(0),)), Pad(0)]
    for t in accepted:
        assert bff.accepts(t)
        assert bff.accepts(Comp(S1(), (t,)))
        assert bff.accepts(Expand(t, 1, 2))
    g, h, k = accepted[1], Comp(S1(), (Proj(2, 3),)), Comp(Pad(0), (Proj(0, 2),))
    assert bff.accepts(Lrn(g, h, k))


def test_family_spelling():
    for bad in ["bfsf", "bff_0", "bfsf_0", "qqq", "bff_", "BFF"]:
        with pytest.raises(DomainError):
            closure_construct(bad)
    with pytest.raises(DomainError):
        closure_construct("bff", -1)


def test_deep_rejection_names_first_node():
    t = Comp(S0(), (Comp(S1(), (Comp(Pad(2), (Proj(0),)),)),))
    with pytest.raises(DomainError) as e:
        closure_construct("bff_1", 0).check(t)
    assert "(pad 2)" in str(e.value)


# ---------------------------------------------------------------------------
# oracle serialization
# ---------------------------------------------------------------------------

def test_oracle_round_trip():
    f = Oracle.from_table({"": "1", "01": "110"}, default="0")
    text = dump_oracle(f)
    g = load_oracle(text)
    assert g.table == f.table and g.default == f.default
    assert "~ 1" in text and text.strip().endswith("default 0")


def test_oracle_parse_errors():
    for bad in ["01 1", "01 1 1\ndefault 0", "01 2\ndefault 0",
                "default 0\n01 1"]:
        with pytest.raises(ParseError):
            load_oracle(bad)


def test_oracle_totality_checked():
    junk = Oracle.from_function(lambda w: "2")
    with pytest.raises(DomainError):
        junk("0")
    with pytest.raises(DomainError):
        Oracle.from_table({"0": "x"}, "")
