"""Tests for the expression language: parsing, differentiation, evaluation,
printing round-trips, and the finite-difference derivative property."""

import math

import numpy as np
import pytest

from qmsflow.exprlang import (
    BinOp, Call, Const, EvalDomainError, ExprSyntaxError,
    NonConstantExponentError, Param, Pow, UnknownIdentifierError, Var,
    compile_expr, differentiate, evaluate, format_expr, parse,
)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_metric_factor():
    e = parse("2/(1+r^2)")
    assert evaluate(e, 1.0) == pytest.approx(1.0, abs=0)  # 2/2
    assert evaluate(e, 2.0) == pytest.approx(0.4)


def test_parse_with_parameter():
    e = parse("sqrt(k+r^2)", params={"k"})
    assert evaluate(e, 2.0, {"k": 5.0}) == 3.0


def test_parse_truncated_input_reports_offset():
    with pytest.raises(ExprSyntaxError) as ei:
        parse("ln(")
    assert ei.value.offset == 3


def test_parse_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as ei:
        parse("2*zeta")
    assert ei.value.offset == 2
    assert ei.value.name == "zeta"


def test_parse_nonconstant_exponent_rejected():
    with pytest.raises(NonConstantExponentError):
        parse("r^r")
    with pytest.raises(NonConstantExponentError):
        parse("2^(1+r)")
    # parameters in the exponent are allowed
    e = parse("r^(1/nu)", params={"nu"})
    assert evaluate(e, 8.0, {"nu": 3.0}) == 2.0


def test_precedence_and_associativity():
    assert evaluate(parse("2-3-4"), 1.0) == -5.0
    assert evaluate(parse("2/4/2"), 1.0) == 0.25
    assert evaluate(parse("1+2*3"), 1.0) == 7.0
    # ^ binds tighter than unary minus and is right-associative
    assert evaluate(parse("-r^2"), 3.0) == -9.0
    assert evaluate(parse("2^3^2"), 1.0) == 512.0
    assert evaluate(parse("r^-2"), 2.0) == 0.25


def test_parse_garbage():
    with pytest.raises(ExprSyntaxError):
        parse("1 + + 2 )")
    with pytest.raises(ExprSyntaxError):
        parse("(1+2")
    with pytest.raises(ExprSyntaxError):
        parse("")


# ---------------------------------------------------------------------------
# evaluation and domains
# ---------------------------------------------------------------------------

def test_evaluate_ln():
    e = parse("ln(r)")
    assert evaluate(e, 1.0) == 0.0
    with pytest.raises(EvalDomainError):
        evaluate(e, 0.0)


def test_evaluate_rejects_nonpositive_radius():
    with pytest.raises(EvalDomainError):
        evaluate(parse("r+1"), -2.0)


def test_domain_errors_name_the_node():
    with pytest.raises(EvalDomainError) as ei:
        evaluate(parse("sqrt(1-r)"), 4.0)
    assert "sqrt" in str(ei.value)
    with pytest.raises(EvalDomainError):
        evaluate(parse("1/(r-1)"), 1.0)
    with pytest.raises(EvalDomainError):
        evaluate(parse("(r-2)^(1/2)"), 1.0)


def test_unbound_parameter():
    with pytest.raises(EvalDomainError):
        evaluate(parse("k*r", params={"k"}), 1.0)


# ---------------------------------------------------------------------------
# differentiation: frozen oracles
# ---------------------------------------------------------------------------

def test_derivative_power_rule():
    d = differentiate(parse("r^2"))
    for r in (0.5, 1.0, 3.25):
        assert evaluate(d, r) == pytest.approx(2 * r, rel=1e-15)


def test_derivative_ln():
    d = differentiate(parse("ln(r)"))
    for r in (0.5, 2.0, 7.5):
        assert evaluate(d, r) == pytest.approx(1 / r, rel=1e-15)


def test_derivative_quotient():
    # d/dr 2/(1+r^2) = -4r/(1+r^2)^2
    d = differentiate(parse("2/(1+r^2)"))
    for r in (0.25, 1.0, 2.0):
        assert evaluate(d, r) == pytest.approx(-4 * r / (1 + r * r) ** 2, rel=1e-14)


def test_derivative_table():
    cases = [
        ("sin(r)", lambda r: math.cos(r)),
        ("cos(r)", lambda r: -math.sin(r)),
        ("tan(r)", lambda r: 1 / math.cos(r) ** 2),
        ("exp(2*r)", lambda r: 2 * math.exp(2 * r)),
        ("sqrt(r)", lambda r: 0.5 / math.sqrt(r)),
        ("abs(r)", lambda r: 1.0),
        ("r^(3/2)", lambda r: 1.5 * math.sqrt(r)),
    ]
    for src, want in cases:
        d = differentiate(parse(src))
        for r in (0.3, 1.1, 2.7):
            assert evaluate(d, r) == pytest.approx(want(r), rel=1e-13), src


def test_second_derivative_of_catalog_factor():
    # f = sqrt(ln(r))/r on r > 1; f'' checked against a hand value at r = e
    f = parse("sqrt(ln(r))/r")
    fpp = differentiate(differentiate(f))
    r = math.e
    # hand derivation: f = (ln r)^(1/2) r^-1,
    # f' = r^-2 ((1/2)(ln r)^(-1/2) - (ln r)^(1/2))
    # f'' = r^-3 (2(ln r)^(1/2) - (3/2)(ln r)^(-1/2) - (1/4)(ln r)^(-3/2))
    want = (2 * 1 - 1.5 - 0.25) / r**3
    assert evaluate(fpp, r) == pytest.approx(want, rel=1e-12)


# ---------------------------------------------------------------------------
# random-tree properties
# ---------------------------------------------------------------------------

_PARAMS = {"k": 1.3, "nu": 1.5}


def _random_expr(rng, depth):
    """Random tree of depth <= 6, biased toward evaluable shapes: arguments of
    ln/sqrt and fractional powers are wrapped in abs(.)+shift."""
    if depth == 0 or rng.random() < 0.25:
        u = rng.random()
        if u < 0.5:
            return Var()
        if u < 0.8:
            return Const(round(float(rng.uniform(0.3, 2.5)), 3))
        return Param(rng.choice(list(_PARAMS)))
    u = rng.random()
    child = lambda: _random_expr(rng, depth - 1)
    if u < 0.55:
        op = rng.choice(["+", "-", "*"])
        return BinOp(op, child(), child())
    if u < 0.65:
        # keep the denominator away from zero
        return BinOp("/", child(), BinOp("+", Call("abs", child()), Const(0.5)))
    if u < 0.85:
        fn = rng.choice(["sin", "cos", "exp", "ln", "sqrt", "abs", "tan"])
        arg = child()
        if fn in ("ln", "sqrt"):
            arg = BinOp("+", Call("abs", arg), Const(0.7))
        if fn == "exp":
            # tame the magnitude
            arg = BinOp("/", arg, BinOp("+", Call("abs", arg), Const(2.0)))
        return Call(fn, arg)
    expo = rng.choice([Const(2.0), Const(3.0), Const(-1.0), Const(-2.0), Const(0.5), Const(1.5)])
    base = child()
    if expo.value not in (2.0, 3.0):
        base = BinOp("+", Call("abs", base), Const(0.4))
    return Pow(base, expo)


def test_fd_derivative_property():
    """1000 random trees: symbolic derivative matches central differences."""
    rng = np.random.default_rng(20240817)
    checked = 0
    while checked < 1000:
        e = _random_expr(rng, int(rng.integers(1, 7)))
        d = differentiate(e)
        r = float(rng.uniform(0.2, 3.0))
        h = 1e-6 * max(1.0, abs(r))
        try:
            v0 = evaluate(e, r, _PARAMS)
            sym = evaluate(d, r, _PARAMS)
            fd = (evaluate(e, r + h, _PARAMS) - evaluate(e, r - h, _PARAMS)) / (2 * h)
        except EvalDomainError:
            continue
        if not (math.isfinite(v0) and math.isfinite(sym) and math.isfinite(fd)):
            continue
        if max(abs(v0), abs(sym)) > 1e3:
            continue  # keep FD truncation/roundoff below the tolerance
        assert abs(fd - sym) <= 1e-6 * max(1.0, abs(sym)), format_expr(e)
        checked += 1


def test_print_parse_round_trip():
    rng = np.random.default_rng(7)
    done = 0
    while done < 100:
        e = _random_expr(rng, int(rng.integers(1, 7)))
        src = format_expr(e)
        e2 = parse(src, params=_PARAMS)
        r = float(rng.uniform(0.2, 3.0))
        try:
            a = evaluate(e, r, _PARAMS)
        except EvalDomainError:
            continue
        if not math.isfinite(a) or abs(a) > 1e12:
            continue
        b = evaluate(e2, r, _PARAMS)
        assert abs(a - b) <= 1e-15 * max(1.0, abs(a)), src
        done += 1


def test_compile_matches_evaluate():
    rng = np.random.default_rng(99)
    exprs = [
        "2/(1+r^2)", "sqrt(ln(r)+1)/r", "sqrt((4+r)/r)",
        "sqrt(a+b*r^(1/nu))*r^(1/(2*nu)-1)", "(r^2-1)/r",
    ]
    binds = {"a": 1.0, "b": 2.0, "nu": 1.5}
    for src in exprs:
        e = parse(src, params=binds)
        fn = compile_expr(e, binds)
        for _ in range(20):
            r = float(rng.uniform(0.3, 5.0))
            assert fn(r) == pytest.approx(evaluate(e, r, binds), rel=1e-15, abs=1e-300)


def test_derivative_of_derivative_stays_in_grammar():
    e = parse("sqrt(a+cos(ln(r)))/(r*abs(sin(ln(r))))", params={"a"})
    d2 = differentiate(differentiate(e))
    # evaluable and re-parseable
    v = evaluate(d2, 2.0, {"a": 2.0})
    assert math.isfinite(v)
    again = parse(format_expr(d2), params={"a"})
    assert evaluate(again, 2.0, {"a": 2.0}) == pytest.approx(v, rel=1e-12)
