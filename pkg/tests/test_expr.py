"""Tests for the kernel-factor expression language."""

import math

import numpy as np
import pytest

from gmequiv.errors import EvaluationError, ExpressionSyntaxError, UnknownIdentifier
from gmequiv.expr import (
    FUNCTIONS,
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    parse_kernel_expression,
)


class TestEvaluation:
    def test_polynomial(self):
        fn = parse_kernel_expression("t*(1 - t)")
        ts = np.linspace(0.0, 1.0, 17)
        np.testing.assert_allclose(fn(ts), ts * (1 - ts), rtol=0, atol=0)

    def test_known_functions(self):
        fn = parse_kernel_expression("exp(2*t) - 1")
        ts = np.linspace(0.0, 1.0, 9)
        np.testing.assert_allclose(fn(ts), np.exp(2 * ts) - 1, rtol=1e-15)

    def test_scientific_literals(self):
        assert parse_kernel_expression("1e-3")(0.0) == 1e-3
        assert parse_kernel_expression("2.5E+2")(0.0) == 250.0

    def test_scalar_in_float_out(self):
        fn = parse_kernel_expression("sqrt(t)")
        out = fn(0.25)
        assert isinstance(out, float)
        assert out == 0.5

    def test_array_in_array_out(self):
        fn = parse_kernel_expression("cos(t)")
        out = fn(np.zeros(5))
        assert isinstance(out, np.ndarray)
        assert out.shape == (5,)


class TestPrecedence:
    """Binding strength: ^ above unary minus above * and / above + and -."""

    def test_unary_minus_binds_below_power(self):
        assert parse_kernel_expression("-t^2")(3.0) == -9.0

    def test_power_right_associative(self):
        assert parse_kernel_expression("2^3^2")(0.0) == 512.0

    def test_division_left_associative(self):
        assert parse_kernel_expression("8/4/2")(0.0) == 1.0

    def test_subtraction_left_associative(self):
        assert parse_kernel_expression("1 - 2 - 3")(0.0) == -4.0

    def test_negative_exponent(self):
        assert parse_kernel_expression("2^-1")(0.0) == 0.5

    def test_double_negation(self):
        assert parse_kernel_expression("1 - -t")(2.0) == 3.0


class TestPrinting:
    def test_minimal_parens_kept_for_grouping(self):
        assert parse_kernel_expression("t*(1-t)").pretty() == "t*(1.0 - t)"

    def test_no_parens_when_precedence_suffices(self):
        assert parse_kernel_expression("(t*t)+1").pretty() == "t*t + 1.0"

    def test_negated_power_prints_without_parens(self):
        # -t^2 means -(t^2); the printer must not add parens that would
        # change the reading
        tree = Neg(BinOp("^", Var(), Num(2.0)))
        fn = parse_kernel_expression("-t^2.0")
        assert fn.root == tree
        assert fn.pretty() == "-t^2.0"

    def test_power_of_negation_keeps_parens(self):
        fn = parse_kernel_expression("(-t)^2.0")
        assert fn.pretty() == "(-t)^2.0"
        assert fn(3.0) == 9.0


def _random_tree(gen: np.random.Generator, depth: int):
    """Random AST inside the parser's image: Num values are nonnegative
    (the parser always produces Neg(Num), never a negative literal)."""
    if depth == 0 or gen.random() < 0.25:
        if gen.random() < 0.4:
            return Var()
        return Num(float(np.round(gen.uniform(0.0, 10.0), 3)))
    pick = int(gen.integers(0, 7))
    if pick == 0:
        return Neg(_random_tree(gen, depth - 1))
    if pick == 1:
        name = str(gen.choice(sorted(FUNCTIONS)))
        return Call(name, _random_tree(gen, depth - 1))
    op = "+-*/^"[int(gen.integers(0, 5))]
    return BinOp(op, _random_tree(gen, depth - 1), _random_tree(gen, depth - 1))


class TestRoundTrip:
    """pretty() emits text that re-parses to the identical tree."""

    def test_fixed_cases(self):
        for source in (
            "t", "1.5", "-t", "t + 1", "t - (1 - t)", "t*(2 - t)/(1 + t)",
            "exp(2*t) - exp(-2*t)", "sqrt(t^3)", "-(t + 1)", "t^t^t",
            "(t + 1)*(t + 2)", "1/(1 - t)", "cos(sin(t))",
        ):
            fn = parse_kernel_expression(source)
            again = parse_kernel_expression(fn.pretty())
            assert again.root == fn.root, source

    def test_random_trees(self):
        gen = np.random.default_rng(0)
        from gmequiv.expr import _PREC_ADD, _render

        for _ in range(300):
            tree = _random_tree(gen, 4)
            text = _render(tree, _PREC_ADD)
            assert parse_kernel_expression(text).root == tree, text


class TestErrors:
    def test_dangling_operator_offset(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_kernel_expression("1 + * 2")
        assert exc.value.offset == 4

    def test_unbalanced_paren(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_kernel_expression("(1 + 2")
        assert exc.value.expected == "')'"
        assert exc.value.offset == 6

    def test_trailing_garbage(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_kernel_expression("t q")
        assert exc.value.offset == 2

    def test_empty_input(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_kernel_expression("")
        assert exc.value.offset == 0

    def test_malformed_number(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_kernel_expression("1.2.3")
        assert exc.value.offset == 0
        assert "numeric" in exc.value.expected

    def test_double_star_is_not_power(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_kernel_expression("2 ** 3")

    def test_caret_diagnostic_in_message(self):
        with pytest.raises(ExpressionSyntaxError) as exc:
            parse_kernel_expression("1 + * 2")
        message = str(exc.value)
        assert "1 + * 2" in message
        assert "^" in message

    def test_unknown_function(self):
        with pytest.raises(UnknownIdentifier) as exc:
            parse_kernel_expression("foo(t)")
        assert exc.value.name == "foo"
        assert exc.value.offset == 0

    def test_bare_name(self):
        with pytest.raises(UnknownIdentifier) as exc:
            parse_kernel_expression("x + 1")
        assert exc.value.name == "x"

    def test_function_without_call_parens(self):
        with pytest.raises(UnknownIdentifier):
            parse_kernel_expression("exp 2")


class TestDomainErrors:
    """Leaving the real domain raises EvaluationError naming the point."""

    def test_log_at_zero(self):
        fn = parse_kernel_expression("log(t)")
        with pytest.raises(EvaluationError, match="t=0.0"):
            fn(0.0)

    def test_division_by_zero(self):
        fn = parse_kernel_expression("1/t")
        with pytest.raises(EvaluationError):
            fn(np.array([0.5, 0.0]))

    def test_sqrt_of_negative(self):
        fn = parse_kernel_expression("sqrt(t - 1)")
        with pytest.raises(EvaluationError):
            fn(0.5)

    def test_overflow(self):
        fn = parse_kernel_expression("exp(t)^t")
        with pytest.raises(EvaluationError):
            fn(1e6)

    def test_fine_inside_domain(self):
        fn = parse_kernel_expression("log(t)")
        assert math.isclose(fn(math.e), 1.0, rel_tol=1e-15)
