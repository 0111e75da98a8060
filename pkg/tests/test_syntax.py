import pytest
from hypothesis import given, strategies as st

from logdup import (
    Atom, Clause, Goal, Num, PredSymbol, PrologSyntaxError, Struct, Var,
    parse_clause, parse_goal, parse_program, parse_term, render_clause,
    render_term,
)
from logdup.syntax import rename_vars, var_names


def test_parse_fact():
    clause = parse_clause("append([],L,L).")
    assert clause.head.pred == PredSymbol("append", 3)
    assert clause.body.atoms == ()
    assert clause.head.args[0] == Struct("[]", ())


def test_parse_rule_body_order():
    clause = parse_clause("p(X) :- q(X), r(X, a).")
    assert [a.pred.name for a in clause.body.atoms] == ["q", "r"]


def test_list_sugar_desugars_to_cons():
    term = parse_term("[a|T]")
    assert term == Struct(".", (Struct("a", ()), Var("T")))


def test_list_round_trip():
    for text in ("[]", "[a]", "[a,b|T]", "[[a],b]"):
        assert render_term(parse_term(text)) == text


def test_operator_precedence():
    term = parse_term("1 + 2*X")
    assert term == Struct("+", (Num(1), Struct("*", (Num(2), Var("X")))))


def test_quoted_atom():
    term = parse_term("'hello world'(a)")
    assert term.functor == "hello world"
    assert render_term(term) == "'hello world'(a)"


def test_anonymous_vars_are_distinct():
    clause = parse_clause("p(_, _).")
    left, right = clause.head.args
    assert isinstance(left, Var) and isinstance(right, Var)
    assert left.name != right.name


def test_negative_numbers():
    assert parse_term("-3") == Num(-3)


def test_directive_skipped_with_warning():
    program = parse_program(":- module(m, []).\np(a).")
    assert any("directive" in w for w in program.warnings)
    assert PredSymbol("p", 1) in program.predicates


def test_disjunction_excludes_predicate():
    program = parse_program("p(X) :- q(X) ; r(X).\ns(a).")
    assert PredSymbol("p", 1) in program.excluded
    assert any("';'" in w for w in program.warnings)
    assert PredSymbol("s", 1) in program.predicates


def test_syntax_error_carries_location():
    with pytest.raises(PrologSyntaxError) as err:
        parse_program("p(X :- q.")
    assert err.value.line == 1


def test_clause_origin_records_line():
    program = parse_program("\n\np(a).", filename="f.pl")
    clause = program.predicates[PredSymbol("p", 1)][0]
    assert clause.origin == ("f.pl", 3)


def test_end_dot_inside_functor_name():
    # a '.' not followed by layout is not a clause terminator
    program = parse_program("p('a.b').")
    assert PredSymbol("p", 1) in program.predicates


def test_rename_vars():
    goal = parse_goal("p(X, f(Y)), q(X)")
    renamed = rename_vars(goal, {"X": Var("Z")})
    assert renamed == parse_goal("p(Z, f(Y)), q(Z)")


def test_var_names_first_occurrence_order():
    clause = parse_clause("p(B, A) :- q(A, C).")
    assert list(var_names(clause)) == ["B", "A", "C"]


_names = st.sampled_from(["a", "b", "f", "g"])
_vars = st.sampled_from(["X", "Y", "Zed"])


def _terms(depth=2):
    leaf = st.one_of(
        _vars.map(Var),
        st.integers(min_value=-9, max_value=9).map(Num),
        _names.map(lambda n: Struct(n, ())),
    )
    if depth == 0:
        return leaf
    return st.one_of(
        leaf,
        st.tuples(_names, st.lists(_terms(depth - 1), min_size=1, max_size=3))
        .map(lambda t: Struct(t[0], tuple(t[1]))),
    )


@given(_terms())
def test_render_parse_round_trip(term):
    assert parse_term(render_term(term)) == term


@given(st.lists(st.tuples(_names, st.lists(_terms(1), min_size=1, max_size=2)),
                min_size=1, max_size=3))
def test_clause_render_parse_round_trip(atom_shapes):
    body = tuple(Atom(PredSymbol(n, len(args)), tuple(args))
                 for n, args in atom_shapes)
    clause = Clause(Atom(PredSymbol("h", 1), (Var("X"),)), Goal(body))
    parsed = parse_clause(render_clause(clause))
    assert (parsed.head, parsed.body) == (clause.head, clause.body)
