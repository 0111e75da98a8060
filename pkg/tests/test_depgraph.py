import pytest

from logdup import PredSymbol, build_sccs, parse_program, scc_of, segment_clause


def test_single_recursive_predicate_is_own_scc():
    program = parse_program("p([]).\np([_|T]) :- p(T).")
    sccs = build_sccs(program)
    assert len(sccs) == 1
    assert sccs[0].members == (PredSymbol("p", 1),)


def test_mutual_recursion_grouped():
    source = """
    even(0).
    even(s(N)) :- odd(N).
    odd(s(N)) :- even(N).
    """
    sccs = build_sccs(parse_program(source))
    members = {scc.members for scc in sccs}
    assert (PredSymbol("even", 1), PredSymbol("odd", 1)) in members


def test_reverse_topological_order():
    source = """
    top(X) :- mid(X).
    mid(X) :- bottom(X).
    bottom(a).
    """
    sccs = build_sccs(parse_program(source))
    names = [scc.members[0].name for scc in sccs]
    assert names.index("bottom") < names.index("mid") < names.index("top")


def test_undefined_and_builtin_calls_are_leaves():
    program = parse_program("p(X) :- q(X), X = a, Y is X, r(Y).\nr(b).")
    sccs = build_sccs(parse_program("p(X) :- q(X), X = a, Y is X, r(Y).\nr(b)."))
    p = scc_of(sccs, PredSymbol("p", 1))
    assert p.members == (PredSymbol("p", 1),)


def test_excluded_predicates_not_in_graph():
    program = parse_program("p(X) :- q(X) ; r(X).\nq(a).")
    sccs = build_sccs(program)
    assert all(PredSymbol("p", 1) not in scc.member_set for scc in sccs)


def test_segment_clause_splits_at_recursive_calls():
    source = "p([X|Xs], N) :- q(X), p(Xs, M), N is M + 1."
    program = parse_program(source)
    scc = scc_of(build_sccs(program), PredSymbol("p", 2))
    seg = segment_clause(scc.clauses[0], scc)
    assert len(seg.segments) == 2
    assert len(seg.recursive_calls) == 1
    assert seg.recursive_calls[0].pred == PredSymbol("p", 2)
    assert [a.pred.name for a in seg.segments[0].atoms] == ["q"]
    assert [a.pred.name for a in seg.segments[1].atoms] == ["is"]


def test_segment_clause_fact():
    program = parse_program("p(a).")
    scc = scc_of(build_sccs(program), PredSymbol("p", 1))
    seg = segment_clause(scc.clauses[0], scc)
    assert seg.segments == (seg.segments[0],)
    assert seg.recursive_calls == ()


def test_segment_reconstruct_round_trip():
    source = "e(X) :- a(X), o(X), b(X), e(X), c(X).\no(Y) :- e(Y)."
    program = parse_program(source)
    scc = scc_of(build_sccs(program), PredSymbol("e", 1))
    for clause in scc.clauses:
        seg = segment_clause(clause, scc)
        assert seg.reconstruct() == clause.body.atoms


def test_segment_clause_rejects_foreign_head():
    program = parse_program("p(a).\nq(b).")
    sccs = build_sccs(program)
    p = scc_of(sccs, PredSymbol("p", 1))
    q = scc_of(sccs, PredSymbol("q", 1))
    with pytest.raises(ValueError):
        segment_clause(q.clauses[0], p)


def test_scc_of_missing_predicate():
    sccs = build_sccs(parse_program("p(a)."))
    with pytest.raises(KeyError):
        scc_of(sccs, PredSymbol("nope", 1))
