import pytest

from logdup import PredSymbol, build_sccs, normalize_program, parse_program, scc_of

APPEND = """
append([],L,L).
append([X|Xs],Y,[X|Zs]) :- append(Xs,Y,Zs).
"""

CONCAT = """
concat(L,[],L).
concat([E|Zs],[E|Es],Y) :- concat(Zs,Es,Y).
"""

REV_ALL = """
rev_all([],[]).
rev_all([X|Xs],[Y|Ys]) :- reverse(X,Y), rev_all(Xs,Ys).
"""

ADD1_AND_SQR = """
add1_and_sqr([],[]).
add1_and_sqr([X|Xs],[Y|Ys]) :- N is X + 1, Y is N*N, add1_and_sqr(Xs,Ys).
"""

CORPUS = APPEND + CONCAT + REV_ALL + ADD1_AND_SQR


def scc_named(source, name, arity, normalize=False):
    program = parse_program(source)
    if normalize:
        program = normalize_program(program)
    return scc_of(build_sccs(program), PredSymbol(name, arity))


@pytest.fixture
def append_scc():
    return scc_named(APPEND, "append", 3)


@pytest.fixture
def concat_scc():
    return scc_named(CONCAT, "concat", 3)


@pytest.fixture
def rev_all_scc():
    return scc_named(REV_ALL, "rev_all", 2)


@pytest.fixture
def add1_scc():
    return scc_named(ADD1_AND_SQR, "add1_and_sqr", 2)
