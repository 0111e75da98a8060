"""Goal-level measures: node counts, strict commonality, anti-unification,
similarly structured subgoals, renaming search and similarity."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .depgraph import SCC
from .syntax import Atom, Clause, Goal, Num, PredSymbol, Struct, Var

CONJ = "','"  # encoding functor for conjunction nodes
NECK = "':-'"  # encoding functor for the clause neck

DEFAULT_EXACT_VARS_LIMIT = 8
DEFAULT_EXACT_GROUP_LIMIT = 6


# ---------------------------------------------------------------------------
# Term encoding: goals and clauses as plain terms
# ---------------------------------------------------------------------------

def atom_to_term(atom: Atom) -> Struct:
    return Struct(atom.pred.name, atom.args) if atom.args else Struct(atom.pred.name)


def goal_to_term(goal: Goal):
    """Right-folded conjunction term; None for the empty goal."""
    if not goal.atoms:
        return None
    result = atom_to_term(goal.atoms[-1])
    for atom in reversed(goal.atoms[:-1]):
        result = Struct(CONJ, (atom_to_term(atom), result))
    return result


def _encode(entity):
    if isinstance(entity, (Var, Num, Struct)):
        return entity
    if isinstance(entity, Atom):
        return atom_to_term(entity)
    if isinstance(entity, Goal):
        return goal_to_term(entity)
    if isinstance(entity, Clause):
        body = goal_to_term(entity.body)
        head = atom_to_term(entity.head)
        return Struct(NECK, (head, body)) if body is not None else Struct(NECK, (head,))
    raise TypeError(f"cannot encode {entity!r}")


# ---------------------------------------------------------------------------
# Node counts
# ---------------------------------------------------------------------------

def nodes(entity) -> int:
    """Functor/constant node count; variables count 0, numerals count 1.

    Goals and clauses count as terms built with conjunction and neck
    functors, one node per conjunction and one per clause neck.
    """
    if isinstance(entity, SCC):
        return sum(nodes(c) for c in entity.clauses)
    if isinstance(entity, Goal) and not entity.atoms:
        return 0
    if entity is None:
        return 0
    enc = _encode(entity)
    if isinstance(enc, Var):
        return 0
    if isinstance(enc, Num):
        return 1
    total = 0
    stack = [enc]
    while stack:
        t = stack.pop()
        if isinstance(t, Struct):
            total += 1
            stack.extend(t.args)
        elif isinstance(t, Num):
            total += 1
    return total


def var_occurrences(entity) -> int:
    if isinstance(entity, SCC):
        return sum(var_occurrences(c) for c in entity.clauses)
    if entity is None or (isinstance(entity, Goal) and not entity.atoms):
        return 0
    enc = _encode(entity)
    total = 0
    stack = [enc]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            total += 1
        elif isinstance(t, Struct):
            stack.extend(t.args)
    return total


def total_nodes(entity) -> int:
    """Node count including variable occurrences."""
    return nodes(entity) + var_occurrences(entity)


# ---------------------------------------------------------------------------
# Strict commonality
# ---------------------------------------------------------------------------

def _c_terms(a, b) -> int:
    if isinstance(a, Var) and isinstance(b, Var):
        return 1 if a.name == b.name else 0
    if isinstance(a, Num) and isinstance(b, Num):
        return 1 if a.value == b.value else 0
    if isinstance(a, Struct) and isinstance(b, Struct):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return 0
        return 1 + sum(_c_terms(x, y) for x, y in zip(a.args, b.args))
    return 0


def strict_commonality(e1, e2) -> int:
    """Positional shared-node count (Definition 1); symmetric.

    Accepts goal pairs of equal atom count, atom pairs, or term pairs.
    Goals contribute one extra unit per aligned conjunction node.
    """
    if isinstance(e1, Goal) or isinstance(e2, Goal):
        if not (isinstance(e1, Goal) and isinstance(e2, Goal)):
            raise ValueError("cannot compare a goal with a non-goal")
        if len(e1.atoms) != len(e2.atoms):
            raise ValueError("strict commonality requires equally long goals")
        if not e1.atoms:
            return 0
        pairs = sum(_c_terms(atom_to_term(a), atom_to_term(b))
                    for a, b in zip(e1.atoms, e2.atoms))
        return (len(e1.atoms) - 1) + pairs
    return _c_terms(_encode(e1), _encode(e2))


def shared_var_count(e1, e2) -> int:
    """Occurrences of identical variables at identical tree positions.

    Positions only align below matching functors, which is exactly the
    set of positions surviving in the msg.
    """
    if isinstance(e1, Goal) != isinstance(e2, Goal):
        raise ValueError("cannot compare a goal with a non-goal")
    if isinstance(e1, Goal) and len(e1.atoms) != len(e2.atoms):
        raise ValueError("shared_var_count requires equally long goals")

    def walk(a, b) -> int:
        if isinstance(a, Var) and isinstance(b, Var):
            return 1 if a.name == b.name else 0
        if isinstance(a, Struct) and isinstance(b, Struct):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return 0
            return sum(walk(x, y) for x, y in zip(a.args, b.args))
        return 0

    ea, eb = _encode(e1), _encode(e2)
    if ea is None or eb is None:
        return 0
    return walk(ea, eb)


# ---------------------------------------------------------------------------
# Most specific generalization (anti-unification)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MsgResult:
    generalization: object
    subst1: dict  # generalization var name -> subterm of e1
    subst2: dict


def msg(e1, e2) -> MsgResult:
    """Anti-unify two terms, atoms of equal predicate, or goals of equal
    length.  Repeated mismatch pairs reuse the same generalization
    variable, which makes the result unique up to renaming."""
    pair_vars: dict = {}
    counter = itertools.count(1)
    subst1: dict = {}
    subst2: dict = {}

    def key(t):
        return t  # terms are frozen/hashable

    def anti(a, b):
        if isinstance(a, Var) and isinstance(b, Var) and a.name == b.name:
            return a
        if isinstance(a, Num) and isinstance(b, Num) and a.value == b.value:
            return a
        if (isinstance(a, Struct) and isinstance(b, Struct)
                and a.functor == b.functor and len(a.args) == len(b.args)):
            return Struct(a.functor, tuple(anti(x, y) for x, y in zip(a.args, b.args)))
        k = (key(a), key(b))
        if k not in pair_vars:
            v = Var(f"_M{next(counter)}")
            pair_vars[k] = v
            subst1[v.name] = a
            subst2[v.name] = b
        return pair_vars[k]

    goal_inputs = isinstance(e1, Goal) and isinstance(e2, Goal)
    if isinstance(e1, Goal) != isinstance(e2, Goal):
        raise ValueError("cannot generalize a goal with a non-goal")
    if goal_inputs:
        if len(e1.atoms) != len(e2.atoms):
            raise ValueError("msg requires positionally aligned goals")
        if not e1.atoms:
            return MsgResult(Goal(()), {}, {})
    if isinstance(e1, Atom) and isinstance(e2, Atom) and e1.pred != e2.pred:
        raise ValueError("msg of atoms requires equal predicates")

    gen = anti(_encode(e1), _encode(e2))
    return MsgResult(_decode_like(gen, e1), dict(subst1), dict(subst2))


def _decode_like(gen, template):
    """Present a generalization in the shape of its inputs when possible."""
    if isinstance(template, Goal):
        conjuncts = _split_conj(gen)
        atoms = []
        for c in conjuncts:
            if isinstance(c, Struct) and c.functor != CONJ:
                atoms.append(Atom(PredSymbol(c.functor, len(c.args)), c.args))
            else:
                return gen  # an atom collapsed to a variable; keep raw term
        return Goal(tuple(atoms))
    if isinstance(template, Atom) and isinstance(gen, Struct):
        return Atom(PredSymbol(gen.functor, len(gen.args)), gen.args)
    return gen


def _split_conj(term) -> list:
    out = []
    while isinstance(term, Struct) and term.functor == CONJ and len(term.args) == 2:
        out.append(term.args[0])
        term = term.args[1]
    out.append(term)
    return out


# ---------------------------------------------------------------------------
# Similarly structured subgoals
# ---------------------------------------------------------------------------

def predicate_multiset(goal: Goal) -> Counter:
    """Multiset of predicate symbols occurring in a goal."""
    return Counter(a.pred for a in goal.atoms)


def _select_similar_indices(q1: Goal, q2: Goal):
    """Indices of the retained atoms, first occurrences in source order."""
    shared = predicate_multiset(q1) & predicate_multiset(q2)

    def select(goal):
        remaining = Counter(shared)
        picked = []
        for i, atom in enumerate(goal.atoms):
            if remaining[atom.pred] > 0:
                remaining[atom.pred] -= 1
                picked.append(i)
        return tuple(picked)

    return select(q1), select(q2)


def maximal_similar_subgoals(q1: Goal, q2: Goal):
    """The maximal pair of similarly structured subgoals; atoms are
    retained in source order.  Disjoint predicate sets yield two empty
    goals."""
    i1, i2 = _select_similar_indices(q1, q2)
    return (Goal(tuple(q1.atoms[i] for i in i1)),
            Goal(tuple(q2.atoms[i] for i in i2)))


def enumerate_renamings(q1: Goal, q2: Goal):
    """All injective mappings vars(q1) -> vars(q2), lexicographic order."""
    v1 = sorted(_goal_vars(q1))
    v2 = sorted(_goal_vars(q2))
    if len(v1) > len(v2):
        raise ValueError("enumerate_renamings requires #vars(q1) <= #vars(q2)")
    for image in itertools.permutations(v2, len(v1)):
        yield dict(zip(v1, image))


def _goal_vars(goal: Goal) -> set:
    names = set()
    for atom in goal.atoms:
        stack = list(atom.args)
        while stack:
            t = stack.pop()
            if isinstance(t, Var):
                names.add(t.name)
            elif isinstance(t, Struct):
                stack.extend(t.args)
    return names


# ---------------------------------------------------------------------------
# Commonality (Definition 4) via branch-and-bound over renamings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GoalAlignment:
    """Witness for a commonality/similarity value.

    ``renaming`` maps variables of the smaller-variable goal onto the
    other goal's variables; ``swapped`` is True when that smaller goal is
    the second argument.  ``atom_pairing`` pairs atom indices of the first
    argument with indices of the second.
    """

    renaming: tuple = ()  # sorted tuple[(from, to), ...]
    atom_pairing: tuple = ()  # tuple[(i1, i2), ...]
    value: int = 0
    swapped: bool = False
    approximate: bool = False

    @property
    def renaming_dict(self) -> dict:
        return dict(self.renaming)


def _c_terms_rho(a, b, rho: dict) -> int:
    """Strict commonality of a under renaming rho vs b; variables of a
    missing from rho are scored optimistically (admissible upper bound)."""
    if isinstance(a, Var):
        if isinstance(b, Var):
            mapped = rho.get(a.name)
            return 1 if (mapped is None or mapped == b.name) else 0
        return 0
    if isinstance(a, Num) and isinstance(b, Num):
        return 1 if a.value == b.value else 0
    if isinstance(a, Struct) and isinstance(b, Struct):
        if a.functor != b.functor or len(a.args) != len(b.args):
            return 0
        return 1 + sum(_c_terms_rho(x, y, rho) for x, y in zip(a.args, b.args))
    return 0


def _group_indices(q1: Goal, q2: Goal) -> list:
    groups: dict = {}
    for i, atom in enumerate(q1.atoms):
        groups.setdefault(atom.pred, ([], []))[0].append(i)
    for j, atom in enumerate(q2.atoms):
        groups.setdefault(atom.pred, ([], []))[1].append(j)
    return [groups[k] for k in sorted(groups, key=lambda p: (p.name, p.arity))]


def _best_pairing(q1: Goal, q2: Goal, groups, rho: dict):
    """Optimal same-predicate atom pairing under (partially) fixed rho."""
    t1 = [atom_to_term(a) for a in q1.atoms]
    t2 = [atom_to_term(a) for a in q2.atoms]
    total = 0
    pairing = []
    for left, right in groups:
        if len(left) == 1 and len(right) == 1:
            total += _c_terms_rho(t1[left[0]], t2[right[0]], rho)
            pairing.append((left[0], right[0]))
            continue
        w = np.array([[_c_terms_rho(t1[i], t2[j], rho) for j in right] for i in left])
        rows, cols = linear_sum_assignment(w, maximize=True)
        total += int(w[rows, cols].sum())
        pairing.extend((left[r], right[c]) for r, c in zip(rows, cols))
    pairing.sort()
    return total, tuple(pairing)


def _directed_commonality(q1: Goal, q2: Goal, vars_limit: int, group_limit: int):
    """Max strict commonality over renamings vars(q1)->vars(q2) and
    permutations of q2, assuming Pi(q1) == Pi(q2)."""
    n = len(q1.atoms)
    if n == 0:
        return GoalAlignment(value=0)
    base = n - 1
    groups = _group_indices(q1, q2)
    v1 = sorted(_goal_vars(q1))
    v2 = sorted(_goal_vars(q2))
    exact = (len(v1) <= vars_limit
             and max((len(g[0]) for g in groups), default=0) <= group_limit)

    if not exact:
        rho: dict = {}
        used: set = set()
        for x in v1:
            best_y, best_s = None, -1
            for y in v2:
                if y in used:
                    continue
                rho[x] = y
                s, _ = _best_pairing(q1, q2, groups, rho)
                if s > best_s:
                    best_s, best_y = s, y
            rho[x] = best_y
            used.add(best_y)
        value, pairing = _best_pairing(q1, q2, groups, rho)
        return GoalAlignment(tuple(sorted(rho.items())), pairing,
                             base + value, approximate=True)

    best = {"value": -1, "rho": None, "pairing": None}
    rho: dict = {}
    used: set = set()

    def search(idx: int):
        bound, pairing = _best_pairing(q1, q2, groups, rho)
        if base + bound <= best["value"]:
            return
        if idx == len(v1):
            best["value"] = base + bound
            best["rho"] = dict(rho)
            best["pairing"] = pairing
            return
        x = v1[idx]
        for y in v2:
            if y in used:
                continue
            rho[x] = y
            used.add(y)
            search(idx + 1)
            del rho[x]
            used.discard(y)

    search(0)
    return GoalAlignment(tuple(sorted(best["rho"].items())), best["pairing"],
                         best["value"])


def commonality(q1: Goal, q2: Goal,
                vars_limit: int = DEFAULT_EXACT_VARS_LIMIT,
                group_limit: int = DEFAULT_EXACT_GROUP_LIMIT):
    """Commonality C (Definition 4) with a witness.

    The renaming always runs from the goal with fewer variables; with
    equal counts both directions are computed and the maximum taken.
    Beyond the exact-mode limits the result is a greedy lower bound and
    the witness is flagged approximate.
    """
    if predicate_multiset(q1) != predicate_multiset(q2):
        raise ValueError("commonality requires similarly structured goals")
    k1, k2 = len(_goal_vars(q1)), len(_goal_vars(q2))
    if k1 < k2:
        a = _directed_commonality(q1, q2, vars_limit, group_limit)
        return a.value, a
    if k1 > k2:
        a = _directed_commonality(q2, q1, vars_limit, group_limit)
        flipped = GoalAlignment(a.renaming, tuple(sorted((i, j) for j, i in a.atom_pairing)),
                                a.value, swapped=True, approximate=a.approximate)
        return a.value, flipped
    fwd = _directed_commonality(q1, q2, vars_limit, group_limit)
    rev = _directed_commonality(q2, q1, vars_limit, group_limit)
    if rev.value > fwd.value:
        flipped = GoalAlignment(rev.renaming, tuple(sorted((i, j) for j, i in rev.atom_pairing)),
                                rev.value, swapped=True, approximate=rev.approximate)
        return rev.value, flipped
    return fwd.value, fwd


def goal_similarity(q1: Goal, q2: Goal,
                    vars_limit: int = DEFAULT_EXACT_VARS_LIMIT,
                    group_limit: int = DEFAULT_EXACT_GROUP_LIMIT):
    """Similarity sigma (Definition 5): commonality of the maximal pair of
    similarly structured subgoals; 0 with an empty witness when that pair
    is empty.  Pairing indices refer to the original goals."""
    i1, i2 = _select_similar_indices(q1, q2)
    if not i1:
        return 0, GoalAlignment()
    s1 = Goal(tuple(q1.atoms[i] for i in i1))
    s2 = Goal(tuple(q2.atoms[i] for i in i2))
    value, align = commonality(s1, s2, vars_limit, group_limit)
    pairing = tuple(sorted((i1[a], i2[b]) for a, b in align.atom_pairing))
    return value, GoalAlignment(align.renaming, pairing, value,
                                align.swapped, align.approximate)
