"""Reference implementations for property tests: an exhaustive
commonality computation and a seeded generator of duplicated SCCs."""

from __future__ import annotations

import itertools
import random
import string

from .depgraph import SCC, segment_clause
from .metrics import predicate_multiset, strict_commonality
from .structure import ArgPermutation
from .syntax import Atom, Clause, Goal, PredSymbol, Var, rename_vars, var_names

MAX_ORACLE_ATOMS = 5
MAX_ORACLE_VARS = 5


def _goal_vars(goal: Goal) -> tuple:
    seen = []
    for atom in goal.atoms:
        for name in var_names(atom):
            if name not in seen:
                seen.append(name)
    return tuple(seen)


def _directed_max(src: Goal, dst: Goal) -> int:
    """Maximum strict commonality over every injective renaming of src's
    variables into dst's and every permutation of dst's atoms."""
    src_vars = _goal_vars(src)
    dst_vars = _goal_vars(dst)
    best = 0
    for image in itertools.permutations(dst_vars, len(src_vars)):
        renamed = rename_vars(src, {v: Var(w) for v, w in zip(src_vars, image)})
        for perm in itertools.permutations(dst.atoms):
            value = strict_commonality(renamed, Goal(perm))
            if value > best:
                best = value
    return best


def brute_force_commonality(q1: Goal, q2: Goal) -> int:
    """Exhaustive evaluation of the commonality maximum.

    Enumerates every renaming and every atom permutation, so both inputs
    are capped at 5 atoms and 5 variables.
    """
    if predicate_multiset(q1) != predicate_multiset(q2):
        raise ValueError("goals are not similarly structured")
    v1, v2 = _goal_vars(q1), _goal_vars(q2)
    if min(len(q1.atoms), len(q2.atoms)) > MAX_ORACLE_ATOMS:
        raise ValueError("goal too large for exhaustive search")
    if max(len(v1), len(v2)) > MAX_ORACLE_VARS:
        raise ValueError("too many variables for exhaustive search")
    if len(v1) < len(v2):
        return _directed_max(q1, q2)
    if len(v2) < len(v1):
        return _directed_max(q2, q1)
    return max(_directed_max(q1, q2), _directed_max(q2, q1))


# ---------------------------------------------------------------------------
# Duplicate generation
# ---------------------------------------------------------------------------

def _fresh_names(members, rng: random.Random) -> dict:
    used = {q.name for q in members}
    mapping = {}
    for q in members:
        while True:
            suffix = "".join(rng.choice(string.ascii_lowercase) for _ in range(4))
            name = f"{q.name}_{suffix}"
            if name not in used:
                used.add(name)
                break
        mapping[q] = PredSymbol(name, q.arity)
    return mapping


def _rename_clause_vars(clause: Clause, rng: random.Random):
    names = var_names(clause)
    fresh = [f"MV{i + 1}" for i in range(len(names))]
    rng.shuffle(fresh)
    mapping = dict(zip(names, fresh))
    renamed = Clause(rename_vars(clause.head, {k: Var(v) for k, v in mapping.items()}),
                     rename_vars(clause.body, {k: Var(v) for k, v in mapping.items()}),
                     clause.origin)
    return renamed, mapping


def mutate_duplicate(scc: SCC, seed: int) -> tuple:
    """Produce a duplicate of an SCC: fresh predicate names, one argument
    permutation per predicate applied at every member call site, a
    consistent variable renaming per clause, atom shuffles confined to
    single segments and a clause shuffle per predicate.  Deterministic in
    the seed; returns (new SCC, log of applied steps)."""
    rng = random.Random(seed)
    log = []

    pred_map = _fresh_names(scc.members, rng)
    for q in scc.members:
        log.append(f"rename {q} -> {pred_map[q]}")

    perms = {}
    for q in scc.members:
        order = list(range(1, q.arity + 1))
        rng.shuffle(order)
        perms[q] = ArgPermutation(tuple(order))
        log.append(f"permute {q} args {perms[q].mapping}")

    def transform_atom(atom: Atom) -> Atom:
        if atom.pred in pred_map:
            return Atom(pred_map[atom.pred], perms[atom.pred].apply(atom.args))
        return atom

    new_clauses = {q: [] for q in scc.members}
    for q in scc.members:
        for clause in scc.clauses_of(q):
            seg = segment_clause(clause, scc)
            body = []
            for i, segment in enumerate(seg.segments):
                atoms = list(segment.atoms)
                rng.shuffle(atoms)
                body.extend(atoms)
                if i < len(seg.recursive_calls):
                    body.append(transform_atom(seg.recursive_calls[i]))
            shuffled = Clause(transform_atom(clause.head), Goal(tuple(body)), clause.origin)
            renamed, var_map = _rename_clause_vars(shuffled, rng)
            log.append(f"clause of {q}: shuffle segments, rename vars {var_map}")
            new_clauses[q].append(renamed)
        rng.shuffle(new_clauses[q])
        log.append(f"shuffle clause order of {q}")

    members = sorted(pred_map.values(), key=lambda p: (p.name, p.arity))
    inverse = {v: k for k, v in pred_map.items()}
    clauses = []
    for member in members:
        clauses.extend(new_clauses[inverse[member]])
    return SCC(tuple(members), tuple(clauses)), tuple(log)
