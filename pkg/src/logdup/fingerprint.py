"""Fingerprint abstraction: symbol-count prints for goals, clauses,
predicates and SCCs, their orders and greatest lower bounds, and the
print-based candidate pre-filter."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .depgraph import SCC, build_sccs, segment_clause
from .metrics import goal_similarity, msg
from .normalize import is_normal_atom, normalize_program
from .syntax import (
    EQ, Clause, Goal, Num, PredSymbol, Program, Struct, Var, rename_vars,
)


@dataclass(frozen=True)
class GoalPrint:
    """Finitely-supported symbol-count map; keys are (name, arity) pairs,
    zero counts are never stored."""

    items: tuple = ()  # sorted tuple[((name, arity), count), ...]

    def count(self, symbol) -> int:
        return dict(self.items).get(symbol, 0)

    @property
    def total(self) -> int:
        return sum(n for _, n in self.items)

    def leq(self, other: "GoalPrint") -> bool:
        theirs = dict(other.items)
        return all(n <= theirs.get(sym, 0) for sym, n in self.items)

    def glb(self, other: "GoalPrint") -> "GoalPrint":
        theirs = dict(other.items)
        kept = tuple((sym, min(n, theirs[sym]))
                     for sym, n in self.items
                     if sym in theirs and min(n, theirs[sym]) > 0)
        return GoalPrint(kept)

    def render(self) -> str:
        parts = [f"{name}/{arity}:{n}" for (name, arity), n in self.items]
        return "{" + ",".join(parts) + "}"


@dataclass(frozen=True)
class ClausePrint:
    prints: tuple  # tuple[GoalPrint, ...], one per non-recursive segment

    @property
    def total(self) -> int:
        return sum(p.total for p in self.prints)

    def leq(self, other: "ClausePrint") -> bool:
        return (len(self.prints) == len(other.prints)
                and all(a.leq(b) for a, b in zip(self.prints, other.prints)))

    def glb(self, other: "ClausePrint") -> Optional["ClausePrint"]:
        if len(self.prints) != len(other.prints):
            return None
        return ClausePrint(tuple(a.glb(b) for a, b in zip(self.prints, other.prints)))

    def render(self) -> str:
        return "<" + ",".join(p.render() for p in self.prints) + ">"


@dataclass(frozen=True)
class PredicatePrint:
    prints: tuple  # canonically sorted tuple[ClausePrint, ...] (a multiset)

    @property
    def total(self) -> int:
        return sum(p.total for p in self.prints)

    def render(self) -> str:
        return "{{" + ";".join(p.render() for p in self.prints) + "}}"


@dataclass(frozen=True)
class SCCPrint:
    prints: tuple  # canonically sorted tuple[PredicatePrint, ...] (a multiset)

    @property
    def total(self) -> int:
        return sum(p.total for p in self.prints)

    def render(self) -> str:
        return "[" + "|".join(p.render() for p in self.prints) + "]"


# ---------------------------------------------------------------------------
# Print construction
# ---------------------------------------------------------------------------

def _count_functors(term, counts: dict):
    # numerals are counted as nodes elsewhere but carry no symbol here
    if isinstance(term, (Var, Num)):
        return
    counts[(term.functor, len(term.args))] = counts.get((term.functor, len(term.args)), 0) + 1
    for a in term.args:
        _count_functors(a, counts)


def goalprint(goal: Goal) -> GoalPrint:
    """Symbol counts of a normal-form goal.

    A call adds one to its predicate symbol plus every functor nested in
    its arguments (arithmetic builtins keep compound arguments).  A
    unification adds one to '=' plus the functors on either side, so a
    bare X = Y contributes the '=' alone.
    """
    counts: dict = {}
    for atom in goal.atoms:
        if not is_normal_atom(atom):
            raise ValueError(f"atom is not in normal form: {atom}")
        if atom.pred == EQ:
            counts[("=", 2)] = counts.get(("=", 2), 0) + 1
        else:
            key = (atom.pred.name, atom.pred.arity)
            counts[key] = counts.get(key, 0) + 1
        for arg in atom.args:
            _count_functors(arg, counts)
    return GoalPrint(tuple(sorted(counts.items())))


def clauseprint(clause: Clause, scc: SCC) -> ClausePrint:
    seg = segment_clause(clause, scc)
    return ClausePrint(tuple(goalprint(q) for q in seg.segments))


def _canonical_key(cp: ClausePrint):
    return (len(cp.prints), tuple(gp.items for gp in cp.prints))


def predicate_print(pred: PredSymbol, scc: SCC) -> PredicatePrint:
    cps = [clauseprint(c, scc) for c in scc.clauses_of(pred)]
    return PredicatePrint(tuple(sorted(cps, key=_canonical_key)))


def _pp_key(pp: PredicatePrint):
    return tuple(_canonical_key(cp) for cp in pp.prints)


def scc_print(scc: SCC) -> SCCPrint:
    pps = [predicate_print(p, scc) for p in scc.members]
    return SCCPrint(tuple(sorted(pps, key=_pp_key)))


# ---------------------------------------------------------------------------
# Orders and greatest lower bounds
# ---------------------------------------------------------------------------

def goalprint_leq(a: GoalPrint, b: GoalPrint) -> bool:
    return a.leq(b)


def goalprint_glb(a: GoalPrint, b: GoalPrint) -> GoalPrint:
    return a.glb(b)


def _match_multisets(lefts, rights, pair_value):
    """Max-total perfect matching between two equal-size lists, or None.

    pair_value returns the retained count for a feasible pair and None
    for an infeasible one.
    """
    if len(lefts) != len(rights):
        return None
    if not lefts:
        return 0, []
    weights = np.full((len(lefts), len(rights)), -1.0)
    values = {}
    for i, l in enumerate(lefts):
        for j, r in enumerate(rights):
            v = pair_value(l, r)
            if v is not None:
                weights[i, j] = v[0]
                values[(i, j)] = v
    rows, cols = linear_sum_assignment(weights, maximize=True)
    if any(weights[i, j] < 0 for i, j in zip(rows, cols)):
        return None
    total = 0
    pairs = []
    for i, j in sorted(zip(rows, cols)):
        v, payload = values[(i, j)]
        total += v
        pairs.append(payload)
    return total, pairs


def print_glb(a: PredicatePrint, b: PredicatePrint) -> Optional[PredicatePrint]:
    """Greatest lower bound of two predicate prints, pairing clauseprints
    of equal segment count so that the retained symbol total is maximal;
    None when no such bijection exists."""

    def pair(cp1: ClausePrint, cp2: ClausePrint):
        g = cp1.glb(cp2)
        if g is None:
            return None
        return g.total, g

    matched = _match_multisets(a.prints, b.prints, pair)
    if matched is None:
        return None
    _, pairs = matched
    return PredicatePrint(tuple(sorted(pairs, key=_canonical_key)))


def predicate_print_leq(a: PredicatePrint, b: PredicatePrint) -> bool:
    def pair(cp1: ClausePrint, cp2: ClausePrint):
        return (1, None) if cp1.leq(cp2) else None

    return _match_multisets(a.prints, b.prints, pair) is not None


def scc_print_glb(a: SCCPrint, b: SCCPrint) -> Optional[SCCPrint]:
    def pair(pp1: PredicatePrint, pp2: PredicatePrint):
        g = print_glb(pp1, pp2)
        if g is None:
            return None
        return g.total, g

    matched = _match_multisets(a.prints, b.prints, pair)
    if matched is None:
        return None
    _, pairs = matched
    return SCCPrint(tuple(sorted(pairs, key=_pp_key)))


def fp_closeness(a: SCCPrint, b: SCCPrint) -> Optional[tuple]:
    """Print-level estimate of closeness: retained over total symbol
    counts on each side.  Two all-empty prints estimate (1,1), the value
    exact comparison would reach on two bodiless duplicates."""
    g = scc_print_glb(a, b)
    if g is None:
        return None
    m = g.total
    left = Fraction(m, a.total) if a.total else Fraction(1)
    right = Fraction(m, b.total) if b.total else Fraction(1)
    return (left, right)


# ---------------------------------------------------------------------------
# Candidate pre-filter
# ---------------------------------------------------------------------------

def _shape_signature(scc: SCC):
    """Per-predicate multiset of clause segment counts, as a canonical
    sorted structure; equal signatures are necessary for a shared
    recursive structure."""
    per_pred = []
    for pred in scc.members:
        lengths = sorted(len(segment_clause(c, scc).segments)
                         for c in scc.clauses_of(pred))
        per_pred.append((pred.arity, tuple(lengths)))
    return tuple(sorted(per_pred))


def candidate_pairs(program: Program, threshold=Fraction(1, 2),
                    normalize: bool = True) -> tuple:
    """Cheap pre-filter over a whole program.

    Normalizes (unless told otherwise), builds SCCs, buckets them by
    shape signature and emits pairs whose estimate's smaller component
    reaches the threshold, best first.
    """
    if normalize:
        program = normalize_program(program)
    sccs = build_sccs(program)
    buckets: dict = {}
    prints = {}
    for scc in sccs:
        prints[scc] = scc_print(scc)
        buckets.setdefault(_shape_signature(scc), []).append(scc)

    results = []
    for group in buckets.values():
        group = sorted(group, key=lambda s: s.name())
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                est = fp_closeness(prints[group[i]], prints[group[j]])
                if est is None:
                    continue
                if min(est) >= threshold:
                    results.append((group[i], group[j], est))
    results.sort(key=lambda t: (-min(t[2]), t[0].name(), t[1].name()))
    return tuple(results)


# ---------------------------------------------------------------------------
# Goalprint glb vs generalization check
# ---------------------------------------------------------------------------

def check_glb_conjecture(q1: Goal, q2: Goal) -> Optional[tuple]:
    """Compare the pointwise glb of two goalprints against the print of
    the generalization of their best-aligned subgoals.

    Returns None when they agree and (glb print, generalization print)
    when they differ.  Disagreements are possible in principle, so the
    caller decides how to report them.
    """
    glb = goalprint_glb(goalprint(q1), goalprint(q2))
    value, align = goal_similarity(q1, q2)
    rename = align.renaming_dict
    left_atoms = []
    right_atoms = []
    for li, ri in align.atom_pairing:
        la, ra = q1.atoms[li], q2.atoms[ri]
        if align.swapped:
            inverse = {v: Var(k) for k, v in rename.items()}
            la = rename_vars(la, inverse)
        else:
            la = rename_vars(la, {k: Var(v) for k, v in rename.items()})
        left_atoms.append(la)
        right_atoms.append(ra)
    gen = msg(Goal(tuple(left_atoms)), Goal(tuple(right_atoms))).generalization
    gen_print = goalprint(gen)
    if glb == gen_print:
        return None
    return (glb, gen_print)
