"""SCC-level comparison: same recursive structure, similarity and
closeness, and extraction of the common-core generalization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .depgraph import SCC, segment_clause
from .metrics import (
    DEFAULT_EXACT_GROUP_LIMIT, DEFAULT_EXACT_VARS_LIMIT, GoalAlignment,
    atom_to_term, goal_similarity, msg, strict_commonality,
)
from .syntax import Atom, Clause, Goal, Num, PredSymbol, Struct, Var, rename_vars

DEFAULT_ARITY_LIMIT = 6
DEFAULT_WITNESS_CAP = 10000


@dataclass(frozen=True)
class ArgPermutation:
    """Bijection on argument positions: old position i moves to
    ``mapping[i-1]`` (1-based), matching the append/concat example where
    pi = {1->2, 2->3, 3->1} sends append's first argument to concat's
    second position."""

    mapping: tuple  # tuple[int, ...], a permutation of 1..n

    def apply(self, args: tuple) -> tuple:
        out = [None] * len(args)
        for i, arg in enumerate(args):
            out[self.mapping[i] - 1] = arg
        return tuple(out)

    @staticmethod
    def identity(n: int) -> "ArgPermutation":
        return ArgPermutation(tuple(range(1, n + 1)))


@dataclass(frozen=True)
class ClauseMapping:
    """Bijection between the clauses of two SCCs, as index pairs into
    SCC.clauses, together with the induced predicate bijection."""

    pairs: tuple  # tuple[(left index, right index), ...]
    pred_map: tuple  # tuple[(PredSymbol, PredSymbol), ...]

    @property
    def pred_dict(self) -> dict:
        return dict(self.pred_map)


@dataclass(frozen=True)
class StructureWitness:
    clause_mapping: ClauseMapping
    arg_permutations: tuple  # tuple[(PredSymbol, ArgPermutation), ...]
    renamings: tuple  # per clause pair: sorted tuple[(from, to), ...]
    approximate: bool = False

    @property
    def perm_dict(self) -> dict:
        return dict(self.arg_permutations)


@dataclass(frozen=True)
class SimilarityResult:
    sigma: int
    closeness: tuple  # (Fraction, Fraction)
    witness: StructureWitness
    segment_alignments: tuple  # per clause pair: tuple[GoalAlignment, ...]
    approximate: bool = False


# ---------------------------------------------------------------------------
# Witness machinery
# ---------------------------------------------------------------------------

def _transform_atom(atom: Atom, pred_map: dict, perms: dict) -> Atom:
    """The A''_i construction: rename the predicate and permute the
    arguments (variables untouched; the renaming is matched afterwards)."""
    new_pred = pred_map[atom.pred]
    perm = perms[atom.pred]
    return Atom(new_pred, perm.apply(atom.args))


def _match_renaming(pairs) -> Optional[dict]:
    """Simultaneous first-order matching of (source, target) term pairs.

    Succeeds iff the terms are structurally identical up to a consistent,
    injective variable correspondence."""
    rho: dict = {}

    def walk(a, b) -> bool:
        if isinstance(a, Var) and isinstance(b, Var):
            if a.name in rho:
                return rho[a.name] == b.name
            rho[a.name] = b.name
            return True
        if isinstance(a, Num) and isinstance(b, Num):
            return a.value == b.value
        if isinstance(a, Struct) and isinstance(b, Struct):
            return (a.functor == b.functor and len(a.args) == len(b.args)
                    and all(walk(x, y) for x, y in zip(a.args, b.args)))
        return False

    for src, dst in pairs:
        if not walk(atom_to_term(src), atom_to_term(dst)):
            return None
    if len(set(rho.values())) != len(rho):
        return None
    return rho


def _clause_skeleton(clause: Clause, scc: SCC):
    seg = segment_clause(clause, scc)
    return seg


def _clause_rho(left: Clause, right: Clause, s1: SCC, s2: SCC,
                pred_map: dict, perms: dict) -> Optional[dict]:
    """Renaming for one clause pair under fixed pi, or None."""
    lseg = segment_clause(left, s1)
    rseg = segment_clause(right, s2)
    if len(lseg.recursive_calls) != len(rseg.recursive_calls):
        return None
    pairs = [(_transform_atom(lseg.head, pred_map, perms), rseg.head)]
    for la, ra in zip(lseg.recursive_calls, rseg.recursive_calls):
        if pred_map.get(la.pred) != ra.pred:
            return None
        pairs.append((_transform_atom(la, pred_map, perms), ra))
    return _match_renaming(pairs)


def _pred_bijections(s1: SCC, s2: SCC):
    """Arity/clause-count-respecting bijections between member predicates,
    in deterministic order."""
    if len(s1.members) != len(s2.members):
        return
    key = lambda scc, p: (p.arity, len(scc.clauses_of(p)))
    groups1: dict = {}
    groups2: dict = {}
    for p in s1.members:
        groups1.setdefault(key(s1, p), []).append(p)
    for p in s2.members:
        groups2.setdefault(key(s2, p), []).append(p)
    if sorted(groups1) != sorted(groups2):
        return
    if any(len(groups1[k]) != len(groups2[k]) for k in groups1):
        return
    keys = sorted(groups1)
    per_group = []
    for k in keys:
        left = groups1[k]
        per_group.append([tuple(zip(left, perm))
                          for perm in itertools.permutations(groups2[k])])
    for combo in itertools.product(*per_group):
        mapping = {}
        for group in combo:
            mapping.update(dict(group))
        yield mapping


def _perm_combos(members, pred_map: dict, arity_limit: int):
    """All per-predicate argument permutation combinations; beyond the
    arity limit only the identity is tried and the combo is approximate."""
    spaces = []
    approximate = False
    for q in members:
        n = q.arity
        if n <= 1:
            spaces.append([ArgPermutation.identity(n)])
        elif n <= arity_limit:
            spaces.append([ArgPermutation(p)
                           for p in itertools.permutations(range(1, n + 1))])
        else:
            spaces.append([ArgPermutation.identity(n)])
            approximate = True
    for combo in itertools.product(*spaces):
        yield dict(zip(members, combo)), approximate


def find_structure_witnesses(s1: SCC, s2: SCC,
                             arity_limit: int = DEFAULT_ARITY_LIMIT,
                             cap: int = DEFAULT_WITNESS_CAP):
    """Enumerate Definition-8 witnesses in deterministic order; an empty
    sequence means the SCCs do not share a recursive structure."""
    emitted = 0
    for pred_map in _pred_bijections(s1, s2):
        left_groups = {q: [i for i, c in enumerate(s1.clauses) if c.head.pred == q]
                       for q in s1.members}
        right_groups = {q: [j for j, c in enumerate(s2.clauses) if c.head.pred == pred_map[q]]
                        for q in s1.members}
        for perms, perm_approx in _perm_combos(s1.members, pred_map, arity_limit):
            # candidate right clauses (with rho) per left clause
            cand: dict = {}
            feasible = True
            for q in s1.members:
                for i in left_groups[q]:
                    options = []
                    for j in right_groups[q]:
                        rho = _clause_rho(s1.clauses[i], s2.clauses[j], s1, s2,
                                          pred_map, perms)
                        if rho is not None:
                            options.append((j, rho))
                    if not options:
                        feasible = False
                        break
                    cand[i] = options
                if not feasible:
                    break
            if not feasible:
                continue
            # enumerate perfect matchings per predicate group
            def matchings(groups):
                if not groups:
                    yield []
                    return
                q, rest = groups[0], groups[1:]
                lefts = left_groups[q]

                def assign(k, used, acc):
                    if k == len(lefts):
                        for tail in matchings(rest):
                            yield acc + tail
                        return
                    i = lefts[k]
                    for j, rho in cand[i]:
                        if j in used:
                            continue
                        used.add(j)
                        yield from assign(k + 1, used, acc + [(i, j, rho)])
                        used.discard(j)

                yield from assign(0, set(), [])

            for matching in matchings(list(s1.members)):
                pairs = tuple(sorted((i, j) for i, j, _ in matching))
                rhos = tuple(tuple(sorted(rho.items()))
                             for i, j, rho in sorted(matching))
                witness = StructureWitness(
                    ClauseMapping(pairs, tuple(sorted(((q, pred_map[q]) for q in s1.members),
                                                      key=lambda kv: (kv[0].name, kv[0].arity)))),
                    tuple(sorted(perms.items(), key=lambda kv: (kv[0].name, kv[0].arity))),
                    rhos,
                    approximate=perm_approx,
                )
                yield witness
                emitted += 1
                if emitted >= cap:
                    return


def validate_witness(s1: SCC, s2: SCC, w: StructureWitness) -> bool:
    """Re-apply pi and rho to every head and recursive call and check the
    result reproduces the mapped clause syntactically."""
    pred_map = w.clause_mapping.pred_dict
    perms = w.perm_dict
    for (i, j), rho_items in zip(w.clause_mapping.pairs, w.renamings):
        rho = dict(rho_items)
        lseg = segment_clause(s1.clauses[i], s1)
        rseg = segment_clause(s2.clauses[j], s2)
        if len(lseg.recursive_calls) != len(rseg.recursive_calls):
            return False
        lefts = (lseg.head,) + lseg.recursive_calls
        rights = (rseg.head,) + rseg.recursive_calls
        for la, ra in zip(lefts, rights):
            if la.pred not in pred_map or pred_map[la.pred] != ra.pred:
                return False
            image = rename_vars(_transform_atom(la, pred_map, perms),
                                {k: Var(v) for k, v in rho.items()})
            if image != ra:
                return False
    return True


# ---------------------------------------------------------------------------
# Similarity and closeness
# ---------------------------------------------------------------------------

def _clause_pair_score(left: Clause, right: Clause, s1: SCC, s2: SCC,
                       pred_map: dict, perms: dict, rho: dict,
                       vars_limit: int, group_limit: int):
    """Definition-9 contribution of one mapped clause pair, with the
    per-segment alignments that realize it."""
    lseg = segment_clause(left, s1)
    rseg = segment_clause(right, s2)
    score = 1  # the clause-neck node
    alignments = []
    approximate = False
    for lq, rq in zip(lseg.segments, rseg.segments):
        value, align = goal_similarity(lq, rq, vars_limit, group_limit)
        score += value
        alignments.append(align)
        approximate = approximate or align.approximate
    rho_vars = {k: Var(v) for k, v in rho.items()}
    lefts = (lseg.head,) + lseg.recursive_calls
    rights = (rseg.head,) + rseg.recursive_calls
    for la, ra in zip(lefts, rights):
        image = rename_vars(_transform_atom(la, pred_map, perms), rho_vars)
        score += strict_commonality(image, ra)
    return score, tuple(alignments), approximate


def scc_similarity(s1: SCC, s2: SCC, w: StructureWitness,
                   vars_limit: int = DEFAULT_EXACT_VARS_LIMIT,
                   group_limit: int = DEFAULT_EXACT_GROUP_LIMIT) -> int:
    """Similarity sigma([p],[p'],phi) for a given witness."""
    if not validate_witness(s1, s2, w):
        raise ValueError("invalid structure witness")
    pred_map = w.clause_mapping.pred_dict
    perms = w.perm_dict
    total = 0
    for (i, j), rho_items in zip(w.clause_mapping.pairs, w.renamings):
        score, _, _ = _clause_pair_score(s1.clauses[i], s2.clauses[j], s1, s2,
                                         pred_map, perms, dict(rho_items),
                                         vars_limit, group_limit)
        total += score
    return total


def identity_witness(s: SCC) -> StructureWitness:
    pred_map = {q: q for q in s.members}
    perms = {q: ArgPermutation.identity(q.arity) for q in s.members}
    pairs = tuple((i, i) for i in range(len(s.clauses)))
    rhos = []
    for c in s.clauses:
        seg = segment_clause(c, s)
        names = set()
        for atom in (seg.head,) + seg.recursive_calls:
            stack = list(atom.args)
            while stack:
                t = stack.pop()
                if isinstance(t, Var):
                    names.add(t.name)
                elif isinstance(t, Struct):
                    stack.extend(t.args)
        rhos.append(tuple(sorted((n, n) for n in names)))
    return StructureWitness(
        ClauseMapping(pairs, tuple(sorted(((q, q) for q in s.members),
                                          key=lambda kv: (kv[0].name, kv[0].arity)))),
        tuple(sorted(perms.items(), key=lambda kv: (kv[0].name, kv[0].arity))),
        tuple(rhos),
    )


def self_similarity(s: SCC,
                    vars_limit: int = DEFAULT_EXACT_VARS_LIMIT,
                    group_limit: int = DEFAULT_EXACT_GROUP_LIMIT) -> int:
    """sigma(s, s, identity); the closeness denominator N_[s].  Using the
    self-similarity rather than the raw node total makes closeness (1,1)
    for duplicates by construction."""
    return scc_similarity(s, s, identity_witness(s), vars_limit, group_limit)


def closeness(s1: SCC, s2: SCC,
              vars_limit: int = DEFAULT_EXACT_VARS_LIMIT,
              group_limit: int = DEFAULT_EXACT_GROUP_LIMIT,
              arity_limit: int = DEFAULT_ARITY_LIMIT,
              witness_cap: int = DEFAULT_WITNESS_CAP) -> Optional[SimilarityResult]:
    """Closeness gamma: sigma maximized over witnesses, divided by each
    side's self-similarity.  None when no structure witness exists.

    Instead of enumerating clause bijections one by one, each (predicate
    bijection, argument permutation) combination is scored with a
    max-weight assignment over compatible clause pairs, which maximizes
    sigma exactly in polynomial time per combination."""
    best = None
    combos_seen = 0
    truncated = False
    for pred_map in _pred_bijections(s1, s2):
        left_groups = {q: [i for i, c in enumerate(s1.clauses) if c.head.pred == q]
                       for q in s1.members}
        right_groups = {q: [j for j, c in enumerate(s2.clauses) if c.head.pred == pred_map[q]]
                        for q in s1.members}
        if any(len(left_groups[q]) != len(right_groups[q]) for q in s1.members):
            continue
        for perms, perm_approx in _perm_combos(s1.members, pred_map, arity_limit):
            combos_seen += 1
            if combos_seen > witness_cap:
                truncated = True
                break
            total = 0
            mapping = []
            feasible = True
            approx = perm_approx
            for q in s1.members:
                lefts, rights = left_groups[q], right_groups[q]
                scores = {}
                weights = np.full((len(lefts), len(rights)), -1.0)
                for a, i in enumerate(lefts):
                    for b, j in enumerate(rights):
                        rho = _clause_rho(s1.clauses[i], s2.clauses[j], s1, s2,
                                          pred_map, perms)
                        if rho is None:
                            continue
                        score, aligns, sc_approx = _clause_pair_score(
                            s1.clauses[i], s2.clauses[j], s1, s2,
                            pred_map, perms, rho, vars_limit, group_limit)
                        weights[a, b] = score
                        scores[(a, b)] = (score, rho, aligns, sc_approx)
                rows, cols = linear_sum_assignment(weights, maximize=True)
                if any(weights[r, c] < 0 for r, c in zip(rows, cols)):
                    feasible = False
                    break
                for r, c in zip(rows, cols):
                    score, rho, aligns, sc_approx = scores[(r, c)]
                    total += score
                    approx = approx or sc_approx
                    mapping.append((lefts[r], rights[c], rho, aligns))
            if not feasible:
                continue
            if best is None or total > best[0]:
                best = (total, pred_map, dict(perms), sorted(mapping), approx)
        if truncated:
            break

    if best is None:
        return None
    total, pred_map, perms, mapping, approx = best
    witness = StructureWitness(
        ClauseMapping(tuple((i, j) for i, j, _, _ in mapping),
                      tuple(sorted(((q, pred_map[q]) for q in s1.members),
                                   key=lambda kv: (kv[0].name, kv[0].arity)))),
        tuple(sorted(perms.items(), key=lambda kv: (kv[0].name, kv[0].arity))),
        tuple(tuple(sorted(rho.items())) for _, _, rho, _ in mapping),
        approximate=approx or truncated,
    )
    n1 = self_similarity(s1, vars_limit, group_limit)
    n2 = self_similarity(s2, vars_limit, group_limit)
    gamma = (Fraction(total, n1) if n1 else Fraction(0),
             Fraction(total, n2) if n2 else Fraction(0))
    return SimilarityResult(total, gamma, witness,
                            tuple(tuple(aligns) for _, _, _, aligns in mapping),
                            approximate=approx or truncated)


# ---------------------------------------------------------------------------
# Common-core extraction
# ---------------------------------------------------------------------------

def common_core(s1: SCC, s2: SCC, result: SimilarityResult) -> tuple:
    """Generalize every mapped clause pair into a fresh common-core
    predicate definition: heads and recursive calls are kept (renamed to
    fresh predicates), and only the sigma-aligned atoms of each segment
    survive, anti-unified pairwise."""
    if result.approximate:
        raise ValueError("refusing to extract a common core from an approximate result")
    w = result.witness
    pred_map = w.clause_mapping.pred_dict
    perms = w.perm_dict
    fresh = {pred_map[q]: PredSymbol(f"core_{q.name}_{pred_map[q].name}", q.arity)
             for q in s1.members}

    clauses = []
    for idx, ((i, j), rho_items) in enumerate(zip(w.clause_mapping.pairs, w.renamings)):
        left, right = s1.clauses[i], s2.clauses[j]
        lseg = segment_clause(left, s1)
        rseg = segment_clause(right, s2)
        aligns = result.segment_alignments[idx]
        memo: dict = {}
        counter = itertools.count(1)

        def anti(a, b):
            if isinstance(a, Var) and isinstance(b, Var) and a.name == b.name:
                return a
            if isinstance(a, Num) and isinstance(b, Num) and a.value == b.value:
                return a
            if (isinstance(a, Struct) and isinstance(b, Struct)
                    and a.functor == b.functor and len(a.args) == len(b.args)):
                return Struct(a.functor, tuple(anti(x, y) for x, y in zip(a.args, b.args)))
            k = (a, b)
            if k not in memo:
                memo[k] = Var(f"G{next(counter)}")
            return memo[k]

        def anti_atom(a: Atom, b: Atom) -> Atom:
            return Atom(b.pred, tuple(anti(x, y) for x, y in zip(a.args, b.args)))

        rho_vars = {k: Var(v) for k, v in rho_items}
        body_atoms = []
        head = None
        for si, (lq, rq, align) in enumerate(zip(lseg.segments, rseg.segments, aligns)):
            rename = align.renaming_dict
            kept = []
            for li, ri in align.atom_pairing:
                la, ra = lq.atoms[li], rq.atoms[ri]
                if align.swapped:
                    inverse = {v: Var(k) for k, v in rename.items()}
                    la2 = rename_vars(la, inverse)
                else:
                    la2 = rename_vars(la, {k: Var(v) for k, v in rename.items()})
                kept.append((ri, anti_atom(la2, ra)))
            body_atoms.extend(atom for _, atom in sorted(kept, key=lambda kv: kv[0]))
            if si < len(rseg.recursive_calls):
                lcall = rename_vars(
                    _transform_atom(lseg.recursive_calls[si], pred_map, perms), rho_vars)
                rcall = rseg.recursive_calls[si]
                gen = anti_atom(lcall, rcall)
                body_atoms.append(Atom(fresh[rcall.pred], gen.args))
        lhead = rename_vars(_transform_atom(lseg.head, pred_map, perms), rho_vars)
        gen_head = anti_atom(lhead, rseg.head)
        head = Atom(fresh[rseg.head.pred], gen_head.args)
        clauses.append(Clause(head, Goal(tuple(body_atoms)), right.origin))
    return tuple(clauses)
