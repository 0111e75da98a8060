"""Rewrite clauses into the flat normal form used by the measures.

After normalization every body atom is a call ``p(X1,...,Xn)``, a
variable-variable unification ``X = Y`` or a single-level binding
``X = f(X1,...,Xn)``.  Heads carry pairwise-distinct fresh parameters.
Arithmetic builtins (``is``/comparisons) keep their compound arguments
nested, so their operator symbols stay inside one goalprint.
"""

from __future__ import annotations

import string

from .syntax import (
    ARITH_BUILTINS, EMPTY_GOAL, EQ, Atom, Clause, Goal, Num, Program, Struct,
    Var, rename_vars, var_names,
)


def _name_stream(candidates, used):
    for name in candidates:
        if name not in used:
            used.add(name)
            yield name


def _param_names(used):
    def candidates():
        yield from string.ascii_uppercase
        i = 1
        while True:
            yield f"P{i}"
            i += 1
    return _name_stream(candidates(), used)


def _temp_names(used):
    def candidates():
        i = 1
        while True:
            yield f"V{i}"
            i += 1
    return _name_stream(candidates(), used)


class _Normalizer:
    def __init__(self, clause: Clause):
        used = set(var_names(clause))
        self.params = _param_names(used)
        self.temps = _temp_names(used)
        self.binder: dict = {}  # original var name -> normalized Var
        self.body: list = []

    def image(self, v: Var) -> Var:
        if v.name not in self.binder:
            self.binder[v.name] = Var(v.name)
        return self.binder[v.name]

    def flatten(self, lhs: Var, term):
        """Emit lhs = <one level of term>, then recurse pre-order."""
        if isinstance(term, Num):
            self.body.append(Atom(EQ, (lhs, term)))
            return
        pending = []
        args = []
        local = {lhs.name}
        for a in term.args:
            if isinstance(a, Var):
                img = self.image(a)
                if img.name in local:
                    # keep variables distinct inside one unification
                    tv = Var(next(self.temps))
                    args.append(tv)
                    pending.append(("eq", tv, img))
                    local.add(tv.name)
                else:
                    args.append(img)
                    local.add(img.name)
            else:
                tv = Var(next(self.temps))
                args.append(tv)
                local.add(tv.name)
                pending.append(("flat", tv, a))
        self.body.append(Atom(EQ, (lhs, Struct(term.functor, tuple(args)))))
        for kind, tv, payload in pending:
            if kind == "eq":
                self.body.append(Atom(EQ, (tv, payload)))
            else:
                self.flatten(tv, payload)

    def subst_vars_only(self, term):
        if isinstance(term, Var):
            return self.image(term)
        if isinstance(term, Struct):
            return Struct(term.functor, tuple(self.subst_vars_only(a) for a in term.args))
        return term


def _eliminate_var_unifications(body: list, head_params: set) -> list:
    """Substitute away internal single-binding variables.

    ``X = Y`` atoms survive only when both sides are head parameters
    (matching the normal-form append listing) or when eliminating them
    would duplicate a variable inside another unification.
    """
    atoms = list(body)
    changed = True
    while changed:
        changed = False
        for idx, atom in enumerate(atoms):
            if atom.pred != EQ:
                continue
            lhs, rhs = atom.args
            if not (isinstance(lhs, Var) and isinstance(rhs, Var)):
                continue
            if lhs.name == rhs.name:
                del atoms[idx]
                changed = True
                break
            if lhs.name in head_params and rhs.name in head_params:
                continue
            if rhs.name in head_params:
                keep, drop = rhs, lhs
            else:
                keep, drop = lhs, rhs
            if _would_duplicate(atoms, idx, keep.name, drop.name):
                continue
            del atoms[idx]
            atoms = [rename_vars(a, {drop.name: keep}) for a in atoms]
            changed = True
            break
    return atoms


def _would_duplicate(atoms: list, skip: int, keep: str, drop: str) -> bool:
    for i, atom in enumerate(atoms):
        if i == skip or atom.pred != EQ:
            continue
        names = [v for v in var_names(atom)]
        if keep in names and drop in names:
            return True
    return False


def normalize_clause(clause: Clause) -> Clause:
    """Normalize one definite clause, deterministically.

    Head arguments are flattened left to right, compound arguments
    depth-first pre-order, and emitted unifications precede the call they
    feed.  Fresh parameters are named A, B, C, ...; flattening temporaries
    V1, V2, ...; names never affect any measure.
    """
    nz = _Normalizer(clause)
    new_head_args = []
    for arg in clause.head.args:
        param = Var(next(nz.params))
        new_head_args.append(param)
        if isinstance(arg, Var):
            if arg.name in nz.binder:
                nz.body.append(Atom(EQ, (param, nz.binder[arg.name])))
            else:
                nz.binder[arg.name] = param
        else:
            nz.flatten(param, arg)

    for atom in clause.body.atoms:
        pred = atom.pred
        if pred == EQ:
            lhs, rhs = atom.args
            if isinstance(lhs, Var) and isinstance(rhs, Var):
                nz.body.append(Atom(EQ, (nz.image(lhs), nz.image(rhs))))
            elif isinstance(lhs, Var):
                nz.flatten(nz.image(lhs), rhs)
            elif isinstance(rhs, Var):
                nz.flatten(nz.image(rhs), lhs)
            else:
                tv = Var(next(nz.temps))
                nz.flatten(tv, lhs)
                nz.flatten(tv, rhs)
        elif (pred.name, pred.arity) in ARITH_BUILTINS:
            nz.body.append(Atom(pred, tuple(nz.subst_vars_only(a) for a in atom.args)))
        else:
            call_args = []
            for a in atom.args:
                if isinstance(a, Var):
                    call_args.append(nz.image(a))
                else:
                    tv = Var(next(nz.temps))
                    nz.flatten(tv, a)
                    call_args.append(tv)
            nz.body.append(Atom(pred, tuple(call_args)))

    head_params = {v.name for v in new_head_args}
    body = _eliminate_var_unifications(nz.body, head_params)
    return Clause(Atom(clause.head.pred, tuple(new_head_args)), Goal(tuple(body)), clause.origin)


def normalize_program(program: Program) -> Program:
    """Normalize every clause; fresh numbering restarts per clause."""
    predicates = {
        pred: tuple(normalize_clause(c) for c in clauses)
        for pred, clauses in program.predicates.items()
    }
    return Program(predicates, program.warnings, program.excluded)


_NORMAL_CALL_OK = ARITH_BUILTINS


def is_normal_atom(atom: Atom) -> bool:
    """True when the atom matches one of the three normal shapes."""
    if atom.pred == EQ:
        lhs, rhs = atom.args
        if not isinstance(lhs, Var):
            return False
        if isinstance(rhs, Var):
            return lhs.name != rhs.name or True
        if isinstance(rhs, Num):
            return True
        if isinstance(rhs, Struct):
            names = [a.name for a in rhs.args if isinstance(a, Var)]
            all_vars = all(isinstance(a, Var) for a in rhs.args)
            distinct = len(set(names + [lhs.name])) == len(names) + 1
            return all_vars and distinct
        return False
    if (atom.pred.name, atom.pred.arity) in _NORMAL_CALL_OK:
        return True
    return all(isinstance(a, Var) for a in atom.args)
