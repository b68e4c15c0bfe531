"""Search-space reductions: lazy dependency tests and assignment-set
minimization.

Lazy dependency tests (:func:`ldt_rewrite`) replace the global per-state
key/FK consistency check with local rewriting: every positive equality over
id expressions is strengthened to agree on all shared navigation
continuations at the moment it is tested, after which the engine may skip
the consistency filter entirely.

Assignment-set minimization (:func:`minimize_assignment_sets`) bounds each
expression's candidate values by analyzing the equality/inequality atoms the
spec and property can ever test: expressions connected by ``=`` atoms share
one pool holding the component's constants plus just enough fresh values to
realize every consistent combination of tested atoms.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import (
    And,
    Condition,
    ConstTerm,
    Equal,
    FalseCond,
    LtlFo,
    NegRelAtom,
    Not,
    NotEqual,
    NullTerm,
    Or,
    RelAtom,
    TasError,
    TasSpec,
    Term,
    TrueCond,
    VarTerm,
    VarType,
    and_all,
    ltl_conditions,
    or_all,
    to_nnf,
)
from .symbolic import Mode, NavigationSet


# ---------------------------------------------------------------------------
# Relational-atom expansion and navigation continuations
# ---------------------------------------------------------------------------


def rel_atom_components(
    atom: RelAtom | NegRelAtom, navset: NavigationSet
) -> tuple[tuple[VarTerm, Term], ...]:
    """The componentwise equality pairs of a relational atom: for
    R(x, y1..yn), the pairs (x.A1, y1) .. (x.An, yn) in attribute order.

    The key must be an id expression (a null key is handled by callers).
    """
    relation = navset.schema.relation(atom.relation)
    if relation is None:
        raise TasError(f"unknown relation: {atom.relation}")
    key = atom.args[0]
    if not isinstance(key, VarTerm):
        raise TasError(f"relation atom key must be an id expression: {atom}")
    return tuple(
        (VarTerm(key.name, key.path + (attr.name,)), arg)
        for attr, arg in zip(relation.attributes, atom.args[1:])
    )


def equal_continuations(
    left: Term, right: Term, navset: NavigationSet
) -> tuple[tuple[VarTerm, VarTerm], ...]:
    """Shared navigation continuations of an equality's two sides.

    Non-empty only when both sides are id expressions (necessarily of the
    same type): the aligned pairs (left.w, right.w) for every non-empty
    suffix w, in navigation order.  Constants and nulls have no
    continuations.
    """
    if not (isinstance(left, VarTerm) and isinstance(right, VarTerm)):
        return ()
    i = navset.path_ordinal(left.name, left.path)
    j = navset.path_ordinal(right.name, right.path)
    if navset.path_types[i] != navset.path_types[j]:
        raise TasError(
            f"equality between differently typed expressions: {left} vs {right}"
        )
    if not navset.path_types[i].is_id:
        return ()
    size = navset.subtree_end[i] - i
    pairs = []
    for offset in range(1, size):
        a = navset.paths[i + offset]
        b = navset.paths[j + offset]
        pairs.append((VarTerm(a.root, a.path), VarTerm(b.root, b.path)))
    return tuple(pairs)


def _expanded_equal(left: Term, right: Term, navset: NavigationSet) -> Condition:
    """An equality atom conjoined, in place, with all its continuations."""
    atoms: list[Condition] = [Equal(left, right)]
    for a, b in equal_continuations(left, right, navset):
        atoms.append(Equal(a, b))
    return and_all(atoms)


def ldt_rewrite(
    cond: Condition, navset: NavigationSet, *, null_guard: bool = False
) -> Condition:
    """Rewrite a condition so key/FK consistency is tested lazily.

    The result is in negation normal form.  Every positive equality is
    replaced by the conjunction of itself with all shared continuations;
    inequalities stay untouched.  Relational atoms are first expanded to
    their componentwise equality form; with ``null_guard`` the expansion
    also tests the key against null, matching the engine's native atom
    semantics (the engine enables this; the Promela text does not).
    """

    def rewrite(c: Condition) -> Condition:
        match c:
            case TrueCond() | FalseCond():
                return c
            case Equal(left=left, right=right):
                return _expanded_equal(left, right, navset)
            case NotEqual():
                return c
            case RelAtom(args=args) as atom:
                if isinstance(args[0], NullTerm):
                    return FalseCond()
                parts: list[Condition] = []
                if null_guard:
                    parts.append(NotEqual(args[0], NullTerm()))
                components = rel_atom_components(atom, navset)
                parts.extend(Equal(a, b) for a, b in components)
                for a, b in components:
                    parts.extend(
                        Equal(u, v)
                        for u, v in equal_continuations(a, b, navset)
                    )
                return and_all(parts)
            case NegRelAtom(args=args) as atom:
                if isinstance(args[0], NullTerm):
                    return TrueCond()
                parts = []
                if null_guard:
                    parts.append(Equal(args[0], NullTerm()))
                parts.extend(
                    NotEqual(a, b)
                    for a, b in rel_atom_components(atom, navset)
                )
                return or_all(parts)
            case And(left=left, right=right):
                return And(rewrite(left), rewrite(right))
            case Or(left=left, right=right):
                return Or(rewrite(left), rewrite(right))
        raise TasError(f"cannot rewrite condition: {c}")

    return rewrite(to_nnf(cond))


# ---------------------------------------------------------------------------
# Constraint graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintGraph:
    """Equality/inequality atoms a run can ever test, as labeled edges over
    canonical navigation-set indices (i < j per edge)."""

    navset: NavigationSet
    eq_edges: frozenset[tuple[int, int]]
    ne_edges: frozenset[tuple[int, int]]


def _term_canonical_index(
    term: Term, partner: Term | None, navset: NavigationSet
) -> int | None:
    match term:
        case VarTerm(name=name, path=path):
            return navset.n_constants + navset.path_ordinal(name, path)
        case ConstTerm(value=value):
            ordinal = navset.named_ordinal.get(value)
            if ordinal is None:
                raise TasError(f'constant not in navigation set: "{value}"')
            return ordinal
        case NullTerm():
            match partner:
                case VarTerm(name=name, path=path):
                    vtype = navset.path_types[navset.path_ordinal(name, path)]
                case _:
                    return None
            return navset.null_ordinal.get(vtype)
    return None


class _EdgeCollector:
    def __init__(self, navset: NavigationSet) -> None:
        self.navset = navset
        self.eq: set[tuple[int, int]] = set()
        self.ne: set[tuple[int, int]] = set()

    def _vtype_of(self, index: int) -> VarType:
        navset = self.navset
        if index < navset.n_constants:
            return navset.constants[index].vtype
        return navset.path_types[index - navset.n_constants]

    def add(self, left: Term, right: Term, equal: bool) -> None:
        i = _term_canonical_index(left, right, self.navset)
        j = _term_canonical_index(right, left, self.navset)
        if i is None or j is None or i == j:
            return
        if self._vtype_of(i) != self._vtype_of(j):
            raise TasError(
                f"equality between differently typed expressions: "
                f"{left} vs {right}"
            )
        edge = (i, j) if i < j else (j, i)
        (self.eq if equal else self.ne).add(edge)

    def collect(self, cond: Condition) -> None:
        """Atoms of an NNF condition, with relational atoms expanded to the
        comparisons the engine actually performs (key null test included)."""
        match cond:
            case TrueCond() | FalseCond():
                pass
            case Equal(left=left, right=right):
                self.add(left, right, True)
            case NotEqual(left=left, right=right):
                self.add(left, right, False)
            case RelAtom(args=args) as atom:
                if isinstance(args[0], NullTerm):
                    return
                self.add(args[0], NullTerm(), False)
                for a, b in rel_atom_components(atom, self.navset):
                    self.add(a, b, True)
            case NegRelAtom(args=args) as atom:
                if isinstance(args[0], NullTerm):
                    return
                self.add(args[0], NullTerm(), True)
                for a, b in rel_atom_components(atom, self.navset):
                    self.add(a, b, False)
            case Not(operand=operand):
                self.collect(to_nnf(Not(operand)))
            case And(left=left, right=right) | Or(left=left, right=right):
                self.collect(left)
                self.collect(right)
            case _:
                raise TasError(f"cannot collect atoms from: {cond}")


def build_constraint_graph(
    spec: TasSpec,
    translated_property: LtlFo | None,
    navset: NavigationSet,
    mode: Mode = Mode.NAIVE,
) -> ConstraintGraph:
    """Collect every equality/inequality the engine can test under ``mode``.

    Spec conditions contribute their atoms after mode rewriting.  Property
    conditions contribute both polarities: the verifier checks the negated
    property, so its atoms are tested both ways.  In naive mode the runtime
    consistency filter itself compares same-typed id expressions and their
    children; those pairs are included so pools keep every distinguishable
    outcome reachable.
    """
    collector = _EdgeCollector(navset)

    def spec_condition(c: Condition) -> None:
        if mode is Mode.LDT:
            collector.collect(ldt_rewrite(c, navset, null_guard=True))
        else:
            collector.collect(to_nnf(c))

    spec_condition(spec.init_cond)
    for svc in spec.services:
        spec_condition(svc.pre)
        spec_condition(svc.post)
    if translated_property is not None:
        for c in ltl_conditions(translated_property.formula):
            spec_condition(c)
            spec_condition(Not(c))
    if mode is Mode.NAIVE:
        base = navset.n_constants
        for i, j, kids in navset.congruence_pairs:
            collector.ne.add((base + i, base + j))
            for ci, cj in kids:
                collector.eq.add((base + ci, base + cj))
    return ConstraintGraph(
        navset, frozenset(collector.eq), frozenset(collector.ne)
    )


# ---------------------------------------------------------------------------
# Assignment sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentInfo:
    """One equality-connected component's pool, for reporting."""

    vtype: VarType
    member_indices: tuple[int, ...]
    constant_count: int
    ne_incident: int
    fresh_count: int
    lo: int
    hi: int


@dataclass(frozen=True)
class AssignmentSets:
    """Candidate values: a fixed value per constant and an inclusive value
    range per path expression.  Ranges of distinct types are unrelated
    (values only ever compare within a type)."""

    navset: NavigationSet
    const_values: tuple[int, ...]
    ranges: tuple[tuple[int, int], ...]
    components: tuple[ComponentInfo, ...] = ()

    def pool_size(self, path_ordinal: int) -> int:
        lo, hi = self.ranges[path_ordinal]
        return hi - lo + 1

    def average_pool_size(self) -> float:
        if not self.ranges:
            return 0.0
        return sum(hi - lo + 1 for lo, hi in self.ranges) / len(self.ranges)

    def max_pool_size(self) -> int:
        return max((hi - lo + 1 for lo, hi in self.ranges), default=0)


def chromatic_bound(m: int) -> int:
    """Smallest k >= 1 with k(k-1) >= 2m: enough values to color any
    m-inequality component."""
    if m < 0:
        raise TasError("negative inequality count")
    k = max(1, (1 + math.isqrt(1 + 8 * m)) // 2)
    while k * (k - 1) < 2 * m:
        k += 1
    return k


def naive_assignment_sets(navset: NavigationSet) -> AssignmentSets:
    """Unminimized pools: per type, every named constant plus one fresh
    value per same-typed expression, shared by all of the type's
    expressions."""
    const_values: list[int] = []
    counters: dict[VarType, int] = {}
    for c in navset.constants:
        value = counters.get(c.vtype, 0)
        const_values.append(value)
        counters[c.vtype] = value + 1
    sizes: dict[VarType, int] = {}
    for vtype in navset.path_types:
        sizes[vtype] = sizes.get(vtype, 0) + 1
    ranges = tuple(
        (0, counters.get(vtype, 0) + sizes[vtype] - 1)
        for vtype in navset.path_types
    )
    return AssignmentSets(navset, tuple(const_values), ranges)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def minimize_assignment_sets(
    graph: ConstraintGraph, navset: NavigationSet
) -> AssignmentSets:
    """Shrink pools to each equality component's constants plus a fresh
    block just large enough for the component's inequality edges.

    Components receive disjoint contiguous value blocks per type, so
    cross-component atoms are trivially realizable (equalities are never
    tested across components; inequalities always hold there).
    """
    n = navset.n_constants + navset.n_paths
    uf = _UnionFind(n)
    for i, j in graph.eq_edges:
        uf.union(i, j)
    ne_incident: dict[int, int] = {}
    for i, j in graph.ne_edges:
        a, b = uf.find(i), uf.find(j)
        ne_incident[a] = ne_incident.get(a, 0) + 1
        if b != a:
            ne_incident[b] = ne_incident.get(b, 0) + 1
    members: dict[int, list[int]] = {}
    for i in range(n):
        members.setdefault(uf.find(i), []).append(i)

    const_values = [0] * navset.n_constants
    ranges = [(0, 0)] * navset.n_paths
    cursors: dict[VarType, int] = {}
    infos: list[ComponentInfo] = []
    for root in sorted(members):
        group = members[root]
        consts = [i for i in group if i < navset.n_constants]
        paths = [i - navset.n_constants for i in group if i >= navset.n_constants]
        vtype = (
            navset.constants[consts[0]].vtype
            if consts
            else navset.path_types[paths[0]]
        )
        m = ne_incident.get(root, 0)
        fresh = chromatic_bound(m) if paths else 0
        cursor = cursors.get(vtype, 0)
        for offset, i in enumerate(consts):
            const_values[i] = cursor + offset
        lo, hi = cursor, cursor + len(consts) + fresh - 1
        for p in paths:
            ranges[p] = (lo, hi)
        cursors[vtype] = hi + 1
        infos.append(
            ComponentInfo(
                vtype=vtype,
                member_indices=tuple(group),
                constant_count=len(consts),
                ne_incident=m,
                fresh_count=fresh,
                lo=lo,
                hi=hi,
            )
        )
    return AssignmentSets(
        navset, tuple(const_values), tuple(ranges), tuple(infos)
    )


# ---------------------------------------------------------------------------
# Sampled soundness check for minimized pools
# ---------------------------------------------------------------------------


def check_consistent_subgraphs(
    graph: ConstraintGraph,
    pools: AssignmentSets,
    samples: int = 1000,
    seed: int = 0,
) -> int:
    """Sample consistent edge subsets and realize each within the pools.

    A subset is consistent when its equality closure never merges two
    distinct constants and never collapses an inequality edge.  Subsets are
    drawn constructively: equality edges are visited in random order and
    included with probability one half, skipping any whose closure would
    merge two distinct constants; inequality edges collapsed by the chosen
    closure are left out.  Every consistent subset has positive
    probability, and every draw yields one.  For each subset a greedy
    smallest-last coloring must find a valuation inside the pools
    satisfying all chosen atoms; any failure is a hard error.  Returns the
    number of subsets checked.
    """
    rng = random.Random(seed)
    navset = graph.navset
    n = navset.n_constants + navset.n_paths
    eq_edges = sorted(graph.eq_edges)
    ne_edges = sorted(graph.ne_edges)
    component_of = _UnionFind(n)
    for i, j in eq_edges:
        component_of.union(i, j)

    def value_range(index: int) -> tuple[int, int]:
        if index < navset.n_constants:
            v = pools.const_values[index]
            return (v, v)
        return pools.ranges[index - navset.n_constants]

    checked = 0
    while checked < samples:
        uf = _UnionFind(n)
        class_const = {c: c for c in range(navset.n_constants)}
        chosen_eq: list[tuple[int, int]] = []
        order = list(eq_edges)
        rng.shuffle(order)
        for i, j in order:
            if rng.random() < 0.5:
                continue
            ri, rj = uf.find(i), uf.find(j)
            if ri == rj:
                chosen_eq.append((i, j))
                continue
            ci, cj = class_const.get(ri), class_const.get(rj)
            if ci is not None and cj is not None and ci != cj:
                continue
            uf.union(i, j)
            class_const.pop(ri, None)
            class_const.pop(rj, None)
            keep = ci if ci is not None else cj
            if keep is not None:
                class_const[uf.find(i)] = keep
            chosen_eq.append((i, j))
        chosen_ne = [
            (i, j)
            for i, j in ne_edges
            if rng.random() < 0.5 and uf.find(i) != uf.find(j)
        ]

        # Realize: color equality classes within their pools.
        conflicts: dict[int, set[int]] = {}
        for i, j in chosen_ne:
            a, b = uf.find(i), uf.find(j)
            conflicts.setdefault(a, set()).add(b)
            conflicts.setdefault(b, set()).add(a)
        values: dict[int, int] = {}
        for root, c in class_const.items():
            values[root] = pools.const_values[c]
        free_classes = sorted(
            {uf.find(i) for i in range(n)} - set(values)
        )
        # Order within each full equality component separately: only
        # same-component neighbors compete for a component's fresh values,
        # and per-component smallest-last keeps that competition below the
        # fresh count.  Cross-component neighbors hold out-of-range values.
        order: list[int] = []
        by_component: dict[int, list[int]] = {}
        for root in free_classes:
            by_component.setdefault(component_of.find(root), []).append(root)
        for component in sorted(by_component):
            classes = by_component[component]
            local = set(classes)
            sub = {c: conflicts.get(c, set()) & local for c in classes}
            order.extend(_smallest_last(classes, sub))
        for root in order:
            lo, hi = value_range(root)
            for i in range(n):
                if uf.find(i) == root:
                    clo, chi = value_range(i)
                    lo, hi = max(lo, clo), min(hi, chi)
            taken = {
                values[other]
                for other in conflicts.get(root, ())
                if other in values
            }
            value = next(
                (v for v in range(lo, hi + 1) if v not in taken), None
            )
            if value is None:
                raise TasError(
                    f"no value realizes class {root} within its pool"
                )
            values[root] = value
        for i, j in chosen_eq:
            if values[uf.find(i)] != values[uf.find(j)]:
                raise TasError("realized valuation breaks a chosen equality")
        for i, j in chosen_ne:
            if values[uf.find(i)] == values[uf.find(j)]:
                raise TasError("realized valuation breaks a chosen inequality")
        checked += 1
    return checked


def _smallest_last(nodes: list[int], conflicts: dict[int, set[int]]) -> list[int]:
    """Degeneracy (smallest-last) ordering of the conflict graph restricted
    to ``nodes``; coloring in this order needs at most degeneracy+1 values."""
    remaining = set(nodes)
    degree = {
        v: len(conflicts.get(v, set()) & remaining) for v in nodes
    }
    removed: list[int] = []
    while remaining:
        v = min(remaining, key=lambda u: (degree[u], u))
        remaining.remove(v)
        removed.append(v)
        for w in conflicts.get(v, ()):
            if w in remaining:
                degree[w] -= 1
    removed.reverse()
    return removed
