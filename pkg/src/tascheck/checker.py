"""Property checking over the symbolic state space.

The pipeline: fold the property's global variables into the spec, hoist
existential witnesses, build the navigation set and value pools, translate
the negated property to a Büchi automaton, and search the product of the
symbolic transition system with the automaton for an accepting cycle by
nested depth-first search.  No accepting cycle means every symbolic run
satisfies the property, which settles it for all databases and runs.

A reported violation is a lasso (prefix plus repeating cycle).  Every lasso
is re-validated before being returned: each step must be a legal transition
under the checked mode, and the induced word must be accepted by the
automaton.

:func:`partition_oracle_check` answers the same question from an
independent representation — isomorphism types as typed set partitions of
the navigation set, with no integer valuations, no value pools, and a plain
SCC-based emptiness search.  It is exponential and guarded by a size bound;
its role is cross-validation of the main engine on small inputs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Sequence

from .buchi import (
    Atom,
    BuchiAutomaton,
    Label,
    accepts_lasso,
    ltl_nnf,
    ltl_to_buchi,
)
from .model import (
    INIT_SERVICE,
    And,
    Condition,
    ConstTerm,
    CondProp,
    Equal,
    Exists,
    FalseCond,
    LtlFo,
    LtlNot,
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
    VAL,
    VarTerm,
    VarType,
    collect_constants,
    desugar_exists,
    eliminate_globals,
    ltl_map_conditions,
    validate,
)
from .optimize import (
    AssignmentSets,
    build_constraint_graph,
    ldt_rewrite,
    minimize_assignment_sets,
    naive_assignment_sets,
)
from .symbolic import (
    Mode,
    NavigationSet,
    SymbolicState,
    TransitionEngine,
    build_navigation_set,
    compile_condition,
    congruent,
)

DEFAULT_MAX_STATES = 5_000_000
DEFAULT_MAX_SECONDS = 600.0

ORACLE_MAX_EXPRESSIONS = 12


class OracleTooLarge(TasError):
    """The partition oracle refuses navigation sets above its size bound."""


class LimitKind(Enum):
    STATES = "states"
    TIME = "time"


@dataclass(frozen=True)
class Lasso:
    """A counterexample run: ``prefix`` then ``cycle`` repeating forever.

    Each entry pairs a state with the service that produced it; the first
    prefix entry is an initial state paired with "init".  ``spec`` is the
    engine-level spec (globals folded in, existentials hoisted) the states
    live in, and ``const_values`` fixes the constants' values under the
    pools the search used.
    """

    prefix: tuple[tuple[SymbolicState, str], ...]
    cycle: tuple[tuple[SymbolicState, str], ...]
    spec: TasSpec
    navset: NavigationSet
    const_values: tuple[int, ...]


@dataclass(frozen=True)
class Holds:
    pass


@dataclass(frozen=True)
class Violated:
    """The property fails; ``lasso`` is the witness run.  The main checker
    always attaches one; the partition oracle reports the bare verdict."""

    lasso: Lasso | None = None


@dataclass(frozen=True)
class ResourceLimit:
    kind: LimitKind
    states_visited: int


Verdict = Holds | Violated | ResourceLimit


@dataclass(frozen=True)
class CheckOptions:
    mode: Mode = Mode.LDT
    asm: bool = True
    max_states: int = DEFAULT_MAX_STATES
    max_seconds: float = DEFAULT_MAX_SECONDS


@dataclass
class CheckStats:
    """Search statistics.  Counters are exact and deterministic for equal
    inputs; only ``wall_seconds`` varies with the machine."""

    mode: Mode
    asm: bool
    states_visited: int = 0
    transitions: int = 0
    peak_frontier: int = 0
    wall_seconds: float = 0.0
    avg_pool_size: float = 0.0
    buchi_states: int = 0


class _Limit(Exception):
    def __init__(self, kind: LimitKind) -> None:
        self.kind = kind


# ---------------------------------------------------------------------------
# Pipeline assembly
# ---------------------------------------------------------------------------


def _validated(spec: TasSpec, prop: LtlFo) -> None:
    issues = validate(spec, (prop,))
    if issues:
        raise TasError(
            "invalid input: " + "; ".join(str(d) for d in issues[:5])
        )


def prepare(
    spec: TasSpec, prop: LtlFo, mode: Mode, asm: bool
) -> tuple[TasSpec, LtlFo, NavigationSet, AssignmentSets]:
    """Front half of the pipeline: transforms, navigation set, value pools.

    Shared by the checker, the statistics report and the benchmark harness.
    """
    _validated(spec, prop)
    folded, prop = eliminate_globals(spec, prop)
    flat = desugar_exists(folded)
    navset = build_navigation_set(
        flat.schema, flat.variables, collect_constants(flat, (prop,))
    )
    if asm:
        graph = build_constraint_graph(flat, prop, navset, mode)
        pools = minimize_assignment_sets(graph, navset)
    else:
        pools = naive_assignment_sets(navset)
    return flat, prop, navset, pools


def _negated_automaton(
    prop: LtlFo, navset: NavigationSet, mode: Mode
) -> BuchiAutomaton:
    """Büchi automaton of the negated property, with condition atoms
    rewritten for the mode (LDT states do not maintain congruence, so the
    dependency expansion must reach property conditions too)."""
    negated = ltl_nnf(LtlNot(prop.formula))
    if mode is Mode.LDT:
        negated = ltl_map_conditions(
            negated, lambda c: ldt_rewrite(c, navset, null_guard=True)
        )
    return ltl_to_buchi(negated)


def _atom_functions(
    atoms: Sequence[Atom],
    navset: NavigationSet,
    const_values: tuple[int, ...],
) -> list[Callable[[SymbolicState], bool]]:
    fns: list[Callable[[SymbolicState], bool]] = []
    for atom in atoms:
        if isinstance(atom, CondProp):
            compiled = compile_condition(atom.cond, navset, const_values)
            fns.append(lambda s, fn=compiled: fn(s.values))
        else:
            fns.append(lambda s, name=atom.service: s.last_service == name)
    return fns


# ---------------------------------------------------------------------------
# Nested DFS over the product
# ---------------------------------------------------------------------------

_ProductNode = tuple[SymbolicState, int]


class _Search:
    """One emptiness search: symbolic system x Büchi automaton."""

    def __init__(
        self,
        engine: TransitionEngine,
        automaton: BuchiAutomaton,
        atom_fns: list[Callable[[SymbolicState], bool]],
        stats: CheckStats,
        max_states: int,
        tick: Callable[[], None],
    ) -> None:
        self.engine = engine
        self.automaton = automaton
        self.atom_fns = atom_fns
        self.stats = stats
        self.max_states = max_states
        self.tick = tick
        self._masks: dict[SymbolicState, int] = {}
        self._label_masks: dict[Label, tuple[int, int]] = {}
        index = {atom: i for i, atom in enumerate(automaton.atoms)}
        for row in (automaton.initial, *automaton.transitions):
            for label, _ in row:
                if label not in self._label_masks:
                    pos = neg = 0
                    for atom, polarity in label:
                        bit = 1 << index[atom]
                        if polarity:
                            pos |= bit
                        else:
                            neg |= bit
                    self._label_masks[label] = (pos, neg)
        self.cyan: set[_ProductNode] = set()
        self.blue: set[_ProductNode] = set()
        self.red: set[_ProductNode] = set()

    def _mask(self, state: SymbolicState) -> int:
        mask = self._masks.get(state)
        if mask is None:
            mask = 0
            for bit, fn in enumerate(self.atom_fns):
                if fn(state):
                    mask |= 1 << bit
            self._masks[state] = mask
        return mask

    def _count_transition(self) -> None:
        self.stats.transitions += 1
        if not self.stats.transitions & 8191:
            self.tick()

    def _discover(self) -> None:
        self.stats.states_visited += 1
        if self.stats.states_visited > self.max_states:
            raise _Limit(LimitKind.STATES)

    def _post(self, node: _ProductNode) -> Iterator[_ProductNode]:
        state, q = node
        rows = self.automaton.transitions[q]
        for target in self.engine.all_successors(state):
            mask = self._mask(target)
            for label, r in rows:
                pos, neg = self._label_masks[label]
                if mask & pos == pos and not mask & neg:
                    self._count_transition()
                    yield (target, r)

    def _initial_nodes(self) -> Iterator[_ProductNode]:
        for state in self.engine.initial_states():
            mask = self._mask(state)
            for label, q in self.automaton.initial:
                pos, neg = self._label_masks[label]
                if mask & pos == pos and not mask & neg:
                    self._count_transition()
                    yield (state, q)

    def run(self) -> tuple[list[_ProductNode], list[_ProductNode]] | None:
        """Accepting lasso as (prefix nodes, cycle nodes), or None."""
        for root in self._initial_nodes():
            if root in self.blue:
                continue
            found = self._blue_dfs(root)
            if found is not None:
                return found
        return None

    def _blue_dfs(
        self, root: _ProductNode
    ) -> tuple[list[_ProductNode], list[_ProductNode]] | None:
        accepting = self.automaton.accepting
        path = [root]
        iters = [self._post(root)]
        self.cyan.add(root)
        self._discover()
        while path:
            self.stats.peak_frontier = max(self.stats.peak_frontier, len(path))
            node = path[-1]
            target = next(iters[-1], None)
            if target is None:
                iters.pop()
                path.pop()
                if node[1] in accepting:
                    hit = self._red_dfs(node, path + [node])
                    if hit is not None:
                        return hit
                self.cyan.remove(node)
                self.blue.add(node)
                continue
            if target in self.cyan:
                if node[1] in accepting or target[1] in accepting:
                    at = path.index(target)
                    return path[:at], path[at:]
                continue
            if target not in self.blue:
                self.cyan.add(target)
                self._discover()
                path.append(target)
                iters.append(self._post(target))
        return None

    def _red_dfs(
        self, seed: _ProductNode, blue_path: list[_ProductNode]
    ) -> tuple[list[_ProductNode], list[_ProductNode]] | None:
        self.red.add(seed)
        path = [seed]
        iters = [self._post(seed)]
        while path:
            target = next(iters[-1], None)
            if target is None:
                iters.pop()
                path.pop()
                continue
            if target in self.cyan:
                at = blue_path.index(target)
                return blue_path[:at], blue_path[at:] + path[1:]
            if target not in self.red:
                self.red.add(target)
                path.append(target)
                iters.append(self._post(target))
        return None


def check(
    spec: TasSpec, prop: LtlFo, options: CheckOptions = CheckOptions()
) -> tuple[Verdict, CheckStats]:
    """Verify one property of one spec over all databases and runs.

    Holds means no symbolic run violates the property; Violated carries a
    replay-validated lasso; ResourceLimit reports which budget ran out.
    Results and counters are deterministic for identical inputs and limits.
    """
    started = time.monotonic()
    flat, prop, navset, pools = prepare(spec, prop, options.mode, options.asm)
    automaton = _negated_automaton(prop, navset, options.mode)
    atom_fns = _atom_functions(automaton.atoms, navset, pools.const_values)
    stats = CheckStats(
        mode=options.mode,
        asm=options.asm,
        avg_pool_size=pools.average_pool_size(),
        buchi_states=automaton.n_states,
    )
    deadline = started + options.max_seconds

    def tick() -> None:
        if time.monotonic() > deadline:
            raise _Limit(LimitKind.TIME)

    search = _Search(
        engine=TransitionEngine(flat, pools, options.mode, tick=tick),
        automaton=automaton,
        atom_fns=atom_fns,
        stats=stats,
        max_states=options.max_states,
        tick=tick,
    )
    try:
        found = search.run()
    except _Limit as limit:
        stats.wall_seconds = time.monotonic() - started
        return ResourceLimit(limit.kind, stats.states_visited), stats
    stats.wall_seconds = time.monotonic() - started
    if found is None:
        return Holds(), stats

    prefix_nodes, cycle_nodes = found
    lasso = Lasso(
        prefix=tuple((s, s.last_service) for s, _ in prefix_nodes),
        cycle=tuple((s, s.last_service) for s, _ in cycle_nodes),
        spec=flat,
        navset=navset,
        const_values=pools.const_values,
    )
    if not replay(flat, lasso, options.mode):
        raise TasError("internal error: counterexample failed replay")
    letters = [
        frozenset(
            atom
            for atom, fn in zip(automaton.atoms, atom_fns)
            if fn(state)
        )
        for state, _ in (*lasso.prefix, *lasso.cycle)
    ]
    split = len(lasso.prefix)
    if not accepts_lasso(automaton, letters[:split], letters[split:]):
        raise TasError("internal error: counterexample rejected by automaton")
    return Violated(lasso), stats


# ---------------------------------------------------------------------------
# Lasso replay and serialization
# ---------------------------------------------------------------------------


def _mode_rewriter(
    mode: Mode, navset: NavigationSet
) -> Callable[[Condition], Condition]:
    if mode is Mode.LDT:
        return lambda c: ldt_rewrite(c, navset, null_guard=True)
    return lambda c: c


def replay(spec: TasSpec, lasso: Lasso, mode: Mode) -> bool:
    """Re-validate a lasso step by step, without the search engine.

    Checks, under the given mode's condition rewriting: the first state is
    initial, every step applies a known service whose pre-condition holds
    at the source and post-condition at the target, propagated values are
    carried, naive-mode states are congruent, and the cycle closes.
    """
    if not lasso.cycle:
        return False
    navset = lasso.navset
    consts = lasso.const_values
    rewrite = _mode_rewriter(mode, navset)
    sequence = [*lasso.prefix, *lasso.cycle]

    first_state, first_service = sequence[0]
    if first_service != INIT_SERVICE or first_state.last_service != INIT_SERVICE:
        return False
    if len(first_state.values) != navset.n_paths:
        return False
    init_check = compile_condition(rewrite(spec.init_cond), navset, consts)
    if not init_check(first_state.values):
        return False
    if mode is Mode.NAIVE and not congruent(first_state.values, navset):
        return False

    def step_ok(source: SymbolicState, target: SymbolicState, name: str) -> bool:
        if target.last_service != name:
            return False
        if len(target.values) != navset.n_paths:
            return False
        service = spec.service(name)
        if service is None:
            return False
        pre = compile_condition(rewrite(service.pre), navset, consts)
        post = compile_condition(rewrite(service.post), navset, consts)
        if not pre(source.values) or not post(target.values):
            return False
        for i in navset.rooted_ordinals(service.propagated):
            if source.values[i] != target.values[i]:
                return False
        if mode is Mode.NAIVE and not congruent(target.values, navset):
            return False
        return True

    for (source, _), (target, name) in zip(sequence, sequence[1:]):
        if not step_ok(source, target, name):
            return False
    closing_state, closing_service = lasso.cycle[0]
    return step_ok(sequence[-1][0], closing_state, closing_service)


def _value_tags(
    navset: NavigationSet, const_values: tuple[int, ...]
) -> dict[tuple[VarType, int], str]:
    tags: dict[tuple[VarType, int], str] = {}
    for ordinal in range(navset.n_constants):
        expr = navset.exprs[ordinal]
        tags[(expr.vtype, const_values[ordinal])] = expr.name or "null"
    return tags


def _type_name(vtype: VarType) -> str:
    return vtype.relation if vtype.relation is not None else "VAL"


def lasso_to_json(lasso: Lasso) -> dict:
    """Counterexample document: {prefix, cycle}, each step carrying the
    service name and every navigation expression's value tag.  Values that
    coincide with a constant are tagged by the constant's name; all others
    get a stable "t<TYPE>#<n>" tag."""
    tags = _value_tags(lasso.navset, lasso.const_values)
    paths = lasso.navset.exprs[lasso.navset.n_constants :]

    def tag(vtype: VarType, value: int) -> str:
        named = tags.get((vtype, value))
        if named is not None:
            return named
        return f"t{_type_name(vtype)}#{value}"

    def step(state: SymbolicState, service: str) -> dict:
        return {
            "service": service,
            "assignments": {
                str(expr): tag(expr.vtype, value)
                for expr, value in zip(paths, state.values)
            },
        }

    return {
        "prefix": [step(s, svc) for s, svc in lasso.prefix],
        "cycle": [step(s, svc) for s, svc in lasso.cycle],
    }


# ---------------------------------------------------------------------------
# Partition oracle
# ---------------------------------------------------------------------------


class _PartitionSpace:
    """Isomorphism types as typed set partitions of the navigation set.

    Elements are the navigation expressions (constants first); a state is a
    partition written as a canonical block-id tuple (first occurrence gets
    the next id), so two expressions denote the same value exactly when
    their ids match.  Constants always sit in pairwise distinct blocks; a
    partition is congruent when same-block parents have same-block children
    attribute by attribute.  No integer pools exist: joining any block of
    the right type is always allowed.
    """

    def __init__(self, spec: TasSpec, navset: NavigationSet) -> None:
        self.spec = spec
        self.navset = navset
        self.n_const = navset.n_constants
        self.n = len(navset.exprs)
        self.types = tuple(expr.vtype for expr in navset.exprs)
        # children[e] aligns with the element's relation attribute order;
        # empty for constants and value-typed elements.
        self.children: list[tuple[int, ...]] = []
        for index in range(self.n):
            if index < self.n_const:
                self.children.append(())
            else:
                kids = navset.children[index - self.n_const]
                self.children.append(tuple(self.n_const + k for k in kids))
        self.pairs = [
            (i, j)
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.children[i] and self.types[i] == self.types[j]
        ]
        self._memo: dict[
            tuple[str, tuple[int, ...]], tuple[tuple[int, ...], ...]
        ] = {}

    # -- structure ---------------------------------------------------------

    def canonical(self, labels: Sequence[int]) -> tuple[int, ...]:
        remap: dict[int, int] = {}
        out = []
        for label in labels:
            got = remap.get(label)
            if got is None:
                got = len(remap)
                remap[label] = got
            out.append(got)
        return tuple(out)

    def congruent(self, labels: Sequence[int]) -> bool:
        for i, j in self.pairs:
            if labels[i] == labels[j]:
                for a, b in zip(self.children[i], self.children[j]):
                    if labels[a] != labels[b]:
                        return False
        return True

    # -- conditions ---------------------------------------------------------

    def _element(self, term: Term, partner: Term) -> int:
        navset = self.navset
        match term:
            case VarTerm(name=root, path=path):
                return self.n_const + navset.path_ordinal(root, path)
            case ConstTerm(value=name):
                return navset.named_ordinal[name]
            case NullTerm():
                if isinstance(partner, VarTerm):
                    vtype = navset.path_types[
                        navset.path_ordinal(partner.name, partner.path)
                    ]
                else:
                    vtype = VAL
                return navset.null_ordinal[vtype]
        raise TasError(f"unresolvable term: {term!r}")

    def holds(self, cond: Condition, labels: Sequence[int]) -> bool:
        match cond:
            case TrueCond():
                return True
            case FalseCond():
                return False
            case Equal(left=l, right=r):
                return labels[self._element(l, r)] == labels[self._element(r, l)]
            case NotEqual(left=l, right=r):
                return labels[self._element(l, r)] != labels[self._element(r, l)]
            case RelAtom() | NegRelAtom():
                key = cond.args[0]
                element = self._element(key, key)
                null = self.navset.null_ordinal[self.types[element]]
                inside = labels[element] != labels[null] and all(
                    labels[child] == labels[self._element(arg, key)]
                    for child, arg in zip(self.children[element], cond.args[1:])
                )
                return inside if isinstance(cond, RelAtom) else not inside
            case Not(operand=c):
                return not self.holds(c, labels)
            case And(left=l, right=r):
                return self.holds(l, labels) and self.holds(r, labels)
            case Or(left=l, right=r):
                return self.holds(l, labels) or self.holds(r, labels)
            case Exists():
                raise TasError("quantified condition reached the oracle")
        raise TasError(f"unknown condition: {cond!r}")

    # -- enumeration ---------------------------------------------------------

    def _placements(
        self, fixed: dict[int, int], condition: Condition
    ) -> Iterator[tuple[int, ...]]:
        """All congruent canonical partitions extending ``fixed`` (element
        -> block label) that satisfy ``condition``.

        Free elements are placed in element order; a free element may join
        any existing same-typed block or open a fresh one.  When a parent
        already shares a block with another placed parent, the congruent
        child placement is forced, which prunes most of the tree.
        """
        labels = [-1] * self.n
        for element, label in fixed.items():
            labels[element] = label
        free = [e for e in range(self.n) if labels[e] < 0]
        fresh = max(fixed.values(), default=-1) + 1

        parent_of: dict[int, tuple[int, int]] = {}
        for parent in range(self.n):
            for slot, child in enumerate(self.children[parent]):
                parent_of[child] = (parent, slot)

        def forced(element: int) -> int | None:
            got = parent_of.get(element)
            if got is None:
                return None
            parent, slot = got
            if labels[parent] < 0:
                return None
            for other in range(self.n):
                if (
                    other != parent
                    and self.children[other]
                    and self.types[other] == self.types[parent]
                    and labels[other] == labels[parent]
                ):
                    sibling = self.children[other][slot]
                    if labels[sibling] >= 0:
                        return labels[sibling]
            return None

        def place(at: int, fresh: int) -> Iterator[tuple[int, ...]]:
            if at == len(free):
                if self.congruent(labels) and self.holds(condition, labels):
                    yield self.canonical(labels)
                return
            element = free[at]
            must = forced(element)
            if must is not None:
                options = [must]
            else:
                vtype = self.types[element]
                used = sorted(
                    {
                        labels[e]
                        for e in range(self.n)
                        if labels[e] >= 0 and self.types[e] == vtype
                    }
                )
                options = used + [fresh]
            for label in options:
                labels[element] = label
                yield from place(at + 1, fresh + 1 if label == fresh else fresh)
            labels[element] = -1

        yield from place(0, fresh)

    def initial_partitions(self) -> list[tuple[int, ...]]:
        fixed = {k: k for k in range(self.n_const)}
        return list(self._placements(fixed, self.spec.init_cond))

    def successors(
        self, labels: tuple[int, ...], service_name: str
    ) -> tuple[tuple[int, ...], ...]:
        service = self.spec.service(service_name)
        if service is None:
            raise TasError(f"unknown service: {service_name}")
        if not self.holds(service.pre, labels):
            return ()
        carried = list(range(self.n_const)) + [
            self.n_const + i
            for i in self.navset.rooted_ordinals(service.propagated)
        ]
        projection = self.canonical([labels[e] for e in carried])
        key = (service_name, projection)
        hit = self._memo.get(key)
        if hit is None:
            fixed = dict(zip(carried, projection))
            hit = tuple(self._placements(fixed, service.post))
            self._memo[key] = hit
        return hit


def partition_oracle_check(spec: TasSpec, prop: LtlFo) -> Verdict:
    """Independent verdict by exhaustive partition enumeration.

    Same front-end transforms as :func:`check`, then a completely separate
    back end: partitions instead of valuations, no pools, no rewriting, and
    SCC-based emptiness instead of nested DFS.  Exponential; inputs with
    more than ORACLE_MAX_EXPRESSIONS navigation expressions are refused.
    """
    _validated(spec, prop)
    folded, prop = eliminate_globals(spec, prop)
    flat = desugar_exists(folded)
    navset = build_navigation_set(
        flat.schema, flat.variables, collect_constants(flat, (prop,))
    )
    if len(navset.exprs) > ORACLE_MAX_EXPRESSIONS:
        raise OracleTooLarge(
            f"navigation set has {len(navset.exprs)} expressions; "
            f"the oracle handles at most {ORACLE_MAX_EXPRESSIONS}"
        )
    space = _PartitionSpace(flat, navset)
    automaton = ltl_to_buchi(ltl_nnf(LtlNot(prop.formula)))

    def atoms_of(labels: tuple[int, ...], last_service: str) -> frozenset[Atom]:
        present = []
        for atom in automaton.atoms:
            if isinstance(atom, CondProp):
                if space.holds(atom.cond, labels):
                    present.append(atom)
            elif atom.service == last_service:
                present.append(atom)
        return frozenset(present)

    def satisfied(label: Label, letter: frozenset[Atom]) -> bool:
        return all((atom in letter) == polarity for atom, polarity in label)

    service_names = [svc.name for svc in flat.services]

    # Reachable product graph, nodes interned to dense ids.
    node_ids: dict[tuple[tuple[int, ...], str, int], int] = {}
    edges: list[list[int]] = []
    todo: list[tuple[tuple[int, ...], str, int]] = []

    def intern(node: tuple[tuple[int, ...], str, int]) -> int:
        got = node_ids.get(node)
        if got is None:
            got = len(node_ids)
            node_ids[node] = got
            edges.append([])
            todo.append(node)
        return got

    for labels in space.initial_partitions():
        letter = atoms_of(labels, INIT_SERVICE)
        for label, q in automaton.initial:
            if satisfied(label, letter):
                intern((labels, INIT_SERVICE, q))
    cursor = 0
    while cursor < len(todo):
        node = todo[cursor]
        labels, _, q = node
        source = node_ids[node]
        cursor += 1
        for name in service_names:
            for target in space.successors(labels, name):
                letter = atoms_of(target, name)
                for label, r in automaton.transitions[q]:
                    if satisfied(label, letter):
                        edges[source].append(intern((target, name, r)))

    accepting = [node[2] in automaton.accepting for node in node_ids]
    if _has_accepting_cycle(edges, accepting):
        return Violated(None)
    return Holds()


def _has_accepting_cycle(edges: list[list[int]], accepting: list[bool]) -> bool:
    """Whether some cycle passes through an accepting node (iterative
    Tarjan strongly connected components)."""
    n = len(edges)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, child = work[-1]
            if child == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            for position in range(child, len(edges[node])):
                target = edges[node][position]
                if index[target] == -1:
                    work[-1] = (node, position + 1)
                    work.append((target, 0))
                    advanced = True
                    break
                if on_stack[target]:
                    low[node] = min(low[node], index[target])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack[member] = False
                    component.append(member)
                    if member == node:
                        break
                cyclic = len(component) > 1 or any(
                    member in edges[member] for member in component
                )
                if cyclic and any(accepting[m] for m in component):
                    return True
    return False
