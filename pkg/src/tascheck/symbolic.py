"""Symbolic state space for tuple artifact systems.

A concrete configuration (database instance plus variable valuation) is
abstracted into the isomorphism type of its navigation expressions: which
expressions hold equal values, which differ, and which coincide with named
constants.  Isomorphism types are represented as typed integer valuations —
two expressions denote the same value exactly when their types match and
their integers match.  The state space over these valuations is finite, and
verdicts over it coincide with verdicts over all databases and runs.

The main entry point is :class:`TransitionEngine`, which compiles a spec's
conditions once and then enumerates initial states and per-service
successors deterministically.  Free-standing :func:`eval_condition`,
:func:`project`, :func:`successors` and :func:`initial_states` wrappers
cover one-off uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, NamedTuple, Protocol, Sequence

from .model import (
    INIT_SERVICE,
    VAL,
    And,
    Condition,
    ConstTerm,
    DatabaseSchema,
    Equal,
    Exists,
    FalseCond,
    NegRelAtom,
    Not,
    NotEqual,
    NullTerm,
    Or,
    RelAtom,
    Service,
    TasError,
    TasSpec,
    Term,
    TrueCond,
    VarTerm,
    VarType,
    id_type,
)


class Mode(Enum):
    """Search mode: NAIVE re-checks key/FK consistency on every candidate
    state; LDT relies on rewritten conditions instead (see module optimize)."""

    NAIVE = "naive"
    LDT = "ldt"


# ---------------------------------------------------------------------------
# Expressions and navigation sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstExpr:
    """A constant: a named data value, or a type's null when ``name`` is None."""

    name: str | None
    vtype: VarType

    def __str__(self) -> str:
        return self.name if self.name is not None else "null"


@dataclass(frozen=True)
class PathExpr:
    """A root variable navigated through a chain of foreign-key attributes.

    ``vtype`` is the type of the final step.
    """

    root: str
    path: tuple[str, ...]
    vtype: VarType

    def __str__(self) -> str:
        return ".".join((self.root,) + self.path)


Expression = ConstExpr | PathExpr


def _paths_from_root(
    schema: DatabaseSchema, name: str, vtype: VarType
) -> list[PathExpr]:
    """All navigation expressions rooted at one variable, preorder.

    Children follow attribute declaration order, so a parent always precedes
    its extensions and each subtree occupies a contiguous run.
    """
    if not vtype.is_id:
        return [PathExpr(name, (), vtype)]
    out: list[PathExpr] = []

    def walk(path: tuple[str, ...], vtype: VarType) -> None:
        out.append(PathExpr(name, path, vtype))
        if not vtype.is_id:
            return
        relation = schema.relation(vtype.relation or "")
        if relation is None:
            raise TasError(f"unknown relation in type: {vtype}")
        for attr in relation.attributes:
            walk(path + (attr.name,), attr.vtype)

    walk((), vtype)
    return out


class NavigationSet:
    """The finite expression universe of a spec: constants plus every
    navigation path from every variable, in a fixed canonical order.

    Constants come first (nulls, then named values), then one contiguous
    block of path expressions per variable in declaration order, each block
    in preorder.  Path expressions additionally carry *path ordinals*
    (canonical index minus the constant count), the indexing used by state
    value tuples.
    """

    def __init__(
        self,
        schema: DatabaseSchema,
        constants: Sequence[ConstExpr],
        paths: Sequence[PathExpr],
    ) -> None:
        self.schema = schema
        self.constants: tuple[ConstExpr, ...] = tuple(constants)
        self.paths: tuple[PathExpr, ...] = tuple(paths)
        self.exprs: tuple[Expression, ...] = self.constants + self.paths
        self.n_constants = len(self.constants)
        self.n_paths = len(self.paths)
        self.index: dict[Expression, int] = {
            e: i for i, e in enumerate(self.exprs)
        }
        if len(self.index) != len(self.exprs):
            raise TasError("duplicate expression in navigation set")
        self.path_types: tuple[VarType, ...] = tuple(e.vtype for e in self.paths)
        self._path_ordinal: dict[tuple[str, tuple[str, ...]], int] = {
            (e.root, e.path): i for i, e in enumerate(self.paths)
        }
        self.null_ordinal: dict[VarType, int] = {
            c.vtype: i for i, c in enumerate(self.constants) if c.name is None
        }
        self.named_ordinal: dict[str, int] = {
            c.name: i
            for i, c in enumerate(self.constants)
            if c.name is not None
        }
        self._index_roots()
        self._index_congruence()

    def _index_roots(self) -> None:
        self.root_block: dict[str, tuple[int, int]] = {}
        start = 0
        for i, e in enumerate(self.paths):
            if not e.path:
                if i > 0:
                    prev = self.paths[start]
                    self.root_block[prev.root] = (start, i)
                start = i
        if self.paths:
            self.root_block[self.paths[start].root] = (start, self.n_paths)
        # Exclusive end of each expression's subtree run.
        ends = [0] * self.n_paths
        stack: list[int] = []
        for i, e in enumerate(self.paths):
            while stack and (
                self.paths[stack[-1]].root != e.root
                or len(self.paths[stack[-1]].path) >= len(e.path)
            ):
                ends[stack.pop()] = i
            stack.append(i)
        while stack:
            ends[stack.pop()] = self.n_paths
        self.subtree_end: tuple[int, ...] = tuple(ends)

    def _index_congruence(self) -> None:
        """Same-typed id-expression pairs with their child-pair lists.

        A valuation is congruent when, for every pair here, equal parents
        imply equal values on every aligned child.  Single-step pairs
        suffice: deeper agreement follows by induction through the child
        pairs themselves.
        """
        children: list[tuple[int, ...]] = []
        for i, e in enumerate(self.paths):
            if e.vtype.is_id:
                relation = self.schema.relation(e.vtype.relation or "")
                kids = tuple(
                    self._path_ordinal[(e.root, e.path + (a.name,))]
                    for a in (relation.attributes if relation else ())
                )
            else:
                kids = ()
            children.append(kids)
        self.children: tuple[tuple[int, ...], ...] = tuple(children)
        by_type: dict[VarType, list[int]] = {}
        for i, e in enumerate(self.paths):
            if e.vtype.is_id and children[i]:
                by_type.setdefault(e.vtype, []).append(i)
        pairs: list[tuple[int, int, tuple[tuple[int, int], ...]]] = []
        for same in by_type.values():
            for a in range(len(same)):
                for b in range(a + 1, len(same)):
                    i, j = same[a], same[b]
                    pairs.append((i, j, tuple(zip(children[i], children[j]))))
        self.congruence_pairs: tuple[
            tuple[int, int, tuple[tuple[int, int], ...]], ...
        ] = tuple(pairs)

    # -- lookups ----------------------------------------------------------

    def path_ordinal(self, root: str, path: tuple[str, ...]) -> int:
        try:
            return self._path_ordinal[(root, path)]
        except KeyError:
            raise TasError(
                f"expression not in navigation set: {'.'.join((root,) + path)}"
            ) from None

    def rooted_ordinals(self, roots: Sequence[str]) -> tuple[int, ...]:
        """Path ordinals of all expressions rooted at ``roots``, ascending."""
        out: list[int] = []
        for name in roots:
            block = self.root_block.get(name)
            if block is None:
                raise TasError(f"unknown variable: {name}")
            out.extend(range(block[0], block[1]))
        return tuple(sorted(out))


def build_navigation_set(
    schema: DatabaseSchema,
    variables: Sequence[tuple[str, VarType]],
    constants: dict[VarType, list[str]],
) -> NavigationSet:
    """Build the canonical navigation set.

    ``constants`` maps each type to its named constants (see
    :func:`model.collect_constants`); a null constant is added for every
    type that has at least one path expression.
    """
    paths: list[PathExpr] = []
    for name, vtype in variables:
        paths.extend(_paths_from_root(schema, name, vtype))
    path_types = {e.vtype for e in paths}
    consts: list[ConstExpr] = []
    if VAL in path_types:
        consts.append(ConstExpr(None, VAL))
    for relation in schema.relations:
        t = id_type(relation.name)
        if t in path_types:
            consts.append(ConstExpr(None, t))
    for vtype, names in constants.items():
        for n in names:
            consts.append(ConstExpr(n, vtype))
    return NavigationSet(schema, consts, paths)


# ---------------------------------------------------------------------------
# States and pools
# ---------------------------------------------------------------------------


class SymbolicState(NamedTuple):
    """One isomorphism type: a value per path ordinal, plus the service whose
    application produced the state ("init" for initial states)."""

    values: tuple[int, ...]
    last_service: str


class Pools(Protocol):
    """What the engine needs from an assignment-set object (module optimize):
    a value per constant ordinal and an inclusive range per path ordinal."""

    navset: NavigationSet
    const_values: tuple[int, ...]
    ranges: tuple[tuple[int, int], ...]


def congruent(values: Sequence[int], navset: NavigationSet) -> bool:
    """Whether equal id expressions have equal values on all their children."""
    for i, j, kids in navset.congruence_pairs:
        if values[i] == values[j]:
            for ci, cj in kids:
                if values[ci] != values[cj]:
                    return False
    return True


# ---------------------------------------------------------------------------
# Condition compilation
# ---------------------------------------------------------------------------

_Check = Callable[[Sequence[int]], bool]


def _resolve(
    term: Term, partner: Term | None, navset: NavigationSet, const_values: Sequence[int]
) -> tuple[bool, int]:
    """Resolve a term to either (True, path ordinal) or (False, fixed value)."""
    match term:
        case VarTerm(name=name, path=path):
            return True, navset.path_ordinal(name, path)
        case ConstTerm(value=value):
            ordinal = navset.named_ordinal.get(value)
            if ordinal is None:
                raise TasError(f'constant not in navigation set: "{value}"')
            return False, const_values[ordinal]
        case NullTerm():
            vtype = _partner_type(partner, navset)
            ordinal = navset.null_ordinal.get(vtype)
            if ordinal is None:
                raise TasError(f"no null constant for type {vtype}")
            return False, const_values[ordinal]
    raise TasError(f"unresolvable term: {term}")


def _partner_type(partner: Term | None, navset: NavigationSet) -> VarType:
    match partner:
        case VarTerm(name=name, path=path):
            return navset.path_types[navset.path_ordinal(name, path)]
        case ConstTerm():
            return VAL
    raise TasError("null compared with null: type is undetermined")


def _compile_equal(
    left: Term, right: Term, navset: NavigationSet, const_values: Sequence[int]
) -> _Check:
    # A named constant against null is settled statically: they differ.
    if isinstance(left, ConstTerm) and isinstance(right, NullTerm):
        return lambda v: False
    if isinstance(left, NullTerm) and isinstance(right, ConstTerm):
        return lambda v: False
    lv, la = _resolve(left, right, navset, const_values)
    rv, ra = _resolve(right, left, navset, const_values)
    if lv and rv:
        return lambda v: v[la] == v[ra]
    if lv:
        return lambda v: v[la] == ra
    if rv:
        return lambda v: la == v[ra]
    result = la == ra
    return lambda v: result


def _compile_rel_atom(
    cond: RelAtom | NegRelAtom, navset: NavigationSet, const_values: Sequence[int]
) -> _Check:
    relation = navset.schema.relation(cond.relation)
    if relation is None:
        raise TasError(f"unknown relation: {cond.relation}")
    id_term = cond.args[0]
    if isinstance(id_term, NullTerm):
        return lambda v: False
    if not isinstance(id_term, VarTerm):
        raise TasError(f"relation atom key must be an id expression: {cond}")
    key = navset.path_ordinal(id_term.name, id_term.path)
    null_value = const_values[navset.null_ordinal[id_type(cond.relation)]]
    checks: list[_Check] = []
    for attr, arg in zip(relation.attributes, cond.args[1:]):
        child = VarTerm(id_term.name, id_term.path + (attr.name,))
        checks.append(_compile_equal(child, arg, navset, const_values))
    fixed = tuple(checks)

    def run(v: Sequence[int]) -> bool:
        if v[key] == null_value:
            return False
        for c in fixed:
            if not c(v):
                return False
        return True

    return run


def compile_condition(
    cond: Condition, navset: NavigationSet, const_values: Sequence[int]
) -> _Check:
    """Compile a quantifier-free condition to a predicate over value tuples.

    Satisfaction is by typed value equality; a relation atom additionally
    requires its key to differ from null, matching the concrete semantics
    where databases never contain null.
    """
    match cond:
        case TrueCond():
            return lambda v: True
        case FalseCond():
            return lambda v: False
        case Equal(left=left, right=right):
            return _compile_equal(left, right, navset, const_values)
        case NotEqual(left=left, right=right):
            eq = _compile_equal(left, right, navset, const_values)
            return lambda v: not eq(v)
        case RelAtom():
            return _compile_rel_atom(cond, navset, const_values)
        case NegRelAtom():
            atom = _compile_rel_atom(cond, navset, const_values)
            return lambda v: not atom(v)
        case Not(operand=operand):
            inner = compile_condition(operand, navset, const_values)
            return lambda v: not inner(v)
        case And(left=left, right=right):
            a = compile_condition(left, navset, const_values)
            b = compile_condition(right, navset, const_values)
            return lambda v: a(v) and b(v)
        case Or(left=left, right=right):
            a = compile_condition(left, navset, const_values)
            b = compile_condition(right, navset, const_values)
            return lambda v: a(v) or b(v)
        case Exists():
            raise TasError(
                "quantified condition reached the engine; desugar first"
            )
    raise TasError(f"cannot compile condition: {cond}")


def condition_path_ordinals(cond: Condition, navset: NavigationSet) -> set[int]:
    """Path ordinals a compiled condition reads, including the implicit
    attribute expressions of relation atoms."""
    out: set[int] = set()

    def add_term(term: Term) -> None:
        if isinstance(term, VarTerm):
            out.add(navset.path_ordinal(term.name, term.path))

    def walk(c: Condition) -> None:
        match c:
            case Equal(left=left, right=right) | NotEqual(left=left, right=right):
                add_term(left)
                add_term(right)
            case RelAtom(relation=rel, args=args) | NegRelAtom(
                relation=rel, args=args
            ):
                id_term = args[0]
                if isinstance(id_term, VarTerm):
                    key = navset.path_ordinal(id_term.name, id_term.path)
                    out.add(key)
                    out.update(navset.children[key])
                for arg in args[1:]:
                    add_term(arg)
            case Not(operand=operand):
                walk(operand)
            case And(left=left, right=right) | Or(left=left, right=right):
                walk(left)
                walk(right)
            case Exists(body=body):
                walk(body)
            case _:
                pass

    walk(cond)
    return out


def _flatten_and(cond: Condition) -> list[Condition]:
    match cond:
        case And(left=left, right=right):
            return _flatten_and(left) + _flatten_and(right)
        case TrueCond():
            return []
        case _:
            return [cond]


def eval_condition(
    state: SymbolicState, cond: Condition, pools: Pools
) -> bool:
    """One-off evaluation of a condition in a state (compiles on the fly)."""
    return compile_condition(cond, pools.navset, pools.const_values)(state.values)


def project(
    state: SymbolicState, variables: Sequence[str], pools: Pools
) -> dict[Expression, int]:
    """Restriction of a state to expressions rooted at ``variables``,
    together with the (fixed) constants."""
    navset = pools.navset
    out: dict[Expression, int] = {
        c: pools.const_values[i] for i, c in enumerate(navset.constants)
    }
    for ordinal in navset.rooted_ordinals(variables):
        out[navset.paths[ordinal]] = state.values[ordinal]
    return out


# ---------------------------------------------------------------------------
# The engine
# ---------------------------------------------------------------------------


def _rewriter(mode: Mode, navset: NavigationSet) -> Callable[[Condition], Condition]:
    if mode is Mode.NAIVE:
        return lambda c: c
    from .optimize import ldt_rewrite

    return lambda c: ldt_rewrite(c, navset, null_guard=True)


@dataclass
class _CompiledStep:
    """One enumeration problem: fixed checks run first against the carried
    values; ``depth_checks[d]`` runs right after the d-th free ordinal is
    assigned (every ordinal such a check reads is carried or already set)."""

    name: str
    pre: _Check
    carried: tuple[int, ...]
    free: tuple[int, ...]
    free_ranges: tuple[tuple[int, int], ...]
    fixed_checks: tuple[_Check, ...]
    depth_checks: tuple[tuple[_Check, ...], ...]
    mirrors: tuple[tuple[int, int, int], ...] = ()


def _congruence_check(i: int, j: int, ci: int, cj: int) -> _Check:
    return lambda v: v[i] != v[j] or v[ci] == v[cj]


class TransitionEngine:
    """Compiled symbolic transition system for one spec under one mode.

    The spec must be validated, globals-eliminated and desugared; the pools
    must be built over the same navigation set.  Successor lists are memoized
    by (service, carried values): target enumeration only ever reads carried
    values, so states sharing them share successors.

    An optional ``tick`` callback runs periodically inside enumeration loops
    and may raise to abort a search that exceeds external limits; an aborted
    enumeration leaves no memo entry behind.
    """

    def __init__(
        self,
        spec: TasSpec,
        pools: Pools,
        mode: Mode,
        tick: Callable[[], None] | None = None,
    ) -> None:
        self.spec = spec
        self.pools = pools
        self.mode = mode
        self.navset = pools.navset
        self._tick = tick
        self._rewrite = _rewriter(mode, self.navset)
        self._scratch = frozenset(spec.scratch_vars)
        self.services: tuple[Service, ...] = spec.services
        self._steps = tuple(
            self._compile_service(svc) for svc in spec.services
        )
        self._init_step = self._compile_init()
        self._cache: list[dict[tuple[int, ...], tuple[SymbolicState, ...]]] = [
            {} for _ in spec.services
        ]

    # -- compilation ------------------------------------------------------

    def _split_conjuncts(
        self, cond: Condition, free: Sequence[int]
    ) -> tuple[list[_Check], list[list[_Check]]]:
        """Partition a condition's conjuncts into fixed checks (no free
        reads) and per-depth checks keyed by the last free ordinal read.

        A top-level relation atom splits into its key guard and one check
        per component so each prunes as early as possible (the rewritten
        conditions of LDT mode arrive already split)."""
        navset = self.navset
        const_values = self.pools.const_values
        depth_of = {ordinal: d for d, ordinal in enumerate(free)}
        fixed: list[_Check] = []
        at: list[list[_Check]] = [[] for _ in free]

        def schedule(piece: Condition) -> None:
            refs = condition_path_ordinals(piece, navset)
            check = compile_condition(piece, navset, const_values)
            depths = [depth_of[r] for r in refs if r in depth_of]
            if depths:
                at[max(depths)].append(check)
            else:
                fixed.append(check)

        from .optimize import rel_atom_components

        for conjunct in _flatten_and(cond):
            if isinstance(conjunct, RelAtom) and isinstance(
                conjunct.args[0], VarTerm
            ):
                schedule(NotEqual(conjunct.args[0], NullTerm()))
                for child, arg in rel_atom_components(conjunct, navset):
                    schedule(Equal(child, arg))
            else:
                schedule(conjunct)
        return fixed, at

    def _congruence_into(
        self, free: Sequence[int], at: list[list[_Check]], skip: frozenset[int]
    ) -> None:
        """Schedule naive-mode congruence checks at their last free ordinal.

        Constraints entirely over carried ordinals hold by the source-state
        invariant; constraints touching ``skip`` ordinals are guaranteed by
        mirror filling and are omitted.
        """
        depth_of = {ordinal: d for d, ordinal in enumerate(free)}
        for i, j, kids in self.navset.congruence_pairs:
            for ci, cj in kids:
                quad = (i, j, ci, cj)
                if skip and any(q in skip for q in quad):
                    continue
                depths = [depth_of[q] for q in quad if q in depth_of]
                if depths:
                    at[max(depths)].append(_congruence_check(i, j, ci, cj))

    def _compile_service(self, svc: Service) -> _CompiledStep:
        navset = self.navset
        pre = compile_condition(
            self._rewrite(svc.pre), navset, self.pools.const_values
        )
        carried = navset.rooted_ordinals(svc.propagated)
        carried_set = frozenset(carried)
        free = tuple(
            i for i in range(navset.n_paths) if i not in carried_set
        )
        fixed, at = self._split_conjuncts(self._rewrite(svc.post), free)
        if self.mode is Mode.NAIVE:
            self._congruence_into(free, at, frozenset())
        return _CompiledStep(
            name=svc.name,
            pre=pre,
            carried=carried,
            free=free,
            free_ranges=tuple(self.pools.ranges[i] for i in free),
            fixed_checks=tuple(fixed),
            depth_checks=tuple(tuple(c) for c in at),
        )

    def _pick_mirrors(self) -> tuple[tuple[tuple[int, int, int], ...], set[int]]:
        """Mirror assignments for scratch variables in initial states.

        A scratch variable only matters in the post-condition that created
        it, where it is always re-enumerated; its initial value is arbitrary.
        Copying a same-typed non-scratch subtree keeps the state congruent
        without enumeration.  Roots with no compatible donor fall back to
        plain enumeration.
        """
        navset = self.navset
        mirrors: list[tuple[int, int, int]] = []
        mirrored: set[int] = set()
        for name in self.spec.scratch_vars:
            block = navset.root_block.get(name)
            if block is None:
                continue
            start, end = block
            vtype = navset.path_types[start]
            anchor = None
            for i, e in enumerate(navset.paths):
                if e.vtype == vtype and e.root not in self._scratch:
                    anchor = i
                    break
            if anchor is None:
                continue
            a_end = navset.subtree_end[anchor]
            if a_end - anchor != end - start:
                raise TasError("mirror subtree shape mismatch")
            compatible = all(
                self.pools.ranges[start + o][0] <= self.pools.ranges[anchor + o][0]
                and self.pools.ranges[start + o][1]
                >= self.pools.ranges[anchor + o][1]
                for o in range(end - start)
            )
            if not compatible:
                continue
            mirrors.append((start, end, anchor))
            mirrored.update(range(start, end))
        return tuple(mirrors), mirrored

    def _compile_init(self) -> _CompiledStep:
        navset = self.navset
        mirrors, mirrored = self._pick_mirrors()
        init_cond = self._rewrite(self.spec.init_cond)
        # A conjunct reading a mirrored ordinal would be unschedulable; give
        # those ordinals back to the odometer instead.
        refs = condition_path_ordinals(init_cond, navset)
        if refs & mirrored:
            mirrors = tuple(
                m for m in mirrors if not (refs & set(range(m[0], m[1])))
            )
            mirrored = set()
            for start, end, _ in mirrors:
                mirrored.update(range(start, end))
        free = tuple(i for i in range(navset.n_paths) if i not in mirrored)
        fixed, at = self._split_conjuncts(init_cond, free)
        if self.mode is Mode.NAIVE:
            self._congruence_into(free, at, frozenset(mirrored))
        return _CompiledStep(
            name=INIT_SERVICE,
            pre=lambda v: True,
            carried=(),
            free=free,
            free_ranges=tuple(self.pools.ranges[i] for i in free),
            fixed_checks=tuple(fixed),
            depth_checks=tuple(tuple(c) for c in at),
            mirrors=mirrors,
        )

    # -- enumeration ------------------------------------------------------

    def _enumerate(
        self, step: _CompiledStep, source: Sequence[int]
    ) -> Iterator[tuple[int, ...]]:
        work = list(source)
        for check in step.fixed_checks:
            if not check(work):
                return
        free = step.free
        n = len(free)
        if n == 0:
            for start, end, anchor in step.mirrors:
                work[start:end] = work[anchor : anchor + (end - start)]
            yield tuple(work)
            return
        ranges = step.free_ranges
        checks = step.depth_checks
        tick = self._tick
        spin = 0
        nxt = [r[0] for r in ranges]
        d = 0
        while d >= 0:
            if tick is not None:
                spin += 1
                if not spin & 8191:
                    tick()
            value = nxt[d]
            if value > ranges[d][1]:
                nxt[d] = ranges[d][0]
                d -= 1
                if d >= 0:
                    nxt[d] += 1
                continue
            work[free[d]] = value
            ok = True
            for check in checks[d]:
                if not check(work):
                    ok = False
                    break
            if not ok:
                nxt[d] += 1
                continue
            if d == n - 1:
                for start, end, anchor in step.mirrors:
                    work[start:end] = work[anchor : anchor + (end - start)]
                yield tuple(work)
                nxt[d] += 1
            else:
                d += 1

    def initial_states(self) -> Iterator[SymbolicState]:
        """All initial isomorphism types, in canonical enumeration order."""
        blank = [0] * self.navset.n_paths
        for values in self._enumerate(self._init_step, blank):
            yield SymbolicState(values, INIT_SERVICE)

    def successors(
        self, state: SymbolicState, service_index: int
    ) -> tuple[SymbolicState, ...]:
        """Successor states of ``state`` under one service (memoized)."""
        step = self._steps[service_index]
        if not step.pre(state.values):
            return ()
        key = tuple(state.values[i] for i in step.carried)
        cache = self._cache[service_index]
        hit = cache.get(key)
        if hit is None:
            name = step.name
            hit = tuple(
                SymbolicState(values, name)
                for values in self._enumerate(step, state.values)
            )
            cache[key] = hit
        return hit

    def all_successors(self, state: SymbolicState) -> Iterator[SymbolicState]:
        """Successors under every service, in service declaration order."""
        for index in range(len(self.services)):
            yield from self.successors(state, index)


# ---------------------------------------------------------------------------
# Free-standing wrappers
# ---------------------------------------------------------------------------


def successors(
    state: SymbolicState, service: Service, pools: Pools, mode: Mode
) -> Iterator[SymbolicState]:
    """Successors of one state under one service, without engine reuse.

    Equivalent to the engine's enumeration; intended for tests and other
    one-off callers.
    """
    spec = TasSpec(
        schema=pools.navset.schema,
        variables=tuple(
            (e.root, e.vtype) for e in pools.navset.paths if not e.path
        ),
        init_cond=TrueCond(),
        services=(service,),
    )
    engine = TransitionEngine(spec, pools, mode)
    yield from engine.successors(state, 0)


def initial_states(
    spec: TasSpec, pools: Pools, mode: Mode
) -> Iterator[SymbolicState]:
    """Initial states of a spec, without engine reuse."""
    yield from TransitionEngine(spec, pools, mode).initial_states()
