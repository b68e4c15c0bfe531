"""Independent reference implementations used to compute expected values.

Nothing here imports the modules under test beyond plain data types; each
oracle recomputes a result from first principles so tests compare two
genuinely different routes:

* :func:`eval_lasso` evaluates an LTL formula directly on an ultimately
  periodic word by per-operator fixpoints.
* :func:`eval_direct` evaluates a condition on a valuation by structural
  recursion, bypassing the compiled-closure pipeline.
* :func:`navigation_paths` re-enumerates the expression universe of a
  schema by plain recursion, bypassing the navigation-set builder.
* :func:`enumerate_valuations` walks a whole (small) valuation space.
"""

from __future__ import annotations

import itertools
from typing import Iterator

from tascheck.model import (
    Always,
    And,
    CondProp,
    Condition,
    ConstTerm,
    Equal,
    Eventually,
    FalseCond,
    Ltl,
    LtlAnd,
    LtlFalse,
    LtlNot,
    LtlOr,
    LtlTrue,
    NegRelAtom,
    Next,
    Not,
    NotEqual,
    NullTerm,
    Or,
    RelAtom,
    Release,
    ServiceProp,
    TasError,
    Term,
    TrueCond,
    Until,
    VAL,
    VarTerm,
    VarType,
)

Letter = frozenset


def _subformulas_postorder(formula: Ltl) -> list[Ltl]:
    out: list[Ltl] = []
    seen: set[Ltl] = set()

    def walk(f: Ltl) -> None:
        if f in seen:
            return
        match f:
            case LtlNot(operand=x) | Next(operand=x) | Always(operand=x) | Eventually(operand=x):
                walk(x)
            case LtlAnd(left=l, right=r) | LtlOr(left=l, right=r):
                walk(l)
                walk(r)
            case Until(left=l, right=r) | Release(left=l, right=r):
                walk(l)
                walk(r)
            case _:
                pass
        seen.add(f)
        out.append(f)

    walk(formula)
    return out


def _word_values(
    subs: list[Ltl], word: list[Letter], loop: int
) -> dict[Ltl, list[bool]]:
    """Truth of every subformula at every position of the lasso word whose
    successor of the last position is ``loop``.

    Children are fully evaluated before parents, so each temporal operator
    needs only its own fixpoint: least for Until and Eventually (start
    false), greatest for Release and Always (start true).  On an
    ultimately periodic word both converge within one pass per position.
    """
    n = len(word)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < n else loop

    values: dict[Ltl, list[bool]] = {}
    for sub in subs:
        row: list[bool]
        match sub:
            case LtlTrue():
                row = [True] * n
            case LtlFalse():
                row = [False] * n
            case CondProp() | ServiceProp():
                row = [sub in word[i] for i in range(n)]
            case LtlNot(operand=x):
                row = [not v for v in values[x]]
            case LtlAnd(left=l, right=r):
                row = [a and b for a, b in zip(values[l], values[r])]
            case LtlOr(left=l, right=r):
                row = [a or b for a, b in zip(values[l], values[r])]
            case Next(operand=x):
                row = [values[x][succ(i)] for i in range(n)]
            case Until(left=l, right=r):
                row = _fixpoint(
                    False, n, succ,
                    lambda i, nxt: values[r][i] or (values[l][i] and nxt),
                )
            case Release(left=l, right=r):
                row = _fixpoint(
                    True, n, succ,
                    lambda i, nxt: values[r][i] and (values[l][i] or nxt),
                )
            case Eventually(operand=x):
                row = _fixpoint(
                    False, n, succ, lambda i, nxt: values[x][i] or nxt
                )
            case Always(operand=x):
                row = _fixpoint(
                    True, n, succ, lambda i, nxt: values[x][i] and nxt
                )
            case _:
                raise TasError(f"unknown formula node: {sub}")
        values[sub] = row
    return values


def eval_lasso(formula: Ltl, prefix: list[Letter], cycle: list[Letter]) -> bool:
    """Truth of ``formula`` at position 0 of the word prefix . cycle^omega.

    A letter is the set of atoms (CondProp / ServiceProp instances) true at
    that position.
    """
    if not cycle:
        raise ValueError("cycle must be non-empty")
    word = list(prefix) + list(cycle)
    values = _word_values(_subformulas_postorder(formula), word, len(prefix))
    return values[formula][0]


def _fixpoint(start: bool, n: int, succ, step) -> list[bool]:
    row = [start] * n
    changed = True
    while changed:
        changed = False
        for i in range(n - 1, -1, -1):
            v = step(i, row[succ(i)])
            if v != row[i]:
                row[i] = v
                changed = True
    return row


# ---------------------------------------------------------------------------
# Conditions on valuations
# ---------------------------------------------------------------------------


def _term_value(term: Term, partner: Term | None, navset, const_values) -> int:
    match term:
        case ConstTerm(value=value):
            return const_values[navset.named_ordinal[value]]
        case NullTerm():
            match partner:
                case VarTerm(name=name, path=path):
                    vtype = navset.path_types[navset.path_ordinal(name, path)]
                case ConstTerm():
                    vtype = VAL
                case _:
                    raise TasError("null against null")
            return const_values[navset.null_ordinal[vtype]]
    raise TasError(f"unexpected term: {term}")


def _side(term: Term, partner: Term | None, values, navset, const_values) -> int:
    if isinstance(term, VarTerm):
        return values[navset.path_ordinal(term.name, term.path)]
    return _term_value(term, partner, navset, const_values)


def eval_direct(cond: Condition, values, navset, const_values) -> bool:
    """Structural-recursion evaluation of a quantifier-free condition.

    A relational atom holds when its key expression is non-null and every
    component pair is equal; everything else is plain boolean structure.
    """
    match cond:
        case TrueCond():
            return True
        case FalseCond():
            return False
        case Equal(left=left, right=right):
            if isinstance(left, ConstTerm) and isinstance(right, NullTerm):
                return False
            if isinstance(left, NullTerm) and isinstance(right, ConstTerm):
                return False
            a = _side(left, right, values, navset, const_values)
            b = _side(right, left, values, navset, const_values)
            return a == b
        case NotEqual(left=left, right=right):
            return not eval_direct(Equal(left, right), values, navset, const_values)
        case RelAtom(relation=relation, args=args):
            key = args[0]
            if isinstance(key, NullTerm):
                return False
            assert isinstance(key, VarTerm)
            key_value = values[navset.path_ordinal(key.name, key.path)]
            t = navset.path_types[navset.path_ordinal(key.name, key.path)]
            if key_value == const_values[navset.null_ordinal[t]]:
                return False
            rel = navset.schema.relation(relation)
            for attr, arg in zip(rel.attributes, args[1:]):
                child = VarTerm(key.name, key.path + (attr.name,))
                if not eval_direct(
                    Equal(child, arg), values, navset, const_values
                ):
                    return False
            return True
        case NegRelAtom(relation=relation, args=args):
            return not eval_direct(
                RelAtom(relation, args), values, navset, const_values
            )
        case Not(operand=operand):
            return not eval_direct(operand, values, navset, const_values)
        case And(left=left, right=right):
            return eval_direct(left, values, navset, const_values) and eval_direct(
                right, values, navset, const_values
            )
        case Or(left=left, right=right):
            return eval_direct(left, values, navset, const_values) or eval_direct(
                right, values, navset, const_values
            )
    raise TasError(f"cannot evaluate: {cond}")


# ---------------------------------------------------------------------------
# Navigation enumeration and valuation spaces
# ---------------------------------------------------------------------------


def navigation_paths(schema, root_type: VarType) -> list[tuple[str, ...]]:
    """All attribute paths reachable from a variable of ``root_type``,
    preorder, starting with the empty path.  Data variables have only the
    empty path."""
    out: list[tuple[str, ...]] = []

    def walk(path: tuple[str, ...], vtype: VarType) -> None:
        out.append(path)
        if not vtype.is_id:
            return
        relation = schema.relation(vtype.relation)
        for attr in relation.attributes:
            walk(path + (attr.name,), attr.vtype)

    walk((), root_type)
    return out


def congruent_direct(values, navset) -> bool:
    """Equal id expressions must agree on every attribute continuation,
    checked over whole subtrees rather than single steps."""
    for i in range(navset.n_paths):
        for j in range(navset.n_paths):
            if i == j or navset.path_types[i] != navset.path_types[j]:
                continue
            if not navset.path_types[i].is_id:
                continue
            if values[i] != values[j]:
                continue
            size = navset.subtree_end[i] - i
            for offset in range(size):
                if values[i + offset] != values[j + offset]:
                    return False
    return True


def enumerate_valuations(navset, pools) -> Iterator[tuple[int, ...]]:
    """Every valuation of the navigation set within the pools' ranges."""
    spans = [range(lo, hi + 1) for lo, hi in pools.ranges]
    return itertools.product(*spans)


def random_condition(rng, navset, size: int = 4) -> Condition:
    """Random quantifier-free condition over the navigation set's terms,
    for driving oracle comparisons.  Uses only shapes the surface language
    can produce: comparisons of same-typed terms, membership atoms keyed by
    an id expression, boolean structure above them."""
    by_type: dict[VarType, list[Term]] = {}
    for e in navset.paths:
        by_type.setdefault(e.vtype, []).append(VarTerm(e.root, e.path))
    consts_by_type: dict[VarType, list[Term]] = {}
    for c in navset.constants:
        if c.name is not None:
            consts_by_type.setdefault(c.vtype, []).append(ConstTerm(c.name))

    def a_term(vtype: VarType, exclude_null: bool = False) -> Term:
        choices: list[Term] = list(by_type.get(vtype, []))
        choices += consts_by_type.get(vtype, [])
        if not choices or (not exclude_null and rng.random() < 0.25):
            return NullTerm()
        return rng.choice(choices)

    def atom() -> Condition:
        types = [t for t, terms in by_type.items() if terms]
        vtype = rng.choice(types)
        if vtype.is_id and rng.random() < 0.3:
            rel = navset.schema.relation(vtype.relation)
            key = rng.choice(by_type[vtype])
            args: list[Term] = [key]
            for attr in rel.attributes:
                args.append(a_term(attr.vtype))
            return RelAtom(rel.name, tuple(args))
        left = a_term(vtype, exclude_null=True)
        right = a_term(vtype)
        if isinstance(left, NullTerm) and isinstance(right, NullTerm):
            right = a_term(vtype, exclude_null=True)
        kind = Equal if rng.random() < 0.6 else NotEqual
        return kind(left, right)

    cond: Condition = atom()
    for _ in range(rng.randrange(size)):
        nxt: Condition = atom()
        if rng.random() < 0.25:
            nxt = Not(nxt)
        cond = And(cond, nxt) if rng.random() < 0.6 else Or(cond, nxt)
    return cond


def random_ltl(rng, atoms: tuple, size: int = 6) -> Ltl:
    """Random LTL formula over the given atoms, at most ``size`` nodes.
    Negation is used freely, so results are generally not in negation
    normal form."""
    if size <= 1:
        roll = rng.random()
        if roll < 0.75:
            return rng.choice(atoms)
        return LtlTrue() if roll < 0.9 else LtlFalse()
    unary = [LtlNot, Next, Eventually, Always]
    binary = [LtlAnd, LtlOr, Until, Release]
    if size >= 3 and rng.random() < 0.55:
        op = rng.choice(binary)
        left_size = rng.randint(1, size - 2)
        return op(
            random_ltl(rng, atoms, left_size),
            random_ltl(rng, atoms, size - 1 - left_size),
        )
    return rng.choice(unary)(random_ltl(rng, atoms, size - 1))


# ---------------------------------------------------------------------------
# Exhaustive lasso sweeps
# ---------------------------------------------------------------------------
#
# Checking an automaton against every ultimately periodic word with prefix
# length <= P and period <= C over an alphabet of L letters means
# (sum of L^p) * (sum of L^c) words; for L = 8, P = C = 4 that is about
# 22 million, far beyond one-word-at-a-time evaluation.  Both sides are
# therefore evaluated in bulk: one big integer per quantity, bit c giving
# its value when the cycle is cycles[c].  Cycles need a fixpoint (the word
# loops there); prefix positions need only a single backward step, so all
# prefixes are handled by one pass per prefix tree node.  The big-integer
# sweep is itself cross-checked against eval_lasso / one-word automaton
# runs on samples before any exhaustive claim relies on it.


def all_letters(atoms: tuple) -> list[Letter]:
    """Every subset of ``atoms`` as a letter, shortest first."""
    out: list[Letter] = []
    for k in range(len(atoms) + 1):
        for combo in itertools.combinations(atoms, k):
            out.append(frozenset(combo))
    return out


def index_cycles(n_letters: int, max_period: int) -> list[tuple[int, ...]]:
    """All cycles of letter indices with period 1..max_period, in a fixed
    order shared by both sweep directions."""
    return [
        cyc
        for length in range(1, max_period + 1)
        for cyc in itertools.product(range(n_letters), repeat=length)
    ]


def bulk_semantics(
    formula: Ltl,
    letters: list[Letter],
    max_prefix: int,
    max_period: int,
) -> dict[tuple[int, ...], int]:
    """Formula truth for every word prefix . cycle^omega with the given
    bounds.  Keys are prefixes as letter-index tuples; bit c of the value
    is the truth when the cycle is ``index_cycles(...)[c]``."""
    subs = _subformulas_postorder(formula)
    cycles = index_cycles(len(letters), max_period)
    mask = (1 << len(cycles)) - 1

    base: dict[Ltl, int] = {sub: 0 for sub in subs}
    for c_index, cyc in enumerate(cycles):
        word = [letters[i] for i in cyc]
        values = _word_values(subs, word, 0)
        bit = 1 << c_index
        for sub in subs:
            if values[sub][0]:
                base[sub] |= bit

    results: dict[tuple[int, ...], int] = {(): base[formula]}
    generation: dict[tuple[int, ...], dict[Ltl, int]] = {(): base}
    for length in range(1, max_prefix + 1):
        previous = generation
        generation = {}
        for suffix, vals in previous.items():
            for li, letter in enumerate(letters):
                cur: dict[Ltl, int] = {}
                for sub in subs:
                    match sub:
                        case LtlTrue():
                            v = mask
                        case LtlFalse():
                            v = 0
                        case CondProp() | ServiceProp():
                            v = mask if sub in letter else 0
                        case LtlNot(operand=x):
                            v = cur[x] ^ mask
                        case LtlAnd(left=l, right=r):
                            v = cur[l] & cur[r]
                        case LtlOr(left=l, right=r):
                            v = cur[l] | cur[r]
                        case Next(operand=x):
                            v = vals[x]
                        case Until(left=l, right=r):
                            v = cur[r] | (cur[l] & vals[sub])
                        case Release(left=l, right=r):
                            v = cur[r] & (cur[l] | vals[sub])
                        case Eventually(operand=x):
                            v = cur[x] | vals[sub]
                        case Always(operand=x):
                            v = cur[x] & vals[sub]
                        case _:
                            raise TasError(f"unknown formula node: {sub}")
                    cur[sub] = v
                word = (li,) + suffix
                results[word] = cur[formula]
                if length < max_prefix:
                    generation[word] = cur
    return results


def _cycle_accepting_phases(
    n_states: int,
    accepting: frozenset,
    succs: list[list[tuple[int, ...]]],
    cyc: tuple[int, ...],
) -> set[tuple[int, int]]:
    """Product nodes (state, phase) from which reading cyc^omega admits an
    accepting run: nodes reaching a non-trivial strongly connected
    component of the product that contains an accepting state."""
    period = len(cyc)
    nodes = [(s, i) for s in range(n_states) for i in range(period)]

    def edges(node: tuple[int, int]) -> list[tuple[int, int]]:
        s, i = node
        nxt = (i + 1) % period
        return [(t, nxt) for t in succs[s][cyc[i]]]

    # Iterative Tarjan.
    index_of: dict[tuple[int, int], int] = {}
    low: dict[tuple[int, int], int] = {}
    on_stack: set[tuple[int, int]] = set()
    stack: list[tuple[int, int]] = []
    component_of: dict[tuple[int, int], int] = {}
    components: list[list[tuple[int, int]]] = []
    counter = 0
    for root in nodes:
        if root in index_of:
            continue
        work = [(root, iter(edges(root)))]
        index_of[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in index_of:
                    index_of[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(edges(child))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index_of[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index_of[node]:
                component: list[tuple[int, int]] = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component_of[member] = len(components)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)

    good_components: set[int] = set()
    for ci, component in enumerate(components):
        if not any(s in accepting for s, _ in component):
            continue
        members = set(component)
        non_trivial = len(component) > 1 or any(
            child in members for child in edges(component[0])
        )
        if non_trivial:
            good_components.add(ci)

    # Nodes reaching a good component, by reverse propagation over the
    # condensation (components are numbered in reverse topological order).
    good_nodes: set[tuple[int, int]] = set()
    reaches = [ci in good_components for ci in range(len(components))]
    for ci in range(len(components)):
        if reaches[ci]:
            continue
        for node in components[ci]:
            if any(reaches[component_of[child]] for child in edges(node)):
                reaches[ci] = True
                break
    for ci, component in enumerate(components):
        if reaches[ci]:
            good_nodes.update(component)
    return good_nodes


def bulk_acceptance(
    automaton,
    letters: list[Letter],
    max_prefix: int,
    max_period: int,
) -> dict[tuple[int, ...], int]:
    """Automaton acceptance in the same shape as bulk_semantics."""
    from tascheck.buchi import label_satisfied

    n_states = automaton.n_states
    cycles = index_cycles(len(letters), max_period)
    succs: list[list[tuple[int, ...]]] = [
        [
            tuple(
                t
                for label, t in automaton.transitions[s]
                if label_satisfied(label, letter)
            )
            for letter in letters
        ]
        for s in range(n_states)
    ]
    initial: list[tuple[int, ...]] = [
        tuple(
            t
            for label, t in automaton.initial
            if label_satisfied(label, letter)
        )
        for letter in letters
    ]

    acc_empty = 0
    base = [0] * n_states
    for c_index, cyc in enumerate(cycles):
        good = _cycle_accepting_phases(
            n_states, automaton.accepting, succs, cyc
        )
        bit = 1 << c_index
        for s in range(n_states):
            if (s, 0) in good:
                base[s] |= bit
        phase_one = 1 % len(cyc)
        if any((t, phase_one) in good for t in initial[cyc[0]]):
            acc_empty |= bit

    results: dict[tuple[int, ...], int] = {(): acc_empty}
    generation: dict[tuple[int, ...], list[int]] = {(): base}
    for length in range(1, max_prefix + 1):
        previous = generation
        generation = {}
        for suffix, vec in previous.items():
            for li in range(len(letters)):
                word = (li,) + suffix
                bits = 0
                for t in initial[li]:
                    bits |= vec[t]
                results[word] = bits
                if length < max_prefix:
                    new = [0] * n_states
                    for s in range(n_states):
                        v = 0
                        for t in succs[s][li]:
                            v |= vec[t]
                        new[s] = v
                    generation[word] = new
    return results


def sweep_mismatches(
    formula: Ltl,
    automaton,
    letters: list[Letter],
    max_prefix: int,
    max_period: int,
    limit: int = 5,
) -> list[tuple[tuple[Letter, ...], tuple[Letter, ...]]]:
    """Words on which automaton acceptance differs from formula truth,
    at most ``limit`` of them (empty means full agreement)."""
    truth = bulk_semantics(formula, letters, max_prefix, max_period)
    accept = bulk_acceptance(automaton, letters, max_prefix, max_period)
    assert truth.keys() == accept.keys()
    cycles = index_cycles(len(letters), max_period)
    out: list[tuple[tuple[Letter, ...], tuple[Letter, ...]]] = []
    for prefix_indices in truth:
        diff = truth[prefix_indices] ^ accept[prefix_indices]
        while diff and len(out) < limit:
            c_index = (diff & -diff).bit_length() - 1
            diff &= diff - 1
            out.append(
                (
                    tuple(letters[i] for i in prefix_indices),
                    tuple(letters[i] for i in cycles[c_index]),
                )
            )
        if len(out) >= limit:
            break
    return out
