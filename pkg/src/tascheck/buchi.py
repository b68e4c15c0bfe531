"""LTL normalization and translation to Büchi automata.

Properties are checked by language emptiness: the checker negates the
property, translates the negation to a Büchi automaton over condition and
service propositions, and searches the product with the symbolic transition
system for an accepting cycle.  This module supplies the two translation
steps plus a direct lasso-acceptance test used to cross-check reported
counterexamples.

The translation is the classic tableau construction: expand the formula
into nodes carrying obligations (processed, pending-now, pending-next),
read transition labels off the literals of the target node, impose one
acceptance set per Until subformula, then degeneralize with a counter and
reduce with a bisimulation quotient.  Automata are deterministic in
structure from run to run: all orderings below are explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import (
    Always,
    CondProp,
    Eventually,
    Ltl,
    LtlAnd,
    LtlFalse,
    LtlNot,
    LtlOr,
    LtlTrue,
    Next,
    Release,
    ServiceProp,
    TasError,
    Until,
)

Atom = CondProp | ServiceProp

# A label is a finite conjunction of literals: (atom, True) requires the
# atom to hold at the position being read, (atom, False) requires it not to.
Label = frozenset[tuple[Atom, bool]]

TRUE_LABEL: Label = frozenset()


def atom_key(atom: Atom) -> str:
    """Stable sort key for atoms (reprs are hash-independent)."""
    return repr(atom)


def label_key(label: Label) -> tuple[tuple[str, bool], ...]:
    """Stable sort key for labels."""
    return tuple(sorted((atom_key(a), pos) for a, pos in label))


def label_satisfied(label: Label, true_atoms: frozenset[Atom]) -> bool:
    """Whether a literal conjunction holds under a set of true atoms."""
    return all((atom in true_atoms) == pos for atom, pos in label)


def formula_atoms(f: Ltl) -> tuple[Atom, ...]:
    """All condition and service propositions of a formula, in
    first-occurrence order."""
    out: dict[Atom, None] = {}

    def walk(g: Ltl) -> None:
        match g:
            case CondProp() | ServiceProp():
                out.setdefault(g)
            case LtlNot(operand=x) | Next(operand=x) | Always(operand=x) | Eventually(operand=x):
                walk(x)
            case (
                LtlAnd(left=l, right=r)
                | LtlOr(left=l, right=r)
                | Until(left=l, right=r)
                | Release(left=l, right=r)
            ):
                walk(l)
                walk(r)
            case _:
                pass

    walk(f)
    return tuple(out)


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------


def ltl_nnf(f: Ltl) -> Ltl:
    """Negation normal form: negations pushed onto atoms, Always and
    Eventually expanded into Release and Until.  Preserves models."""
    match f:
        case LtlTrue() | LtlFalse() | CondProp() | ServiceProp():
            return f
        case LtlNot(operand=g):
            return _negate(g)
        case LtlAnd(left=l, right=r):
            return LtlAnd(ltl_nnf(l), ltl_nnf(r))
        case LtlOr(left=l, right=r):
            return LtlOr(ltl_nnf(l), ltl_nnf(r))
        case Next(operand=g):
            return Next(ltl_nnf(g))
        case Until(left=l, right=r):
            return Until(ltl_nnf(l), ltl_nnf(r))
        case Release(left=l, right=r):
            return Release(ltl_nnf(l), ltl_nnf(r))
        case Always(operand=g):
            return Release(LtlFalse(), ltl_nnf(g))
        case Eventually(operand=g):
            return Until(LtlTrue(), ltl_nnf(g))
    raise TasError(f"unknown temporal formula: {f!r}")


def _negate(f: Ltl) -> Ltl:
    """NNF of the negation of ``f``."""
    match f:
        case LtlTrue():
            return LtlFalse()
        case LtlFalse():
            return LtlTrue()
        case CondProp() | ServiceProp():
            return LtlNot(f)
        case LtlNot(operand=g):
            return ltl_nnf(g)
        case LtlAnd(left=l, right=r):
            return LtlOr(_negate(l), _negate(r))
        case LtlOr(left=l, right=r):
            return LtlAnd(_negate(l), _negate(r))
        case Next(operand=g):
            return Next(_negate(g))
        case Until(left=l, right=r):
            return Release(_negate(l), _negate(r))
        case Release(left=l, right=r):
            return Until(_negate(l), _negate(r))
        case Always(operand=g):
            return Until(LtlTrue(), _negate(g))
        case Eventually(operand=g):
            return Release(LtlFalse(), _negate(g))
    raise TasError(f"unknown temporal formula: {f!r}")


# ---------------------------------------------------------------------------
# Automaton
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BuchiAutomaton:
    """Büchi automaton over condition and service propositions.

    Labels sit on transitions.  A run over a word w0 w1 w2 ... picks an
    initial transition whose label w0 satisfies, then from each state a
    transition whose label the next letter satisfies; it is accepting when
    it visits accepting states infinitely often.
    """

    n_states: int
    initial: tuple[tuple[Label, int], ...]
    transitions: tuple[tuple[tuple[Label, int], ...], ...]
    accepting: frozenset[int]
    atoms: tuple[Atom, ...]


class _Node:
    """Tableau node under construction."""

    __slots__ = ("incoming", "pending", "processed", "due_next")

    def __init__(
        self,
        incoming: set[int],
        pending: list[Ltl],
        processed: dict[Ltl, None],
        due_next: dict[Ltl, None],
    ) -> None:
        self.incoming = incoming
        self.pending = pending
        self.processed = processed
        self.due_next = due_next

    def split(self) -> _Node:
        return _Node(
            set(self.incoming),
            list(self.pending),
            dict(self.processed),
            dict(self.due_next),
        )

    def demand(self, f: Ltl) -> None:
        if f not in self.processed and f not in self.pending:
            self.pending.append(f)


_INIT = -1


def _is_literal(f: Ltl) -> bool:
    if isinstance(f, (LtlTrue, LtlFalse, CondProp, ServiceProp)):
        return True
    return isinstance(f, LtlNot) and isinstance(f.operand, (CondProp, ServiceProp))


def _dual_literal(f: Ltl) -> Ltl:
    if isinstance(f, LtlNot):
        return f.operand
    if isinstance(f, LtlTrue):
        return LtlFalse()
    if isinstance(f, LtlFalse):
        return LtlTrue()
    return LtlNot(f)


def _expand(formula: Ltl) -> list[tuple[frozenset[Ltl], list[int]]]:
    """Tableau expansion: the node list of the generalized automaton.

    Each returned entry is (processed set, sorted incoming ids), where id
    ``_INIT`` marks entry nodes; node ids are list positions.
    """
    done: list[tuple[frozenset[Ltl], frozenset[Ltl], set[int]]] = []
    seen: dict[tuple[frozenset[Ltl], frozenset[Ltl]], int] = {}
    stack = [_Node({_INIT}, [formula], {}, {})]
    while stack:
        node = stack.pop()
        if not node.pending:
            key = (frozenset(node.processed), frozenset(node.due_next))
            hit = seen.get(key)
            if hit is not None:
                done[hit][2].update(node.incoming)
                continue
            seen[key] = len(done)
            done.append((key[0], key[1], set(node.incoming)))
            stack.append(
                _Node({len(done) - 1}, list(node.due_next), {}, {})
            )
            continue
        f = node.pending.pop()
        if f in node.processed:
            stack.append(node)
            continue
        if _is_literal(f):
            if isinstance(f, LtlFalse) or _dual_literal(f) in node.processed:
                continue
            node.processed[f] = None
            stack.append(node)
            continue
        node.processed[f] = None
        match f:
            case LtlAnd(left=l, right=r):
                node.demand(l)
                node.demand(r)
                stack.append(node)
            case LtlOr(left=l, right=r):
                other = node.split()
                node.demand(l)
                other.demand(r)
                stack.append(other)
                stack.append(node)
            case Next(operand=g):
                node.due_next.setdefault(g)
                stack.append(node)
            case Until(left=l, right=r):
                other = node.split()
                node.demand(l)
                node.due_next.setdefault(f)
                other.demand(r)
                stack.append(other)
                stack.append(node)
            case Release(left=l, right=r):
                other = node.split()
                node.demand(r)
                node.due_next.setdefault(f)
                other.demand(l)
                other.demand(r)
                stack.append(other)
                stack.append(node)
            case _:
                raise TasError(f"formula not in negation normal form: {f!r}")
    return [(processed, sorted(incoming)) for processed, _, incoming in done]


def _until_subformulas(f: Ltl) -> tuple[Until, ...]:
    out: dict[Until, None] = {}

    def walk(g: Ltl) -> None:
        match g:
            case Until(left=l, right=r):
                out.setdefault(g)
                walk(l)
                walk(r)
            case LtlNot(operand=x) | Next(operand=x) | Always(operand=x) | Eventually(operand=x):
                walk(x)
            case (
                LtlAnd(left=l, right=r)
                | LtlOr(left=l, right=r)
                | Release(left=l, right=r)
            ):
                walk(l)
                walk(r)
            case _:
                pass

    walk(f)
    return tuple(out)


def _node_label(processed: frozenset[Ltl]) -> Label:
    literals = []
    for g in processed:
        if isinstance(g, (CondProp, ServiceProp)):
            literals.append((g, True))
        elif isinstance(g, LtlNot):
            literals.append((g.operand, False))
    return frozenset(literals)


def ltl_to_buchi(f: Ltl) -> BuchiAutomaton:
    """Translate a formula in negation normal form to a Büchi automaton
    accepting exactly its models.

    The first letter of a word is read by the initial transitions.  The
    result is reduced by a bisimulation quotient and reachability pruning,
    and its construction is deterministic.
    """
    nodes = _expand(f)
    untils = _until_subformulas(f)
    labels = [_node_label(processed) for processed, _ in nodes]

    # Edges grouped by source, in target id order.
    initial: list[tuple[Label, int]] = []
    edges: list[list[tuple[Label, int]]] = [[] for _ in nodes]
    for target, (_, incoming) in enumerate(nodes):
        for source in incoming:
            if source == _INIT:
                initial.append((labels[target], target))
            else:
                edges[source].append((labels[target], target))

    # One acceptance set per Until: nodes with no open obligation for it.
    acceptance_sets = [
        frozenset(
            idx
            for idx, (processed, _) in enumerate(nodes)
            if g not in processed or g.right in processed
        )
        for g in untils
    ]

    # Degeneralize with a counter over acceptance sets; counter k-1 states
    # inside their set complete a sweep through every set.
    k = len(acceptance_sets)
    dense: dict[tuple[int, int], int] = {}
    dd_initial: list[tuple[Label, int]] = []
    dd_edges: list[list[tuple[Label, int]]] = []
    dd_accepting: set[int] = set()
    order: list[tuple[int, int]] = []

    def intern(node: int, counter: int) -> int:
        state = dense.get((node, counter))
        if state is None:
            state = len(order)
            dense[(node, counter)] = state
            order.append((node, counter))
            dd_edges.append([])
            if k == 0 or (counter == k - 1 and node in acceptance_sets[k - 1]):
                dd_accepting.add(state)
        return state

    for label, target in initial:
        dd_initial.append((label, intern(target, 0)))
    cursor = 0
    while cursor < len(order):
        node, counter = order[cursor]
        if k == 0:
            bumped = 0
        elif node in acceptance_sets[counter]:
            bumped = (counter + 1) % k
        else:
            bumped = counter
        dd_edges[cursor] = [
            (label, intern(target, bumped)) for label, target in edges[node]
        ]
        cursor += 1

    return _quotient(
        len(order), dd_initial, dd_edges, dd_accepting, formula_atoms(f)
    )


def _quotient(
    n: int,
    initial: list[tuple[Label, int]],
    edges: list[list[tuple[Label, int]]],
    accepting: set[int],
    atoms: tuple[Atom, ...],
) -> BuchiAutomaton:
    """Bisimulation quotient plus reachability pruning and renumbering."""
    cls = [1 if s in accepting else 0 for s in range(n)]
    while True:
        signature = [
            (cls[s], frozenset((label, cls[t]) for label, t in edges[s]))
            for s in range(n)
        ]
        remap: dict[tuple[int, frozenset], int] = {}
        for s in range(n):
            remap.setdefault(signature[s], len(remap))
        nxt = [remap[signature[s]] for s in range(n)]
        if nxt == cls:
            break
        cls = nxt

    # Renumber reachable classes in discovery order from the initial edges.
    rep: dict[int, int] = {}
    final: list[int] = []
    queue: list[int] = []

    def visit(c: int) -> int:
        got = rep.get(c)
        if got is None:
            got = len(final)
            rep[c] = got
            final.append(c)
            queue.append(c)
        return got

    def dedup(
        pairs: Iterable[tuple[Label, int]]
    ) -> tuple[tuple[Label, int], ...]:
        unique = {(label, cls[t]) for label, t in pairs}
        ordered = sorted(unique, key=lambda p: (p[1], label_key(p[0])))
        return tuple((label, visit(c)) for label, c in ordered)

    members: dict[int, int] = {}
    for s in range(n):
        members.setdefault(cls[s], s)
    out_initial = dedup(initial)
    out_edges: dict[int, tuple[tuple[Label, int], ...]] = {}
    head = 0
    while head < len(queue):
        c = queue[head]
        head += 1
        out_edges[rep[c]] = dedup(edges[members[c]])
    n_states = len(final)
    return BuchiAutomaton(
        n_states=n_states,
        initial=out_initial,
        transitions=tuple(out_edges[i] for i in range(n_states)),
        accepting=frozenset(
            i for i, c in enumerate(final) if members[c] in accepting
        ),
        atoms=atoms,
    )


# ---------------------------------------------------------------------------
# Lasso acceptance
# ---------------------------------------------------------------------------


def accepts_lasso(
    automaton: BuchiAutomaton,
    prefix: Sequence[Iterable[Atom]],
    cycle: Sequence[Iterable[Atom]],
) -> bool:
    """Whether the automaton accepts the ultimately periodic word
    ``prefix . cycle^ω``, each letter given as its set of true atoms."""
    if not cycle:
        raise TasError("lasso cycle must be non-empty")
    word = [frozenset(letter) for letter in prefix] + [
        frozenset(letter) for letter in cycle
    ]
    loop = len(prefix)
    total = len(word)

    def advance(position: int) -> int:
        position += 1
        return position if position < total else loop

    # Product nodes: (automaton state, next word position to read).
    start = {
        (target, advance(0))
        for label, target in automaton.initial
        if label_satisfied(label, word[0])
    }
    seen = set(start)
    frontier = list(start)
    while frontier:
        state, position = frontier.pop()
        for label, target in automaton.transitions[state]:
            if label_satisfied(label, word[position]):
                node = (target, advance(position))
                if node not in seen:
                    seen.add(node)
                    frontier.append(node)

    def reaches_itself(origin: tuple[int, int]) -> bool:
        stack = [origin]
        visited: set[tuple[int, int]] = set()
        while stack:
            state, position = stack.pop()
            for label, target in automaton.transitions[state]:
                if label_satisfied(label, word[position]):
                    node = (target, advance(position))
                    if node == origin:
                        return True
                    if node not in visited:
                        visited.add(node)
                        stack.append(node)
        return False

    return any(
        node[0] in automaton.accepting and reaches_itself(node)
        for node in sorted(seen)
    )
