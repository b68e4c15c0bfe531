"""Core domain model: schemas, conditions, services, specs, and LTL properties.

A tuple artifact system couples a read-only relational database schema
(with keys and acyclic foreign keys) with a finite set of typed artifact
variables evolved by services.  Everything here is an immutable value
object; the operations at the bottom (validate, to_nnf, desugar_exists,
eliminate_globals) are pure functions over those values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


class TasError(Exception):
    """Raised for contract violations that are not user diagnostics."""


# ---------------------------------------------------------------------------
# Types and schema
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class VarType:
    """Type of a variable or expression: a relation's key type, or plain data.

    ``relation is None`` means the data-value type; otherwise the type of
    identifiers of that relation.  Values of distinct types never compare
    equal at runtime.
    """

    relation: str | None = None

    @property
    def is_id(self) -> bool:
        return self.relation is not None

    def __str__(self) -> str:
        return self.relation if self.relation is not None else "VAL"


VAL = VarType()


def id_type(relation: str) -> VarType:
    return VarType(relation)


@dataclass(frozen=True)
class Attribute:
    """Non-key attribute of a relation; ``ref`` names the target of a foreign key."""

    name: str
    ref: str | None = None

    @property
    def is_fk(self) -> bool:
        return self.ref is not None

    @property
    def vtype(self) -> VarType:
        return VarType(self.ref) if self.ref is not None else VAL


@dataclass(frozen=True)
class Relation:
    """Relation with an implicit key attribute followed by ``attributes``."""

    name: str
    attributes: tuple[Attribute, ...]

    def attribute(self, name: str) -> Attribute | None:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None


@dataclass(frozen=True)
class DatabaseSchema:
    relations: tuple[Relation, ...]

    def relation(self, name: str) -> Relation | None:
        for rel in self.relations:
            if rel.name == name:
                return rel
        return None


# ---------------------------------------------------------------------------
# Terms and conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarTerm:
    """A variable, optionally navigated through a chain of foreign keys.

    ``path`` is a tuple of attribute names; every step but the last must be
    a foreign key.  A bare variable has an empty path.
    """

    name: str
    path: tuple[str, ...] = ()

    def __str__(self) -> str:
        return ".".join((self.name,) + self.path)


@dataclass(frozen=True)
class ConstTerm:
    """A named data-value constant (written as a string literal)."""

    value: str

    def __str__(self) -> str:
        return f'"{self.value}"'


@dataclass(frozen=True)
class NullTerm:
    """The distinguished null constant; its type is fixed by context."""

    def __str__(self) -> str:
        return "null"


Term = VarTerm | ConstTerm | NullTerm


@dataclass(frozen=True)
class TrueCond:
    pass


@dataclass(frozen=True)
class FalseCond:
    pass


@dataclass(frozen=True)
class Equal:
    left: Term
    right: Term


@dataclass(frozen=True)
class NotEqual:
    left: Term
    right: Term


@dataclass(frozen=True)
class RelAtom:
    """Membership atom ``R(id, a1, ..., ak)`` with args in attribute order."""

    relation: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class NegRelAtom:
    """Negated membership atom; only produced by negation normal form."""

    relation: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not:
    operand: Condition


@dataclass(frozen=True)
class And:
    left: Condition
    right: Condition


@dataclass(frozen=True)
class Or:
    left: Condition
    right: Condition


@dataclass(frozen=True)
class Exists:
    """Existential prefix over typed witnesses; legal only at the top of a
    service pre- or post-condition."""

    bound: tuple[tuple[str, VarType], ...]
    body: Condition


Condition = (
    TrueCond | FalseCond | Equal | NotEqual | RelAtom | NegRelAtom | Not | And | Or | Exists
)


def and_all(conds: list[Condition]) -> Condition:
    """Left-nested conjunction of ``conds`` (``TrueCond`` when empty)."""
    if not conds:
        return TrueCond()
    out = conds[0]
    for c in conds[1:]:
        out = And(out, c)
    return out


def or_all(conds: list[Condition]) -> Condition:
    if not conds:
        return FalseCond()
    out = conds[0]
    for c in conds[1:]:
        out = Or(out, c)
    return out


# ---------------------------------------------------------------------------
# LTL over conditions and service occurrences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LtlTrue:
    pass


@dataclass(frozen=True)
class LtlFalse:
    pass


@dataclass(frozen=True)
class CondProp:
    """Proposition holding in a state iff the embedded condition does."""

    cond: Condition


@dataclass(frozen=True)
class ServiceProp:
    """Proposition holding at a position iff the last applied service matches."""

    service: str


@dataclass(frozen=True)
class LtlNot:
    operand: Ltl


@dataclass(frozen=True)
class LtlAnd:
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class LtlOr:
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Next:
    operand: Ltl


@dataclass(frozen=True)
class Until:
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Release:
    left: Ltl
    right: Ltl


@dataclass(frozen=True)
class Always:
    operand: Ltl


@dataclass(frozen=True)
class Eventually:
    operand: Ltl


Ltl = (
    LtlTrue
    | LtlFalse
    | CondProp
    | ServiceProp
    | LtlNot
    | LtlAnd
    | LtlOr
    | Next
    | Until
    | Release
    | Always
    | Eventually
)


@dataclass(frozen=True)
class LtlFo:
    """A named temporal property, universally quantified over ``globals_``."""

    name: str
    globals_: tuple[tuple[str, VarType], ...]
    formula: Ltl


# ---------------------------------------------------------------------------
# Services and specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Service:
    """A service: applicable when ``pre`` holds, constrains the successor via
    ``post``, and carries the values of ``propagated`` variables across."""

    name: str
    pre: Condition
    post: Condition
    propagated: tuple[str, ...] = ()


INIT_SERVICE = "init"


@dataclass(frozen=True)
class TasSpec:
    """A tuple artifact system.

    ``variables`` is ordered; the order fixes the canonical expression order
    everywhere downstream.  ``scratch_vars`` marks variables whose value is
    only ever read immediately after being rewritten (existential witnesses
    hoisted by :func:`desugar_exists`); the engine pins them to a canonical
    value in initial states.
    """

    schema: DatabaseSchema
    variables: tuple[tuple[str, VarType], ...]
    init_cond: Condition
    services: tuple[Service, ...]
    scratch_vars: tuple[str, ...] = ()

    def var_types(self) -> dict[str, VarType]:
        return dict(self.variables)

    def service(self, name: str) -> Service | None:
        for svc in self.services:
            if svc.name == name:
                return svc
        return None


@dataclass(frozen=True)
class Diagnostic:
    """A validation finding with a stable machine-readable code."""

    code: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.where}: {self.message}"


# ---------------------------------------------------------------------------
# Traversal helpers
# ---------------------------------------------------------------------------


def condition_terms(cond: Condition) -> list[Term]:
    """All term occurrences in ``cond``, in syntactic order."""
    out: list[Term] = []

    def walk(c: Condition) -> None:
        match c:
            case Equal(l, r) | NotEqual(l, r):
                out.extend((l, r))
            case RelAtom(_, args) | NegRelAtom(_, args):
                out.extend(args)
            case Not(x):
                walk(x)
            case And(l, r) | Or(l, r):
                walk(l)
                walk(r)
            case Exists(_, body):
                walk(body)
            case _:
                pass

    walk(cond)
    return out


def condition_subformulas(cond: Condition) -> list[Condition]:
    """``cond`` and every proper sub-condition, in preorder."""
    out: list[Condition] = []

    def walk(c: Condition) -> None:
        out.append(c)
        match c:
            case Not(x):
                walk(x)
            case And(l, r) | Or(l, r):
                walk(l)
                walk(r)
            case Exists(_, body):
                walk(body)
            case _:
                pass

    walk(cond)
    return out


def free_vars(cond: Condition) -> set[str]:
    """Names of variables referenced outside any existential binding."""
    out: set[str] = set()

    def walk(c: Condition, bound: frozenset[str]) -> None:
        match c:
            case Equal(l, r) | NotEqual(l, r):
                for t in (l, r):
                    if isinstance(t, VarTerm) and t.name not in bound:
                        out.add(t.name)
            case RelAtom(_, args) | NegRelAtom(_, args):
                for t in args:
                    if isinstance(t, VarTerm) and t.name not in bound:
                        out.add(t.name)
            case Not(x):
                walk(x, bound)
            case And(l, r) | Or(l, r):
                walk(l, bound)
                walk(r, bound)
            case Exists(names, body):
                walk(body, bound | {n for n, _ in names})
            case _:
                pass

    walk(cond, frozenset())
    return out


def rename_condition_vars(cond: Condition, renames: dict[str, str]) -> Condition:
    """Rename free variable roots; existential binders shadow as usual."""

    def ren_term(t: Term, bound: frozenset[str]) -> Term:
        if isinstance(t, VarTerm) and t.name in renames and t.name not in bound:
            return VarTerm(renames[t.name], t.path)
        return t

    def walk(c: Condition, bound: frozenset[str]) -> Condition:
        match c:
            case Equal(l, r):
                return Equal(ren_term(l, bound), ren_term(r, bound))
            case NotEqual(l, r):
                return NotEqual(ren_term(l, bound), ren_term(r, bound))
            case RelAtom(rel, args):
                return RelAtom(rel, tuple(ren_term(a, bound) for a in args))
            case NegRelAtom(rel, args):
                return NegRelAtom(rel, tuple(ren_term(a, bound) for a in args))
            case Not(x):
                return Not(walk(x, bound))
            case And(l, r):
                return And(walk(l, bound), walk(r, bound))
            case Or(l, r):
                return Or(walk(l, bound), walk(r, bound))
            case Exists(names, body):
                return Exists(names, walk(body, bound | {n for n, _ in names}))
            case _:
                return c

    return walk(cond, frozenset())


def ltl_map_conditions(f: Ltl, fn) -> Ltl:
    """Rebuild ``f`` with ``fn`` applied to every embedded condition."""
    match f:
        case CondProp(c):
            return CondProp(fn(c))
        case LtlNot(x):
            return LtlNot(ltl_map_conditions(x, fn))
        case LtlAnd(l, r):
            return LtlAnd(ltl_map_conditions(l, fn), ltl_map_conditions(r, fn))
        case LtlOr(l, r):
            return LtlOr(ltl_map_conditions(l, fn), ltl_map_conditions(r, fn))
        case Next(x):
            return Next(ltl_map_conditions(x, fn))
        case Until(l, r):
            return Until(ltl_map_conditions(l, fn), ltl_map_conditions(r, fn))
        case Release(l, r):
            return Release(ltl_map_conditions(l, fn), ltl_map_conditions(r, fn))
        case Always(x):
            return Always(ltl_map_conditions(x, fn))
        case Eventually(x):
            return Eventually(ltl_map_conditions(x, fn))
        case _:
            return f


def ltl_conditions(f: Ltl) -> list[Condition]:
    """Embedded conditions of ``f`` in syntactic order, with duplicates."""
    out: list[Condition] = []

    def walk(g: Ltl) -> None:
        match g:
            case CondProp(c):
                out.append(c)
            case LtlNot(x) | Next(x) | Always(x) | Eventually(x):
                walk(x)
            case LtlAnd(l, r) | LtlOr(l, r) | Until(l, r) | Release(l, r):
                walk(l)
                walk(r)
            case _:
                pass

    walk(f)
    return out


def ltl_service_names(f: Ltl) -> list[str]:
    out: list[str] = []

    def walk(g: Ltl) -> None:
        match g:
            case ServiceProp(s):
                out.append(s)
            case LtlNot(x) | Next(x) | Always(x) | Eventually(x):
                walk(x)
            case LtlAnd(l, r) | LtlOr(l, r) | Until(l, r) | Release(l, r):
                walk(l)
                walk(r)
            case _:
                pass

    walk(f)
    return out


# ---------------------------------------------------------------------------
# Type checking
# ---------------------------------------------------------------------------


def term_type(
    term: Term, schema: DatabaseSchema, scope: dict[str, VarType]
) -> VarType | None:
    """Static type of a term, or None for the polymorphic null.

    Raises ``TasError`` when the term is not well formed in ``scope``; use
    :func:`validate` for diagnostics instead of exceptions.
    """
    match term:
        case ConstTerm():
            return VAL
        case NullTerm():
            return None
        case VarTerm(name, path):
            if name not in scope:
                raise TasError(f"unknown variable {name!r}")
            cur = scope[name]
            for i, step in enumerate(path):
                if not cur.is_id:
                    raise TasError(f"cannot navigate {step!r} from a data value")
                rel = schema.relation(cur.relation)
                if rel is None:
                    raise TasError(f"unknown relation {cur.relation!r}")
                attr = rel.attribute(step)
                if attr is None:
                    raise TasError(f"relation {rel.name} has no attribute {step!r}")
                if i < len(path) - 1 and not attr.is_fk:
                    raise TasError(f"attribute {step!r} is not a foreign key")
                cur = attr.vtype
            return cur
    raise TasError(f"unsupported term {term!r}")


class _Check:
    """Accumulates diagnostics while walking a spec."""

    def __init__(self, schema: DatabaseSchema):
        self.schema = schema
        self.out: list[Diagnostic] = []

    def add(self, code: str, where: str, message: str) -> None:
        self.out.append(Diagnostic(code, where, message))

    def term(self, t: Term, scope: dict[str, VarType], where: str) -> VarType | None:
        """Like term_type but reporting instead of raising.  Returns the type,
        None for null, or VAL as a recovery type after an error."""
        match t:
            case ConstTerm():
                return VAL
            case NullTerm():
                return None
            case VarTerm(name, path):
                if name not in scope:
                    self.add("UnknownVariable", where, f"unknown variable {name!r}")
                    return VAL
                cur = scope[name]
                for i, step in enumerate(path):
                    if not cur.is_id:
                        self.add(
                            "UnknownAttribute",
                            where,
                            f"cannot navigate {step!r} from a data value in {t}",
                        )
                        return VAL
                    rel = self.schema.relation(cur.relation)
                    if rel is None:
                        return VAL  # already reported as UnknownRelation
                    attr = rel.attribute(step)
                    if attr is None:
                        self.add(
                            "UnknownAttribute",
                            where,
                            f"relation {rel.name} has no attribute {step!r}",
                        )
                        return VAL
                    if i < len(path) - 1 and not attr.is_fk:
                        self.add(
                            "UnknownAttribute",
                            where,
                            f"attribute {rel.name}.{step} is not a foreign key",
                        )
                        return VAL
                    cur = attr.vtype
                return cur
        return VAL

    def equality(self, l: Term, r: Term, scope: dict[str, VarType], where: str) -> None:
        tl = self.term(l, scope, where)
        tr = self.term(r, scope, where)
        if tl is None and tr is None:
            self.add("TypeMismatch", where, "cannot type null == null")
        elif tl is not None and tr is not None and tl != tr:
            self.add("TypeMismatch", where, f"{l} has type {tl}, {r} has type {tr}")

    def rel_atom(self, rel_name: str, args: tuple[Term, ...], scope, where: str) -> None:
        rel = self.schema.relation(rel_name)
        if rel is None:
            self.add("UnknownRelation", where, f"unknown relation {rel_name!r}")
            for a in args:
                self.term(a, scope, where)
            return
        want = 1 + len(rel.attributes)
        if len(args) != want:
            self.add(
                "BadArity",
                where,
                f"{rel_name} expects {want} arguments, got {len(args)}",
            )
            return
        t0 = self.term(args[0], scope, where)
        if t0 is not None and t0 != id_type(rel_name):
            self.add(
                "TypeMismatch",
                where,
                f"key argument of {rel_name} has type {t0}, expected {rel_name}",
            )
        for attr, arg in zip(rel.attributes, args[1:]):
            ta = self.term(arg, scope, where)
            if ta is not None and ta != attr.vtype:
                self.add(
                    "TypeMismatch",
                    where,
                    f"argument for {rel_name}.{attr.name} has type {ta}, "
                    f"expected {attr.vtype}",
                )

    def condition(
        self,
        cond: Condition,
        scope: dict[str, VarType],
        where: str,
        *,
        allow_exists: bool,
        positive: bool = True,
        at_prefix: bool = True,
    ) -> None:
        match cond:
            case TrueCond() | FalseCond():
                pass
            case Equal(l, r) | NotEqual(l, r):
                self.equality(l, r, scope, where)
            case RelAtom(rel, args) | NegRelAtom(rel, args):
                self.rel_atom(rel, args, scope, where)
            case Not(x):
                self.condition(
                    x, scope, where,
                    allow_exists=allow_exists, positive=not positive, at_prefix=False,
                )
            case And(l, r) | Or(l, r):
                self.condition(
                    l, scope, where,
                    allow_exists=allow_exists, positive=positive, at_prefix=False,
                )
                self.condition(
                    r, scope, where,
                    allow_exists=allow_exists, positive=positive, at_prefix=False,
                )
            case Exists(bound, body):
                if not allow_exists:
                    self.add(
                        "ExistsNotAllowed",
                        where,
                        "existential quantifiers are only allowed in service "
                        "pre- and post-conditions",
                    )
                elif not positive:
                    self.add(
                        "ExistsUnderNegation",
                        where,
                        "existential quantifier in a negative position",
                    )
                elif not at_prefix:
                    self.add(
                        "ExistsNotPrefix",
                        where,
                        "existential quantifiers must form a prefix of the condition",
                    )
                inner = dict(scope)
                seen: set[str] = set()
                for name, vtype in bound:
                    if name in seen:
                        self.add("DuplicateName", where, f"duplicate witness {name!r}")
                    seen.add(name)
                    if vtype.is_id and self.schema.relation(vtype.relation) is None:
                        self.add(
                            "UnknownRelation",
                            where,
                            f"witness {name!r} has unknown type {vtype}",
                        )
                    inner[name] = vtype
                self.condition(
                    body, inner, where,
                    allow_exists=allow_exists, positive=positive, at_prefix=at_prefix,
                )


def _schema_cycle(schema: DatabaseSchema) -> list[str] | None:
    """A foreign-key cycle as a relation name list, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {rel.name: WHITE for rel in schema.relations}
    stack: list[str] = []

    def visit(name: str) -> list[str] | None:
        color[name] = GREY
        stack.append(name)
        rel = schema.relation(name)
        if rel is not None:
            for attr in rel.attributes:
                if attr.is_fk and attr.ref in color:
                    if color[attr.ref] == GREY:
                        return stack[stack.index(attr.ref):] + [attr.ref]
                    if color[attr.ref] == WHITE:
                        found = visit(attr.ref)
                        if found:
                            return found
        color[name] = BLACK
        stack.pop()
        return None

    for rel in schema.relations:
        if color[rel.name] == WHITE:
            found = visit(rel.name)
            if found:
                return found
    return None


def validate(spec: TasSpec, properties: tuple[LtlFo, ...] = ()) -> list[Diagnostic]:
    """Check a spec (and optional properties) for well-formedness.

    Returns an empty list when the spec is usable by the rest of the
    pipeline.  Pure and deterministic; diagnostics identify the offending
    construct by name, never by position, so reordering declarations yields
    the same multiset.
    """
    chk = _Check(spec.schema)

    seen_rel: set[str] = set()
    for rel in spec.schema.relations:
        where = f"relation {rel.name}"
        if rel.name in seen_rel:
            chk.add("DuplicateName", where, "duplicate relation name")
        seen_rel.add(rel.name)
        seen_attr: set[str] = set()
        for attr in rel.attributes:
            if attr.name in seen_attr or attr.name == "id":
                chk.add(
                    "DuplicateName", where, f"duplicate or reserved attribute {attr.name!r}"
                )
            seen_attr.add(attr.name)
            if attr.is_fk and spec.schema.relation(attr.ref) is None:
                chk.add(
                    "UnknownRelation",
                    where,
                    f"foreign key {attr.name} references unknown relation {attr.ref!r}",
                )
    cycle = _schema_cycle(spec.schema)
    if cycle is not None:
        chk.add("CyclicSchema", "schema", "foreign keys form a cycle: " + " -> ".join(cycle))

    scope: dict[str, VarType] = {}
    for name, vtype in spec.variables:
        where = f"variable {name}"
        if name in scope:
            chk.add("DuplicateName", where, "duplicate variable name")
        if vtype.is_id and spec.schema.relation(vtype.relation) is None:
            chk.add("UnknownRelation", where, f"unknown relation {vtype.relation!r}")
        scope[name] = vtype

    if cycle is not None:
        return chk.out  # navigation below would not terminate

    chk.condition(spec.init_cond, scope, "init", allow_exists=False)

    if not spec.services:
        chk.add("NoServices", "spec", "a spec needs at least one service")
    seen_svc: set[str] = set()
    for svc in spec.services:
        where = f"service {svc.name}"
        if svc.name in seen_svc or svc.name == INIT_SERVICE:
            chk.add("DuplicateName", where, "duplicate or reserved service name")
        seen_svc.add(svc.name)
        seen_prop: set[str] = set()
        for v in svc.propagated:
            if v not in scope:
                chk.add("UnknownVariable", where, f"propagated variable {v!r} not declared")
            if v in seen_prop:
                chk.add("DuplicateName", where, f"variable {v!r} propagated twice")
            seen_prop.add(v)
        chk.condition(svc.pre, scope, where + " pre", allow_exists=True)
        chk.condition(svc.post, scope, where + " post", allow_exists=True)

    for prop in properties:
        where = f"property {prop.name}"
        pscope = dict(scope)
        seen_globals: set[str] = set()
        for name, vtype in prop.globals_:
            if name in seen_globals:
                chk.add("DuplicateName", where, f"duplicate global {name!r}")
            seen_globals.add(name)
            if vtype.is_id and spec.schema.relation(vtype.relation) is None:
                chk.add("UnknownRelation", where, f"global {name!r} has unknown type {vtype}")
            pscope[name] = vtype
        for cond in ltl_conditions(prop.formula):
            chk.condition(cond, pscope, where, allow_exists=False)
        for svc_name in ltl_service_names(prop.formula):
            if spec.service(svc_name) is None and svc_name != INIT_SERVICE:
                chk.add("UnknownService", where, f"unknown service {svc_name!r}")

    return chk.out


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------


def to_nnf(cond: Condition) -> Condition:
    """Push negations onto atoms; the result uses only And/Or over literals.

    Rejects quantified input: hoist existentials with
    :func:`desugar_exists` first.
    """

    def pos(c: Condition) -> Condition:
        match c:
            case Not(x):
                return neg(x)
            case And(l, r):
                return And(pos(l), pos(r))
            case Or(l, r):
                return Or(pos(l), pos(r))
            case Exists():
                raise TasError("to_nnf: condition still contains a quantifier")
            case _:
                return c

    def neg(c: Condition) -> Condition:
        match c:
            case TrueCond():
                return FalseCond()
            case FalseCond():
                return TrueCond()
            case Equal(l, r):
                return NotEqual(l, r)
            case NotEqual(l, r):
                return Equal(l, r)
            case RelAtom(rel, args):
                return NegRelAtom(rel, args)
            case NegRelAtom(rel, args):
                return RelAtom(rel, args)
            case Not(x):
                return pos(x)
            case And(l, r):
                return Or(neg(l), neg(r))
            case Or(l, r):
                return And(neg(l), neg(r))
            case Exists():
                raise TasError("to_nnf: condition still contains a quantifier")
        raise TasError(f"to_nnf: unsupported condition {c!r}")

    return pos(cond)


# ---------------------------------------------------------------------------
# Existential elimination
# ---------------------------------------------------------------------------


def _fresh_name(base: str, taken: set[str], infix: str) -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}{infix}{k}" in taken:
        k += 1
    return f"{base}{infix}{k}"


def desugar_exists(spec: TasSpec) -> TasSpec:
    """Hoist existential prefixes of service conditions into fresh variables.

    Each witness becomes an artifact variable of the same type.  A witness of
    a pre-condition is propagated by no service, so every transition guesses
    it anew and the guard sees an arbitrary guess made one step earlier; the
    set of runs projected on the original variables is unchanged.  A witness
    of a post-condition is only ever read by the service that owns it, at the
    moment that service rewrites it, so every other service propagates it and
    the initial states pin it (``scratch_vars``); this keeps the state space
    free of dead nondeterminism.

    Raises ``TasError`` on quantifiers in any other position.
    """
    taken = {name for name, _ in spec.variables}
    new_vars: list[tuple[str, VarType]] = []
    scratch: list[str] = list(spec.scratch_vars)
    # service name -> witnesses introduced for its post-condition
    post_witnesses: dict[str, list[str]] = {}
    stripped: dict[tuple[str, str], Condition] = {}

    def check_no_exists(c: Condition, where: str, *, under_not: bool = False) -> None:
        match c:
            case Exists():
                code = "ExistsUnderNegation" if under_not else "ExistsNotPrefix"
                raise TasError(f"{code}: quantifier not in prefix position in {where}")
            case Not(operand=inner):
                check_no_exists(inner, where, under_not=True)
            case And(left=left, right=right) | Or(left=left, right=right):
                check_no_exists(left, where, under_not=under_not)
                check_no_exists(right, where, under_not=under_not)
            case _:
                pass

    def strip(c: Condition, where: str, collected: list[tuple[str, VarType]]) -> Condition:
        while isinstance(c, Exists):
            collected.extend(c.bound)
            c = c.body
        check_no_exists(c, where)
        return c

    check_no_exists(spec.init_cond, "init")

    for svc in spec.services:
        for kind in ("pre", "post"):
            cond = svc.pre if kind == "pre" else svc.post
            bound: list[tuple[str, VarType]] = []
            body = strip(cond, f"service {svc.name} {kind}", bound)
            renames: dict[str, str] = {}
            for name, vtype in bound:
                fresh = _fresh_name(name, taken, "__e")
                taken.add(fresh)
                if fresh != name:
                    renames[name] = fresh
                new_vars.append((fresh, vtype))
                if kind == "post":
                    post_witnesses.setdefault(svc.name, []).append(fresh)
                    scratch.append(fresh)
            if renames:
                body = rename_condition_vars(body, renames)
            stripped[(svc.name, kind)] = body

    if not new_vars:
        return spec

    witness_names = [name for name, _ in new_vars]
    services = []
    for svc in spec.services:
        own_post = set(post_witnesses.get(svc.name, ()))
        extra = tuple(
            w for w in witness_names
            if w in {x for xs in post_witnesses.values() for x in xs} and w not in own_post
        )
        services.append(
            Service(
                name=svc.name,
                pre=stripped[(svc.name, "pre")],
                post=stripped[(svc.name, "post")],
                propagated=svc.propagated + extra,
            )
        )

    return TasSpec(
        schema=spec.schema,
        variables=spec.variables + tuple(new_vars),
        init_cond=spec.init_cond,
        services=tuple(services),
        scratch_vars=tuple(scratch),
    )


# ---------------------------------------------------------------------------
# Global variable elimination
# ---------------------------------------------------------------------------


def eliminate_globals(spec: TasSpec, prop: LtlFo) -> tuple[TasSpec, LtlFo]:
    """Fold a property's universally quantified globals into the spec.

    Each global becomes an artifact variable propagated by every service:
    it is fixed nondeterministically at the start of a run and never changes,
    which is exactly universal quantification once all runs are explored.
    Name clashes with existing variables are renamed deterministically.
    Applying the function again is the identity (no globals remain).
    """
    if not prop.globals_:
        return spec, prop

    taken = {name for name, _ in spec.variables}
    renames: dict[str, str] = {}
    new_vars: list[tuple[str, VarType]] = []
    for name, vtype in prop.globals_:
        fresh = _fresh_name(name, taken, "__g")
        taken.add(fresh)
        if fresh != name:
            renames[name] = fresh
        new_vars.append((fresh, vtype))

    formula = prop.formula
    if renames:
        formula = ltl_map_conditions(formula, lambda c: rename_condition_vars(c, renames))

    new_names = tuple(name for name, _ in new_vars)
    services = tuple(
        replace(svc, propagated=svc.propagated + new_names) for svc in spec.services
    )
    spec2 = replace(spec, variables=spec.variables + tuple(new_vars), services=services)
    return spec2, LtlFo(name=prop.name, globals_=(), formula=formula)


def collect_constants(spec: TasSpec, properties: tuple[LtlFo, ...] = ()) -> dict[VarType, list[str]]:
    """Named data constants appearing anywhere in the spec or properties,
    keyed by type, in first-occurrence order.  Null constants are added by
    the navigation-set builder, not here."""
    out: dict[VarType, list[str]] = {}

    def see(term: Term) -> None:
        if isinstance(term, ConstTerm):
            names = out.setdefault(VAL, [])
            if term.value not in names:
                names.append(term.value)

    conds: list[Condition] = [spec.init_cond]
    for svc in spec.services:
        conds.append(svc.pre)
        conds.append(svc.post)
    for prop in properties:
        conds.extend(ltl_conditions(prop.formula))
    for cond in conds:
        for term in condition_terms(cond):
            see(term)
    return out
