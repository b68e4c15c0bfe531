"""Promela text emitter.

Produces the single-process Promela encoding of a spec and property: every
navigation expression becomes a numeric global, every service becomes one
guarded option of a do-loop that reassigns the non-propagated expressions
from their candidate ranges, and the property becomes an ``ltl`` block over
the same identifiers.  Emission is text only; nothing here runs Spin, and
the output exists for golden-structure tests and optional external use.

Two switches mirror the native engine.  With ``ldt`` every emitted
condition is dependency-expanded (:func:`~tascheck.optimize.ldt_rewrite`)
and the per-service key/FK consistency block disappears; without it the
conditions are translated as written and each option ends with the pairwise
consistency test.  With ``asm`` the select ranges come from the minimized
assignment sets; without it every expression draws from one shared range
``0 .. N-1`` sized by the whole navigation set.

Internal statement boundaries are masked by a ``stable`` flag: it drops to
false while an option is rewriting the globals and returns to true once
the snapshot is complete, and every proposition in the ``ltl`` block is
conjoined with it.  The flag scheme is this emitter's own convention.
"""

from __future__ import annotations

from dataclasses import dataclass

from .checker import prepare
from .model import (
    And,
    Condition,
    ConstTerm,
    Equal,
    Exists,
    FalseCond,
    LtlFo,
    Ltl,
    LtlAnd,
    LtlFalse,
    LtlNot,
    LtlOr,
    LtlTrue,
    CondProp,
    ServiceProp,
    Next,
    Until,
    Release,
    Always,
    Eventually,
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
    VAL,
    INIT_SERVICE,
)
from .optimize import ldt_rewrite, rel_atom_components
from .symbolic import Mode, NavigationSet

# Promela keywords and the names the emitted program claims for itself.
_RESERVED = frozenset(
    """active assert atomic bit bool break byte chan d_step do else empty
    enabled eval false fi full goto hidden if inline init int len ltl mtype
    nempty never nfull od of pc_value pid printf priority proctype provided
    run select short show skip timeout true typedef unless unsigned xr xs
    stable last_service""".split()
)


class _Namer:
    """Deterministic identifiers for every navigation expression and
    constant, collision-checked against each other and the keywords."""

    def __init__(self, navset: NavigationSet) -> None:
        self.navset = navset
        self.path_names: list[str] = [
            "_".join((e.root,) + e.path) for e in navset.paths
        ]
        self.const_names: list[str] = []
        named = 0
        for c in navset.constants:
            if c.name is None:
                self.const_names.append(
                    "nullv" if c.vtype == VAL else f"null_{c.vtype.relation}"
                )
            else:
                self.const_names.append(f"c{named}")
                named += 1
        seen: dict[str, str] = {}
        for name, source in zip(
            self.path_names + self.const_names,
            [str(e) for e in navset.paths] + [str(c) for c in navset.constants],
        ):
            if name in _RESERVED:
                raise TasError(f"name collides with a Promela keyword: {name}")
            if name in seen:
                raise TasError(
                    f"identifier collision: {source} and {seen[name]} "
                    f"both flatten to {name}"
                )
            seen[name] = source

    def term(self, term: Term, partner: Term | None) -> str:
        match term:
            case VarTerm(name=name, path=path):
                return self.path_names[self.navset.path_ordinal(name, path)]
            case ConstTerm(value=value):
                ordinal = self.navset.named_ordinal.get(value)
                if ordinal is None:
                    raise TasError(f'constant not in navigation set: "{value}"')
                return self.const_names[ordinal]
            case NullTerm():
                vtype = _null_type(partner, self.navset)
                ordinal = self.navset.null_ordinal.get(vtype)
                if ordinal is None:
                    raise TasError(f"no null constant for type {vtype}")
                return self.const_names[ordinal]
        raise TasError(f"unrenderable term: {term}")


def _null_type(partner: Term | None, navset: NavigationSet):
    match partner:
        case VarTerm(name=name, path=path):
            return navset.path_types[navset.path_ordinal(name, path)]
        case ConstTerm():
            return VAL
    raise TasError("null compared with null: type is undetermined")


# Precedence levels for minimal-parenthesis rendering.  Atoms carry their
# own parentheses, so only an Or nested under an And ever needs wrapping.
_OR, _AND, _ATOM = 1, 2, 3


def _negate_text(text: str, level: int) -> str:
    if level == _ATOM and text.startswith("("):
        return f"!{text}"
    return f"!({text})"


def _render(cond: Condition, namer: _Namer) -> tuple[str, int]:
    match cond:
        case TrueCond():
            return "true", _ATOM
        case FalseCond():
            return "false", _ATOM
        case Equal(left=left, right=right):
            return f"({namer.term(left, right)} == {namer.term(right, left)})", _ATOM
        case NotEqual(left=left, right=right):
            return f"({namer.term(left, right)} != {namer.term(right, left)})", _ATOM
        case RelAtom(args=args) as atom:
            if isinstance(args[0], NullTerm):
                return "false", _ATOM
            parts = [
                f"({namer.term(a, b)} == {namer.term(b, a)})"
                for a, b in rel_atom_components(atom, namer.navset)
            ]
            if not parts:
                return "true", _ATOM
            if len(parts) == 1:
                return parts[0], _ATOM
            return " && ".join(parts), _AND
        case NegRelAtom(relation=relation, args=args):
            if isinstance(args[0], NullTerm):
                return "true", _ATOM
            text, level = _render(RelAtom(relation, args), namer)
            return _negate_text(text, level), _ATOM
        case Not(operand=operand):
            text, level = _render(operand, namer)
            return _negate_text(text, level), _ATOM
        case And(left=left, right=right):
            parts = []
            for side in (left, right):
                text, level = _render(side, namer)
                parts.append(f"({text})" if level < _AND else text)
            return " && ".join(parts), _AND
        case Or(left=left, right=right):
            lt, _ = _render(left, namer)
            rt, _ = _render(right, namer)
            return f"{lt} || {rt}", _OR
        case Exists():
            raise TasError("cannot translate a quantified condition")
    raise TasError(f"cannot translate condition: {cond}")


def translate_condition(cond: Condition, navset: NavigationSet) -> str:
    """C-style boolean text of a quantifier-free condition.

    Equality and inequality atoms render parenthesized over flattened
    identifiers (``x.A`` becomes ``x_A``); a relational atom becomes the
    conjunction of its componentwise equalities, with no null test on the
    key; named constants render as ``c0 .. cn-1`` in first-occurrence
    order and nulls as ``nullv`` or ``null_<REL>``.
    """
    return _render(cond, _Namer(navset))[0]


# ---------------------------------------------------------------------------
# Whole-program emission
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PromelaProgram:
    """Emitted program text, split at the section boundaries: global
    declarations, the initial-snapshot statements, the service do-loop and
    the ltl block.  ``service_options`` repeats the loop's options one by
    one for size measurements."""

    declarations: str
    init_block: str
    loop: str
    ltl_block: str
    service_options: tuple[str, ...]

    @property
    def text(self) -> str:
        return "\n".join(
            [
                self.declarations,
                "",
                "active proctype system() {",
                self.init_block,
                self.loop,
                "}",
                "",
                self.ltl_block,
                "",
            ]
        )


def _check_block(guard: str, label: str, indent: str) -> list[str]:
    return [
        f"{indent}/* {label} */",
        f"{indent}if",
        f"{indent}:: ({guard}) -> skip;",
        f"{indent}fi;",
    ]


def _congruence_text(namer: _Namer) -> str:
    """The pairwise key/FK agreement test: equal id expressions must agree
    on every aligned child."""
    navset = namer.navset
    clauses = []
    for i, j, kids in navset.congruence_pairs:
        a, b = namer.path_names[i], namer.path_names[j]
        agree = " && ".join(
            f"{namer.path_names[ci]} == {namer.path_names[cj]}" for ci, cj in kids
        )
        if len(kids) > 1:
            agree = f"({agree})"
        clauses.append(f"({a} != {b} || {agree})")
    return " && ".join(clauses)


def _ltl_text(formula: Ltl, namer: _Namer, service_codes: dict[str, str], rewrite) -> str:
    def walk(f: Ltl) -> str:
        match f:
            case LtlTrue():
                return "true"
            case LtlFalse():
                return "false"
            case CondProp(cond=cond):
                return f"(stable && {_guarded(rewrite(cond), namer)})"
            case ServiceProp(service=service):
                return f"(stable && (last_service == {service_codes[service]}))"
            case LtlNot(operand=operand):
                return f"! {walk(operand)}"
            case LtlAnd(left=left, right=right):
                return f"({walk(left)} && {walk(right)})"
            case LtlOr(left=left, right=right):
                return f"({walk(left)} || {walk(right)})"
            case Next(operand=operand):
                return f"X {walk(operand)}"
            case Until(left=left, right=right):
                return f"({walk(left)} U {walk(right)})"
            case Release(left=left, right=right):
                return f"({walk(left)} V {walk(right)})"
            case Always(operand=operand):
                return f"[] {walk(operand)}"
            case Eventually(operand=operand):
                return f"<> {walk(operand)}"
        raise TasError(f"cannot translate formula: {f}")

    return walk(formula)


def _guarded(cond: Condition, namer: _Namer) -> str:
    text, level = _render(cond, namer)
    return text if level == _ATOM else f"({text})"


def emit(
    spec: TasSpec, prop: LtlFo, *, ldt: bool = False, asm: bool = False
) -> PromelaProgram:
    """Emit the Promela program for ``spec`` and ``prop``.

    Each service becomes one do-loop option: guard on the translated
    pre-condition, one ``select`` per non-propagated expression, an if-block
    validating the translated post-condition and, without ``ldt``, an
    if-block validating pairwise key/FK agreement.  With ``asm`` the select
    bounds are the minimized per-expression ranges; otherwise every select
    draws from ``0 .. N-1`` with N the navigation-set size and constants
    pinned to the first N values.  The ltl block restates the property with
    every proposition guarded by the ``stable`` flag.
    """
    mode = Mode.LDT if ldt else Mode.NAIVE
    flat, tprop, navset, pools = prepare(spec, prop, mode, asm)
    if asm:
        const_values = pools.const_values
        ranges = pools.ranges
    else:
        const_values = tuple(range(navset.n_constants))
        top = len(navset.exprs) - 1
        ranges = tuple((0, top) for _ in range(navset.n_paths))
    namer = _Namer(navset)
    rewrite = (lambda c: ldt_rewrite(c, navset)) if ldt else (lambda c: c)
    congruence = "" if ldt else _congruence_text(namer)

    lines = [f"/* {spec_title(flat, tprop)} */"]
    for name, value in zip(namer.const_names, const_values):
        lines.append(f"#define {name} {value}")
    service_codes = {INIT_SERVICE: "S_init"}
    lines.append("#define S_init 0")
    taken = set(namer.path_names) | set(namer.const_names)
    for k, svc in enumerate(flat.services, start=1):
        code = f"S_{svc.name}"
        if code in taken:
            raise TasError(f"identifier collision: {code}")
        service_codes[svc.name] = code
        lines.append(f"#define {code} {k}")
    width = "byte" if max((hi for _, hi in ranges), default=0) <= 255 else "int"
    for name in namer.path_names:
        lines.append(f"{width} {name};")
    count_width = "byte" if len(flat.services) <= 255 else "int"
    lines.append(f"{count_width} last_service;")
    lines.append("bool stable;")
    declarations = "\n".join(lines)

    def selects(ordinals, indent: str) -> list[str]:
        return [
            f"{indent}select({namer.path_names[o]} : {ranges[o][0]} .. {ranges[o][1]});"
            for o in ordinals
        ]

    init_lines = ["  /* initial snapshot */"]
    init_lines += selects(range(navset.n_paths), "  ")
    init_lines += _check_block(
        _render(rewrite(flat.init_cond), namer)[0], "initial condition", "  "
    )
    if congruence:
        init_lines += _check_block(congruence, "key and FK agreement", "  ")
    init_lines.append("  last_service = S_init;")
    init_lines.append("  stable = true;")
    init_block = "\n".join(init_lines)

    options = []
    for svc in flat.services:
        carried = set(navset.rooted_ordinals(svc.propagated))
        fresh = [o for o in range(navset.n_paths) if o not in carried]
        body = [
            f"  /* {svc.name} */",
            f"  :: ({_render(rewrite(svc.pre), namer)[0]}) ->",
            "       stable = false;",
        ]
        body += selects(fresh, "       ")
        body += _check_block(
            _render(rewrite(svc.post), namer)[0], "post-condition", "       "
        )
        if congruence:
            body += _check_block(congruence, "key and FK agreement", "       ")
        body.append(f"       last_service = {service_codes[svc.name]};")
        body.append("       stable = true;")
        options.append("\n".join(body))
    loop = "\n".join(["  do"] + options + ["  od"])

    ltl_body = _ltl_text(tprop.formula, namer, service_codes, rewrite)
    ltl_name = f"p_{tprop.name}" if tprop.name in _RESERVED else tprop.name
    ltl_block = f"ltl {ltl_name} {{ {ltl_body} }}"

    return PromelaProgram(
        declarations, init_block, loop, ltl_block, tuple(options)
    )


def spec_title(spec: TasSpec, prop: LtlFo) -> str:
    services = ", ".join(s.name for s in spec.services)
    return (
        f"{len(spec.variables)} variables; services: {services}; "
        f"property: {prop.name}"
    )
