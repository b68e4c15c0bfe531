"""Surface syntax for tuple artifact systems.

A spec file has a fixed block order: ``schema``, ``variables``, ``init``,
one or more ``service`` blocks, then any number of ``property`` blocks.
Conditions use C-style operators (&&, ||, !, ==, !=, and -> as sugar that
parses to !a || b); terms are variables, foreign-key paths written with
dots, string literals, or ``null``.  Temporal formulas use G, F, X, U and
the same boolean operators; a parenthesized group that parses completely as
a condition is one atomic proposition, anything else is temporal structure.

``parse_spec`` and ``render_spec`` are inverse enough that
``parse_spec(render_spec(s)) == s`` structurally for any parser-shaped spec.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    And,
    Attribute,
    Condition,
    CondProp,
    ConstTerm,
    DatabaseSchema,
    Equal,
    Eventually,
    Exists,
    FalseCond,
    Ltl,
    LtlAnd,
    LtlFalse,
    LtlFo,
    LtlNot,
    LtlOr,
    LtlTrue,
    NegRelAtom,
    Next,
    Not,
    NotEqual,
    NullTerm,
    Or,
    Relation,
    Release,
    RelAtom,
    Service,
    ServiceProp,
    TasError,
    TasSpec,
    Term,
    TrueCond,
    Until,
    VAL,
    VarTerm,
    VarType,
    Always,
)

# Names that the grammar claims for itself; they cannot be declared.
RESERVED = frozenset(
    {
        "schema", "relation", "id", "VAL", "variables", "init", "service",
        "pre", "propagate", "post", "property", "forall", "exists", "null",
        "true", "false", "G", "F", "X", "U",
    }
)


class SpecSyntaxError(TasError):
    """Parse failure with a stable code and a 1-based source position."""

    def __init__(self, code: str, message: str, line: int, col: int):
        super().__init__(f"{code} at {line}:{col}: {message}")
        self.code = code
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class ParsedSpec:
    spec: TasSpec
    properties: tuple[LtlFo, ...]


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_PUNCT = ("==", "!=", "&&", "||", "->", "{", "}", "(", ")", ":", ";", ",", ".", "!")


@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" | "string" | "punct" | "eof"
    text: str
    line: int
    col: int


def _lex(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(code: str, message: str) -> SpecSyntaxError:
        return SpecSyntaxError(code, message, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf: list[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    raise SpecSyntaxError(
                        "SyntaxError", "unterminated string literal", start_line, start_col
                    )
                c = text[i]
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in '\\"':
                        raise err("SyntaxError", "bad escape in string literal")
                    buf.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                buf.append(c)
                i += 1
                col += 1
            tokens.append(_Token("string", "".join(buf), start_line, start_col))
            continue
        if ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(_Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise err("SyntaxError", f"unexpected character {ch!r}")
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def at_punct(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == text

    def at_word(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "ident" and t.text == text

    def take(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, message: str, code: str = "SyntaxError") -> SpecSyntaxError:
        t = self.peek()
        return SpecSyntaxError(code, message, t.line, t.col)

    def expect_punct(self, text: str) -> _Token:
        if not self.at_punct(text):
            raise self.fail(f"expected {text!r}, found {self.peek().text!r}")
        return self.take()

    def expect_word(self, text: str) -> _Token:
        if not self.at_word(text):
            raise self.fail(f"expected {text!r}, found {self.peek().text!r}")
        return self.take()

    def expect_name(self, what: str) -> str:
        t = self.peek()
        if t.kind != "ident":
            raise self.fail(f"expected a {what} name, found {t.text!r}")
        if t.text in RESERVED:
            raise self.fail(f"{t.text!r} is a reserved word and cannot name a {what}")
        return self.take().text

    # -- toplevel

    def parse(self) -> ParsedSpec:
        if self.peek().kind == "eof":
            raise self.fail("input contains no spec", code="EmptySpec")
        schema = self.parse_schema()
        variables = self.parse_variables()
        self.expect_word("init")
        self.expect_punct(":")
        init_cond = self.parse_condition()
        self.expect_punct(";")
        services: list[Service] = []
        while self.at_word("service"):
            services.append(self.parse_service())
        properties: list[LtlFo] = []
        while self.at_word("property"):
            properties.append(self.parse_property())
        if self.peek().kind != "eof":
            raise self.fail(f"unexpected trailing input {self.peek().text!r}")
        spec = TasSpec(
            schema=schema,
            variables=tuple(variables),
            init_cond=init_cond,
            services=tuple(services),
        )
        return ParsedSpec(spec=spec, properties=tuple(properties))

    def parse_schema(self) -> DatabaseSchema:
        self.expect_word("schema")
        self.expect_punct("{")
        relations: list[Relation] = []
        while self.at_word("relation"):
            self.take()
            name = self.expect_name("relation")
            self.expect_punct("{")
            self.expect_word("id")
            self.expect_punct(";")
            attrs: list[Attribute] = []
            while not self.at_punct("}"):
                attr_name = self.expect_name("attribute")
                self.expect_punct(":")
                if self.at_punct("->"):
                    self.take()
                    ref = self.expect_name("relation")
                    attrs.append(Attribute(attr_name, ref=ref))
                else:
                    self.expect_word("VAL")
                    attrs.append(Attribute(attr_name))
                self.expect_punct(";")
            self.expect_punct("}")
            relations.append(Relation(name, tuple(attrs)))
        self.expect_punct("}")
        return DatabaseSchema(tuple(relations))

    def parse_type(self) -> VarType:
        if self.at_word("VAL"):
            self.take()
            return VAL
        return VarType(self.expect_name("relation"))

    def parse_variables(self) -> list[tuple[str, VarType]]:
        self.expect_word("variables")
        self.expect_punct("{")
        out: list[tuple[str, VarType]] = []
        while not self.at_punct("}"):
            name = self.expect_name("variable")
            self.expect_punct(":")
            out.append((name, self.parse_type()))
            self.expect_punct(";")
        self.expect_punct("}")
        return out

    def parse_service(self) -> Service:
        self.expect_word("service")
        name = self.expect_name("service")
        self.expect_punct("{")
        self.expect_word("pre")
        self.expect_punct(":")
        pre = self.parse_condition()
        self.expect_punct(";")
        self.expect_word("propagate")
        self.expect_punct(":")
        propagated: list[str] = []
        if not self.at_punct(";"):
            propagated.append(self.expect_name("variable"))
            while self.at_punct(","):
                self.take()
                propagated.append(self.expect_name("variable"))
        self.expect_punct(";")
        self.expect_word("post")
        self.expect_punct(":")
        post = self.parse_condition()
        self.expect_punct(";")
        self.expect_punct("}")
        return Service(name=name, pre=pre, post=post, propagated=tuple(propagated))

    def parse_typed_vars(self) -> list[tuple[str, VarType]]:
        out = [(self.expect_name("variable"), self._typed_var_type())]
        while self.at_punct(","):
            self.take()
            out.append((self.expect_name("variable"), self._typed_var_type()))
        return out

    def _typed_var_type(self) -> VarType:
        self.expect_punct(":")
        return self.parse_type()

    # -- conditions

    def parse_condition(self) -> Condition:
        if self.at_word("exists"):
            self.take()
            bound = self.parse_typed_vars()
            self.expect_punct(".")
            return Exists(tuple(bound), self.parse_condition())
        return self.parse_cond_implies()

    def parse_cond_implies(self) -> Condition:
        left = self.parse_cond_or()
        if self.at_punct("->"):
            self.take()
            right = self.parse_cond_implies()
            return Or(Not(left), right)
        return left

    def parse_cond_or(self) -> Condition:
        left = self.parse_cond_and()
        while self.at_punct("||"):
            self.take()
            left = Or(left, self.parse_cond_and())
        return left

    def parse_cond_and(self) -> Condition:
        left = self.parse_cond_unary()
        while self.at_punct("&&"):
            self.take()
            left = And(left, self.parse_cond_unary())
        return left

    def parse_cond_unary(self) -> Condition:
        if self.at_punct("!"):
            self.take()
            return Not(self.parse_cond_unary())
        return self.parse_cond_atom()

    def parse_cond_atom(self) -> Condition:
        t = self.peek()
        if self.at_punct("("):
            self.take()
            inner = self.parse_cond_implies()
            self.expect_punct(")")
            return inner
        if self.at_word("true"):
            self.take()
            return TrueCond()
        if self.at_word("false"):
            self.take()
            return FalseCond()
        if t.kind == "ident" and t.text in RESERVED and not self.at_word("null"):
            raise self.fail(f"{t.text!r} cannot start a condition atom")
        if t.kind == "ident" and self.tokens[self.pos + 1].kind == "punct" \
                and self.tokens[self.pos + 1].text == "(":
            rel = self.take().text
            self.take()  # "("
            args: list[Term] = [self.parse_term()]
            while self.at_punct(","):
                self.take()
                args.append(self.parse_term())
            self.expect_punct(")")
            return RelAtom(rel, tuple(args))
        left = self.parse_term()
        if self.at_punct("=="):
            self.take()
            return Equal(left, self.parse_term())
        if self.at_punct("!="):
            self.take()
            return NotEqual(left, self.parse_term())
        raise self.fail("expected '==' or '!=' after a term")

    def parse_term(self) -> Term:
        t = self.peek()
        if t.kind == "string":
            return ConstTerm(self.take().text)
        if self.at_word("null"):
            self.take()
            return NullTerm()
        name = self.expect_name("variable")
        path: list[str] = []
        while self.at_punct("."):
            self.take()
            path.append(self.expect_name("attribute"))
        return VarTerm(name, tuple(path))

    # -- temporal formulas

    def parse_property(self) -> LtlFo:
        self.expect_word("property")
        name = self.expect_name("property")
        self.expect_punct(":")
        globals_: tuple[tuple[str, VarType], ...] = ()
        if self.at_word("forall"):
            self.take()
            globals_ = tuple(self.parse_typed_vars())
            self.expect_punct(".")
        formula = self.parse_ltl()
        self.expect_punct(";")
        return LtlFo(name=name, globals_=globals_, formula=formula)

    def parse_ltl(self) -> Ltl:
        left = self.parse_ltl_or()
        if self.at_punct("->"):
            self.take()
            right = self.parse_ltl()
            return LtlOr(LtlNot(left), right)
        return left

    def parse_ltl_or(self) -> Ltl:
        left = self.parse_ltl_and()
        while self.at_punct("||"):
            self.take()
            left = LtlOr(left, self.parse_ltl_and())
        return left

    def parse_ltl_and(self) -> Ltl:
        left = self.parse_ltl_until()
        while self.at_punct("&&"):
            self.take()
            left = LtlAnd(left, self.parse_ltl_until())
        return left

    def parse_ltl_until(self) -> Ltl:
        left = self.parse_ltl_unary()
        if self.at_word("U"):
            self.take()
            return Until(left, self.parse_ltl_until())
        return left

    def parse_ltl_unary(self) -> Ltl:
        if self.at_punct("!"):
            self.take()
            return LtlNot(self.parse_ltl_unary())
        if self.at_word("G"):
            self.take()
            return Always(self.parse_ltl_unary())
        if self.at_word("F"):
            self.take()
            return Eventually(self.parse_ltl_unary())
        if self.at_word("X"):
            self.take()
            return Next(self.parse_ltl_unary())
        return self.parse_ltl_atom()

    def parse_ltl_atom(self) -> Ltl:
        if self.at_word("true"):
            self.take()
            return LtlTrue()
        if self.at_word("false"):
            self.take()
            return LtlFalse()
        if self.at_word("service"):
            self.take()
            self.expect_punct("(")
            t = self.peek()
            if t.kind != "ident":
                raise self.fail("expected a service name")
            name = self.take().text
            self.expect_punct(")")
            return ServiceProp(name)
        if self.at_punct("("):
            self.take()
            # A group that reads completely as a condition is one proposition;
            # otherwise it is temporal structure.
            saved = self.pos
            try:
                cond = self.parse_cond_implies()
                self.expect_punct(")")
                return CondProp(cond)
            except SpecSyntaxError:
                self.pos = saved
            inner = self.parse_ltl()
            self.expect_punct(")")
            return inner
        raise self.fail(
            f"expected a temporal formula, found {self.peek().text!r} "
            "(conditions must be parenthesized)"
        )


def parse_spec(text: str) -> ParsedSpec:
    """Parse a spec file; raises :class:`SpecSyntaxError` on malformed input."""
    return _Parser(_lex(text)).parse()


def parse_condition(text: str) -> Condition:
    """Parse a single condition (used by tests and tooling)."""
    p = _Parser(_lex(text))
    cond = p.parse_condition()
    if p.peek().kind != "eof":
        raise p.fail("unexpected trailing input after condition")
    return cond


# ---------------------------------------------------------------------------
# Renderer
# ---------------------------------------------------------------------------


def render_term(term: Term) -> str:
    match term:
        case VarTerm():
            return str(term)
        case ConstTerm(value):
            escaped = value.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        case NullTerm():
            return "null"
    raise TasError(f"cannot render term {term!r}")


_COND_PREC = {"or": 1, "and": 2, "not": 3, "atom": 4}


def render_condition(cond: Condition) -> str:
    def prec(c: Condition) -> int:
        match c:
            case Or():
                return _COND_PREC["or"]
            case And():
                return _COND_PREC["and"]
            case Not():
                return _COND_PREC["not"]
            case Exists():
                return 0
            case _:
                return _COND_PREC["atom"]

    def wrap(child: Condition, parent_prec: int, *, right_of_same: bool = False) -> str:
        text = walk(child)
        p = prec(child)
        if p < parent_prec or (right_of_same and p == parent_prec):
            return f"({text})"
        return text

    def walk(c: Condition) -> str:
        match c:
            case TrueCond():
                return "true"
            case FalseCond():
                return "false"
            case Equal(l, r):
                return f"{render_term(l)} == {render_term(r)}"
            case NotEqual(l, r):
                return f"{render_term(l)} != {render_term(r)}"
            case RelAtom(rel, args):
                return f"{rel}({', '.join(render_term(a) for a in args)})"
            case NegRelAtom(rel, args):
                return f"!{rel}({', '.join(render_term(a) for a in args)})"
            case Not(x):
                return "!" + wrap(x, _COND_PREC["not"], right_of_same=False)
            case And(l, r):
                return (
                    wrap(l, _COND_PREC["and"])
                    + " && "
                    + wrap(r, _COND_PREC["and"], right_of_same=True)
                )
            case Or(l, r):
                return (
                    wrap(l, _COND_PREC["or"])
                    + " || "
                    + wrap(r, _COND_PREC["or"], right_of_same=True)
                )
            case Exists(bound, body):
                names = ", ".join(f"{n}: {t}" for n, t in bound)
                return f"exists {names} . {walk(body)}"
        raise TasError(f"cannot render condition {c!r}")

    return walk(cond)


_LTL_PREC = {"or": 1, "and": 2, "until": 3, "unary": 4, "atom": 5}


def render_ltl(f: Ltl) -> str:
    def prec(g: Ltl) -> int:
        match g:
            case LtlOr():
                return _LTL_PREC["or"]
            case LtlAnd():
                return _LTL_PREC["and"]
            case Until() | Release():
                return _LTL_PREC["until"]
            case LtlNot() | Next() | Always() | Eventually():
                return _LTL_PREC["unary"]
            case _:
                return _LTL_PREC["atom"]

    def wrap(child: Ltl, parent_prec: int, *, tight: bool = False) -> str:
        text = walk(child)
        p = prec(child)
        if p < parent_prec or (tight and p == parent_prec):
            return f"({text})"
        return text

    def walk(g: Ltl) -> str:
        match g:
            case LtlTrue():
                return "true"
            case LtlFalse():
                return "false"
            case CondProp(c):
                return f"({render_condition(c)})"
            case ServiceProp(s):
                return f"service({s})"
            case LtlNot(x):
                return "!" + wrap(x, _LTL_PREC["unary"])
            case Next(x):
                return "X " + wrap(x, _LTL_PREC["unary"])
            case Always(x):
                return "G " + wrap(x, _LTL_PREC["unary"])
            case Eventually(x):
                return "F " + wrap(x, _LTL_PREC["unary"])
            case Until(l, r):
                return (
                    wrap(l, _LTL_PREC["until"], tight=True)
                    + " U "
                    + wrap(r, _LTL_PREC["until"])
                )
            case Release(l, r):
                raise TasError("release is internal to the automaton layer")
            case LtlAnd(l, r):
                return (
                    wrap(l, _LTL_PREC["and"]) + " && " + wrap(r, _LTL_PREC["and"], tight=True)
                )
            case LtlOr(l, r):
                return (
                    wrap(l, _LTL_PREC["or"]) + " || " + wrap(r, _LTL_PREC["or"], tight=True)
                )
        raise TasError(f"cannot render formula {g!r}")

    return walk(f)


def render_spec(spec: TasSpec, properties: tuple[LtlFo, ...] = ()) -> str:
    """Canonical text for a spec; parses back to the same structures."""
    lines: list[str] = []
    lines.append("schema {")
    for rel in spec.schema.relations:
        lines.append(f"  relation {rel.name} {{")
        lines.append("    id;")
        for attr in rel.attributes:
            if attr.is_fk:
                lines.append(f"    {attr.name}: -> {attr.ref};")
            else:
                lines.append(f"    {attr.name}: VAL;")
        lines.append("  }")
    lines.append("}")
    lines.append("")
    lines.append("variables {")
    for name, vtype in spec.variables:
        lines.append(f"  {name}: {vtype};")
    lines.append("}")
    lines.append("")
    lines.append(f"init: {render_condition(spec.init_cond)};")
    for svc in spec.services:
        lines.append("")
        lines.append(f"service {svc.name} {{")
        lines.append(f"  pre: {render_condition(svc.pre)};")
        lines.append(f"  propagate: {', '.join(svc.propagated)};")
        lines.append(f"  post: {render_condition(svc.post)};")
        lines.append("}")
    for prop in properties:
        lines.append("")
        head = f"property {prop.name}:"
        if prop.globals_:
            head += " forall " + ", ".join(f"{n}: {t}" for n, t in prop.globals_) + " ."
        lines.append(f"{head} {render_ltl(prop.formula)};")
    lines.append("")
    return "\n".join(lines)
