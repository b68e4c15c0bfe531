"""Benchmark harness: seeded spec generation, the twelve property
templates, batch verification and CSV reporting.

The generator produces small random specs (schema, variables, services)
from a seed, discarding any whose search space is empty, so every surviving
spec has at least one infinite run.  Each spec is paired with one property
per selected template; template propositions are instantiated with
sub-formulas sampled from the spec's own service pre/post conditions, in a
canonical order, by the same seeded stream.  Every (spec, property) pair
runs under all four optimization combinations.

Report format: one CSV row per run with a fixed column set.  The ``ms``
column is always 0 so identical configurations produce identical bytes;
measured times feed only the separate overhead report, which compares each
template's runs against the ``False`` baseline rows and is inherently
machine-dependent.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .checker import (
    CheckOptions,
    Holds,
    ResourceLimit,
    Verdict,
    Violated,
    check,
)
from .model import (
    Always,
    And,
    Attribute,
    CondProp,
    Condition,
    ConstTerm,
    DatabaseSchema,
    Equal,
    Eventually,
    Exists,
    FalseCond,
    LtlAnd,
    LtlFalse,
    LtlFo,
    LtlNot,
    LtlOr,
    Ltl,
    Next,
    Not,
    NotEqual,
    NullTerm,
    Or,
    RelAtom,
    Relation,
    Service,
    TasError,
    TasSpec,
    TrueCond,
    Until,
    VAL,
    VarTerm,
    VarType,
    condition_subformulas,
    collect_constants,
    free_vars,
    id_type,
    validate,
)
from .symbolic import Mode, build_navigation_set


def _rng(*parts: int) -> random.Random:
    """A deterministic stream from integer coordinates (integer seeds only:
    string hashing varies between interpreter runs)."""
    seed = 0
    for p in parts:
        seed = (seed * 1_000_003 + p) % (2**61 - 1)
    return random.Random(seed)


# ---------------------------------------------------------------------------
# Property templates
# ---------------------------------------------------------------------------

TEMPLATE_COUNT = 12

# Human-readable shapes, indexed 1..12 (p, q stand for the two sampled
# conditions).  Template 1 is the False baseline.
TEMPLATE_SHAPES = {
    1: "False",
    2: "G p",
    3: "(!p U q)",
    4: "(!p U q) && G (p -> X (!p U q))",
    5: "G (p -> (q || X q || X X q))",
    6: "G (p || G !p)",
    7: "G (p -> F q)",
    8: "F p",
    9: "G F p -> G F q",
    10: "G F p",
    11: "G (p || G q)",
    12: "F G p -> G F q",
}


def _imp(a: Ltl, b: Ltl) -> Ltl:
    return LtlOr(LtlNot(a), b)


def template_formula(template: int, p: Ltl, q: Ltl) -> Ltl:
    """The template's formula over proposition ``p`` and ``q``."""
    match template:
        case 1:
            return LtlFalse()
        case 2:
            return Always(p)
        case 3:
            return Until(LtlNot(p), q)
        case 4:
            return LtlAnd(
                Until(LtlNot(p), q),
                Always(_imp(p, Next(Until(LtlNot(p), q)))),
            )
        case 5:
            return Always(_imp(p, LtlOr(q, LtlOr(Next(q), Next(Next(q))))))
        case 6:
            return Always(LtlOr(p, Always(LtlNot(p))))
        case 7:
            return Always(_imp(p, Eventually(q)))
        case 8:
            return Eventually(p)
        case 9:
            return _imp(Always(Eventually(p)), Always(Eventually(q)))
        case 10:
            return Always(Eventually(p))
        case 11:
            return Always(LtlOr(p, Always(q)))
        case 12:
            return _imp(Eventually(Always(p)), Always(Eventually(q)))
    raise TasError(f"unknown template: {template}")


def condition_pool(spec: TasSpec) -> list[Condition]:
    """Candidate propositions: the sub-formulas of every service's pre and
    post condition, service order then preorder, first occurrence only.

    Sub-formulas that mention existential witnesses, and bare boolean
    constants, are excluded; a property needs conditions over the spec's
    own variables.
    """
    names = {name for name, _ in spec.variables}
    pool: list[Condition] = []
    seen: set[Condition] = set()
    for svc in spec.services:
        for cond in (svc.pre, svc.post):
            for sub in condition_subformulas(cond):
                if isinstance(sub, (TrueCond, FalseCond)) or sub in seen:
                    continue
                if not free_vars(sub) <= names:
                    continue
                if any(
                    isinstance(inner, Exists)
                    for inner in condition_subformulas(sub)
                ):
                    continue
                seen.add(sub)
                pool.append(sub)
    return pool


def instantiate_template(
    template: int, pool: list[Condition], rng: random.Random
) -> LtlFo:
    """A property for ``template`` with propositions drawn from ``pool``."""
    if not pool:
        raise TasError("empty condition pool")
    p = CondProp(rng.choice(pool))
    q = CondProp(rng.choice(pool))
    return LtlFo(f"t{template}", (), template_formula(template, p, q))


# ---------------------------------------------------------------------------
# Random spec generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchConfig:
    """Generator and batch parameters; the seed fixes everything."""

    seed: int = 0
    relations: int = 2
    variables: int = 3
    services: int = 3
    fk_depth: int = 2
    condition_size: int = 3
    templates: tuple[int, ...] = tuple(range(1, TEMPLATE_COUNT + 1))
    repetitions: int = 5
    max_states: int = 200_000
    max_expressions: int | None = None

    def validated(self) -> BenchConfig:
        for label, count in (
            ("relations", self.relations),
            ("variables", self.variables),
            ("services", self.services),
            ("fk-depth", self.fk_depth),
            ("condition-size", self.condition_size),
            ("repetitions", self.repetitions),
        ):
            if count < 1:
                raise TasError(f"{label} must be at least 1")
        if not self.templates:
            raise TasError("no templates selected")
        for t in self.templates:
            if not 1 <= t <= TEMPLATE_COUNT:
                raise TasError(f"unknown template: {t}")
        return self


_CONSTANTS = ("k0", "k1", "k2")


def _random_schema(rng: random.Random, config: BenchConfig) -> DatabaseSchema:
    relations: list[Relation] = []
    depths: dict[str, int] = {}
    for i in range(config.relations):
        name = f"R{i}"
        attrs: list[Attribute] = []
        depth = 1
        fk_targets = [r for r in relations if depths[r.name] < config.fk_depth]
        for j in range(rng.randint(1, 2)):
            if fk_targets and rng.random() < 0.4:
                target = rng.choice(fk_targets)
                attrs.append(Attribute(f"a{j}", target.name))
                depth = max(depth, depths[target.name] + 1)
            else:
                attrs.append(Attribute(f"a{j}"))
        relations.append(Relation(name, tuple(attrs)))
        depths[name] = depth
    return DatabaseSchema(tuple(relations))


def _random_variables(
    rng: random.Random, config: BenchConfig, schema: DatabaseSchema
) -> tuple[tuple[str, VarType], ...]:
    out = []
    for i in range(config.variables):
        if rng.random() < 0.4:
            vtype = VAL
        else:
            vtype = id_type(rng.choice(schema.relations).name)
        out.append((f"v{i}", vtype))
    return tuple(out)


class _CondGen:
    """Random conditions over a fixed spec skeleton, type-correct by
    construction."""

    def __init__(
        self,
        rng: random.Random,
        schema: DatabaseSchema,
        variables: tuple[tuple[str, VarType], ...],
    ) -> None:
        self.rng = rng
        self.schema = schema
        # Path expressions grouped by type, in navigation order.
        navset = build_navigation_set(schema, variables, {})
        self.by_type: dict[VarType, list[VarTerm]] = {}
        for e in navset.paths:
            self.by_type.setdefault(e.vtype, []).append(VarTerm(e.root, e.path))
        self.id_exprs = [
            (t, exprs) for t, exprs in self.by_type.items() if t.is_id
        ]

    def _term_against(self, vtype: VarType) -> "VarTerm | ConstTerm | NullTerm":
        roll = self.rng.random()
        if roll < 0.3:
            return NullTerm()
        if vtype == VAL and roll < 0.65:
            return ConstTerm(self.rng.choice(_CONSTANTS))
        peers = self.by_type[vtype]
        return self.rng.choice(peers)

    def atom(self) -> Condition:
        rng = self.rng
        if self.id_exprs and rng.random() < 0.25:
            vtype, exprs = rng.choice(self.id_exprs)
            key = rng.choice(exprs)
            relation = self.schema.relation(vtype.relation or "")
            assert relation is not None
            args: list = [key]
            for attr in relation.attributes:
                if attr.vtype == VAL and rng.random() < 0.5:
                    args.append(ConstTerm(rng.choice(_CONSTANTS)))
                else:
                    args.append(rng.choice(self.by_type[attr.vtype]))
            return RelAtom(relation.name, tuple(args))
        vtype = rng.choice(list(self.by_type))
        left = rng.choice(self.by_type[vtype])
        right = self._term_against(vtype)
        if right == left:
            right = NullTerm()
        cls = Equal if rng.random() < 0.7 else NotEqual
        return cls(left, right)

    def condition(self, size: int) -> Condition:
        rng = self.rng
        n = rng.randint(1, max(1, size))
        cond = self.atom()
        for _ in range(n - 1):
            nxt = self.atom()
            if rng.random() < 0.25:
                nxt = Not(nxt)
            cond = And(cond, nxt) if rng.random() < 0.7 else Or(cond, nxt)
        return cond


def _candidate_spec(rng: random.Random, config: BenchConfig) -> TasSpec:
    schema = _random_schema(rng, config)
    variables = _random_variables(rng, config, schema)
    gen = _CondGen(rng, schema, variables)
    init_parts: list[Condition] = []
    for name, vtype in variables:
        if rng.random() < 0.7:
            if vtype == VAL and rng.random() < 0.5:
                init_parts.append(Equal(VarTerm(name), ConstTerm(_CONSTANTS[0])))
            else:
                init_parts.append(Equal(VarTerm(name), NullTerm()))
    init = init_parts[0] if init_parts else TrueCond()
    for part in init_parts[1:]:
        init = And(init, part)
    services = []
    for i in range(config.services):
        propagated = tuple(
            name for name, _ in variables if rng.random() < 0.5
        )
        services.append(
            Service(
                name=f"S{i}",
                pre=gen.condition(config.condition_size),
                post=gen.condition(config.condition_size),
                propagated=propagated,
            )
        )
    return TasSpec(schema, variables, init, tuple(services))


def _navset_size(spec: TasSpec) -> int:
    navset = build_navigation_set(
        spec.schema, spec.variables, collect_constants(spec)
    )
    return len(navset.exprs)


FALSE_PROPERTY = LtlFo("t1", (), LtlFalse())


def generate_spec(config: BenchConfig, index: int) -> TasSpec:
    """The ``index``-th accepted spec for ``config``: valid, within the
    expression budget, and with a non-empty search space (the ``False``
    probe must find a violating run within the state budget)."""
    for attempt in range(1000):
        rng = _rng(config.seed, index, attempt)
        spec = _candidate_spec(rng, config)
        if validate(spec, (FALSE_PROPERTY,)):
            continue
        if (
            config.max_expressions is not None
            and _navset_size(spec) > config.max_expressions
        ):
            continue
        probe = CheckOptions(
            mode=Mode.LDT,
            asm=True,
            max_states=config.max_states,
            max_seconds=float("inf"),
        )
        verdict, _ = check(spec, FALSE_PROPERTY, probe)
        if isinstance(verdict, Violated):
            return spec
    raise TasError(f"no viable spec after 1000 attempts (index {index})")


def spec_properties(config: BenchConfig, spec: TasSpec, index: int) -> list[LtlFo]:
    """One property per selected template, instantiated from the spec's
    own condition pool by the seeded stream."""
    pool = condition_pool(spec)
    out = []
    for t in sorted(set(config.templates)):
        if t == 1:
            out.append(LtlFo("t1", (), LtlFalse()))
        else:
            out.append(instantiate_template(t, pool, _rng(config.seed, index, 7919, t)))
    return out


# ---------------------------------------------------------------------------
# Batch runs and reporting
# ---------------------------------------------------------------------------

CSV_HEADER = "spec_id,template,mode,asm,verdict,states,transitions,ms,avg_pool"

_MODES = ((Mode.NAIVE, False), (Mode.NAIVE, True), (Mode.LDT, False), (Mode.LDT, True))


@dataclass(frozen=True)
class BenchRow:
    spec_id: str
    template: str
    mode: str
    asm: str
    verdict: str
    states: int
    transitions: int
    wall_seconds: float
    avg_pool: float

    def csv(self) -> str:
        return (
            f"{self.spec_id},{self.template},{self.mode},{self.asm},"
            f"{self.verdict},{self.states},{self.transitions},0,"
            f"{self.avg_pool:.3f}"
        )


@dataclass
class BenchResult:
    rows: list[BenchRow]
    csv_text: str
    overhead_report: str


def _verdict_name(verdict: Verdict) -> str:
    match verdict:
        case Holds():
            return "Holds"
        case Violated():
            return "Violated"
        case ResourceLimit():
            return "ResourceLimit"
    raise TasError(f"unknown verdict: {verdict}")


def _run_one(args: tuple) -> BenchRow:
    spec, prop, spec_id, mode, asm, max_states, max_seconds = args
    options = CheckOptions(
        mode=mode, asm=asm, max_states=max_states, max_seconds=max_seconds
    )
    verdict, stats = check(spec, prop, options)
    return BenchRow(
        spec_id=spec_id,
        template=prop.name,
        mode=mode.value,
        asm="on" if asm else "off",
        verdict=_verdict_name(verdict),
        states=stats.states_visited,
        transitions=stats.transitions,
        wall_seconds=stats.wall_seconds,
        avg_pool=stats.avg_pool_size,
    )


def run_bench(
    config: BenchConfig,
    jobs: int = 1,
    max_seconds: float = 60.0,
) -> BenchResult:
    """Generate, verify and report.  Row order is fixed by (spec, template,
    mode) regardless of worker scheduling; per-run limits become
    ResourceLimit rows."""
    config = config.validated()
    tasks = []
    for index in range(config.repetitions):
        spec = generate_spec(config, index)
        spec_id = f"s{index:03d}"
        for prop in spec_properties(config, spec, index):
            for mode, asm in _MODES:
                tasks.append(
                    (spec, prop, spec_id, mode, asm, config.max_states, max_seconds)
                )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, tasks, chunksize=4))
    else:
        rows = [_run_one(t) for t in tasks]
    csv_text = "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n"
    return BenchResult(rows, csv_text, overhead_report(rows))


def overhead_report(rows: list[BenchRow]) -> str:
    """Per-template mean verification time and overhead against the same
    spec and mode's ``False`` baseline row, in percent.  Times are wall
    clock, so unlike the CSV this report varies run to run."""
    baseline: dict[tuple[str, str, str], float] = {}
    for r in rows:
        if r.template == "t1":
            baseline[(r.spec_id, r.mode, r.asm)] = r.wall_seconds
    by_template: dict[str, list[BenchRow]] = {}
    for r in rows:
        by_template.setdefault(r.template, []).append(r)
    lines = ["template  runs  mean_ms  overhead_vs_false"]
    for template in sorted(by_template, key=lambda t: int(t[1:])):
        group = by_template[template]
        mean_ms = sum(r.wall_seconds for r in group) / len(group) * 1000
        overheads = []
        for r in group:
            base = baseline.get((r.spec_id, r.mode, r.asm))
            if base is not None and base > 0:
                overheads.append((r.wall_seconds - base) / base * 100)
        overhead = (
            f"{sum(overheads) / len(overheads):+.1f}%" if overheads else "n/a"
        )
        lines.append(
            f"{template:<9} {len(group):>4}  {mean_ms:7.2f}  {overhead}"
        )
    if not baseline:
        lines.append("(no False rows: overhead undefined)")
    return "\n".join(lines)
