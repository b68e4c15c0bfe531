"""Verifier for tuple artifact systems: data-driven workflows over a
read-only relational database, checked against first-order LTL properties
by exhaustive search of a finite symbolic state space."""

from .model import (
    Always,
    And,
    Attribute,
    CondProp,
    Condition,
    ConstTerm,
    DatabaseSchema,
    Diagnostic,
    Equal,
    Eventually,
    Exists,
    FalseCond,
    INIT_SERVICE,
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
    RelAtom,
    Relation,
    Release,
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
    desugar_exists,
    eliminate_globals,
    id_type,
    to_nnf,
    validate,
)
from .speclang import (
    ParsedSpec,
    SpecSyntaxError,
    parse_condition,
    parse_spec,
    render_condition,
    render_ltl,
    render_spec,
)
from .symbolic import (
    Mode,
    NavigationSet,
    SymbolicState,
    TransitionEngine,
    build_navigation_set,
    congruent,
    eval_condition,
    initial_states,
    successors,
)
from .optimize import (
    AssignmentSets,
    ConstraintGraph,
    build_constraint_graph,
    check_consistent_subgraphs,
    chromatic_bound,
    ldt_rewrite,
    minimize_assignment_sets,
    naive_assignment_sets,
)
from .buchi import (
    BuchiAutomaton,
    accepts_lasso,
    ltl_nnf,
    ltl_to_buchi,
)
from .checker import (
    CheckOptions,
    CheckStats,
    Holds,
    Lasso,
    LimitKind,
    OracleTooLarge,
    ResourceLimit,
    Verdict,
    Violated,
    check,
    lasso_to_json,
    partition_oracle_check,
    prepare,
    replay,
)
from .promela import PromelaProgram, emit, translate_condition
from .bench import (
    BenchConfig,
    BenchResult,
    BenchRow,
    TEMPLATE_COUNT,
    condition_pool,
    generate_spec,
    instantiate_template,
    run_bench,
    template_formula,
)

__all__ = [name for name in dir() if not name.startswith("_")]
