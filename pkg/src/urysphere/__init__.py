"""Exact-rational finite metric spaces, one-point type extensions, the
stationary independence relation, lazily built isometries, and certified
displacement constructions, all at desk scale with no floating point."""

from .errors import (
    BaseMismatch,
    DomainMismatch,
    EmptyBase,
    EmptySubset,
    Inadmissible,
    InconsistentChain,
    IsometryViolation,
    LabelCollision,
    LadderBroken,
    MalformedInput,
    MalformedQuery,
    MetricViolation,
    OracleFailure,
    OutOfRange,
    ParseError,
    PreconditionFailed,
    StrategyExhausted,
    UryError,
)
from .independence import (
    IndependenceQuery,
    SirReport,
    amalgamate,
    canonical_extension,
    check_sir_axioms,
    independence_failures,
    independence_witnesses,
    independent_extensions,
    is_independent,
    prolongation,
    uniqueness_battery,
)
from .isometry_engine import (
    Commutator,
    Compose,
    Conjugate,
    FreeStrategy,
    IdentityStrategy,
    Inverse,
    LazyIsometry,
    Leaf,
    MoveOutcome,
    PartialIsometry,
    PlainStrategy,
    Universe,
    commutator,
    compose,
    conjugate,
    conjugate_letters,
    evaluate_word,
    expand_commutator_word,
    flatten_word,
    generic_strategy,
    inverse,
    isometry_from_dump,
    mover_oracle,
    move_type,
    pessimistic_oracle,
)
from .metric_core import (
    FiniteMetricSpace,
    KatetovFunction,
    distance_of_type,
    extend_with_point,
    format_rational,
    is_katetov,
    parse_rational,
    parse_space,
    restrict_type,
    serialize_space,
    validate_space,
)
from .witnesses import (
    Affine,
    Certificate,
    LadderState,
    alltypes_witness,
    conjugate_count,
    ladder_run,
    ladder_states,
    move1_chain,
    move1_conjugators,
    sphere_witness,
    two_kd_extension_step,
    verify_certificate,
)

__version__ = "0.1.0"
