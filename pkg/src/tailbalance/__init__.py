"""Tail-balance equation solvers, an ability-indexed signal family, and
sequential majority-vote simulation."""

__version__ = "0.1.0"

from .errors import (
    DegenerateAbility,
    DegenerateAlpha,
    DomainError,
    EvenJury,
    Indeterminate,
    InvalidBoundary,
    SingularCoefficients,
    SizeLimit,
    SolverError,
    TailBalanceError,
    ZeroAbility,
)
from .signals import (
    Prior,
    StateOfNature,
    cdf_given_A,
    cdf_given_B,
    pdf_given_state,
    posterior_from_signal,
    quantile_given_state,
    sample_signal,
)
from .alpha import (
    Affine,
    AlphaSpec,
    BetaFn,
    CoefficientPair,
    LinearAbility,
    Provenance,
    SolvedCdf,
    Tabulated,
    alpha_from_json,
    cdf_axioms_hold,
)
from .solvers import (
    ResidualReport,
    alt_decomposition_solver,
    closed_form_linear,
    closed_form_linear_odds,
    decomposition_parts,
    odds_limit_large_lambda,
    odds_limit_small_lambda,
    posterior_tail,
    residual_check,
    solve_affine_pair,
    solve_balanced,
    solve_odds,
)
from .jury import (
    CondorcetModel,
    JuryConfig,
    Method,
    OrderingRow,
    ThresholdTable,
    TieBreak,
    VerdictStats,
    VoteHistory,
    condorcet_curve,
    condorcet_error,
    condorcet_exact,
    exact_verdict_probability,
    monte_carlo_verdict,
    order_scan,
    vote_threshold,
)

__all__ = [
    "__version__",
    "Affine",
    "AlphaSpec",
    "BetaFn",
    "CoefficientPair",
    "CondorcetModel",
    "DegenerateAbility",
    "DegenerateAlpha",
    "DomainError",
    "EvenJury",
    "Indeterminate",
    "InvalidBoundary",
    "JuryConfig",
    "LinearAbility",
    "Method",
    "OrderingRow",
    "Prior",
    "Provenance",
    "ResidualReport",
    "SingularCoefficients",
    "SizeLimit",
    "SolvedCdf",
    "SolverError",
    "StateOfNature",
    "Tabulated",
    "TailBalanceError",
    "ThresholdTable",
    "TieBreak",
    "VerdictStats",
    "VoteHistory",
    "ZeroAbility",
    "alpha_from_json",
    "alt_decomposition_solver",
    "cdf_axioms_hold",
    "cdf_given_A",
    "cdf_given_B",
    "closed_form_linear",
    "closed_form_linear_odds",
    "condorcet_curve",
    "condorcet_error",
    "condorcet_exact",
    "decomposition_parts",
    "exact_verdict_probability",
    "monte_carlo_verdict",
    "odds_limit_large_lambda",
    "odds_limit_small_lambda",
    "order_scan",
    "pdf_given_state",
    "posterior_from_signal",
    "posterior_tail",
    "quantile_given_state",
    "residual_check",
    "sample_signal",
    "solve_affine_pair",
    "solve_balanced",
    "solve_odds",
    "vote_threshold",
]
