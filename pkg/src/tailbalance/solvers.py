"""Solvers for the tail-balance functional equations.

The defining relation ties a candidate CDF ``H`` on [-1, +1] to a
target function ``alpha`` and prior odds ``lambda``:

    (1 - H(t)) / (1 - H(t) + lambda * H(-t)) = alpha(t)

with the left side read as 1 at t = +1, where both tails vanish.  The
balanced case is lambda = 1.  Each solver returns a ``SolvedCdf`` whose
``max_residual`` was measured against this relation (or, for the
affine-pair solver, against its own relation H(-t) = gamma + delta*H)
on a check grid, and whose ``is_valid_cdf`` flag is recomputed from the
values rather than assumed.

Every formula is evaluated in its alpha form.  The equivalent
odds-transform form divides by 1 - alpha(t), which is 0 at t = +1
whenever alpha reaches certainty, so the alpha form needs no special
casing at the right endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alpha import (
    EQUALITY_TOL,
    BOUNDARY_TOL,
    AlphaSpec,
    CoefficientPair,
    LinearAbility,
    Provenance,
    SolvedCdf,
    cdf_axioms_hold,
    evaluate_on,
)
from .errors import (
    DegenerateAbility,
    DegenerateAlpha,
    DomainError,
    Indeterminate,
    InvalidBoundary,
    SingularCoefficients,
)
from .signals import Prior, cdf_given_A

DEFAULT_GRID = 1001

_BALANCED_PRIOR = Prior(0.5)


def _vec(core):
    """Wrap an array-in/array-out core so scalars pass through cleanly."""

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        out = core(np.atleast_1d(t))
        return float(out[0]) if t.ndim == 0 else out

    return evaluator


def _uniform_solution(provenance: Provenance, alpha: AlphaSpec, prior: Prior,
                      grid_size: int) -> SolvedCdf:
    evaluator = _vec(lambda t: (t + 1.0) / 2.0)
    return _finish(evaluator, provenance, alpha, prior, grid_size)


def _finish(evaluator, provenance: Provenance, alpha: AlphaSpec, prior: Prior,
            grid_size: int) -> SolvedCdf:
    """Attach measured residual and recomputed validity to an evaluator."""
    report = residual_check(evaluator, alpha, prior, grid_size)
    return SolvedCdf(
        evaluator=evaluator,
        provenance=provenance,
        max_residual=report.max_residual,
        is_valid_cdf=cdf_axioms_hold(evaluator, grid_size),
    )


def _check_grid_size(grid_size: int, minimum: int = 3) -> int:
    n = int(grid_size)
    if n < minimum or n % 2 == 0:
        raise DomainError(
            f"grid_size must be an odd integer >= {minimum}, got {grid_size!r}"
        )
    return n


def solve_balanced(alpha: AlphaSpec, *, allow_uniform_limit: bool = False,
                   grid_size: int = DEFAULT_GRID) -> SolvedCdf:
    """Solve the balanced (lambda = 1) tail-balance equation.

    The unique nonnegative solution is

        H(t) = (2*alpha(t) - 1) * (1 - alpha(-t)) / (alpha(t) + alpha(-t) - 1)

    provided the denominator stays away from zero on the grid.  The
    constant alpha = 1/2 (zero ability) collapses the equation to 0/0
    everywhere; by default that raises DegenerateAlpha, and passing
    ``allow_uniform_limit=True`` instead returns its declared limit, the
    uniform CDF (t + 1)/2.
    """
    n = _check_grid_size(grid_size)
    boundary = float(np.asarray(alpha(-1.0), dtype=float))
    if abs(boundary - 0.5) > BOUNDARY_TOL:
        raise InvalidBoundary(
            f"balanced equation requires alpha(-1) = 1/2, got {boundary!r}"
        )
    grid = np.linspace(-1.0, 1.0, n)
    a_pos = evaluate_on(alpha, grid)
    a_neg = evaluate_on(alpha, -grid)
    den = a_pos + (a_neg - 1.0)
    if np.any(np.abs(den) < EQUALITY_TOL):
        if allow_uniform_limit and np.max(np.abs(a_pos - 0.5)) <= EQUALITY_TOL:
            return _uniform_solution(Provenance.BALANCED_FORMULA, alpha,
                                     _BALANCED_PRIOR, n)
        where = float(grid[int(np.argmin(np.abs(den)))])
        raise DegenerateAlpha(
            f"alpha(t) + alpha(-t) - 1 vanishes near t={where!r}; "
            "the balanced equation has no unique solution there"
        )

    def core(t):
        at = evaluate_on(alpha, t)
        an = evaluate_on(alpha, -t)
        # alpha(-t) - 1 first: the subtraction is exact at the endpoints
        # (Sterbenz), which pins H(+1) to exactly 1 in the balanced case.
        return (2.0 * at - 1.0) * (1.0 - an) / (at + (an - 1.0))

    return _finish(_vec(core), Provenance.BALANCED_FORMULA, alpha,
                   _BALANCED_PRIOR, n)


def closed_form_linear(a: float, *, grid_size: int = DEFAULT_GRID) -> SolvedCdf:
    """The balanced solution for the linear ability family, in closed form.

    H(t) = (t + 1) * (a*t - a + 2) / 4, which is exactly the state-A
    signal CDF at ability ``a``; zero ability gives the uniform CDF with
    no error (the closed form has no division to degenerate).
    """
    if not 0.0 <= float(a) <= 1.0:
        raise DomainError(f"ability must lie in [0, 1], got {a!r}")
    a = float(a)
    evaluator = _vec(lambda t: np.asarray(cdf_given_A(a, t), dtype=float))
    return _finish(evaluator, Provenance.CLOSED_FORM_LINEAR,
                   LinearAbility(0.5, a), _BALANCED_PRIOR,
                   _check_grid_size(grid_size))


def solve_affine_pair(coeffs: CoefficientPair, *,
                      grid_size: int = DEFAULT_GRID) -> SolvedCdf:
    """Solve H(-t) = gamma(t) + delta(t) * H(t) for H.

    Writing the relation at t and at -t and eliminating H(-t) gives

        H(t) = (gamma(t) * delta(-t) + gamma(-t)) / (1 - delta(t) * delta(-t))

    which requires delta(t) * delta(-t) != 1 across the grid.  The
    returned max_residual measures this relation, not the tail-balance
    ratio; the result need not be a CDF at all (gamma = 0 solves the
    homogeneous equation with H = 0) and is_valid_cdf reports that
    honestly.
    """
    n = _check_grid_size(grid_size)
    grid = np.linspace(-1.0, 1.0, n)
    d_pos = evaluate_on(coeffs.delta, grid)
    d_neg = evaluate_on(coeffs.delta, -grid)
    gap = 1.0 - d_pos * d_neg
    i = int(np.argmin(np.abs(gap)))
    if abs(gap[i]) < EQUALITY_TOL:
        raise SingularCoefficients(float(grid[i]), float(gap[i]))

    def core(t):
        g_pos = evaluate_on(coeffs.gamma, t)
        g_neg = evaluate_on(coeffs.gamma, -t)
        dp = evaluate_on(coeffs.delta, t)
        dn = evaluate_on(coeffs.delta, -t)
        return (g_pos * dn + g_neg) / (1.0 - dp * dn)

    evaluator = _vec(core)
    h_pos = evaluate_on(evaluator, grid)
    h_neg = evaluate_on(evaluator, -grid)
    g_pos = evaluate_on(coeffs.gamma, grid)
    residual = np.abs(h_neg - g_pos - d_pos * h_pos)
    return SolvedCdf(
        evaluator=evaluator,
        provenance=Provenance.AFFINE_PAIR,
        max_residual=float(np.max(residual)),
        is_valid_cdf=cdf_axioms_hold(evaluator, n),
    )


def solve_odds(alpha: AlphaSpec, prior: Prior, *,
               allow_uniform_limit: bool = False,
               grid_size: int = DEFAULT_GRID) -> SolvedCdf:
    """Solve the general-odds tail-balance equation.

    With lambda the prior odds of state B,

        H(t) = ((lambda + 1) * alpha(t) - 1) * (1 - alpha(-t))
               / (alpha(t) + alpha(-t) + (lambda**2 - 1) * alpha(t) * alpha(-t) - 1)

    At lambda = 1 every lambda-dependent term collapses and this is the
    balanced formula verbatim.  A constant alpha = theta makes the
    denominator vanish identically (the zero-ability degeneracy);
    ``allow_uniform_limit=True`` opts into the uniform-CDF limit.
    """
    if not isinstance(prior, Prior):
        raise DomainError(f"prior must be a Prior, got {prior!r}")
    n = _check_grid_size(grid_size)
    lam = prior.odds_lambda
    boundary = float(np.asarray(alpha(-1.0), dtype=float))
    if abs(boundary - prior.theta) > BOUNDARY_TOL:
        raise InvalidBoundary(
            f"alpha(-1) = {boundary!r} disagrees with the prior theta = "
            f"{prior.theta!r}"
        )
    grid = np.linspace(-1.0, 1.0, n)
    a_pos = evaluate_on(alpha, grid)
    a_neg = evaluate_on(alpha, -grid)
    den = a_pos + (a_neg - 1.0) + (lam * lam - 1.0) * a_pos * a_neg
    if np.any(np.abs(den) < EQUALITY_TOL):
        if allow_uniform_limit and np.max(np.abs(a_pos - prior.theta)) <= EQUALITY_TOL:
            return _uniform_solution(Provenance.ODDS_FORMULA, alpha, prior, n)
        where = float(grid[int(np.argmin(np.abs(den)))])
        raise DegenerateAlpha(
            f"odds-equation denominator vanishes near t={where!r}; "
            "no unique solution exists there"
        )

    def core(t):
        at = evaluate_on(alpha, t)
        an = evaluate_on(alpha, -t)
        # grouped as in solve_balanced: at lambda = 1 the last term is
        # exactly zero and the two formulas compute bit-identically.
        d = at + (an - 1.0) + (lam * lam - 1.0) * at * an
        return ((lam + 1.0) * at - 1.0) * (1.0 - an) / d

    return _finish(_vec(core), Provenance.ODDS_FORMULA, alpha, prior, n)


def closed_form_linear_odds(a: float, prior: Prior, *,
                            allow_uniform_limit: bool = False,
                            grid_size: int = DEFAULT_GRID) -> SolvedCdf:
    """The general-odds solution for the linear ability family.

    H(t) = (1 + t) * (a*t - a + 2) * (a/4) / D(t)

    with D(t) = a + (lambda - 1) * (a**2 / 4) * (1 - t**2).  D is
    positive for every a in (0, 1] and lambda > 0 (its minimum over t is
    a * (1 - a/4) when lambda < 1), so the only degeneracy is a = 0,
    where numerator and denominator vanish together; the limit there is
    the uniform CDF, returned only on explicit request.
    """
    if not isinstance(prior, Prior):
        raise DomainError(f"prior must be a Prior, got {prior!r}")
    if not 0.0 <= float(a) <= 1.0:
        raise DomainError(f"ability must lie in [0, 1], got {a!r}")
    a = float(a)
    n = _check_grid_size(grid_size)
    alpha = LinearAbility(prior.theta, a)
    if a == 0.0:
        if allow_uniform_limit:
            return _uniform_solution(Provenance.CLOSED_FORM_LINEAR, alpha,
                                     prior, n)
        raise DegenerateAbility(
            "the linear-odds closed form is 0/0 at ability 0; "
            "pass allow_uniform_limit=True for the uniform-CDF limit"
        )
    lam = prior.odds_lambda

    def core(t):
        num = (1.0 + t) * (a * t - a + 2.0) * (a / 4.0)
        den = a + (lam - 1.0) * (a * a / 4.0) * (1.0 - t * t)
        return num / den

    return _finish(_vec(core), Provenance.CLOSED_FORM_LINEAR, alpha, prior, n)


def decomposition_parts(a: float):
    """Odd and even building blocks of the balanced linear solution.

    Splitting H into the difference f(t) = H(t) - H(-t) and the sum
    g(t) = H(t) + H(-t) and eliminating against the balanced equation
    yields f(t) = t for every ability and g(t) = (2 - a + a*t**2) / 2.
    Returns the pair (f, g) as vectorized callables.
    """
    if not 0.0 <= float(a) <= 1.0:
        raise DomainError(f"ability must lie in [0, 1], got {a!r}")
    a = float(a)

    def f(t):
        t = np.asarray(t, dtype=float)
        out = t + 0.0
        return out if out.ndim else float(out)

    def g(t):
        t = np.asarray(t, dtype=float)
        out = (2.0 - a + a * t * t) / 2.0
        return out if out.ndim else float(out)

    return f, g


def alt_decomposition_solver(a: float, *,
                             grid_size: int = DEFAULT_GRID) -> SolvedCdf:
    """Balanced linear solution rebuilt from its odd/even decomposition.

    Returns H = (f + g) / 2 with the parts from ``decomposition_parts``.
    The evaluation path shares nothing with ``closed_form_linear``'s
    factored polynomial, so agreement between the two is a genuine
    cross-check rather than a restatement.
    """
    f, g = decomposition_parts(a)

    def core(t):
        return (np.asarray(f(t), dtype=float) + np.asarray(g(t), dtype=float)) / 2.0

    return _finish(_vec(core), Provenance.DECOMPOSITION,
                   LinearAbility(0.5, float(a)), _BALANCED_PRIOR,
                   _check_grid_size(grid_size))


@dataclass(frozen=True)
class ResidualReport:
    """Pointwise residuals of a candidate H against the tail-balance relation.

    The arrays share one index: ``residual[i]`` is the absolute defect at
    ``t[i]``, where the target is alpha(t) on [-1, +1) and the boundary
    convention value 1 at t = +1.
    """

    t: np.ndarray
    h: np.ndarray
    alpha: np.ndarray
    residual: np.ndarray
    max_residual: float
    argmax_t: float


def residual_check(h, alpha: AlphaSpec, prior: Prior,
                   grid_size: int = DEFAULT_GRID) -> ResidualReport:
    """Measure how well ``h`` solves the tail-balance equation for ``alpha``.

    ``h`` may be a SolvedCdf or any callable on [-1, +1].  The ratio
    (1 - H(t)) / (1 - H(t) + lambda * H(-t)) is compared against
    alpha(t) on a uniform grid, except at t = +1 where the defining
    convention reads the ratio as 1; an exact 0/0 is resolved to 1 so
    exact solutions score a zero residual there, while a 0/0 away from
    the boundary surfaces as a large residual rather than an exception.
    """
    n = _check_grid_size(grid_size)
    if not isinstance(prior, Prior):
        raise DomainError(f"prior must be a Prior, got {prior!r}")
    lam = prior.odds_lambda
    grid = np.linspace(-1.0, 1.0, n)
    h_pos = evaluate_on(h, grid)
    h_neg = evaluate_on(h, -grid)
    a_vals = evaluate_on(alpha, grid)
    num = 1.0 - h_pos
    den = num + lam * h_neg
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    ratio = np.where((den == 0.0) & (num == 0.0), 1.0, ratio)
    target = a_vals.copy()
    target[-1] = 1.0
    residual = np.abs(ratio - target)
    i = int(np.argmax(residual))
    return ResidualReport(
        t=grid,
        h=h_pos,
        alpha=a_vals,
        residual=residual,
        max_residual=float(residual[i]),
        argmax_t=float(grid[i]),
    )


def posterior_tail(h, t, prior: Prior):
    """Posterior weight of the right tail: (1 - H(t)) / (1 - H(t) + lambda*H(-t)).

    At t = +1 both tails of a valid CDF vanish and the value is 1 by
    convention.  A vanishing denominator anywhere else means the
    candidate H ran out of mass early, which raises Indeterminate
    instead of inventing a number.
    """
    if not isinstance(prior, Prior):
        raise DomainError(f"prior must be a Prior, got {prior!r}")
    lam = prior.odds_lambda
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    h_pos = evaluate_on(h, t_arr)
    h_neg = evaluate_on(h, -t_arr)
    num = 1.0 - h_pos
    den = num + lam * h_neg
    zero = den == 0.0
    if np.any(zero & (t_arr < 1.0)):
        where = float(t_arr[np.flatnonzero(zero & (t_arr < 1.0))[0]])
        raise Indeterminate(
            f"both tails vanish at interior point t={where!r}; "
            "the posterior ratio is 0/0 there"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    ratio = np.where(zero, 1.0, ratio)
    if np.asarray(t, dtype=float).ndim == 0:
        return float(ratio[0])
    return ratio


def odds_limit_large_lambda(a: float, odds_lambda: float, t):
    """Leading behaviour of the linear-odds solution as lambda grows.

    For t < 1 the solution is asymptotically 2/(lambda*a*(1 - t)) - 1/lambda,
    an equivalent, not a CDF; it is kept separate from the solvers and
    exists to validate the large-odds regime numerically.
    """
    a = float(a)
    lam = float(odds_lambda)
    if not 0.0 < a <= 1.0:
        raise DomainError(f"ability must lie in (0, 1], got {a!r}")
    if lam <= 0.0:
        raise DomainError(f"odds_lambda must be positive, got {odds_lambda!r}")
    t = np.asarray(t, dtype=float)
    out = 2.0 / (lam * a * (1.0 - t)) - 1.0 / lam
    return out if out.ndim else float(out)


def odds_limit_small_lambda(a: float, t):
    """Limit of the linear-odds solution as lambda -> 0.

    Setting lambda = 0 in the closed form gives
    (1 + t) * (a*t - a + 2) / (4 - a + a*t**2), a genuine CDF (state A
    is certain, so the solved distribution is conditioned on it).
    """
    a = float(a)
    if not 0.0 < a <= 1.0:
        raise DomainError(f"ability must lie in (0, 1], got {a!r}")
    t = np.asarray(t, dtype=float)
    out = (1.0 + t) * (a * t - a + 2.0) / (4.0 - a + a * t * t)
    return out if out.ndim else float(out)
