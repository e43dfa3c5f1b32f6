"""Target functions and result types for the tail-balance solvers.

An "alpha spec" is a strictly increasing function ``alpha(t)`` on
[-1, +1] prescribing the right-tail posterior weight a solved CDF must
reproduce.  Three concrete shapes are supported: the linear
ability-indexed family, a free affine function, and a tabulated
piecewise-linear function.  All three serialize to and from a small
JSON object so the CLI and config files can carry them.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

#: Absolute tolerance for pointwise equality of two evaluated functions.
EQUALITY_TOL = 1e-12

#: Acceptable sup-norm residual of a solution against its defining equation.
RESIDUAL_TOL = 1e-10

#: Tolerance for matching a declared prior against alpha(-1).
BOUNDARY_TOL = 1e-9


class AlphaSpec:
    """Base class for tail-balance target functions.

    Subclasses are callable on scalars or numpy arrays and must be
    strictly increasing wherever they are non-degenerate.  The constant
    function induced by zero ability is deliberately constructible so
    the solvers can reject it with a precise error instead of the
    constructor masking the problem.
    """

    def __call__(self, t):  # pragma: no cover - abstract
        raise NotImplementedError

    def to_json(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class LinearAbility(AlphaSpec):
    """alpha(t) = theta + (t + 1) * (1 - theta) * a / 2.

    The line through (-1, theta) reaching theta + (1 - theta) * a at
    t = +1; ability 1 reaches certainty, ability 0 degenerates to the
    constant theta.
    """

    theta: float
    a: float

    def __post_init__(self) -> None:
        theta = float(self.theta)
        a = float(self.a)
        if not 0.0 < theta < 1.0:
            raise DomainError(f"theta must lie strictly in (0, 1), got {self.theta!r}")
        if not 0.0 <= a <= 1.0:
            raise DomainError(f"ability must lie in [0, 1], got {self.a!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "a", a)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.theta + (t + 1.0) * (1.0 - self.theta) * self.a / 2.0
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"kind": "linear", "theta": self.theta, "a": self.a}


@dataclass(frozen=True)
class Affine(AlphaSpec):
    """alpha(t) = intercept + slope * t with slope > 0.

    The implied prior is alpha(-1) = intercept - slope; solvers check it
    against the prior they are given.
    """

    intercept: float
    slope: float

    def __post_init__(self) -> None:
        b = float(self.intercept)
        a = float(self.slope)
        if not a > 0.0:
            raise DomainError(f"slope must be positive, got {self.slope!r}")
        if not 0.0 < b - a < 1.0:
            raise DomainError(
                f"alpha(-1) = intercept - slope = {b - a!r} must lie in (0, 1)"
            )
        if b + a > 1.0 + EQUALITY_TOL:
            raise DomainError(
                f"alpha(+1) = intercept + slope = {b + a!r} exceeds 1"
            )
        object.__setattr__(self, "intercept", b)
        object.__setattr__(self, "slope", a)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.intercept + self.slope * t
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {
            "kind": "affine",
            "intercept": self.intercept,
            "slope": self.slope,
            "theta": self.intercept - self.slope,
        }


@dataclass(frozen=True)
class Tabulated(AlphaSpec):
    """Piecewise-linear alpha through strictly increasing knots.

    Knots must start at t = -1 and end at t = +1 so the function covers
    the whole support without extrapolation.
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        try:
            pts = tuple((float(t), float(v)) for t, v in self.points)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"points must be (t, alpha) pairs: {exc}") from exc
        if len(pts) < 2:
            raise DomainError("a tabulated alpha needs at least two knots")
        ts = np.array([p[0] for p in pts])
        vs = np.array([p[1] for p in pts])
        if abs(ts[0] + 1.0) > EQUALITY_TOL or abs(ts[-1] - 1.0) > EQUALITY_TOL:
            raise DomainError("knots must start at t=-1 and end at t=+1")
        if np.any(np.diff(ts) <= 0.0):
            raise DomainError("knot abscissae must be strictly increasing")
        if np.any(np.diff(vs) <= 0.0):
            raise DomainError("knot values must be strictly increasing")
        if vs[0] <= 0.0 or vs[0] >= 1.0 or vs[-1] > 1.0 + EQUALITY_TOL:
            raise DomainError("knot values must lie in (0, 1]")
        object.__setattr__(self, "points", pts)

    def __call__(self, t):
        ts = np.array([p[0] for p in self.points])
        vs = np.array([p[1] for p in self.points])
        t = np.asarray(t, dtype=float)
        out = np.interp(t, ts, vs)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"kind": "table", "points": [[t, v] for t, v in self.points]}


def alpha_from_json(obj: dict | str) -> AlphaSpec:
    """Build an AlphaSpec from its JSON object (or a JSON string)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict):
        raise DomainError(f"alpha spec must be a JSON object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind == "linear":
        return LinearAbility(theta=obj["theta"], a=obj["a"])
    if kind == "affine":
        spec = Affine(intercept=obj["intercept"], slope=obj["slope"])
        declared = obj.get("theta")
        if declared is not None and abs(spec.intercept - spec.slope - float(declared)) > BOUNDARY_TOL:
            raise DomainError(
                f"declared theta {declared!r} disagrees with alpha(-1) = "
                f"{spec.intercept - spec.slope!r}"
            )
        return spec
    if kind == "table":
        return Tabulated(points=tuple(tuple(p) for p in obj["points"]))
    raise DomainError(f"unknown alpha kind {kind!r}")


@dataclass(frozen=True)
class BetaFn:
    """Odds transform beta(t) = alpha(t) / (1 - alpha(t)) of an alpha spec.

    Increasing wherever alpha is; infinite where alpha reaches 1 (the
    upper endpoint at full ability), which is why the solvers evaluate
    the alpha form of their formulas instead of this one.
    """

    alpha: AlphaSpec

    def __call__(self, t):
        a = np.asarray(self.alpha(t), dtype=float)
        with np.errstate(divide="ignore"):
            out = a / (1.0 - a)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class CoefficientPair:
    """Coefficients of the affine relation H(-t) = gamma(t) + delta(t) * H(t).

    Both callables must accept numpy arrays (scalar-only callables are
    tolerated at a speed cost).  Solvability requires
    delta(t) * delta(-t) != 1 across the evaluation grid.
    """

    gamma: Callable
    delta: Callable

    def singularity_gap(self, grid_size: int = 1001) -> tuple[float, float]:
        """Smallest |1 - delta(t)*delta(-t)| on the grid and its location."""
        t = np.linspace(-1.0, 1.0, int(grid_size))
        d = evaluate_on(self.delta, t)
        d_neg = evaluate_on(self.delta, -t)
        gap = np.abs(1.0 - d * d_neg)
        i = int(np.argmin(gap))
        return float(gap[i]), float(t[i])

    def is_solvable(self, grid_size: int = 1001, tol: float = EQUALITY_TOL) -> bool:
        gap, _ = self.singularity_gap(grid_size)
        return gap >= tol


class Provenance(enum.Enum):
    """Which solver produced a SolvedCdf."""

    CLOSED_FORM_LINEAR = "closed-form-linear"
    BALANCED_FORMULA = "balanced-formula"
    ODDS_FORMULA = "odds-formula"
    AFFINE_PAIR = "affine-pair"
    DECOMPOSITION = "decomposition"
    GRID_NUMERIC = "grid-numeric"


@dataclass(frozen=True)
class SolvedCdf:
    """An evaluable candidate CDF on [-1, +1] with verification metadata.

    ``max_residual`` is the measured sup-norm residual of the producing
    solver's defining equation on its check grid (NaN for grid-ingested
    tables, which carry no defining equation until verified).
    ``is_valid_cdf`` is recomputed from the evaluator, never asserted:
    it records whether the values are nondecreasing and pinned to 0 and
    1 at the endpoints on the check grid.
    """

    evaluator: Callable
    provenance: Provenance
    max_residual: float
    is_valid_cdf: bool

    def __call__(self, t):
        out = np.asarray(self.evaluator(t), dtype=float)
        return out if out.ndim else float(out)

    @staticmethod
    def from_table(points: Sequence[tuple[float, float]]) -> "SolvedCdf":
        """Wrap tabulated (t, H) pairs as a piecewise-linear evaluator."""
        pts = tuple((float(t), float(h)) for t, h in points)
        if len(pts) < 2:
            raise DomainError("a tabulated H needs at least two points")
        ts = np.array([p[0] for p in pts])
        hs = np.array([p[1] for p in pts])
        if np.any(np.diff(ts) <= 0.0):
            raise DomainError("tabulated t values must be strictly increasing")
        if abs(ts[0] + 1.0) > EQUALITY_TOL or abs(ts[-1] - 1.0) > EQUALITY_TOL:
            raise DomainError("tabulated H must cover t=-1 through t=+1")

        def evaluator(t, _ts=ts, _hs=hs):
            return np.interp(np.asarray(t, dtype=float), _ts, _hs)

        return SolvedCdf(
            evaluator=evaluator,
            provenance=Provenance.GRID_NUMERIC,
            max_residual=float("nan"),
            is_valid_cdf=cdf_axioms_hold(evaluator),
        )


def evaluate_on(fn: Callable, grid: np.ndarray) -> np.ndarray:
    """Evaluate a callable on a grid, falling back to a scalar loop."""
    try:
        out = np.asarray(fn(grid), dtype=float)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != grid.shape:
        out = np.array([float(fn(float(x))) for x in grid])
    return out


def cdf_axioms_hold(evaluator: Callable, grid_size: int = 1001, tol: float = EQUALITY_TOL) -> bool:
    """Check monotonicity and endpoint pinning of an evaluator on a grid."""
    t = np.linspace(-1.0, 1.0, int(grid_size))
    h = evaluate_on(evaluator, t)
    if not np.all(np.isfinite(h)):
        return False
    if abs(h[0]) > tol or abs(h[-1] - 1.0) > tol:
        return False
    return bool(np.all(np.diff(h) >= -tol))
