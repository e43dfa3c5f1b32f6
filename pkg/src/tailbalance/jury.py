"""Sequential majority voting over the ability-indexed signal family.

Jurors vote in a fixed order.  Each sees every earlier vote and every
ability, forms the Bayesian posterior that the state is A, observes a
private signal, and votes for whichever state the combined evidence
favours.  Because the signal likelihood ratio is monotone, the optimal
vote is a threshold rule: vote A exactly when the signal reaches a
cutoff determined by the pre-signal posterior.

The module computes the majority verdict's correctness probability two
ways, by exact enumeration over vote histories and by Monte Carlo,
plus the classical binary-juror majority baseline for comparison.
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.stats import binom

from .alpha import EQUALITY_TOL
from .errors import DomainError, EvenJury, SizeLimit, ZeroAbility
from .signals import (
    Prior,
    StateOfNature,
    cdf_given_A,
    cdf_given_B,
    quantile_given_state,
)

#: Largest jury the exact enumeration will attempt.
EXACT_SIZE_LIMIT = 25

#: Largest jury order_scan will permute (factorial growth).
ORDER_SCAN_LIMIT = 7

#: Largest jury for which a full ThresholdTable is materialized.
TABLE_SIZE_LIMIT = 15

_CHUNK_TRIALS = 16384


class TieBreak(enum.Enum):
    """What a juror does when the posterior is exactly 1/2 and the signal
    carries no information (zero ability)."""

    FOLLOW_SIGNAL_SIGN = "follow_signal"
    VOTE_A = "vote_a"
    VOTE_B = "vote_b"


class Method(enum.Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class JuryConfig:
    """A jury: voting order, prior, tie rule, and simulation budget."""

    abilities: tuple[float, ...]
    prior: Prior
    tie_break: TieBreak = TieBreak.FOLLOW_SIGNAL_SIGN
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        abilities = tuple(float(a) for a in self.abilities)
        if not abilities:
            raise DomainError("abilities must be non-empty")
        for a in abilities:
            if not 0.0 <= a <= 1.0:
                raise DomainError(f"ability must lie in [0, 1], got {a!r}")
        if not isinstance(self.prior, Prior):
            raise DomainError(f"prior must be a Prior, got {self.prior!r}")
        if not isinstance(self.tie_break, TieBreak):
            raise DomainError(f"tie_break must be a TieBreak, got {self.tie_break!r}")
        trials = int(self.trials)
        if trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials!r}")
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "abilities", abilities)
        object.__setattr__(self, "trials", trials)
        object.__setattr__(self, "seed", seed)

    @classmethod
    def from_json(cls, obj: dict | str) -> "JuryConfig":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict):
            raise DomainError(f"jury config must be a JSON object, got {type(obj).__name__}")
        if "abilities" not in obj:
            raise DomainError("jury config is missing the 'abilities' field")
        try:
            tie_break = TieBreak(obj.get("tie_break", "follow_signal"))
        except ValueError:
            raise DomainError(
                f"tie_break must be one of {[t.value for t in TieBreak]}, "
                f"got {obj.get('tie_break')!r}"
            ) from None
        return cls(
            abilities=tuple(obj["abilities"]),
            prior=Prior(obj.get("theta", 0.5)),
            tie_break=tie_break,
            trials=obj.get("trials", 100_000),
            seed=obj.get("seed", 0),
        )

    def to_json(self) -> dict:
        return {
            "abilities": list(self.abilities),
            "theta": self.prior.theta,
            "tie_break": self.tie_break.value,
            "trials": self.trials,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class VerdictStats:
    """Correct-verdict probability with its estimation pedigree."""

    p_correct: float
    method: Method
    stderr: float
    trials_used: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_correct <= 1.0:
            raise DomainError(f"p_correct must lie in [0, 1], got {self.p_correct!r}")
        if self.stderr < 0.0:
            raise DomainError(f"stderr must be >= 0, got {self.stderr!r}")


@dataclass(frozen=True)
class CondorcetModel:
    """The classical binary model: n independent jurors, each correct
    with the same probability p > 1/2."""

    p: float
    n: int

    def __post_init__(self) -> None:
        p = float(self.p)
        n = int(self.n)
        if not 0.5 < p <= 1.0:
            raise DomainError(f"p must lie in (1/2, 1], got {self.p!r}")
        if n < 1 or n % 2 == 0:
            raise DomainError(f"n must be an odd positive integer, got {self.n!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)


def _log(p: float) -> float:
    return math.log(p) if p > 0.0 else -math.inf


def _posterior_given_history(theta: float, ll_a: float, ll_b: float) -> float:
    """Posterior P(state A | history) from accumulated log-likelihoods."""
    if ll_a == -math.inf and ll_b == -math.inf:
        raise DomainError("history has probability zero under both states")
    m = max(ll_a, ll_b)
    w_a = theta * math.exp(ll_a - m)
    w_b = (1.0 - theta) * math.exp(ll_b - m)
    return w_a / (w_a + w_b)


def _vote_a_probs(a: float, q: float, tie_break: TieBreak) -> tuple[float, float]:
    """P(vote A | state A) and P(vote A | state B) for one juror.

    ``q`` is the juror's pre-signal posterior that the state is A.  For
    a > 0 the juror votes A exactly when the signal reaches the
    threshold (1 - 2q)/a (clamped to the support); at zero ability the
    signal is useless and the vote follows the posterior alone, with
    ``tie_break`` deciding the q = 1/2 knife edge.
    """
    if a > 0.0:
        s = (1.0 - 2.0 * q) / a
        s = -1.0 if s < -1.0 else (1.0 if s > 1.0 else s)
        return 1.0 - cdf_given_A(a, s), 1.0 - cdf_given_B(a, s)
    if q > 0.5:
        return 1.0, 1.0
    if q < 0.5:
        return 0.0, 0.0
    if tie_break is TieBreak.VOTE_A:
        return 1.0, 1.0
    if tie_break is TieBreak.VOTE_B:
        return 0.0, 0.0
    return 0.5, 0.5


@dataclass(frozen=True)
class VoteHistory:
    """A prefix of the voting with its likelihood under each state.

    The log-likelihood fields are exactly the sums of per-vote
    conditional log-probabilities, so rebuilding the history vote by
    vote from scratch reproduces them.
    """

    votes: tuple[StateOfNature, ...] = ()
    loglik_A: float = 0.0
    loglik_B: float = 0.0

    def extend(self, config: JuryConfig, vote: StateOfNature) -> "VoteHistory":
        i = len(self.votes)
        if i >= len(config.abilities):
            raise DomainError("every juror has already voted")
        q = _posterior_given_history(config.prior.theta, self.loglik_A, self.loglik_B)
        p_a, p_b = _vote_a_probs(config.abilities[i], q, config.tie_break)
        if vote is StateOfNature.A:
            step_a, step_b = p_a, p_b
        else:
            step_a, step_b = 1.0 - p_a, 1.0 - p_b
        return VoteHistory(
            votes=self.votes + (vote,),
            loglik_A=self.loglik_A + _log(step_a),
            loglik_B=self.loglik_B + _log(step_b),
        )

    @classmethod
    def from_votes(cls, config: JuryConfig, votes) -> "VoteHistory":
        history = cls()
        for vote in votes:
            history = history.extend(config, vote)
        return history


@dataclass(frozen=True)
class ThresholdTable:
    """Materialized signal cutoffs, keyed by vote-history prefix.

    ``entries[votes]`` is the cutoff faced by juror ``len(votes)`` after
    seeing that history; ``None`` marks zero-ability jurors, whose vote
    ignores the signal except through the tie rule.  Histories that are
    impossible under both states carry no entry.
    """

    entries: dict

    def lookup(self, votes: tuple[StateOfNature, ...]):
        return self.entries[tuple(votes)]

    @classmethod
    def from_config(cls, config: JuryConfig) -> "ThresholdTable":
        n = len(config.abilities)
        if n > TABLE_SIZE_LIMIT:
            raise SizeLimit(
                f"threshold tables hold 2**n entries; n={n} exceeds the "
                f"cap of {TABLE_SIZE_LIMIT}"
            )
        theta = config.prior.theta
        entries: dict = {}

        def walk(votes: tuple, ll_a: float, ll_b: float) -> None:
            i = len(votes)
            if i == n:
                return
            a = config.abilities[i]
            q = _posterior_given_history(theta, ll_a, ll_b)
            if a > 0.0:
                s = (1.0 - 2.0 * q) / a
                entries[votes] = -1.0 if s < -1.0 else (1.0 if s > 1.0 else s)
            else:
                entries[votes] = None
            p_a, p_b = _vote_a_probs(a, q, config.tie_break)
            if p_a > 0.0 or p_b > 0.0:
                walk(votes + (StateOfNature.A,), ll_a + _log(p_a), ll_b + _log(p_b))
            if p_a < 1.0 or p_b < 1.0:
                walk(votes + (StateOfNature.B,),
                     ll_a + _log(1.0 - p_a), ll_b + _log(1.0 - p_b))

        walk((), 0.0, 0.0)
        return cls(entries=entries)


def vote_threshold(a: float, posterior_a_before_signal: float) -> float:
    """Signal cutoff above which a juror votes A.

    Solves q*(1 + a*s) = (1 - q)*(1 - a*s) for s and clamps to the
    support: s* = (1 - 2q)/a.  Zero ability admits no informative
    threshold and raises ZeroAbility so the caller can fall back to the
    tie rule.
    """
    a = float(a)
    q = float(posterior_a_before_signal)
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"ability must lie in [0, 1], got {a!r}")
    if not 0.0 < q < 1.0:
        raise DomainError(
            f"posterior_a_before_signal must lie strictly in (0, 1), got {q!r}"
        )
    if a == 0.0:
        raise ZeroAbility("a zero-ability juror has no signal threshold")
    s = (1.0 - 2.0 * q) / a
    return -1.0 if s < -1.0 else (1.0 if s > 1.0 else s)


def _require_odd(config: JuryConfig) -> int:
    n = len(config.abilities)
    if n % 2 == 0:
        raise EvenJury(f"majority verdicts need an odd jury, got n={n}")
    return n


def _exact_majority_a(config: JuryConfig) -> tuple[float, float]:
    """P(majority votes A | state A) and P(majority votes A | state B).

    Depth-first walk over vote histories carrying log-likelihoods;
    branches stop as soon as either side has clinched the majority, and
    branches impossible under both states are dropped.
    """
    n = len(config.abilities)
    theta = config.prior.theta
    need = n // 2 + 1
    tally = [0.0, 0.0]

    def walk(i: int, count_a: int, ll_a: float, ll_b: float) -> None:
        if count_a >= need:
            tally[0] += math.exp(ll_a)
            tally[1] += math.exp(ll_b)
            return
        if i - count_a >= need:
            return
        q = _posterior_given_history(theta, ll_a, ll_b)
        p_a, p_b = _vote_a_probs(config.abilities[i], q, config.tie_break)
        if p_a > 0.0 or p_b > 0.0:
            walk(i + 1, count_a + 1, ll_a + _log(p_a), ll_b + _log(p_b))
        if p_a < 1.0 or p_b < 1.0:
            walk(i + 1, count_a, ll_a + _log(1.0 - p_a), ll_b + _log(1.0 - p_b))

    walk(0, 0, 0.0, 0.0)
    return tally[0], tally[1]


def exact_verdict_probability(config: JuryConfig) -> VerdictStats:
    """Exact probability that the majority verdict matches the state.

    Averages the two conditional majority probabilities with prior
    weights theta and 1 - theta.  The enumeration visits at most one
    node per undecided vote prefix, so n is capped well before the tree
    becomes unmanageable.
    """
    n = _require_odd(config)
    if n > EXACT_SIZE_LIMIT:
        raise SizeLimit(
            f"exact enumeration is capped at n={EXACT_SIZE_LIMIT}, got n={n}"
        )
    maj_a_given_a, maj_a_given_b = _exact_majority_a(config)
    theta = config.prior.theta
    p = theta * maj_a_given_a + (1.0 - theta) * (1.0 - maj_a_given_b)
    return VerdictStats(p_correct=min(1.0, max(0.0, p)), method=Method.EXACT,
                        stderr=0.0, trials_used=0)


def _simulate_chunk(config: JuryConfig, size: int, seed_seq, fixed_state=None) -> int:
    """Simulate ``size`` juries and return how many verdicts were correct."""
    rng = np.random.default_rng(seed_seq)
    theta = config.prior.theta
    if fixed_state is None:
        is_a = rng.random(size) < theta
    else:
        is_a = np.full(size, fixed_state is StateOfNature.A)
    ll_a = np.zeros(size)
    ll_b = np.zeros(size)
    votes_a = np.zeros(size, dtype=np.int64)
    follow_sign = config.tie_break is TieBreak.FOLLOW_SIGNAL_SIGN
    for a in config.abilities:
        u = rng.random(size)
        u_eff = np.where(is_a, u, 1.0 - u)
        s_as_if_a = np.asarray(
            quantile_given_state(a, u_eff, StateOfNature.A), dtype=float
        )
        s = np.where(is_a, s_as_if_a, -s_as_if_a)
        m = np.maximum(ll_a, ll_b)
        w_a = theta * np.exp(ll_a - m)
        w_b = (1.0 - theta) * np.exp(ll_b - m)
        q = w_a / (w_a + w_b)
        if a > 0.0:
            cut = np.clip((1.0 - 2.0 * q) / a, -1.0, 1.0)
            vote_a = s >= cut
            p_a = 1.0 - np.asarray(cdf_given_A(a, cut), dtype=float)
            p_b = 1.0 - np.asarray(cdf_given_B(a, cut), dtype=float)
        else:
            if follow_sign:
                at_tie = s >= 0.0
                tie_prob = 0.5
            else:
                forced = config.tie_break is TieBreak.VOTE_A
                at_tie = np.full(size, forced)
                tie_prob = 1.0 if forced else 0.0
            vote_a = np.where(q > 0.5, True, np.where(q < 0.5, False, at_tie))
            p_a = np.where(q > 0.5, 1.0, np.where(q < 0.5, 0.0, tie_prob))
            p_b = p_a
        with np.errstate(divide="ignore"):
            ll_a = ll_a + np.log(np.where(vote_a, p_a, 1.0 - p_a))
            ll_b = ll_b + np.log(np.where(vote_a, p_b, 1.0 - p_b))
        votes_a += vote_a
    majority_a = votes_a > len(config.abilities) // 2
    return int(np.sum(majority_a == is_a))


def _worker_cap(n_chunks: int) -> int:
    env = os.environ.get("TAILBALANCE_THREADS", "").strip()
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise DomainError(
                f"TAILBALANCE_THREADS must be an integer, got {env!r}"
            ) from None
    else:
        cap = min(8, os.cpu_count() or 1)
    return max(1, min(cap, n_chunks))


def _chunk_sizes(total: int) -> list[int]:
    full, rest = divmod(total, _CHUNK_TRIALS)
    return [_CHUNK_TRIALS] * full + ([rest] if rest else [])


def monte_carlo_verdict(config: JuryConfig, *, conditional: bool = False) -> VerdictStats:
    """Monte Carlo estimate of the correct-verdict probability.

    Trials run in fixed-size chunks, each with its own generator spawned
    deterministically from the config seed, and combine by integer
    addition; the estimate is therefore byte-identical regardless of
    how many workers execute the chunks (capped by TAILBALANCE_THREADS).

    ``conditional=True`` stratifies: trials are split between the two
    states in proportion to the prior and each stratum is averaged with
    its prior weight, which removes the variance of the state draw.
    """
    _require_odd(config)
    theta = config.prior.theta
    trials = config.trials
    if conditional:
        if trials < 2:
            raise DomainError("conditional mode needs at least 2 trials")
        n_a = int(round(theta * trials))
        n_a = min(max(n_a, 1), trials - 1)
        plan = [(StateOfNature.A, s) for s in _chunk_sizes(n_a)]
        plan += [(StateOfNature.B, s) for s in _chunk_sizes(trials - n_a)]
    else:
        plan = [(None, s) for s in _chunk_sizes(trials)]
    children = np.random.SeedSequence(config.seed).spawn(len(plan))
    jobs = [(state, size, child) for (state, size), child in zip(plan, children)]
    workers = _worker_cap(len(jobs))

    def run(job):
        state, size, child = job
        return state, size, _simulate_chunk(config, size, child, fixed_state=state)

    if workers == 1:
        outcomes = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, jobs))

    if conditional:
        correct = {StateOfNature.A: 0, StateOfNature.B: 0}
        totals = {StateOfNature.A: 0, StateOfNature.B: 0}
        for state, size, hits in outcomes:
            correct[state] += hits
            totals[state] += size
        p_hat_a = correct[StateOfNature.A] / totals[StateOfNature.A]
        p_hat_b = correct[StateOfNature.B] / totals[StateOfNature.B]
        p_hat = theta * p_hat_a + (1.0 - theta) * p_hat_b
        var = (theta**2 * p_hat_a * (1.0 - p_hat_a) / totals[StateOfNature.A]
               + (1.0 - theta)**2 * p_hat_b * (1.0 - p_hat_b) / totals[StateOfNature.B])
        stderr = math.sqrt(var)
    else:
        hits = sum(h for _, _, h in outcomes)
        p_hat = hits / trials
        stderr = math.sqrt(p_hat * (1.0 - p_hat) / trials)
    return VerdictStats(p_correct=p_hat, method=Method.MONTE_CARLO,
                        stderr=stderr, trials_used=trials)


@dataclass(frozen=True)
class OrderingRow:
    """One permutation's exact verdict probability; equal-within-tolerance
    probabilities share a rank."""

    ordering: tuple[float, ...]
    p_correct: float
    rank: int


def order_scan(abilities, prior: Prior,
               tie_break: TieBreak = TieBreak.FOLLOW_SIGNAL_SIGN) -> list[OrderingRow]:
    """Exact verdict probability of every voting order, best first.

    All n! orderings are evaluated (duplicates included when abilities
    repeat, so permutation symmetry is visible as a block of ties).
    """
    abilities = tuple(float(a) for a in abilities)
    n = len(abilities)
    if n > ORDER_SCAN_LIMIT:
        raise SizeLimit(
            f"order_scan is capped at n={ORDER_SCAN_LIMIT} (factorial growth), got n={n}"
        )
    if n % 2 == 0:
        raise EvenJury(f"majority verdicts need an odd jury, got n={n}")
    if n < 3:
        raise DomainError(f"order_scan needs at least 3 jurors, got n={n}")
    scored = []
    for perm in permutations(abilities):
        config = JuryConfig(abilities=perm, prior=prior, tie_break=tie_break,
                            trials=1, seed=0)
        scored.append((perm, exact_verdict_probability(config).p_correct))
    scored.sort(key=lambda row: (-row[1], row[0]))
    rows: list[OrderingRow] = []
    rank = 0
    leader = None
    for perm, p in scored:
        if leader is None or leader - p > EQUALITY_TOL:
            rank += 1
            leader = p
        rows.append(OrderingRow(ordering=perm, p_correct=p, rank=rank))
    return rows


def condorcet_exact(model: CondorcetModel) -> float:
    """P(majority correct) for n binary jurors each correct w.p. p.

    The binomial upper tail P(X > n/2); evaluated by the regularized
    incomplete beta function, which neither overflows nor loses the tail
    for n up to 10**4.
    """
    return float(binom.sf(model.n // 2, model.n, model.p))


def condorcet_error(model: CondorcetModel) -> float:
    """P(majority wrong), the complementary binomial tail.

    Useful when the success probability saturates to 1.0 in double
    precision (large n, strong p): the error tail stays representable
    far beyond that point, so monotonicity can still be observed.
    """
    return float(binom.cdf(model.n // 2, model.n, model.p))


def condorcet_curve(p: float, n_max: int) -> list[tuple[int, float]]:
    """(n, majority accuracy) for every odd n up to n_max."""
    p = float(p)
    n_max = int(n_max)
    if not 0.5 < p <= 1.0:
        raise DomainError(f"p must lie in (1/2, 1], got {p!r}")
    if n_max < 1 or n_max % 2 == 0:
        raise DomainError(f"n_max must be an odd positive integer, got {n_max!r}")
    ns = np.arange(1, n_max + 1, 2)
    vals = binom.sf(ns // 2, ns, p)
    return list(zip(ns.tolist(), np.asarray(vals, dtype=float).tolist()))
