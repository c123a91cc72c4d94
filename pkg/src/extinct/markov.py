"""Self-training collapse surrogate on a Markov chain.

A model that predicts transitions of an M-state chain and is retrained on
its own finite-sample output is modeled here by its essential noise source:
each training cycle allocates the N-sample budget across source states in
proportion to the current stationary distribution, re-estimates every row
from its allocated multinomial counts, and recomputes the stationary
distribution.  Collapse is the first cycle at which some state drops out of
the stationary support, i.e. stops being recurrent or reachable - exactly
zero mass, not merely small.  The closed-form law applied to the initial
stationary distribution predicts the collapse time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .dist import Distribution, entropy_normalized, flat
from .errors import (
    EmptySample,
    NotConverged,
    Reducible,
    TooFewStates,
    Unreachable,
    ValidationError,
)
from .law import LawParams, min_cdf
from .sim import ExtinctionRecord, ExtinctionSampleSet, trial_generator
from .stats import KsResult, ks_one_sample

ROW_SUM_TOLERANCE = 1e-12
STATIONARY_TOLERANCE = 1e-12
POWER_ITERATION_CAP = 1_000_000
CHAIN_ENTROPY_TOLERANCE = 1e-3
DEFAULT_MAX_CYCLES = 1_000_000

#: weight of the random dense component mixed into generated chains
_MIX = 0.05

_BISECTION_CAP = 200


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """Row-stochastic transition matrix with its cached stationary vector."""

    transition: np.ndarray
    stationary: Distribution
    m: int

    def __post_init__(self):
        self.transition.setflags(write=False)

    @classmethod
    def from_transition(cls, transition, gen_seed: int | None = None,
                        tol: float = STATIONARY_TOLERANCE) -> "MarkovChain":
        P = np.array(transition, dtype=float)
        pi = stationary(P, tol=tol)
        dist = Distribution(pi, pi.size, entropy_normalized(pi), gen_seed)
        return cls(P, dist, pi.size)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "transition": [[float(x) for x in row] for row in self.transition],
            "stationary": [float(x) for x in self.stationary.probs],
            "seed": self.stationary.gen_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkovChain":
        seed = d.get("seed")
        return cls.from_transition(d["transition"],
                                   None if seed is None else int(seed))


@dataclass(frozen=True)
class CollapseRecord:
    tau: int            # training cycles until the first state is lost
    lost_state: int     # -1 when censored
    run_index: int
    censored: bool = False
    pre_collapsed: bool = False


def _check_rows(P: np.ndarray):
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValidationError(f"transition matrix must be square, got {P.shape}")
    if P.shape[0] < 2:
        raise TooFewStates(f"need at least 2 states, got {P.shape[0]}")
    if np.any(P < 0):
        raise ValidationError("transition probabilities must be nonnegative")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > ROW_SUM_TOLERANCE):
        raise ValidationError("every row must sum to 1 within 1e-12")


def _strongly_connected(P: np.ndarray) -> bool:
    ncomp, _ = connected_components(csr_matrix(P > 0), directed=True,
                                    connection="strong")
    return ncomp == 1


def stationary(P, tol: float = STATIONARY_TOLERANCE) -> np.ndarray:
    """Stationary vector by power iteration: pi <- pi P until L1-converged."""
    P = np.asarray(P, dtype=float)
    _check_rows(P)
    if not _strongly_connected(P):
        raise Reducible("transition matrix is not irreducible")
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(POWER_ITERATION_CAP):
        nxt = pi @ P
        nxt /= nxt.sum()
        if float(np.abs(nxt - pi).sum()) < tol:
            return nxt
        pi = nxt
    raise NotConverged(
        f"power iteration did not reach L1 tol {tol} in {POWER_ITERATION_CAP} steps")


def _stationary_lazy(P: np.ndarray, start: np.ndarray,
                     tol: float = STATIONARY_TOLERANCE) -> np.ndarray:
    # Internal variant for resampled chains: the lazy half-step (P+I)/2 has
    # the same fixed points but cannot stall on periodic structure, and the
    # warm start follows the run's current visit frequencies.
    pi = start.copy()
    for _ in range(POWER_ITERATION_CAP):
        nxt = 0.5 * (pi + pi @ P)
        nxt /= nxt.sum()
        if float(np.abs(nxt - pi).sum()) < tol:
            return nxt
        pi = nxt
    raise NotConverged("lazy power iteration stalled")


def random_chain(m: int, s_target: float, seed: int,
                 tol: float = CHAIN_ENTROPY_TOLERANCE) -> MarkovChain:
    """Random irreducible aperiodic chain with target stationary entropy.

    Construction: a target stationary shape with a few heavy states over a
    jittered near-uniform floor, broadcast as identical rows, then mixed
    with a random dense row-stochastic matrix (weight 5%).  The heavy boost
    scale is bisected against the realized stationary entropy.  Keeping the
    floor states close together maximizes the smallest stationary mass
    achievable at a given entropy, which is what keeps finite-N collapse
    runs inside the law's validity regime; log-spread constructions bury
    states so rare they starve immediately.
    """
    if m < 2:
        raise TooFewStates(f"need at least 2 states, got {m}")
    if not (0.0 < s_target <= 1.0):
        raise Unreachable(f"stationary entropy target {s_target} outside (0, 1]")
    if s_target == 1.0:
        P = np.full((m, m), 1.0 / m)
        pi = Distribution(np.full(m, 1.0 / m), m, 1.0, int(seed))
        return MarkovChain(P, pi, m)

    rng = np.random.default_rng(int(seed) % 2**64)
    k = max(1, round(m / 20))
    heavy = rng.choice(m, size=k, replace=False)
    boost = 1.0 + 0.2 * rng.random(k)
    jitter = rng.uniform(-0.05, 0.05, m)
    base = 0.5 + rng.random((m, m))
    base /= base.sum(axis=1, keepdims=True)

    def chain_at(theta: float) -> np.ndarray:
        logpi = jitter.copy()
        logpi[heavy] += theta * boost
        w = np.exp(logpi - logpi.max())
        target = w / w.sum()
        return (1.0 - _MIX) * np.tile(target, (m, 1)) + _MIX * base

    def realized(theta: float) -> tuple[np.ndarray, np.ndarray, float]:
        P = chain_at(theta)
        pi = stationary(P)
        return P, pi, entropy_normalized(pi)

    lo, hi = 0.0, 1.0
    for _ in range(_BISECTION_CAP):
        if realized(hi)[2] <= s_target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise Unreachable(f"stationary entropy {s_target} not reachable at m={m}")

    for _ in range(_BISECTION_CAP):
        mid = 0.5 * (lo + hi)
        P, pi, s = realized(mid)
        if abs(s - s_target) <= tol:
            dist = Distribution(pi, m, s, int(seed))
            return MarkovChain(P, dist, m)
        if s > s_target:
            lo = mid
        else:
            hi = mid
    raise Unreachable(
        f"stationary entropy {s_target} +- {tol} not reached in "
        f"{_BISECTION_CAP} bisections")


def allocate_visits(n_samples: int, pi: np.ndarray) -> np.ndarray:
    """Round n*pi to integers summing exactly to n (largest remainder)."""
    raw = n_samples * pi
    counts = np.floor(raw).astype(np.int64)
    short = int(n_samples - counts.sum())
    if short > 0:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def stationary_support(P: np.ndarray) -> np.ndarray:
    """Boolean mask of states with nonzero long-run visit frequency.

    A state keeps support iff its strongly connected class is closed (no
    edges leaving it) and self-sustaining (rows inside are not all zero);
    transient states and starved all-zero rows drop out.
    """
    m = P.shape[0]
    positive = P > 0
    ncomp, labels = connected_components(csr_matrix(positive), directed=True,
                                         connection="strong")
    support = np.zeros(m, dtype=bool)
    for c in range(ncomp):
        members = labels == c
        if not positive[members].any():
            continue  # dead rows only
        if positive[np.ix_(members, ~members)].any():
            continue  # class leaks outward: transient
        support |= members
    return support


def collapse_run(chain: MarkovChain, n_samples: int, seed: int, run: int,
                 max_cycles: int = DEFAULT_MAX_CYCLES) -> CollapseRecord:
    """One self-training run; returns the first cycle that loses a state."""
    if n_samples < chain.m:
        raise ValidationError(
            f"need at least one sample per state: N={n_samples} < M={chain.m}")
    pi = chain.stationary.probs.copy()
    if np.any(pi <= 0.0):
        return CollapseRecord(0, int(np.flatnonzero(pi <= 0.0)[0]), run,
                              pre_collapsed=True)
    rng = trial_generator(seed, run)
    P = chain.transition.copy()
    full = np.ones(chain.m, dtype=bool)
    for cycle in range(1, max_cycles + 1):
        visits = allocate_visits(n_samples, pi)
        for i in range(chain.m):
            if visits[i] > 0:
                P[i] = rng.multinomial(visits[i], P[i]) / visits[i]
            else:
                P[i] = 0.0
        support = stationary_support(P)
        if not support.all():
            lost = int(np.flatnonzero(full & ~support)[0])
            return CollapseRecord(cycle, lost, run)
        pi = _stationary_lazy(P, pi)
    return CollapseRecord(max_cycles, -1, run, censored=True)


def collapse_experiment(chain: MarkovChain, n_samples: int, runs: int,
                        seed: int, max_cycles: int = DEFAULT_MAX_CYCLES,
                        threads: int = 1) -> tuple[ExtinctionSampleSet, KsResult]:
    """Repeated collapse runs plus a KS test against the law's prediction.

    The theoretical CDF takes the initial stationary distribution as the
    starting probability vector and the per-cycle budget as N.
    """
    if runs < 1:
        raise EmptySample(f"runs must be >= 1, got {runs}")

    def one(r: int) -> CollapseRecord:
        return collapse_run(chain, n_samples, seed, r, max_cycles)

    if threads <= 1:
        collapse_records = [one(r) for r in range(runs)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            collapse_records = list(pool.map(one, range(runs)))

    params = LawParams(chain.stationary, n_samples)
    records = tuple(
        ExtinctionRecord(float(c.tau), c.lost_state, c.run_index, "markov",
                         censored=c.censored)
        for c in collapse_records)
    sample_set = ExtinctionSampleSet(records, params, int(seed), "markov")
    ks = ks_one_sample(sample_set.require_uncensored(),
                       lambda t: min_cdf(params, t))
    return sample_set, ks
