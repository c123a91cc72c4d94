"""Initial probability distributions: validation, entropy, targeted generation.

A `Distribution` is an immutable probability vector over M >= 2 discrete
states together with its cached normalized entropy (Shannon entropy divided
by log M, so 1.0 is flat and 0.0 is degenerate) and, when it was produced by
a generator, the seed of record.  Zero entries are legal here; consumers
that need strict positivity (the closed-form law and the subset-sum oracle)
reject them at their own boundary, while the simulators treat a zero entry
as extinct from the start.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeEntry, SumOutOfTolerance, TooFewStates, Unreachable

#: |sum(p) - 1| above this is an input error rather than float noise.
SUM_TOLERANCE = 1e-9

#: Default tolerance on realized normalized entropy for gen_with_entropy.
ENTROPY_TOLERANCE = 1e-4

_BISECTION_CAP = 200


@dataclass(frozen=True, eq=False)
class Distribution:
    """Validated probability vector with cached normalized entropy."""

    probs: np.ndarray
    m: int
    entropy_norm: float
    gen_seed: int | None = None

    def __post_init__(self):
        self.probs.setflags(write=False)

    def to_dict(self) -> dict:
        """JSON-ready mapping; field order is part of the file format."""
        return {
            "p": [float(x) for x in self.probs],
            "m": self.m,
            "entropy_norm": float(self.entropy_norm),
            "gen_seed": self.gen_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Distribution":
        # no renormalization here: stored vectors are already normalized and
        # the file format promises a lossless binary64 round trip
        p = np.asarray(d["p"], dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise TooFewStates(f"need at least 2 states, got shape {p.shape}")
        if np.any(p < 0):
            raise NegativeEntry("negative entries in stored distribution")
        if abs(float(p.sum()) - 1.0) > SUM_TOLERANCE:
            raise SumOutOfTolerance(f"stored distribution sums to {p.sum()!r}")
        seed = d.get("gen_seed")
        return cls(p, p.size, entropy_normalized(p),
                   None if seed is None else int(seed))


def entropy_normalized(probs) -> float:
    """Shannon entropy of `probs` divided by log(M), with 0*log(0) = 0.

    The ratio is independent of the logarithm base.  Result lies in [0, 1]
    up to rounding.
    """
    p = np.asarray(probs, dtype=float)
    if p.size < 2:
        raise TooFewStates(f"need at least 2 states, got {p.size}")
    pos = p[p > 0]
    h = -float(np.sum(pos * np.log(pos)))
    return h / np.log(p.size)


def validate(raw, gen_seed: int | None = None) -> Distribution:
    """Check a raw vector and wrap it as a Distribution.

    Entries must be nonnegative and the sum must be within 1e-9 of one;
    the vector is then renormalized exactly so downstream code can rely on
    sum(p) = 1 to machine precision.
    """
    p = np.asarray(raw, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise TooFewStates(f"need a vector of at least 2 states, got shape {p.shape}")
    if np.any(p < 0):
        raise NegativeEntry(f"negative entries at {np.flatnonzero(p < 0).tolist()}")
    total = float(p.sum())
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise SumOutOfTolerance(f"sum(p) = {total!r} not within {SUM_TOLERANCE} of 1")
    p = p / total
    return Distribution(p, p.size, entropy_normalized(p), gen_seed)


def flat(m: int) -> Distribution:
    """Uniform distribution over m states."""
    if m < 2:
        raise TooFewStates(f"need at least 2 states, got {m}")
    return Distribution(np.full(m, 1.0 / m), m, 1.0)


def gen_with_entropy(m: int, s_target: float, seed: int,
                     tol: float = ENTROPY_TOLERANCE) -> Distribution:
    """Random strictly positive distribution with a target normalized entropy.

    Draws one standard normal weight per state and sharpens p_i ~ exp(s*z_i)
    by bisecting the scale s >= 0 against the realized normalized entropy.
    s = 0 is flat (entropy 1); entropy decreases monotonically in s, so the
    bisection is guaranteed a bracket.  Deterministic for a fixed
    (m, s_target, seed) triple.
    """
    if m < 2:
        raise TooFewStates(f"need at least 2 states, got {m}")
    if not (0.0 < s_target <= 1.0):
        raise Unreachable(f"normalized entropy target {s_target} outside (0, 1]")
    if s_target == 1.0:
        f = flat(m)
        return Distribution(f.probs, m, f.entropy_norm, int(seed))

    rng = np.random.default_rng(int(seed) % 2**64)
    z = rng.standard_normal(m)

    def sharpen(scale: float) -> np.ndarray:
        w = scale * z
        w -= w.max()
        p = np.exp(w)
        return p / p.sum()

    lo, hi = 0.0, 1.0
    for _ in range(_BISECTION_CAP):
        if entropy_normalized(sharpen(hi)) <= s_target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise Unreachable(f"entropy {s_target} not bracketed for m={m}, seed={seed}")

    for _ in range(_BISECTION_CAP):
        mid = 0.5 * (lo + hi)
        p = sharpen(mid)
        s = entropy_normalized(p)
        if abs(s - s_target) <= tol:
            if np.any(p <= 0.0):
                raise Unreachable(
                    f"target {s_target} needs entries below float range for m={m}")
            return Distribution(p, m, s, int(seed))
        if s > s_target:
            lo = mid
        else:
            hi = mid
    raise Unreachable(
        f"entropy {s_target} +- {tol} not reached in {_BISECTION_CAP} bisections")
