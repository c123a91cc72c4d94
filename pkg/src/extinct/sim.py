"""Monte Carlo ground truth: multinomial resampling and square-root SDE paths.

Both simulators draw their randomness from counter-based Philox streams
keyed by (seed, trial_index), so every trial is reproducible on its own and
results are identical no matter how trials are scheduled across threads.
The resampler counts the first multinomial draw as tau = 1 and reports the
first step at which a still-alive state receives zero samples; states that
start at zero mass are extinct at tau = 0.  Trials that hit the step cap
are returned as censored records, never as fake times.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AllTrialsCensored, EmptySample, TooFewStates
from .law import LawParams

DEFAULT_MAX_STEPS = 10_000_000

_NORMAL_BLOCK = 256  # SDE normals drawn this many substeps at a time

SOURCES = ("resampling", "sde", "markov")


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Philox stream keyed by (seed, trial): order- and thread-independent."""
    key = np.array([int(seed) % 2**64, int(trial) % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ExtinctionRecord:
    tau: float                # integer-valued for resampling/markov, real for sde
    extinct_state: int        # -1 when censored
    trial_index: int
    source: str
    censored: bool = False


@dataclass(frozen=True, eq=False)
class ExtinctionSampleSet:
    records: tuple
    params: LawParams
    seed: int
    source: str

    def __post_init__(self):
        if len(self.records) == 0:
            raise EmptySample("a sample set needs at least one record")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")

    def taus(self) -> np.ndarray:
        """Usable extinction times; censored trials are excluded."""
        return np.array([r.tau for r in self.records if not r.censored],
                        dtype=float)

    @property
    def n_censored(self) -> int:
        return sum(r.censored for r in self.records)

    def require_uncensored(self) -> np.ndarray:
        t = self.taus()
        if t.size == 0:
            raise AllTrialsCensored(
                f"all {len(self.records)} trials hit the step cap")
        return t


@dataclass(frozen=True)
class SdeOptions:
    """Euler-Maruyama discretization; effective step is dt/substeps."""

    dt: float = 1.0
    substeps: int = 1
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.dt <= 0 or self.substeps < 1 or self.max_steps < 1:
            raise ValueError("dt > 0, substeps >= 1 and max_steps >= 1 required")


def _pre_extinct(p: np.ndarray, trial: int, source: str) -> ExtinctionRecord | None:
    dead = np.flatnonzero(p <= 0.0)
    if dead.size:
        return ExtinctionRecord(0.0, int(dead[0]), trial, source)
    return None


def resample_trial(params: LawParams, seed: int, trial: int,
                   max_steps: int = DEFAULT_MAX_STEPS) -> ExtinctionRecord:
    """One resampling chain: p <- counts/N until some alive state draws zero."""
    p0 = params.dist.probs
    rec = _pre_extinct(p0, trial, "resampling")
    if rec is not None:
        return rec
    rng = trial_generator(seed, trial)
    n = params.n_samples
    p = p0
    for step in range(1, max_steps + 1):
        counts = rng.multinomial(n, p)
        died = (counts == 0) & (p > 0)
        if died.any():
            return ExtinctionRecord(float(step), int(np.flatnonzero(died)[0]),
                                    trial, "resampling")
        p = counts / n
    return ExtinctionRecord(float(max_steps), -1, trial, "resampling",
                            censored=True)


def sde_trial(params: LawParams, opts: SdeOptions, seed: int,
              trial: int) -> ExtinctionRecord:
    """One Euler-Maruyama run of M independent square-root paths.

    A path is absorbed the first time it touches or crosses zero; the
    crossing is located by linear interpolation inside the substep, so the
    returned time has sub-dt resolution.
    """
    p0 = params.dist.probs
    rec = _pre_extinct(p0, trial, "sde")
    if rec is not None:
        return rec
    rng = trial_generator(seed, trial)
    m = p0.size
    h = opts.dt / opts.substeps
    scale = math.sqrt(h / params.n_samples)
    p = p0.copy()
    step = 0
    while step < opts.max_steps:
        block = min(_NORMAL_BLOCK, opts.max_steps - step)
        z = rng.standard_normal((block, opts.substeps, m))
        for b in range(block):
            for k in range(opts.substeps):
                pn = p + np.sqrt(p) * (scale * z[b, k])
                crossed = pn <= 0.0
                if crossed.any():
                    frac = p[crossed] / (p[crossed] - pn[crossed])
                    j = int(np.argmin(frac))
                    tau = step * opts.dt + k * h + h * float(frac[j])
                    state = int(np.flatnonzero(crossed)[j])
                    return ExtinctionRecord(tau, state, trial, "sde")
                p = pn
            step += 1
    return ExtinctionRecord(float(opts.max_steps * opts.dt), -1, trial, "sde",
                            censored=True)


def _run_trials(fn, trials: int, threads: int) -> tuple:
    if trials < 1:
        raise EmptySample(f"trials must be >= 1, got {trials}")
    if threads <= 1:
        return tuple(fn(t) for t in range(trials))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return tuple(pool.map(fn, range(trials)))


def resample_many(params: LawParams, trials: int, seed: int,
                  max_steps: int = DEFAULT_MAX_STEPS,
                  threads: int = 1) -> ExtinctionSampleSet:
    """Independent resampling trials, merged in trial order."""
    records = _run_trials(
        lambda t: resample_trial(params, seed, t, max_steps), trials, threads)
    return ExtinctionSampleSet(records, params, int(seed), "resampling")


def sde_many(params: LawParams, opts: SdeOptions, trials: int, seed: int,
             threads: int = 1) -> ExtinctionSampleSet:
    """Independent SDE trials, merged in trial order."""
    records = _run_trials(
        lambda t: sde_trial(params, opts, seed, t), trials, threads)
    return ExtinctionSampleSet(records, params, int(seed), "sde")
