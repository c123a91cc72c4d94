"""First-extinction times of discrete distributions under repeated
finite-sample resampling.

The closed-form law (`law`) predicts when the first state of a probability
vector dies under iterated N-sample multinomial resampling, in O(M) per
evaluation.  It is validated against an exact O(2^M) subset-sum oracle
(`baxter`), two Monte Carlo simulators (`sim`), and applied to predict
self-training collapse of a Markov-chain prediction model (`markov`).
"""

from .baxter import BaxterTerms, cost_estimate, exact_mean
from .dist import Distribution, entropy_normalized, flat, gen_with_entropy, validate
from .law import (
    LawParams,
    MeanEstimate,
    QuadOptions,
    flat_mean_closed_form,
    mean_first_extinction,
    min_cdf,
    min_pdf,
    min_survival,
    quantile,
    state_extinction_cdf,
    state_extinction_pdf,
)
from .markov import (
    CollapseRecord,
    MarkovChain,
    collapse_experiment,
    collapse_run,
    random_chain,
    stationary,
)
from .sim import (
    ExtinctionRecord,
    ExtinctionSampleSet,
    SdeOptions,
    resample_many,
    resample_trial,
    sde_many,
    sde_trial,
)
from .stats import (
    EmpiricalCdf,
    KsResult,
    SampleSummary,
    ecdf,
    kolmogorov_pvalue,
    ks_one_sample,
    ks_two_sample,
    summarize,
    z_compat,
)

__version__ = "0.1.0"
