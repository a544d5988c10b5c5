"""Synthetic chain generators and replication studies.

Generators are deterministic functions of their seed.  Replication studies
derive one independent stream per replicate through SeedSequence spawn
keys, so results do not depend on execution order and can be reproduced
from the master seed alone.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.signal import lfilter

from .batch import default_batch_size, lugsail_batch_means, lugsail_overlapping_batch_means
from .chain import SampleMatrix, mean_vector
from .diagnostics import ess, region_contains
from .initseq import adjusted_initial_sequence, initial_sequence
from .lrv import LrvEstimate, LugsailConfig
from .spectral import get_window, lugsail_spectral_variance, spectral_variance

Estimator = Callable[[SampleMatrix], LrvEstimate]


@dataclass(frozen=True)
class Ar1Config:
    """Normal AR(1): x_{t+1} = phi * x_t + standard normal innovation."""

    phi: float
    n: int
    seed: int | np.random.SeedSequence = 0
    x0: float = 0.0

    def __post_init__(self):
        if not abs(self.phi) < 1:
            raise ValueError(f"need |phi| < 1, got {self.phi}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")


@dataclass(frozen=True)
class MixtureConfig:
    """Three-component normal mixture sampled by random-walk Metropolis."""

    n: int
    weights: tuple[float, ...] = (0.2, 0.3, 0.5)
    means: tuple[float, ...] = (2.5, 4.5, 7.5)
    sds: tuple[float, ...] = (1.0, 1.0, 1.0)
    proposal_sd: float = 0.5
    seed: int | np.random.SeedSequence = 0

    def __post_init__(self):
        if len(self.weights) != len(self.means) or len(self.means) != len(self.sds):
            raise ValueError("weights, means, sds must have equal length")
        if not math.isclose(sum(self.weights), 1.0, abs_tol=1e-12):
            raise ValueError(f"weights must sum to 1, got {sum(self.weights)}")
        if any(s <= 0 for s in self.sds):
            raise ValueError("component standard deviations must be positive")
        if self.proposal_sd <= 0:
            raise ValueError("proposal standard deviation must be positive")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")

    @property
    def mean(self) -> float:
        return sum(w * m for w, m in zip(self.weights, self.means))


@dataclass(frozen=True)
class BiasTruth:
    """Closed-form targets for the AR(1) mean problem."""

    sigma_true: float
    gamma: float
    ess_ratio: float

    def __post_init__(self):
        if self.sigma_true <= 0:
            raise ValueError("sigma_true must be positive")


def ar1_generate(cfg: Ar1Config) -> SampleMatrix:
    """Simulate the AR(1) chain; deterministic given the seed."""
    rng = np.random.default_rng(cfg.seed)
    eps = rng.standard_normal(cfg.n)
    x, _ = lfilter([1.0], [1.0, -cfg.phi], eps, zi=[cfg.phi * cfg.x0])
    return SampleMatrix(x)


def ar1_truth(phi: float) -> BiasTruth:
    """Long-run variance, first-order bias constant, and ESS/n for the AR(1) mean."""
    if not abs(phi) < 1:
        raise ValueError(f"need |phi| < 1, got {phi}")
    one = 1.0 - phi
    return BiasTruth(
        sigma_true=1.0 / one**2,
        gamma=-2.0 * phi / (one**2 * (1.0 - phi * phi)),
        ess_ratio=one**2 / (1.0 - phi * phi),
    )


def mixture_mh_generate(cfg: MixtureConfig) -> SampleMatrix:
    """Random-walk Metropolis chain targeting the mixture density.

    Starts at the mixture mean.  All randomness is drawn up front so the
    accept/reject loop is a tight scalar recursion.
    """
    rng = np.random.default_rng(cfg.seed)
    steps = rng.standard_normal(cfg.n) * cfg.proposal_sd
    logu = np.log(rng.random(cfg.n))
    log_w = [math.log(w) - math.log(s) for w, s in zip(cfg.weights, cfg.sds)]
    mu, sd = cfg.means, cfg.sds
    k = len(mu)

    def logf(v: float) -> float:
        # log-sum-exp with the max shifted out so far-tail proposals cannot
        # underflow every component at once
        terms = [log_w[j] - 0.5 * ((v - mu[j]) / sd[j]) ** 2 for j in range(k)]
        top = max(terms)
        return top + math.log(sum(math.exp(t - top) for t in terms))

    out = np.empty(cfg.n)
    x = cfg.mean
    lx = logf(x)
    for i in range(cfg.n):
        y = x + steps[i]
        ly = logf(y)
        if logu[i] < ly - lx:
            x, lx = y, ly
        out[i] = x
    return SampleMatrix(out)


def mh_acceptance_rate(chain: SampleMatrix) -> float:
    """Fraction of iterations whose state differs from the previous one."""
    x = chain.column(0)
    return float(np.mean(x[1:] != x[:-1]))


def logistic_mh_generate(n_obs: int, p_coef: int, n: int,
                         seed: int | np.random.SeedSequence = 0,
                         proposal_sd: float | None = None) -> SampleMatrix:
    """Random-walk Metropolis chain for Bayesian logistic regression.

    A synthetic design matrix (standard normal covariates, fixed alternating
    true coefficients) and Bernoulli responses are drawn from the same seed;
    the posterior combines the logistic likelihood with the tight normal
    prior N(0, I/100).  n_obs=0 reduces the target to the prior.
    """
    if p_coef < 1:
        raise ValueError(f"need at least one coefficient, got {p_coef}")
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    design = rng.standard_normal((n_obs, p_coef))
    beta_true = 0.5 * (-1.0) ** np.arange(p_coef)
    y = (rng.random(n_obs) < 1.0 / (1.0 + np.exp(-design @ beta_true))).astype(float)

    prior_precision = 100.0
    # Posterior scale heuristic: prior precision plus the n_obs/4 cap of the
    # logistic Fisher information, spread over a p-dimensional random walk.
    scale = 1.0 / math.sqrt(prior_precision + 0.25 * n_obs)
    step = proposal_sd if proposal_sd is not None else 2.4 * scale / math.sqrt(p_coef)

    def logpost(beta: np.ndarray) -> float:
        quad = -0.5 * prior_precision * float(beta @ beta)
        if n_obs == 0:
            return quad
        xb = design @ beta
        return float(y @ xb - np.logaddexp(0.0, xb).sum()) + quad

    steps = rng.standard_normal((n, p_coef)) * step
    logu = np.log(rng.random(n))
    out = np.empty((n, p_coef))
    beta = np.zeros(p_coef)
    lp = logpost(beta)
    for i in range(n):
        cand = beta + steps[i]
        lc = logpost(cand)
        if logu[i] < lc - lp:
            beta, lp = cand, lc
        out[i] = beta
    return SampleMatrix(out)


def make_estimator(method: str, *, b: int | None = None, lugsail: str = "none",
                   r: float | None = None, c: float | None = None,
                   window: str = "bartlett", batch_rule: str = "sqrt") -> Estimator:
    """Build a named estimator callable for studies and the command line.

    method is bm / obm / sv / initseq / initseq-adj; lugsail is none / zero /
    adaptive / over / custom (custom requires r and c).  b=None picks the
    batch size (or truncation point) from batch_rule at call time.
    """
    if method not in ("bm", "obm", "sv", "initseq", "initseq-adj"):
        raise ValueError(f"unknown estimator method {method!r}")
    if method.startswith("initseq"):
        if lugsail != "none":
            raise ValueError("initial-sequence estimators take no lugsail adjustment")
        return initial_sequence_estimate if method == "initseq" else adjusted_initial_sequence_estimate

    if lugsail == "custom":
        if r is None or c is None:
            raise ValueError("custom lugsail needs both r and c")
        config = LugsailConfig.classify(float(r), float(c))
    elif lugsail == "none":
        config = LugsailConfig()
    elif lugsail == "zero":
        config = LugsailConfig(r=2.0, c=0.5, regime="zero")
    elif lugsail == "adaptive":
        config = LugsailConfig(r=2.0, c=None, regime="adaptive")
    elif lugsail == "over":
        config = LugsailConfig(r=3.0, c=0.5, regime="over")
    else:
        raise ValueError(f"unknown lugsail regime {lugsail!r}")

    win = get_window(window) if method == "sv" else None

    def estimate(chain: SampleMatrix) -> LrvEstimate:
        bb = b if b is not None else default_batch_size(chain.n, batch_rule, r=config.r)
        if method == "bm":
            return lugsail_batch_means(chain, bb, config)
        if method == "obm":
            return lugsail_overlapping_batch_means(chain, bb, config)
        if config.regime == "none":
            return spectral_variance(chain, win, bb)
        return lugsail_spectral_variance(chain, win, bb, config.r, config.resolve_c(chain.n, bb))

    return estimate


def initial_sequence_estimate(chain: SampleMatrix) -> LrvEstimate:
    res = initial_sequence(chain)
    return LrvEstimate(res.sigma, family="initseq")


def adjusted_initial_sequence_estimate(chain: SampleMatrix) -> LrvEstimate:
    res = adjusted_initial_sequence(chain)
    return LrvEstimate(res.sigma, family="initseq-adj")


def standard_grid(lugsails: Sequence[str] = ("none", "zero", "over"),
                  methods: Sequence[str] = ("bm",), batch_rule: str = "sqrt") -> dict[str, Estimator]:
    """Labelled estimator grid like the replication studies use."""
    grid: dict[str, Estimator] = {}
    for method in methods:
        if method.startswith("initseq"):
            grid[method] = make_estimator(method)
            continue
        for lug in lugsails:
            label = method if lug == "none" else f"{method}-{lug}"
            grid[label] = make_estimator(method, lugsail=lug, batch_rule=batch_rule)
    return grid


def _replicate_seed(master: int, index: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master, spawn_key=index)


def coverage_study(generator: Callable[[int, np.random.SeedSequence], SampleMatrix],
                   true_mean, estimators: dict[str, Estimator], n_grid: Sequence[int],
                   replications: int, seed: int, alpha: float = 0.05) -> list[dict]:
    """Observed coverage of the 100(1-alpha)% region for the true mean.

    Each replicate chain is generated once and shared by every estimator so
    the estimators are compared on identical data.
    """
    theta0 = np.atleast_1d(np.asarray(true_mean, float))
    rows = []
    for i_n, n in enumerate(n_grid):
        hits = {name: 0 for name in estimators}
        for rep in range(replications):
            chain = generator(n, _replicate_seed(seed, (i_n, rep)))
            xbar = mean_vector(chain)
            for name, estimate in estimators.items():
                if region_contains(theta0, xbar, estimate(chain), n, alpha):
                    hits[name] += 1
        for name in estimators:
            cov = hits[name] / replications
            rows.append({
                "estimator": name,
                "n": n,
                "replications": replications,
                "coverage": cov,
                "mc_se": math.sqrt(cov * (1.0 - cov) / replications),
            })
    return rows


def ess_study(generator: Callable[[int, np.random.SeedSequence], SampleMatrix],
              truth: BiasTruth | None, estimators: dict[str, Estimator], n_grid: Sequence[int],
              replications: int, seed: int) -> list[dict]:
    """Replication mean and spread of estimated ESS/n per (estimator, n)."""
    rows = []
    for i_n, n in enumerate(n_grid):
        ratios = {name: np.empty(replications) for name in estimators}
        for rep in range(replications):
            chain = generator(n, _replicate_seed(seed, (i_n, rep)))
            for name, estimate in estimators.items():
                ratios[name][rep] = ess(chain, estimate(chain)) / n
        for name in estimators:
            vals = ratios[name]
            rows.append({
                "estimator": name,
                "n": n,
                "replications": replications,
                "mean_ess_per_n": float(vals.mean()),
                "sd_ess_per_n": float(vals.std(ddof=1)) if replications > 1 else 0.0,
                "truth_ess_per_n": truth.ess_ratio if truth is not None else None,
            })
    return rows


def ar1_chain_factory(phi: float, x0: float = 0.0) -> Callable[[int, np.random.SeedSequence], SampleMatrix]:
    def factory(n: int, seed) -> SampleMatrix:
        return ar1_generate(Ar1Config(phi=phi, n=n, seed=seed, x0=x0))

    return factory


def timing_bench(chain: SampleMatrix, estimators: dict[str, Estimator],
                 repetitions: int = 5) -> list[dict]:
    """Median wall time per estimator.

    Each repetition runs on a fresh copy of the matrix so per-chain caches
    (the shared FFT of the centered columns) cannot subsidize later calls.
    """
    rows = []
    for name, estimate in estimators.items():
        times = []
        for _ in range(repetitions):
            fresh = SampleMatrix(chain.values)
            t0 = time.perf_counter()
            estimate(fresh)
            times.append(time.perf_counter() - t0)
        rows.append({
            "estimator": name,
            "median_seconds": float(np.median(times)),
            "repetitions": repetitions,
        })
    return rows


def median_times(rows: list[dict]) -> dict[str, float]:
    return {row["estimator"]: row["median_seconds"] for row in rows}


def ordering_ok(rows: list[dict], sequence: Sequence[str], slack: float = 1.0) -> bool:
    """True when the named estimators' median times are non-decreasing,
    allowing faster-by-up-to-slack ties (slack=1.1 tolerates a 10% tie)."""
    med = median_times(rows)
    times = [med[name] for name in sequence]
    return all(later * slack >= earlier for earlier, later in zip(times, times[1:]))


__all__ = [
    "Ar1Config",
    "BiasTruth",
    "MixtureConfig",
    "ar1_chain_factory",
    "ar1_generate",
    "ar1_truth",
    "coverage_study",
    "ess_study",
    "logistic_mh_generate",
    "make_estimator",
    "median_times",
    "mh_acceptance_rate",
    "mixture_mh_generate",
    "ordering_ok",
    "standard_grid",
    "timing_bench",
]
