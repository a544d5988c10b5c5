"""Output-analysis diagnostics built on a long-run variance estimate.

Monte Carlo standard errors, ellipsoidal confidence regions and their
volume, multivariate effective sample size, the pre-computable ESS
threshold, and the relative fixed-volume sequential stopping rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve
from scipy.special import gammaincinv, gammaln

from .chain import SampleMatrix, sample_covariance
from .lrv import LrvEstimate, NotPositiveDefinite, chol_logdet, matrix_of


@dataclass(frozen=True)
class StoppingConfig:
    """Tolerances for the relative fixed-volume rule.

    n_star is the minimum simulation size before termination is allowed;
    None defers to the ESS threshold min_ess(alpha, epsilon, p), which is a
    reasonable stabilization floor.
    """

    alpha: float = 0.05
    epsilon: float = 0.05
    n_star: int | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.n_star is not None and self.n_star < 1:
            raise ValueError(f"n_star must be >= 1, got {self.n_star}")


@dataclass(frozen=True)
class StoppingDecision:
    terminate: bool
    lhs: float  # Vol(C_alpha)^(1/p) + 1/n
    rhs: float  # epsilon * |Lambda_n|^(1/2p)
    ess: float
    min_ess: int
    n: int
    n_star: int


def mcse(sigma: LrvEstimate | np.ndarray, n: int, method: str = "marginal") -> np.ndarray:
    """Monte Carlo standard errors of the componentwise averages.

    The default reads the marginal CLT for each component: sqrt(diag/n).
    method="matrix-sqrt" instead returns diag(B)/sqrt(n) with B the
    symmetric PD square root of the estimate; for p > 1 the two differ and
    the marginal form is the standard choice.
    """
    m = matrix_of(sigma)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if method == "marginal":
        d = np.diag(m)
        bad = np.where(d < 0)[0]
        if bad.size:
            raise NotPositiveDefinite(
                f"negative long-run variance estimate for component {bad[0]}; "
                "use a zero-lugsail or base estimator"
            )
        return np.sqrt(d / n)
    if method == "matrix-sqrt":
        vals, vecs = np.linalg.eigh(m)
        if vals[0] < 0:
            raise NotPositiveDefinite("matrix square root needs a positive semidefinite estimate")
        root = (vecs * np.sqrt(vals)) @ vecs.T
        return np.diag(root) / math.sqrt(n)
    raise ValueError(f"unknown mcse method {method!r}")


def chi2_quantile(prob: float, df: int) -> float:
    """Inverse chi-square CDF via the regularized incomplete gamma inverse."""
    if not 0.0 < prob < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {prob}")
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    return float(2.0 * gammaincinv(df / 2.0, prob))


def _pd_logdet(sigma, what: str) -> float:
    pd, logdet, _ = chol_logdet(matrix_of(sigma))
    if not pd:
        raise NotPositiveDefinite(f"{what} is not positive definite")
    return logdet


def region_volume(sigma: LrvEstimate | np.ndarray, n: int, alpha: float) -> float:
    """Volume of the 100(1-alpha)% confidence ellipsoid for the mean vector."""
    m = matrix_of(sigma)
    p = m.shape[0]
    logdet = _pd_logdet(m, "the long-run variance estimate")
    chi2 = chi2_quantile(1.0 - alpha, p)
    log_vol = (
        math.log(2.0)
        + (p / 2.0) * math.log(math.pi)
        - math.log(p)
        - gammaln(p / 2.0)
        + (p / 2.0) * (math.log(chi2) - math.log(n))
        + 0.5 * logdet
    )
    return math.exp(log_vol)


def region_contains(theta0, theta_bar, sigma: LrvEstimate | np.ndarray, n: int, alpha: float) -> bool:
    """Whether theta0 lies inside the confidence ellipsoid centered at theta_bar."""
    m = matrix_of(sigma)
    p = m.shape[0]
    pd, _, factor = chol_logdet(m)
    if not pd:
        raise NotPositiveDefinite("the long-run variance estimate is not positive definite")
    d = np.atleast_1d(np.asarray(theta_bar, float)) - np.atleast_1d(np.asarray(theta0, float))
    stat = n * float(d @ cho_solve((factor, True), d))
    return stat < chi2_quantile(1.0 - alpha, p)


def ess(chain: SampleMatrix, sigma: LrvEstimate | np.ndarray) -> float:
    """Multivariate effective sample size n * (|Lambda_n| / |Sigma_n|)^(1/p)."""
    logdet_sigma = _pd_logdet(sigma, "the long-run variance estimate")
    logdet_lambda = _pd_logdet(sample_covariance(chain), "the sample covariance")
    return chain.n * math.exp((logdet_lambda - logdet_sigma) / chain.p)


def min_ess(alpha: float, epsilon: float, p: int) -> int:
    """Effective-sample-size threshold equivalent to the fixed-volume rule.

    Depends only on the confidence level, relative precision, and dimension,
    so it can be computed before any simulation.  Rounded to the nearest
    integer.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if p < 1:
        raise ValueError(f"dimension must be >= 1, got {p}")
    chi2 = chi2_quantile(1.0 - alpha, p)
    log_m = (
        (2.0 / p) * math.log(2.0)
        + math.log(math.pi)
        - (2.0 / p) * (math.log(p) + gammaln(p / 2.0))
        + math.log(chi2)
        - 2.0 * math.log(epsilon)
    )
    return int(round(math.exp(log_m)))


def fixed_volume_check(chain: SampleMatrix, sigma: LrvEstimate | np.ndarray,
                       config: StoppingConfig) -> StoppingDecision:
    """Relative fixed-volume stopping decision for the current chain.

    Terminates once n exceeds n_star and the p-th root of the confidence
    region volume, padded by 1/n, drops below epsilon times the scale
    |Lambda_n|^(1/2p) of the target distribution.
    """
    n, p = chain.n, chain.p
    n_star = config.n_star if config.n_star is not None else min_ess(config.alpha, config.epsilon, p)
    vol = region_volume(sigma, n, config.alpha)
    logdet_lambda = _pd_logdet(sample_covariance(chain), "the sample covariance")
    lhs = vol ** (1.0 / p) + 1.0 / n
    rhs = config.epsilon * math.exp(logdet_lambda / (2.0 * p))
    return StoppingDecision(
        terminate=bool(n > n_star and lhs < rhs),
        lhs=lhs,
        rhs=rhs,
        ess=ess(chain, sigma),
        min_ess=min_ess(config.alpha, config.epsilon, p),
        n=n,
        n_star=n_star,
    )


__all__ = [
    "StoppingConfig",
    "StoppingDecision",
    "chi2_quantile",
    "ess",
    "fixed_volume_check",
    "mcse",
    "min_ess",
    "region_contains",
    "region_volume",
]
