"""Joint inference for mixed mean/quantile targets.

Quantile point estimates are order statistics; their contribution to the
joint long-run covariance comes from the delta-method transformation
(q - 1{V <= xi_hat}) / f_hat(xi_hat) applied columnwise, after which any
multivariate LRV estimator applies to the stacked transformed chain.
Simultaneous hyperrectangular regions are calibrated by a one-dimensional
search over the common half-width multiplier z, with the rectangle
probabilities evaluated by randomized quasi-Monte Carlo sequential
conditioning (Genz-style).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from .chain import SampleMatrix
from .lrv import NotPositiveDefinite, chol_logdet, matrix_of

_NDTRI_CLIP = 1e-15


@dataclass(frozen=True)
class TargetSpec:
    """One estimand: the mean of a component, or a q-quantile of it."""

    kind: str
    component: int
    q: float | None = None

    def __post_init__(self):
        if self.kind not in ("mean", "quantile"):
            raise ValueError(f"target kind must be 'mean' or 'quantile', got {self.kind!r}")
        if self.component < 0:
            raise ValueError(f"component index must be non-negative, got {self.component}")
        if self.kind == "quantile":
            if self.q is None or not 0.0 < self.q < 1.0:
                raise ValueError(f"quantile probability must lie in (0, 1), got {self.q}")
        elif self.q is not None:
            raise ValueError("mean targets take no probability")

    def label(self) -> str:
        if self.kind == "mean":
            return f"mean[{self.component}]"
        return f"q{self.q:g}[{self.component}]"


@dataclass(frozen=True, eq=False)
class JointEstimate:
    """Point estimates nu_hat with their joint long-run covariance omega."""

    nu_hat: np.ndarray
    omega: np.ndarray
    n: int
    targets: tuple[TargetSpec, ...] = ()

    @property
    def p(self) -> int:
        return self.nu_hat.shape[0]


@dataclass(frozen=True, eq=False)
class SimultaneousRegion:
    """Hyperrectangle nu_hat +- z_star * sqrt(omega_ii / n) with joint coverage."""

    z_star: float
    intervals: np.ndarray  # (p, 2) rows [lo, hi]
    coverage_target: float


def quantile_estimate(values, q: float) -> float:
    """The ceil(n*q)-th order statistic of the sample."""
    v = np.asarray(values, float).ravel()
    if v.size == 0:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile probability must lie in (0, 1), got {q}")
    m = v.size * q
    # ceil, but robust to n*q landing a hair above an integer in floats.
    k = round(m) if math.isclose(m, round(m), rel_tol=0.0, abs_tol=1e-9) else math.ceil(m)
    k = min(max(k, 1), v.size)
    return float(np.partition(v, k - 1)[k - 1])


def kde_density_at(values, x: float) -> float:
    """Gaussian-kernel density estimate at x with the Silverman bandwidth
    0.9 * min(sd, IQR/1.34) * n^(-1/5)."""
    v = np.asarray(values, float).ravel()
    if v.size < 2:
        raise ValueError("need at least 2 observations for a density estimate")
    sd = v.std(ddof=1)
    if sd == 0.0:
        raise ValueError("sample has zero spread")
    iqr = float(np.percentile(v, 75) - np.percentile(v, 25))
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    h = 0.9 * spread * v.size ** (-0.2)
    z = (x - v) / h
    return float(np.exp(-0.5 * z * z).mean() / (h * math.sqrt(2.0 * math.pi)))


def joint_transformed_chain(chain: SampleMatrix, targets: list[TargetSpec]) -> SampleMatrix:
    """Per-target columns whose LRV estimates the joint covariance omega.

    Mean targets keep the raw component; a quantile target becomes the
    centered indicator (q - 1{V_i <= xi_hat}) scaled by the reciprocal of
    the density estimate at the sample quantile.
    """
    if not targets:
        raise ValueError("need at least one target")
    cols = []
    for t in targets:
        if t.component >= chain.p:
            raise ValueError(f"component {t.component} out of range for dimension {chain.p}")
        v = chain.column(t.component)
        if t.kind == "mean":
            cols.append(v)
        else:
            xi = quantile_estimate(v, t.q)
            dens = kde_density_at(v, xi)
            if dens <= 0.0:
                raise ValueError(f"density estimate at the {t.q}-quantile of component {t.component} is not positive")
            cols.append((t.q - (v <= xi)) / dens)
    return SampleMatrix(np.column_stack(cols))


def estimate_omega(chain: SampleMatrix, targets: list[TargetSpec], estimator=None) -> JointEstimate:
    """Point estimates and joint LRV for a list of mean/quantile targets.

    estimator maps a SampleMatrix to an LrvEstimate; the default is
    zero-lugsail batch means at the square-root batch size.
    """
    transformed = joint_transformed_chain(chain, targets)
    if estimator is None:
        from .batch import default_batch_size, lugsail_batch_means
        from .lrv import LugsailConfig

        b = default_batch_size(chain.n, "sqrt", r=2.0)
        est = lugsail_batch_means(transformed, b, LugsailConfig(r=2.0, c=0.5, regime="zero"))
    else:
        est = estimator(transformed)
    nu = np.array([
        chain.column(t.component).mean() if t.kind == "mean" else quantile_estimate(chain.column(t.component), t.q)
        for t in targets
    ])
    return JointEstimate(nu_hat=nu, omega=est.matrix, n=chain.n, targets=tuple(targets))


def _genz_batch(lower, upper, factor, points) -> np.ndarray:
    """Sequentially conditioned rectangle integrand on a block of QMC points."""
    p = lower.shape[0]
    m = points.shape[0]
    d = ndtr(lower[0] / factor[0, 0])
    e = ndtr(upper[0] / factor[0, 0])
    f = np.full(m, e - d)
    y = np.empty((m, p - 1))
    dcur = np.full(m, d)
    ecur = np.full(m, e)
    for i in range(1, p):
        arg = np.clip(dcur + points[:, i - 1] * (ecur - dcur), _NDTRI_CLIP, 1.0 - _NDTRI_CLIP)
        y[:, i - 1] = ndtri(arg)
        shift = y[:, :i] @ factor[i, :i]
        dcur = ndtr((lower[i] - shift) / factor[i, i])
        ecur = ndtr((upper[i] - shift) / factor[i, i])
        f *= ecur - dcur
    return f


def mvn_rect_prob(center, covariance, rect, tol: float = 1e-3, seed=0) -> float:
    """P(U in rect) for U ~ Normal(center, covariance).

    Uses the sequential-conditioning representation integrated with
    randomized (scrambled) Sobol points: variables are reordered by
    standardized interval width, the integrand is averaged over independent
    scramblings, and the point count doubles until the standard-error
    estimate of the average is at most tol.  Univariate input is evaluated
    exactly.  Deterministic for a fixed seed.
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    c = np.atleast_1d(np.asarray(center, float))
    cov = matrix_of(covariance)
    p = c.shape[0]
    r = np.asarray(rect, float).reshape(p, 2)
    lower = r[:, 0] - c
    upper = r[:, 1] - c
    if np.any(upper < lower):
        raise ValueError("rectangle has inverted bounds")
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("covariance is not positive definite") from None

    if p == 1:
        sd = factor[0, 0]
        return float(ndtr(upper[0] / sd) - ndtr(lower[0] / sd))

    # Narrow (standardized) intervals constrain the integrand most, so
    # condition on them first.
    width = (upper - lower) / np.sqrt(np.diag(cov))
    order = np.argsort(width, kind="stable")
    lower, upper = lower[order], upper[order]
    factor = np.linalg.cholesky(cov[np.ix_(order, order)])

    ss = np.random.SeedSequence(seed)
    n_shifts = 10
    log2_points = 7
    while True:
        means = np.empty(n_shifts)
        for k, child in enumerate(ss.spawn(n_shifts)):
            engine = qmc.Sobol(d=p - 1, scramble=True, seed=np.random.default_rng(child))
            pts = engine.random_base2(log2_points)
            means[k] = _genz_batch(lower, upper, factor, pts).mean()
        se = means.std(ddof=1) / math.sqrt(n_shifts)
        if se <= tol:
            return float(np.clip(means.mean(), 0.0, 1.0))
        if log2_points >= 16:
            warnings.warn(
                f"rectangle probability reached the point budget with standard error {se:.2e} > tol {tol:.2e}"
            )
            return float(np.clip(means.mean(), 0.0, 1.0))
        log2_points += 2
        ss = np.random.SeedSequence(seed, spawn_key=(log2_points,))


def solve_z_star(joint: JointEstimate, alpha: float, tol: float = 1e-3, seed=0) -> SimultaneousRegion:
    """Common half-width multiplier giving joint coverage 1 - alpha.

    The rectangle probability is strictly increasing in z, so a bisection
    over z (with common random numbers across evaluations) converges to the
    multiplier whose simultaneous coverage matches the target within tol.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    omega = joint.omega
    if not chol_logdet(omega)[0]:
        raise NotPositiveDefinite("joint covariance omega is not positive definite")
    target = 1.0 - alpha
    sds = np.sqrt(np.diag(omega) / joint.n)
    cov_n = omega / joint.n

    def prob(z: float) -> float:
        rect = np.column_stack([joint.nu_hat - z * sds, joint.nu_hat + z * sds])
        return mvn_rect_prob(joint.nu_hat, cov_n, rect, tol=tol, seed=seed)

    lo, hi = 0.0, 10.0
    while prob(hi) < target:
        hi *= 2.0
        if hi > 1e4:
            raise ValueError("failed to bracket the coverage target")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if prob(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-3:
            break
    z = 0.5 * (lo + hi)
    intervals = np.column_stack([joint.nu_hat - z * sds, joint.nu_hat + z * sds])
    return SimultaneousRegion(z_star=z, intervals=intervals, coverage_target=target)


__all__ = [
    "JointEstimate",
    "SimultaneousRegion",
    "TargetSpec",
    "estimate_omega",
    "joint_transformed_chain",
    "kde_density_at",
    "mvn_rect_prob",
    "quantile_estimate",
    "solve_z_star",
]
