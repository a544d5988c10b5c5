"""Multivariate initial-sequence estimators for reversible chains.

Pairs of adjacent lag covariances are accumulated while the running partial
sum stays positive definite with strictly increasing determinant; the scan
stops at the first violation.  This yields a conservative estimate whose
generalized variance asymptotically dominates the truth.  Reversibility of
the input chain cannot be verified here and is a documented precondition.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import SampleMatrix, _lag_cov_block
from .lrv import NotPositiveDefinite, chol_logdet

_FIRST_BLOCK = 128


@dataclass(frozen=True, eq=False)
class InitSeqResult:
    """Estimate plus the truncation bookkeeping of the determinant scan.

    s_n is the first pair index with a positive definite partial sum, t_n
    the last index of the strictly-increasing determinant run, and
    logdet_path the log-determinants for m = s_n .. t_n.
    """

    sigma: np.ndarray
    s_n: int
    t_n: int
    logdet_path: np.ndarray
    adjusted: bool = False

    def scalar(self) -> float:
        if self.sigma.shape != (1, 1):
            raise ValueError(f"estimate has shape {self.sigma.shape}, not (1, 1)")
        return float(self.sigma[0, 0])


def adjacent_pair_sums(chain: SampleMatrix, mmax: int) -> np.ndarray:
    """Symmetrized lag-covariance pairs A_i = sym R(2i) + sym R(2i+1).

    Returns an (mmax+1, p, p) array.  Symmetrizing each lag covariance first
    removes the finite-sample asymmetry that would otherwise leak into the
    eigenvalue logic (the population matrices are symmetric for reversible
    chains).
    """
    if 2 * mmax + 1 > chain.n - 1:
        raise ValueError(f"pair index {mmax} needs lag {2 * mmax + 1} but the chain has length {chain.n}")
    if mmax < 0:
        raise ValueError("pair index must be non-negative")
    block = _lag_cov_block(chain, 0, 2 * mmax + 2)
    sym = 0.5 * (block + np.transpose(block, (0, 2, 1)))
    return sym[0::2] + sym[1::2]


class _SymLagBlock:
    """Symmetrized lag covariances fetched lazily in doubling FFT blocks.

    Each growth costs one full cross-spectrum pass, so both the zeroth lag
    and all pair sums are served from the same cache.
    """

    def __init__(self, chain: SampleMatrix):
        self.chain = chain
        self.block: np.ndarray | None = None

    def _ensure(self, upto: int) -> None:
        if self.block is None or self.block.shape[0] <= upto:
            want = min(self.chain.n - 1, max(_FIRST_BLOCK - 1, 2 * upto))
            raw = _lag_cov_block(self.chain, 0, want + 1)
            self.block = 0.5 * (raw + np.transpose(raw, (0, 2, 1)))

    def lag(self, k: int) -> np.ndarray:
        self._ensure(k)
        return self.block[k]

    def pair(self, m: int) -> np.ndarray:
        self._ensure(2 * m + 1)
        return self.block[2 * m] + self.block[2 * m + 1]


def _scan(chain: SampleMatrix):
    """Shared truncation scan: returns (s_n, t_n, partials, pair sums used)."""
    if chain.n < 4:
        raise ValueError(f"need at least 4 iterations, got {chain.n}")
    limit = chain.n // 2 - 1
    pairs = _SymLagBlock(chain)
    running = -pairs.lag(0)
    used: list[np.ndarray] = []
    s_n = None
    logdets: list[float] = []
    snapshots: list[np.ndarray] = []
    for m in range(limit + 1):
        a_m = pairs.pair(m)
        used.append(a_m)
        running = running + 2.0 * a_m
        pd, logdet, _ = chol_logdet(running)
        if s_n is None:
            if pd:
                s_n = m
                logdets.append(logdet)
                snapshots.append(running.copy())
            continue
        if not pd or logdet <= logdets[-1]:
            break
        logdets.append(logdet)
        snapshots.append(running.copy())
    if s_n is None:
        raise NotPositiveDefinite(
            f"no positive definite partial sum up to pair index {limit}; "
            "the chain is too short or too degenerate for an initial-sequence estimate"
        )
    t_n = s_n + len(logdets) - 1
    return s_n, t_n, snapshots, logdets, used


def initial_sequence(chain: SampleMatrix) -> InitSeqResult:
    """Initial-sequence estimate truncated at the determinant-monotone index."""
    s_n, t_n, snapshots, logdets, _ = _scan(chain)
    return InitSeqResult(sigma=snapshots[-1], s_n=s_n, t_n=t_n, logdet_path=np.array(logdets))


def adjusted_initial_sequence(chain: SampleMatrix) -> InitSeqResult:
    """Eigenvalue-adjusted variant: beyond s_n, each pair-sum increment has
    its negative eigenvalues clipped to zero before accumulation.

    Reuses the s_n / t_n search of the unadjusted scan; the result dominates
    the unadjusted estimate in the Loewner order.
    """
    s_n, t_n, snapshots, _, used = _scan(chain)
    sigma = snapshots[0].copy()
    logdets = [chol_logdet(sigma)[1]]
    for m in range(s_n + 1, t_n + 1):
        sigma = sigma + 2.0 * _clip_negative_eigenvalues(used[m])
        logdets.append(chol_logdet(sigma)[1])
    return InitSeqResult(sigma=sigma, s_n=s_n, t_n=t_n, logdet_path=np.array(logdets), adjusted=True)


def _clip_negative_eigenvalues(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    if vals[0] >= 0.0:
        return m
    return (vecs * np.maximum(vals, 0.0)) @ vecs.T


__all__ = ["InitSeqResult", "adjacent_pair_sums", "adjusted_initial_sequence", "initial_sequence"]
