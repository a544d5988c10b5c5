"""Shared result types and positive-definiteness utilities for LRV estimators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Relative eigenvalue / Cholesky-pivot tolerance used for PSD and PD checks.
REL_TOL = 1e-10
PSD_EIG_TOL = 1e-12


class NotPositiveDefinite(ArithmeticError):
    """A matrix that must be positive (semi)definite is not."""


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def is_psd(m: np.ndarray, rel_tol: float = PSD_EIG_TOL) -> bool:
    """Symmetric PSD test: eigenvalues no smaller than -rel_tol * max |eigenvalue|."""
    eig = np.linalg.eigvalsh(symmetrize(m))
    scale = max(np.abs(eig).max(), 1e-300)
    return bool(eig.min() >= -rel_tol * scale)


def chol_logdet(m: np.ndarray, rel_tol: float = REL_TOL) -> tuple[bool, float, np.ndarray | None]:
    """Cholesky-based PD test and log-determinant.

    Returns (pd, logdet, factor). pd is True when the factorization succeeds
    and the smallest squared pivot is at least rel_tol times the largest,
    in which case logdet is the log-determinant and factor the lower factor.
    """
    m = np.asarray(m, float)
    try:
        lower = np.linalg.cholesky(symmetrize(m))
    except np.linalg.LinAlgError:
        return False, -np.inf, None
    piv = np.diag(lower) ** 2
    if piv.min() < rel_tol * piv.max():
        return False, -np.inf, None
    return True, float(np.log(piv).sum()), lower


@dataclass(frozen=True)
class LugsailConfig:
    """Parameters of the two-scale lugsail bias correction.

    c is the mixing weight in [0, 1); c=None marks the adaptive schedule that
    must be resolved against a concrete (n, b) before use.  regime is one of
    none / zero / adaptive / over / custom.
    """

    r: float = 1.0
    c: float | None = 0.0
    regime: str = "none"

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"lugsail ratio r must be >= 1, got {self.r}")
        if self.c is not None and not 0.0 <= self.c < 1.0:
            raise ValueError(f"lugsail weight c must lie in [0, 1), got {self.c}")
        if self.c is None and self.regime != "adaptive":
            raise ValueError("c=None is only valid for the adaptive regime")
        if self.regime == "zero" and (self.r, self.c) != (2.0, 0.5):
            raise ValueError("zero lugsail is r=2, c=1/2")
        if self.regime == "over" and (self.r, self.c) != (3.0, 0.5):
            raise ValueError("over lugsail is r=3, c=1/2")
        if self.regime not in ("none", "zero", "adaptive", "over", "custom"):
            raise ValueError(f"unknown lugsail regime {self.regime!r}")

    def resolve_c(self, n: int, b: int) -> float:
        """Concrete weight for chain length n and batch size b."""
        if self.c is not None:
            return self.c
        from .batch import adaptive_c

        return adaptive_c(n, b)

    @classmethod
    def classify(cls, r: float, c: float) -> "LugsailConfig":
        """Tag concrete (r, c) with the regime name they correspond to."""
        if c == 0.0 or r == 1.0:
            return cls(r=r, c=c, regime="none") if c == 0.0 else cls(r=1.0, c=c, regime="custom")
        if (r, c) == (2.0, 0.5):
            return cls(r=2.0, c=0.5, regime="zero")
        if (r, c) == (3.0, 0.5):
            return cls(r=3.0, c=0.5, regime="over")
        return cls(r=r, c=c, regime="custom")


@dataclass(frozen=True, eq=False)
class LrvEstimate:
    """A p x p long-run covariance estimate plus the method that produced it.

    matrix is symmetric but, for lugsail combinations, not necessarily
    positive semidefinite; psd records the check so downstream determinant
    code can refuse early instead of failing inside a factorization.
    """

    matrix: np.ndarray
    family: str
    b: int | None = None
    window: str | None = None
    lugsail: LugsailConfig | None = None
    psd: bool = field(default=True)

    def __post_init__(self):
        m = np.asarray(self.matrix, float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"estimate must be square, got shape {m.shape}")
        m = symmetrize(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "psd", is_psd(m))

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    def scalar(self) -> float:
        """The single entry of a univariate estimate."""
        if self.p != 1:
            raise ValueError(f"estimate has dimension {self.p}, not 1")
        return float(self.matrix[0, 0])


def matrix_of(sigma: LrvEstimate | np.ndarray) -> np.ndarray:
    """Accept either an LrvEstimate or a bare symmetric matrix."""
    if isinstance(sigma, LrvEstimate):
        return sigma.matrix
    m = np.atleast_2d(np.asarray(sigma, float))
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m
