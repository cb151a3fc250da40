"""Photon statistics, quadrature variances, intensity correlations and linear entropy.

Quadratures use the convention where the vacuum variance is 0.5, i.e.
X_θ = (a† e^{iθ} + a e^{-iθ}) / √2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phasespace import HarmonicMixture

__all__ = [
    "UndefinedCorrelation",
    "QuadratureStats",
    "CorrelationMatrix",
    "mean_photon",
    "quadrature_means",
    "quadrature_variance",
    "variance_extrema",
    "g2_pair",
    "csi_matrix",
    "purity",
    "linear_entropy",
]

VACUUM_VARIANCE = 0.5


class UndefinedCorrelation(ZeroDivisionError):
    """g² requested for a mode with zero mean photon number."""


@dataclass(frozen=True)
class QuadratureStats:
    q: float
    theta_grid: np.ndarray
    variance: np.ndarray
    var_min: float
    var_max: float
    theta_min: float
    theta_max: float


@dataclass
class CorrelationMatrix:
    q_list: list
    g2: np.ndarray
    delta_csi: np.ndarray
    undefined: np.ndarray  # True where g² could not be evaluated


def mean_photon(mixture: HarmonicMixture) -> float:
    return float(np.sum(mixture.weights * np.abs(mixture.betas) ** 2))


def quadrature_means(mixture: HarmonicMixture, theta) -> np.ndarray:
    """Per-component ⟨X_θ⟩ = √2 Re(β e^{-iθ}), shape (len(theta), K)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return np.sqrt(2) * np.real(mixture.betas[None, :] * np.exp(-1j * theta[:, None]))


def quadrature_variance(mixture: HarmonicMixture, theta):
    x = quadrature_means(mixture, theta)
    w = mixture.weights
    mean = x @ w
    var = VACUUM_VARIANCE + np.maximum((x**2) @ w - mean**2, 0.0)
    return float(var[0]) if np.ndim(theta) == 0 else var


def _classical_covariance(mixture: HarmonicMixture) -> np.ndarray:
    w = mixture.weights
    xy = np.sqrt(2) * np.stack([mixture.betas.real, mixture.betas.imag])
    centred = xy - (xy @ w)[:, None]
    return (centred * w) @ centred.T


def variance_extrema(mixture: HarmonicMixture, n_theta: int = 181) -> QuadratureStats:
    """Extremal quadrature variances from the 2x2 covariance of the component displacements."""
    cov = _classical_covariance(mixture)
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, 0.0)
    if vals[1] - vals[0] <= 1e-15 * max(1.0, vals[1]):
        th_min = th_max = 0.0
    else:
        th_max = float(np.mod(np.arctan2(vecs[1, 1], vecs[0, 1]), np.pi))
        th_min = float(np.mod(th_max + np.pi / 2, np.pi))
    grid = np.linspace(0, np.pi, n_theta, endpoint=False)
    return QuadratureStats(
        q=mixture.q,
        theta_grid=grid,
        variance=quadrature_variance(mixture, grid),
        var_min=VACUUM_VARIANCE + float(vals[0]),
        var_max=VACUUM_VARIANCE + float(vals[1]),
        theta_min=th_min,
        theta_max=th_max,
    )


def g2_pair(m1: HarmonicMixture, m2: HarmonicMixture) -> float:
    """Normally ordered intensity correlation g²_{q1,q2}; joint moments are sample-diagonal."""
    if m1 is not m2 and not m1.same_samples(m2):
        raise ValueError("g2 needs both mixtures built from the same sample set")
    w = m1.weights
    n1 = np.abs(m1.betas) ** 2
    n2 = np.abs(m2.betas) ** 2
    mean1, mean2 = w @ n1, w @ n2
    if mean1 <= 0 or mean2 <= 0:
        raise UndefinedCorrelation(f"zero photon number in mode q={m1.q if mean1 <= 0 else m2.q}")
    if len(w) == 1:
        return 1.0
    return float((w @ (n1 * n2)) / (mean1 * mean2))


def csi_matrix(mixtures: list[HarmonicMixture]) -> CorrelationMatrix:
    """g² and Δ_CSI = g²_11 g²_22 - (g²_12)² for every pair; undefined entries are NaN and flagged."""
    n = len(mixtures)
    g2 = np.full((n, n), np.nan)
    bad = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i, n):
            try:
                g2[i, j] = g2[j, i] = g2_pair(mixtures[i], mixtures[j])
            except UndefinedCorrelation:
                bad[i, j] = bad[j, i] = True
    diag = np.diag(g2)
    delta = np.outer(diag, diag) - g2**2
    np.fill_diagonal(delta, np.where(np.isnan(diag), np.nan, 0.0))
    return CorrelationMatrix([m.q for m in mixtures], g2, delta, bad)


def purity(mixture: HarmonicMixture) -> float:
    """Tr ρ² = Σ_kl w_k w_l |⟨β_k|β_l⟩|² with |⟨β|β'⟩|² = exp(-|β - β'|²)."""
    b = mixture.betas
    w = mixture.weights
    if len(b) == 1:
        return 1.0
    overlap = np.exp(-np.abs(b[:, None] - b[None, :]) ** 2)
    return float(w @ overlap @ w)


def linear_entropy(mixture: HarmonicMixture) -> float:
    return max(0.0, 1.0 - purity(mixture))
