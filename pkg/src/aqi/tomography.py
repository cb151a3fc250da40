"""Attosecond quantum tomography: quadrature sampling across the two-color phase and inverse Radon reconstruction.

The two-color phase φ stands in for the local-oscillator phase, but it also
changes the state being probed; nothing here corrects for that.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .observables import VACUUM_VARIANCE, quadrature_means, quadrature_variance
from .phasespace import HarmonicMixture
from .wigner import DEFAULT_N_CUTOFF, PhaseSpaceGrid, annihilation, fock_density

__all__ = [
    "InsufficientProjections",
    "AQTTrace",
    "AQTGrid",
    "quadrature_pdf",
    "outcome_axis",
    "sample_outcomes",
    "phase_settings",
    "trace_from_states",
    "collect_aqt_trace",
    "radon_kernel",
    "inverse_radon",
    "pooled_variance",
    "aqt_variance_vs_theta",
]

AXIS_POINTS = 2001
N_BOOTSTRAP = 200
MIN_PROJECTIONS = 8


class InsufficientProjections(ValueError):
    pass


@dataclass
class AQTTrace:
    q: float
    theta: float
    phi_values: np.ndarray
    outcomes: np.ndarray  # (n_phases, n_shots)
    seed: int
    analytic_mean: np.ndarray | None = None
    analytic_variance: np.ndarray | None = None

    @property
    def n_shots(self) -> int:
        return self.outcomes.shape[1]


@dataclass(frozen=True)
class AQTGrid(PhaseSpaceGrid):
    provenance: dict = field(default_factory=dict)


def _check_axis(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("axis must be strictly increasing")
    return x


def _christoffel(lam: np.ndarray, n: int) -> np.ndarray:
    """1 / Σ_{m<n} ψ_m(λ)² for normalized Hermite functions in vacuum-variance-0.5 units."""
    psi_prev = np.zeros_like(lam)
    psi = np.pi**-0.25 * np.exp(-0.5 * lam**2)
    total = psi**2
    for m in range(1, n):
        psi_prev, psi = psi, np.sqrt(2.0 / m) * lam * psi - np.sqrt((m - 1) / m) * psi_prev
        total += psi**2
    return 1.0 / total


def quadrature_pdf(
    mixture: HarmonicMixture,
    theta: float,
    x_axis,
    method: str = "analytic",
    n_cutoff: int = DEFAULT_N_CUTOFF,
) -> np.ndarray:
    """Probability density of X_θ outcomes on ``x_axis``.

    ``analytic``: Σ_k w_k N(x; √2 Re(β_k e^{-iθ}), 0.5).
    ``fock``: project the truncated density matrix on the eigenvectors of the
    truncated quadrature operator; the discrete probabilities are turned into a
    density with the Christoffel weights of the eigenvalue nodes.
    """
    x = _check_axis(x_axis)
    if method == "analytic":
        mu = quadrature_means(mixture, theta)[0]
        g = np.exp(-((x[None, :] - mu[:, None]) ** 2) / (2 * VACUUM_VARIANCE))
        return mixture.weights @ g / np.sqrt(2 * np.pi * VACUUM_VARIANCE)
    if method != "fock":
        raise ValueError(f"unknown method {method!r}")
    rho = fock_density(mixture, n_cutoff).matrix
    a = annihilation(n_cutoff)
    X = (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta)) / np.sqrt(2)
    lam, vecs = np.linalg.eigh(X)
    probs = np.real(np.einsum("mi,mn,ni->i", vecs.conj(), rho, vecs))
    density = np.maximum(probs, 0.0) / _christoffel(lam, n_cutoff)
    out = np.zeros_like(x)
    inside = (x >= lam[0]) & (x <= lam[-1])
    out[inside] = CubicSpline(lam, density)(x[inside])
    return np.maximum(out, 0.0)


def outcome_axis(mixture: HarmonicMixture, theta: float, n: int = AXIS_POINTS) -> np.ndarray:
    mu = quadrature_means(mixture, theta)[0]
    half = float(np.max(np.abs(mu))) + 6 * np.sqrt(VACUUM_VARIANCE)
    return np.linspace(-half, half, n)


def sample_outcomes(pdf, x_axis, n_shots: int, seed) -> np.ndarray:
    """Inverse-CDF draws of bin centres; ``seed`` may be an int, SeedSequence or Generator."""
    pdf = np.asarray(pdf, dtype=float)
    x = _check_axis(x_axis)
    if pdf.shape != x.shape or np.any(~np.isfinite(pdf)) or np.any(pdf < 0):
        raise ValueError("pdf must be finite, nonnegative and match the axis")
    mass = pdf * np.gradient(x)
    total = mass.sum()
    if not total > 0:
        raise ValueError("pdf is not normalizable")
    cdf = np.cumsum(mass) / total
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(n_shots), side="right")
    return x[np.minimum(idx, len(x) - 1)]


def phase_settings(n_phases: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n_phases) / n_phases


def _phase_rng(seed: int, j: int) -> np.random.Generator:
    # one stream per phase setting: serial and parallel runs draw identical outcomes
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(j)]))


def trace_from_states(
    state_at: Callable[[float], HarmonicMixture],
    theta: float | Callable[[float], float],
    phi_values,
    n_shots: int,
    seed: int,
    method: str = "analytic",
    q: float | None = None,
) -> AQTTrace:
    """Sample an AQT trace from a state factory ``state_at(φ)``.

    ``theta`` may depend on φ, which emulates true homodyne detection of a fixed
    state (θ_j = φ_j) for round-trip checks.
    """
    phi_values = np.asarray(phi_values, dtype=float)
    if len(phi_values) < 2:
        raise ValueError("need at least two phase settings")
    outcomes = np.empty((len(phi_values), n_shots))
    means = np.empty(len(phi_values))
    variances = np.empty(len(phi_values))
    for j, phi in enumerate(phi_values):
        mixture = state_at(phi)
        th = theta(phi) if callable(theta) else theta
        axis = outcome_axis(mixture, th)
        pdf = quadrature_pdf(mixture, th, axis, method=method)
        outcomes[j] = sample_outcomes(pdf, axis, n_shots, _phase_rng(seed, j))
        means[j] = float(mixture.weights @ quadrature_means(mixture, th)[0])
        variances[j] = quadrature_variance(mixture, th)
        q = mixture.q if q is None else q
    return AQTTrace(q, 0.0 if callable(theta) else float(theta), phi_values, outcomes, seed, means, variances)


def collect_aqt_trace(
    q: float,
    theta: float,
    config,
    n_phases: int = 20,
    n_shots: int = 500,
    seed: int = 0,
    method: str = "analytic",
    pipeline=None,
    **pipeline_kw,
) -> AQTTrace:
    """AQT trace of harmonic ``q`` for the fixed quadrature X_θ over a uniform φ sweep.

    Pass an existing ``pipeline`` to reuse its dipole ensembles and ϱ; otherwise
    one is built from ``config`` and ``pipeline_kw``.
    """
    from .pipeline import Pipeline

    if n_phases < 2:
        raise ValueError("n_phases must be >= 2")
    pipe = pipeline if pipeline is not None else Pipeline(config, **pipeline_kw)

    def state_at(phi):
        try:
            return pipe.mixture(q, phi)
        except Exception as exc:
            raise type(exc)(f"at phi={phi:.4f}: {exc}") from exc

    return trace_from_states(state_at, theta, phase_settings(n_phases), n_shots, seed, method, q=q)


def radon_kernel(u, k_c: float = 3.0):
    """K(u) = (1/2π²) ∫_0^{k_c} k cos(k u) dk, with the removable singularity at u = 0 handled by series."""
    u = np.asarray(u, dtype=float)
    v = k_c * u
    small = np.abs(v) < 1e-2
    vs = np.where(small, 1.0, v)
    closed = (np.cos(vs) + vs * np.sin(vs) - 1.0) / vs**2
    v2 = v * v
    series = 0.5 - v2 / 8 + v2 * v2 / 144
    return k_c**2 / (2 * np.pi**2) * np.where(small, series, closed)


def inverse_radon(
    trace: AQTTrace,
    x_axis,
    p_axis,
    k_c: float = 3.0,
    subtract_mean: bool = False,
) -> AQTGrid:
    """Band-limited filtered back-projection of a trace; φ_j is the projection angle.

    W(x, p) = (1/2) Σ_j Δφ ⟨K(x cos φ_j + p sin φ_j - λ)⟩_shots over a full
    2π sweep (each projection is seen twice).
    """
    n_phases = len(trace.phi_values)
    if n_phases < MIN_PROJECTIONS:
        raise InsufficientProjections(f"{n_phases} phase settings; need at least {MIN_PROJECTIONS}")
    x = _check_axis(x_axis)
    p = _check_axis(p_axis)
    X, P = np.meshgrid(x, p, indexing="ij")
    W = np.zeros_like(X)
    # each back-projection is a 1-D function of s = x cos φ + p sin φ; tabulate it
    # at 20 points per 1/k_c and spline it instead of summing per grid point
    step = 1.0 / (20 * k_c)
    for phi, lam in zip(trace.phi_values, trace.outcomes):
        if subtract_mean:
            lam = lam - lam.mean()
        proj = X * np.cos(phi) + P * np.sin(phi)
        s = np.arange(proj.min() - 2 * step, proj.max() + 3 * step, step)
        values, counts = np.unique(lam, return_counts=True)
        profile = radon_kernel(s[:, None] - values[None, :], k_c) @ counts / len(lam)
        W += CubicSpline(s, profile)(proj)
    W *= np.pi / n_phases
    provenance = {
        "k_c": k_c,
        "n_phases": n_phases,
        "n_shots": trace.n_shots,
        "theta": trace.theta,
        "q": trace.q,
        "seed": trace.seed,
        "subtract_mean": subtract_mean,
    }
    return AQTGrid(x, p, W, provenance)


def pooled_variance(outcomes: np.ndarray) -> float:
    return float(np.mean(np.var(outcomes, axis=1, ddof=1)))


def aqt_variance_vs_theta(
    q: float,
    config,
    theta_list,
    n_phases: int = 20,
    n_shots: int = 500,
    seed: int = 0,
    n_boot: int = N_BOOTSTRAP,
    pipeline=None,
    **pipeline_kw,
) -> dict:
    """Pooled per-φ variance of AQT outcomes for each θ, with bootstrap standard errors.

    Also returns the φ-averaged analytic variance for comparison.
    """
    theta_list = list(theta_list)
    if not theta_list:
        raise ValueError("theta_list is empty")
    from .pipeline import Pipeline

    pipe = pipeline if pipeline is not None else Pipeline(config, **pipeline_kw)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xB007]))
    rows = []
    for i, theta in enumerate(theta_list):
        trace = collect_aqt_trace(q, theta, config, n_phases, n_shots, seed + i, pipeline=pipe)
        est = pooled_variance(trace.outcomes)
        idx = rng.integers(0, n_shots, size=(n_boot, n_shots))
        boots = [pooled_variance(trace.outcomes[:, b]) for b in idx]
        rows.append(
            {
                "theta": float(theta),
                "variance": est,
                "error": float(np.std(boots, ddof=1)),
                "analytic": float(np.mean(trace.analytic_variance)),
                "trace": trace,
            }
        )
    return {"q": q, "rows": rows}
