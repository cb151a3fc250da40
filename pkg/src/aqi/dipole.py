"""Strong-field-approximation dipole response and harmonic spectra.

The dipole of one classical field realization is the Lewenstein integral over
ionization times, with the stationary momentum and action obtained from running
integrals of the vector potential. Flat envelopes are treated as a periodic
steady-state drive (the ionization-time integral wraps around the window);
sin² pulses start from a field-free atom.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .field import DriverConfig, PhaseSpaceSample, frame_transform, _odd_cutoff

__all__ = [
    "NumericalError",
    "CacheError",
    "DipoleRecord",
    "sfa_dipole",
    "harmonic_spectrum",
    "harmonic_grid",
    "cutoff_estimate",
    "measured_cutoff",
    "ensemble_dipoles",
]

log = logging.getLogger(__name__)

EXCURSION_CYCLES = 1.5
TAPER_CYCLES = 0.25
EPS_REG = 1e-6
CACHE_SCHEMA = 1


class NumericalError(ArithmeticError):
    def __init__(self, message: str, t=None, t_ion=None):
        super().__init__(message)
        self.t = t
        self.t_ion = t_ion


class CacheError(OSError):
    """The dipole cache directory cannot be created or written."""


def default_window(config: DriverConfig) -> str:
    return "none" if config.envelope == "flat" else "hann"


def harmonic_grid(config: DriverConfig, q_max: float | None = None) -> np.ndarray:
    """Integer and half-integer harmonic orders 0.5, 1.0, ..., q_max."""
    if q_max is None:
        q_max = 2 * config.q_cutoff + 8
    return np.arange(1, int(round(2 * q_max)) + 1) / 2.0


@dataclass
class DipoleRecord:
    sample_id: int
    t: np.ndarray
    d_t: np.ndarray
    omega: float
    window: str = "none"
    spectrum: np.ndarray = field(init=False, repr=False)
    q_values: np.ndarray = field(init=False, repr=False)
    _harmonics: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        n = len(self.t)
        dt = self.t[1] - self.t[0]
        # e^{+iωt} convention: positive frequencies are emitted-mode amplitudes
        self.spectrum = dt * n * np.fft.ifft(self.d_t) * np.exp(
            1j * 2 * np.pi * np.fft.fftfreq(n, dt) * self.t[0]
        )
        self.q_values = 2 * np.pi * np.fft.fftfreq(n, dt) / self.omega

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def at(self, q) -> complex:
        """Spectral amplitude d(ω_q) with the record's default window (memoized)."""
        key = float(q)
        if key not in self._harmonics:
            self._harmonics[key] = complex(harmonic_spectrum(self, self.window, [key])[0])
        return self._harmonics[key]


def _extended_field(config: DriverConfig, sample: PhaseSpaceSample, n_back: int):
    tg = config.time_grid
    dt = tg.dt
    te = tg.t_start + dt * np.arange(-n_back, tg.n_steps)
    ex, ey = frame_transform(sample, config)
    w = config.omega
    E = config.E_omega * np.cos(w * te) + ex * np.cos(2 * w * te) + ey * np.sin(2 * w * te)
    if config.envelope == "sin2":
        env = np.sin(np.pi * (te - tg.t_start) / (tg.t_end - tg.t_start)) ** 2
        E = np.where(te < tg.t_start, 0.0, env * E)
    return te, E


def _running_integral(f: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1])) * dt
    return out


def sfa_dipole(config: DriverConfig, sample: PhaseSpaceSample) -> DipoleRecord:
    """Time-dependent dipole ⟨d(t)⟩ of one field realization in the SFA.

    Hydrogen-like bound-continuum matrix element d(p) ∝ p / (p² + 2 I_p)³. The
    excursion time is truncated at ``EXCURSION_CYCLES`` with a cos² taper over
    the last ``TAPER_CYCLES``; the (t - t')^{-3/2} wave-packet spreading factor
    is regularized by ``EPS_REG``.
    """
    tg = config.time_grid
    dt = tg.dt
    N = tg.n_steps
    J = int(round(EXCURSION_CYCLES * config.period / dt))
    J_taper = max(1, int(round(TAPER_CYCLES * config.period / dt)))
    _, E = _extended_field(config, sample, J)

    A = -_running_integral(E, dt)
    if config.envelope == "flat":
        A -= A[J:].mean()
    A1 = _running_integral(A, dt)
    A2 = _running_integral(A * A, dt)
    Ip = config.Ip

    now = slice(J, J + N)
    acc = np.zeros(N, dtype=complex)
    with np.errstate(all="raise"):
        try:
            for j in range(1, J + 1):
                tau = j * dt
                ion = slice(J - j, J - j + N)
                dA1 = A1[now] - A1[ion]
                p = -dA1 / tau
                v_ret = p + A[now]
                v_ion = p + A[ion]
                action = Ip * tau - dA1 * dA1 / (2 * tau) + 0.5 * (A2[now] - A2[ion])
                matrix = v_ret * v_ion / ((v_ret**2 + 2 * Ip) ** 3 * (v_ion**2 + 2 * Ip) ** 3)
                weight = dt * (np.pi / (EPS_REG + 0.5j * tau)) ** 1.5
                if j > J - J_taper:
                    weight *= np.cos(0.5 * np.pi * (j - (J - J_taper)) / J_taper) ** 2
                acc += weight * matrix * E[ion] * np.exp(-1j * action)
        except FloatingPointError as exc:
            raise NumericalError(f"SFA integrand failed at excursion {tau:.3f} a.u.: {exc}", t_ion=tau) from None
    d_t = 2.0 * acc.imag
    if not np.all(np.isfinite(d_t)):
        bad = int(np.argmax(~np.isfinite(d_t)))
        raise NumericalError("non-finite dipole", t=tg.t_start + bad * dt)
    return DipoleRecord(sample.sample_id, tg.times(), d_t, config.omega, default_window(config))


def harmonic_spectrum(record: DipoleRecord, window: str | None = None, q_values=None) -> np.ndarray:
    """Windowed Fourier amplitudes d(ω_q) = ∫ w(t) d(t) e^{iqωt} dt.

    Evaluated directly at the requested orders (default 0.5, 1.0, ..., 40), so
    half-integer q need not lie on the FFT grid.
    """
    if window is None:
        window = record.window
    if q_values is None:
        q_values = np.arange(1, 81) / 2.0
    q_values = np.atleast_1d(np.asarray(q_values, dtype=float))
    t = record.t
    if window == "none":
        w = np.ones_like(t)
    elif window == "hann":
        span = t[-1] + record.dt - t[0]
        w = np.sin(np.pi * (t - t[0]) / span) ** 2
    else:
        raise ValueError(f"unknown window {window!r}")
    phase = np.exp(1j * record.omega * np.outer(q_values, t))
    return record.dt * (phase @ (w * record.d_t))


def cutoff_estimate(config: DriverConfig) -> int:
    """Semiclassical cutoff (I_p + 3.17 U_p)/ω, rounded to the nearest odd order."""
    return _odd_cutoff(config.Ip, config.E_omega, config.omega)


def measured_cutoff(q_values, intensity, Ip: float, omega: float, decades: float = 1.0) -> int:
    """Last odd harmonic within ``decades`` of the brightest odd harmonic above the ionization threshold."""
    q_values = np.asarray(q_values, dtype=float)
    intensity = np.asarray(intensity, dtype=float)
    odd = (np.abs(q_values - np.round(q_values)) < 1e-9) & (np.round(q_values) % 2 == 1)
    above = odd & (q_values > Ip / omega)
    if not np.any(above):
        raise ValueError("no odd harmonics above the ionization threshold")
    level = intensity[above].max() * 10.0 ** (-decades)
    hits = q_values[above & (intensity >= level)]
    return int(hits.max())


# --- ensemble evaluation and cache ------------------------------------------


def _cache_key(config: DriverConfig, sample: PhaseSpaceSample) -> str:
    ex, ey = frame_transform(sample, config)
    payload = {
        "schema": CACHE_SCHEMA,
        "physical": config.physical_dict(),
        "field_2w": [repr(float(ex)), repr(float(ey))],
        "kernel": [EXCURSION_CYCLES, TAPER_CYCLES, EPS_REG],
    }
    blob = json.dumps(payload, sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()


def _load(path: Path, key: str):
    with np.load(path, allow_pickle=False) as data:
        if int(data["schema"]) != CACHE_SCHEMA or str(data["key"]) != key:
            raise ValueError("cache header mismatch")
        d_t = np.array(data["d_t"])
    if not np.all(np.isfinite(d_t)):
        raise ValueError("non-finite cached dipole")
    return d_t


def _store(path: Path, key: str, d_t: np.ndarray) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    except OSError as exc:
        raise CacheError(f"cannot write dipole cache in {path.parent}: {exc}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, schema=CACHE_SCHEMA, key=key, d_t=d_t)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _compute(args):
    config, sample = args
    return sfa_dipole(config, sample).d_t


def ensemble_dipoles(
    config: DriverConfig,
    samples: list[PhaseSpaceSample],
    cache_dir: str | os.PathLike | None = None,
    jobs: int = 1,
) -> list[DipoleRecord]:
    """One DipoleRecord per sample, ordered like ``samples``; cached by content hash."""
    if not samples:
        raise ValueError("samples must be nonempty")
    cache = Path(cache_dir) if cache_dir is not None else None
    keys = [_cache_key(config, s) for s in samples]
    series: dict[int, np.ndarray] = {}
    todo = []
    for i, (s, key) in enumerate(zip(samples, keys)):
        if cache is not None:
            path = cache / f"{key[:32]}.npz"
            if path.exists():
                try:
                    series[i] = _load(path, key)
                    continue
                except Exception as exc:  # corrupted or foreign file
                    warnings.warn(f"discarding unreadable dipole cache entry {path.name}: {exc}")
        todo.append(i)

    if todo:
        args = [(config, samples[i]) for i in todo]
        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_compute, args))
        else:
            results = [_compute(a) for a in args]
        for i, d_t in zip(todo, results):
            series[i] = d_t
            if cache is not None:
                _store(cache / f"{keys[i][:32]}.npz", keys[i], d_t)
        log.debug("computed %d dipoles, %d from cache", len(todo), len(samples) - len(todo))

    t = config.time_grid.times()
    window = default_window(config)
    return [DipoleRecord(s.sample_id, t, series[i], config.omega, window) for i, s in enumerate(samples)]
