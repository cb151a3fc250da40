# %% [markdown]
# # Driver, dipole and spectrum
#
# A strong ω field plus a weak 2ω field whose quantum noise is squeezed.
# Each Gauss-Hermite node of the 2ω Husimi distribution is one classical
# field realization; the dipole of each realization comes from the
# strong-field approximation.

# %%
import os
import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from aqi import DriverConfig, SqueezingSpec, ensemble_dipoles, harmonic_spectrum, sample_phase_space, sfa_dipole
from aqi.dipole import cutoff_estimate, measured_cutoff
from aqi.field import PhaseSpaceSample, field_on_grid

CACHE = os.environ.get("AQI_CACHE", ".aqi-cache")

cfg = DriverConfig()
print(cfg)
print("estimated cutoff order:", cutoff_estimate(cfg))

# %% [markdown]
# The squeezed driver is sampled on 21 nodes spread along the phase axis
# of the 2ω field. The mean 2ω amplitude is ε·E_ω.

# %%
samples = sample_phase_space(cfg)
gy = np.array([s.gamma_y for s in samples])
w = np.array([s.weight for s in samples])
print(f"{len(samples)} nodes, mean 2w amplitude {cfg.E_2omega:.2e}, node spread std {np.sqrt(w @ gy**2):.2e}")

t, E = field_on_grid(samples[10], cfg)
plt.figure(figsize=(7, 2.5))
plt.plot(t, E, lw=0.6)
plt.xlabel("t (a.u.)")
plt.ylabel("E(t)")
plt.tight_layout()
plt.savefig("field.png", dpi=120)

# %% [markdown]
# One dipole takes well under a second at 1024 steps per cycle.

# %%
t0 = time.perf_counter()
rec = sfa_dipole(cfg.replace(squeezing=SqueezingSpec(kind="coherent")), PhaseSpaceSample(0.0, 0.0, 1.0))
print(f"single dipole: {time.perf_counter() - t0:.2f} s")

q = np.arange(1, 81) / 2
I = np.abs(harmonic_spectrum(rec, q_values=q)) ** 2
print("measured cutoff:", measured_cutoff(q, I, cfg.Ip, cfg.omega))

plt.figure(figsize=(7, 3))
plt.semilogy(q, I, ".-", lw=0.6)
plt.xlabel("harmonic order q")
plt.ylabel("|d(qω)|²")
plt.tight_layout()
plt.savefig("spectrum.png", dpi=120)

# %% [markdown]
# Averaged over the squeezed ensemble, the even orders carry the 2ω-induced
# signal and the odd ones barely change.

# %%
records = ensemble_dipoles(cfg, samples, cache_dir=CACHE)
spectra = np.abs([harmonic_spectrum(r, q_values=q) for r in records]) ** 2
ens = w @ spectra
for order in (11, 12, 13, 14):
    k = int(np.argmin(np.abs(q - order)))
    print(f"q={order}: ensemble {ens[k]:.3e}  coherent {I[k]:.3e}")
