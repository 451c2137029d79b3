"""Counting statistics of energy transfers: generating function and moments.

Evaluates the infinite-volume log generating function on a small counting
grid, differentiates it numerically, and compares the first two cumulants
with their closed forms.  Also shows the finite-volume route through the
character ratio agreeing with the thermodynamic limit.

Run:  python demos/04_fcs_moments.py   (a few minutes)
"""

import numpy as np

from weldfcs import (Numerics, TemperatureProfile, Theory, VolumeContext,
                     moments_closed_form, psi_finite, psi_infinite)

profile = TemperatureProfile(2.0, 1.0)
numerics = Numerics(n_modes=256, tail_tol=2e-3, s_nodes=6, dx=0.02,
                    window_pad_gamma=6.0, window_factor=4.0, p_max_gamma=33.0)
t = 4.0

closed = moments_closed_form(profile, c=1.0, t=t)
print("closed-form mean     :", closed["mean"])
print("closed-form variance :", closed["variance"])

h = 0.02
vals = {k: psi_infinite(profile, 1.0, t, lam=k * h, numerics=numerics).ln_psi
        for k in (-2, -1, 1, 2)}
mean = (8 * (vals[1] - vals[-1]) - (vals[2] - vals[-2])) / (12 * h) / 1j
var = -(16 * (vals[1] + vals[-1]) - (vals[2] + vals[-2])) / (12 * h ** 2)
print("\npipeline mean        :", mean.real,
      f"  (rel err {abs(mean - closed['mean']) / closed['mean']:.2e})")
print("pipeline variance    :", var.real,
      f"  (rel err {abs(var - closed['variance']) / closed['variance']:.2e})")

# conjugation symmetry of the generating function at real counting values
a = psi_infinite(profile, 1.0, t, lam=0.15, numerics=numerics).ln_psi
b = psi_infinite(profile, 1.0, t, lam=-0.15, numerics=numerics).ln_psi
print("\nln Psi(0.15)         :", a)
print("conj ln Psi(-0.15)   :", np.conj(b))

# finite volume: same observable through torus welding + character ratio
ctx = VolumeContext(profile, 40.0, 1.0)
theory = Theory("free_boson_radius", 1.0, radius=1.0)
vf = psi_finite(profile, theory, ctx, t, lam=0.15, numerics=numerics)
print("\nfinite-volume (L=40) :", vf.ln_psi)
print("difference           :", abs(vf.ln_psi - a))
