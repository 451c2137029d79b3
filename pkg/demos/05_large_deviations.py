"""Long-time statistics: rates, the rate function, and jump-process form.

All quantities here are closed forms depending only on the asymptotic
inverse temperatures and the central charge; the demo verifies their
internal identities and shows the welded generating function approaching
the long-time rates.

Run:  python demos/05_large_deviations.py   (last section takes a while)
"""

import numpy as np

from weldfcs import (Numerics, TemperatureProfile, ldf, levitov_lesovik,
                     levy_jump_rates, levy_khintchine_check,
                     longtime_approach, rate_function)

beta_l, beta_r, c = 2.0, 1.0, 1.0

rates = ldf(beta_l, beta_r, c, 0.4)
print("Xi+(0.4) =", rates["plus"])
print("Xi-(0.4) =", rates["minus"])

# the closed form obeys the fluctuation symmetry lam -> -lam + i dbeta
lam = 0.7 + 0.2j
a = ldf(beta_l, beta_r, c, lam)["total"]
b = ldf(beta_l, beta_r, c, -lam + 1j * (beta_r - beta_l))["total"]
print("fluctuation symmetry defect:", abs(a - b))

# free fermions: two-channel pure-transmission quadrature reproduces it
print("Levitov-Lesovik defect:",
      abs(ldf(beta_l, beta_r, 1.0, 0.3)["total"]
          - levitov_lesovik(beta_l, beta_r, 0.3)))

# Legendre transform: rate function with the Gallavotti-Cohen symmetry
sigma = np.linspace(-4, 4, 33)
rf = rate_function(beta_l, beta_r, c, sigma)
rf_neg = rate_function(beta_l, beta_r, c, -sigma)
gc = np.max(np.abs(rf_neg["rate"] - rf["rate"] - sigma * (beta_r - beta_l)))
print("Gallavotti-Cohen defect:", gc)
drift = np.pi * c / 12 * (1 / beta_l ** 2 - 1 / beta_r ** 2)
print("rate vanishes at the mean drift:",
      rate_function(beta_l, beta_r, c, [drift])["rate"][0])

# jump-process representation: the rate is the integral of the jump measure
print("jump measure vs closed form:",
      levy_khintchine_check(beta_l, beta_r, c, 0.4)["abs_error"])
print("w(x, x) with the symmetric step convention:",
      float(levy_jump_rates(beta_l, beta_r, c, 0.0, 0.0)))

# the welded generating function approaches t * Xi (heuristic regime)
profile = TemperatureProfile(beta_l, beta_r)
numerics = Numerics(n_modes=256, tail_tol=2e-3, s_nodes=6, dx=0.025,
                    window_pad_gamma=5.0, window_factor=3.0, p_max_gamma=25.0)
out = longtime_approach(profile, c, [8.0, 16.0, 32.0], 0.2, numerics=numerics)
print("\napproach to the long-time rates (lambda = 0.2):")
for row in out["rows"]:
    print(f"  v t = {row['t']:5.1f}:  defect+ = {row['defect_plus']:.3e}  "
          f"defect- = {row['defect_minus']:.3e}")
