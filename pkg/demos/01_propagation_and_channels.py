# Walk through the propagation model: the attenuation constant, the
# three-slope path loss, shadowed large-scale coefficients, and the CSIT
# error model. Run with: python3 demos/01_propagation_and_channels.py

import numpy as np

from cfthp import (ScenarioConfig, attenuation_db, corrupt_csit, draw_true_channel,
                   noise_variance_w, path_loss_db, sample_scenario)
from cfthp.channel import complex_normal

cfg = ScenarioConfig()
print(f"attenuation constant: {attenuation_db(cfg):.2f} dB at {cfg.freq_mhz:.0f} MHz")
print(f"noise power: {noise_variance_w(cfg):.3e} W over {cfg.bandwidth_hz/1e6:.0f} MHz")

print("\nthree-slope path loss (note the flat region below d0 and the")
print("slope change at d1):")
for d in (1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 250.0, 500.0):
    print(f"  d = {d:6.1f} m   P = {path_loss_db(d, cfg):8.2f} dB")

rng = np.random.default_rng(0)
geometry, zeta = sample_scenario(cfg, rng)
print(f"\nsampled {cfg.num_aps} APs / {cfg.num_users} users on a "
      f"{cfg.side_m:.0f} m square")
print("large-scale coefficients per user (dB):")
for k in range(cfg.num_users):
    db = 10 * np.log10(zeta[:, k])
    print(f"  user {k}: best {db.max():7.2f}  median {np.median(db):7.2f}  "
          f"worst {db.min():7.2f}")

# The estimate keeps the per-entry variance of the true channel but
# decorrelates as the error variance grows; measured on a large block of
# unit-variance entries so the sample correlation is tight.
flat = np.ones((300, 300))
h = complex_normal(rng, flat.shape)
print("\nCSIT error model: correlation between estimate and truth")
for sigma_e2 in (0.0, 0.15, 0.5, 0.9):
    g_hat = corrupt_csit(h, flat, sigma_e2, np.random.default_rng(1))
    corr = abs(np.vdot(h, g_hat)) / (np.linalg.norm(h) * np.linalg.norm(g_hat))
    print(f"  sigma_e^2 = {sigma_e2:4.2f}   |corr| = {corr:.3f}"
          f"   (sqrt(1 - sigma_e^2) = {np.sqrt(1 - sigma_e2):.3f})")

g_true = draw_true_channel(zeta, np.random.default_rng(2))
print(f"\na network channel draw carries energy {np.sum(np.abs(g_true)**2):.3e} "
      f"(path loss scale {zeta.mean():.2e})")
