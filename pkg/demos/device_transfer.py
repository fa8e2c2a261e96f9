"""Tour of the device models: ring and interferometer weights, calibration, EOM.

Run:  python3 demos/device_transfer.py
"""

import numpy as np

from lumen_sim import devices as dv

ring = dv.MRRParams(a=1.0, r1=0.9, r2=0.9)
lossy = dv.MRRParams(a=0.97, r1=0.9, r2=0.9)
mzi = dv.MZIParams()

print("phase    T_through   T_drop   weight   (lossless ring, r=0.9)")
for phi in np.linspace(0, np.pi, 7):
    print(f"{phi:5.3f}  {dv.mrr_through(phi, ring):9.5f}  {dv.mrr_drop(phi, ring):8.5f}  "
          f"{dv.mrr_weight(phi, ring):+8.5f}")

# A ring cannot reach +1: the through port never fully recovers off resonance.
for name, params in (("lossless ring", ring), ("lossy ring a=0.97", lossy), ("MZI push-pull", mzi)):
    lim = dv.calibration_range("mrr" if "ring" in name else "mzi", params)
    print(f"{name:>18}: realizable weights [{lim.w_min:+.5f}, {lim.w_max:+.5f}]")

# Calibration inverts the transfer function; out-of-range targets are clamped and flagged.
targets = np.array([-1.0, -0.3, 0.0, 0.5, 0.97, 1.0])
res = dv.calibrate(targets, "mrr", ring)
print("\ntarget   phase    achieved   clipped")
for t, p, a, c in zip(targets, res.phase, res.achieved, res.clipped):
    print(f"{t:+5.2f}  {p:7.5f}  {a:+9.6f}   {bool(c)}")

# Phases solved for an ideal ring but applied to a lossy one drift off target.
drift = dv.mrr_weight(dv.calibrate(targets[:-1], "mrr", ring).phase, lossy) - targets[:-1]
print("\nuncompensated loss error:", np.array2string(drift, precision=4))

eom = dv.EOMParams()
v = np.linspace(eom.v_bias - eom.v_pi, eom.v_bias, 5)
print("\nEOM drive  activation")
for vi, yi in zip(v, dv.eom_activation(v, eom)):
    print(f"{vi:+9.2f}  {yi:.4f}")
