"""Device census and static power for the model zoo on both backends.

Run:  python3 demos/power_census.py
The per-device powers below are illustrative placeholders, not foundry data.
"""

from lumen_sim.lowering import census_from_shape
from lumen_sim.network import builtin
from lumen_sim.power import PowerParams, power_sweep

pp = PowerParams(p_multiplier_mrr=1e-3, p_multiplier_mzi=1e-3, p_summation=0.1e-3, p_eom=0.5e-3,
                 p_laser_per_input=1e-3)
names = ["MLP3", "MLP5", "MLP9", "CNN3", "CNN5", "CNN9", "ResNet18", "InceptionV3", "AlexNet", "VGG16"]
specs = [builtin(n) for n in names]

print(f"{'network':>12} {'weights':>12} {'MRR W':>10} {'MZI W':>10} {'gap W':>10}")
reports = power_sweep(specs, ["mrr", "mzi"], pp)
for spec, mrr, mzi in zip(specs, reports[0::2], reports[1::2]):
    n = census_from_shape(spec, "mrr").n_multipliers
    print(f"{spec.name:>12} {n:>12,} {mrr.total:>10.3f} {mzi.total:>10.3f} {mzi.total - mrr.total:>10.3f}")

# The MZI push-pull pair doubles the multiplier count, so the gap grows with model size.
