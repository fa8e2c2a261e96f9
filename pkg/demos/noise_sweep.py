"""Train a small MLP on MNIST, then watch accuracy fall as detector noise grows.

Run:  python3 demos/noise_sweep.py [mnist_dir]
Expects the four MNIST IDX files (optionally gzipped) in ``data/mnist``.
"""

import sys
import time

import numpy as np

from lumen_sim import config
from lumen_sim.engine import PhotonicModel, evaluate, train
from lumen_sim.idx import find_mnist, load_idx

mnist_dir = sys.argv[1] if len(sys.argv) > 1 else "data/mnist"
cfg = config.from_dict({"schema_version": 1, "train": {"epochs": 5}})
train_set = load_idx(*find_mnist(mnist_dir, "train")).as_tuple()
test_set = load_idx(*find_mnist(mnist_dir, "test")).as_tuple()

t0 = time.perf_counter()
w = train(cfg.network, train_set, cfg.train, cfg.devices.eom)
ideal = evaluate(cfg.network, w, test_set).accuracy
print(f"trained {cfg.network.name} in {time.perf_counter() - t0:.1f}s, ideal accuracy {ideal:.4f}")

print(f"{'noise_scale':>11} {'MRR':>8} {'MZI':>8}")
models = {b: PhotonicModel.program(cfg.network, w, b, cfg.devices, cfg.encoding) for b in ("mrr", "mzi")}
for scale in (0, 1, 10, 100, 300, 1000, 1e4):
    noise = cfg.noise.with_(noise_scale=float(scale))
    acc = {b: np.mean([evaluate(cfg.network, w, test_set, b, cfg.encoding, noise, s, cfg.devices, 4, m).accuracy
                       for s in range(3)]) for b, m in models.items()}
    print(f"{scale:>11g} {acc['mrr']:8.4f} {acc['mzi']:8.4f}")
