import os
from pathlib import Path

import numpy as np
import pytest

from lumen_sim.idx import find_mnist, load_idx

ROOT = Path(__file__).resolve().parents[1]
MNIST_DIR = Path(os.environ.get("LUMEN_SIM_MNIST_DIR", ROOT / "data" / "mnist"))


def mnist_available() -> bool:
    try:
        find_mnist(MNIST_DIR, "train")
        find_mnist(MNIST_DIR, "test")
    except FileNotFoundError:
        return False
    return True


@pytest.fixture(scope="session")
def mnist_paths():
    if not mnist_available():
        pytest.skip(f"MNIST IDX files not found in {MNIST_DIR}")
    return {split: find_mnist(MNIST_DIR, split) for split in ("train", "test")}


@pytest.fixture(scope="session")
def mnist(mnist_paths):
    return {split: load_idx(*paths) for split, paths in mnist_paths.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20201)
