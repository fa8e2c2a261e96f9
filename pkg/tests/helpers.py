"""Shared generators for randomized networks."""

import numpy as np
from hypothesis import strategies as st

from lumen_sim.network import Activation, Conv2D, Dense, Flatten, MaxPool, NetworkSpec, Output


def random_mlp(rng, max_layers=3, max_width=8):
    """Dense net with 1..max_layers weighted layers, EOM between them."""
    depth = int(rng.integers(1, max_layers + 1))
    widths = [int(w) for w in rng.integers(1, max_width + 1, depth + 1)]
    layers = []
    for i in range(depth):
        layers.append(Dense(widths[i], widths[i + 1]))
        if i < depth - 1:
            layers.append(Activation())
    layers.append(Output(widths[-1]))
    return NetworkSpec((widths[0],), tuple(layers), "random")


@st.composite
def small_specs(draw):
    """Mixed conv/dense specs small enough to lower node by node."""
    layers = []
    if draw(st.booleans()):
        h = draw(st.integers(4, 8))
        c = draw(st.integers(1, 3))
        shape = (h, h, c)
        for _ in range(draw(st.integers(1, 2))):
            k = draw(st.integers(1, 3))
            cout = draw(st.integers(1, 4))
            layers += [Conv2D(k, k, c, cout), Activation()]
            c = cout
        if draw(st.booleans()):
            layers.append(MaxPool(2))
            h //= 2
        layers.append(Flatten())
        n = h * h * c
    else:
        n = draw(st.integers(1, 12))
        shape = (n,)
    for _ in range(draw(st.integers(1, 3))):
        m = draw(st.integers(1, 12))
        layers += [Dense(n, m), Activation()]
        n = m
    layers[-1] = Output(n)
    return NetworkSpec(shape, tuple(layers), "random")


def random_inputs(rng, spec, n):
    return rng.uniform(0.0, 1.0, (n, *spec.input_shape))


__all__ = ["random_mlp", "small_specs", "random_inputs", "np"]
