import math

import numpy as np
import pytest

from helpers import random_inputs, random_mlp
from lumen_sim import devices as dv
from lumen_sim.devices import DeviceParams, EOMParams, MRRParams
from lumen_sim.engine import (EncodingConfig, NumericError, PhotonicModel, TrainConfig, cross_entropy, evaluate,
                              forward_ideal, forward_photonic, predict, train)
from lumen_sim.network import Activation, Conv2D, Dense, Flatten, MaxPool, NetworkSpec, Output, cnn_depth, mlp
from lumen_sim.noise import NoiseConfig, RngStream
from lumen_sim.weights import WeightSet, init_weights

NOISY = NoiseConfig(enabled=True, delta_f=1e9, noise_scale=50.0)


def ws(*pairs):
    return WeightSet(tuple(np.asarray(w, float) for w, _ in pairs), tuple(np.asarray(b, float) for _, b in pairs))


def composed_oracle(spec, w, x, eom):
    """Hand-written loops: dot products per unit, then cos^2 activation."""
    h = np.array(x, float)
    k = 0
    for layer in spec.layers:
        if isinstance(layer, Dense):
            W, b = w.weights[k], w.biases[k]
            h = np.array([sum(h[i] * W[i, j] for i in range(W.shape[0])) + b[j] for j in range(W.shape[1])])
            k += 1
        elif isinstance(layer, Activation):
            h = np.array([math.cos(math.pi / 2 * min(max((eom.v_bias - v) / eom.v_pi, 0), 1)) ** 2 for v in h])
    return h


def test_dense_zero_input():
    spec = mlp([2, 1])
    assert forward_ideal(spec, ws(([[1], [1]], [0])), [0, 0]).tolist() == [0.0]


def test_identity_layers_propagate():
    spec = NetworkSpec((3,), (Dense(3, 3), Dense(3, 3), Output(3)), "id")
    x = np.array([0.2, 0.5, 0.9])
    w = ws((np.eye(3), np.zeros(3)), (np.eye(3), np.zeros(3)))
    assert np.array_equal(forward_ideal(spec, w, x), x)


def test_forward_ideal_matches_composition(rng):
    for _ in range(20):
        spec = random_mlp(rng)
        w = init_weights(spec, int(rng.integers(1000)))
        x = rng.uniform(0, 1, spec.input_shape)
        np.testing.assert_allclose(forward_ideal(spec, w, x), composed_oracle(spec, w, x, EOMParams()),
                                   rtol=0, atol=1e-12)


def test_forward_ideal_shape_mismatch():
    with pytest.raises(ValueError):
        forward_ideal(mlp([3, 2]), init_weights(mlp([3, 2])), np.zeros(4))
    with pytest.raises(ValueError):
        forward_ideal(mlp([3, 2]), init_weights(mlp([4, 2])), np.zeros(3))


@pytest.mark.parametrize("backend", ["mrr", "mzi"])
def test_photonic_equals_ideal_without_noise(backend, rng):
    for _ in range(25):
        spec = random_mlp(rng)
        w = init_weights(spec, int(rng.integers(1000)))
        x = random_inputs(rng, spec, 20)
        ideal = forward_ideal(spec, w, x)
        phot = forward_photonic(spec, w, x, backend)
        assert np.all(np.abs(phot - ideal) <= 1e-6 * np.abs(ideal))


def test_photonic_conv_equals_ideal(rng):
    spec = cnn_depth(2, kernels=4, input_shape=(8, 8, 2))
    w = init_weights(spec, 3)
    x = random_inputs(rng, spec, 5)
    for backend in ("mrr", "mzi"):
        np.testing.assert_allclose(forward_photonic(spec, w, x, backend), forward_ideal(spec, w, x), rtol=1e-6)


def test_mzi_single_weight_hand_trace():
    spec = mlp([1, 1])
    w = ws(([[0.5]], [0.0]))
    enc = EncodingConfig(weight_scale_per_layer=[0.5])
    model = PhotonicModel.program(spec, w, "mzi", encoding=enc)
    assert model.layers[0].device_weights[0, 0] == 1.0
    phase = dv.calibrate(1.0, "mzi", dv.MZIParams()).phase
    assert phase[0] == 0.0
    assert model.forward([1.0])[0] == pytest.approx(0.5, abs=1e-15)
    assert model.n_clipped == 0


def test_zero_bandwidth_equals_noise_off(rng):
    spec = random_mlp(rng)
    w = init_weights(spec, 1)
    x = random_inputs(rng, spec, 8)
    quiet = forward_photonic(spec, w, x, "mrr")
    zero_bw = forward_photonic(spec, w, x, "mrr", noise=NoiseConfig(delta_f=0.0), rng=RngStream(4))
    assert np.array_equal(quiet, zero_bw)


def test_negative_inputs_rejected():
    with pytest.raises(ValueError, match="negative"):
        forward_photonic(mlp([2, 1]), init_weights(mlp([2, 1])), [-0.1, 0.3], "mrr")


def test_clip_counter_matches_independent_count():
    spec = mlp([4, 3, 2])
    w = init_weights(spec, 0)
    scales = [0.3, 0.2]
    model = PhotonicModel.program(spec, w, "mrr", encoding=EncodingConfig(weight_scale_per_layer=scales))
    lim = dv.calibration_range("mrr", MRRParams())
    expected = sum(int(np.sum((W / s < lim.w_min) | (W / s > lim.w_max))) for W, s in zip(w.weights, scales))
    assert expected > 0
    assert model.n_clipped == expected
    report = evaluate(spec, w, (np.full((3, 4), 0.5), [0, 1, 0]), "mrr",
                      EncodingConfig(weight_scale_per_layer=scales))
    assert report.n_clipped == expected


def test_automatic_scaling_never_clips(rng):
    for _ in range(10):
        spec = random_mlp(rng)
        for backend in ("mrr", "mzi"):
            assert PhotonicModel.program(spec, init_weights(spec, 5), backend).n_clipped == 0


def test_noise_is_deterministic_and_seeded(rng):
    spec = random_mlp(rng, max_width=8)
    w = init_weights(spec, 2)
    x = random_inputs(rng, spec, 4)
    a = forward_photonic(spec, w, x, "mzi", noise=NOISY, rng=RngStream(9))
    b = forward_photonic(spec, w, x, "mzi", noise=NOISY, rng=RngStream(9))
    c = forward_photonic(spec, w, x, "mzi", noise=NOISY, rng=RngStream(10))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_noise_per_sample_independent_of_batching(rng):
    spec = mlp([6, 5, 3])
    w = init_weights(spec, 2)
    x = random_inputs(rng, spec, 6)
    model = PhotonicModel.program(spec, w, "mrr")
    whole = model.forward(x, NOISY, seed=1)
    parts = np.concatenate([model.forward(x[:2], NOISY, 1, 0), model.forward(x[2:], NOISY, 1, 2)])
    assert np.array_equal(whole, parts)


def _toy_dataset(n=300, seed=0):
    r = np.random.default_rng(seed)
    x = r.uniform(0, 1, (n, 2))
    y = (x[:, 0] + x[:, 1] > 1.0).astype(int)
    keep = np.abs(x[:, 0] + x[:, 1] - 1.0) > 0.05
    return x[keep], y[keep]


def test_trainer_separates_toy_set():
    spec = mlp([2, 2])
    x, y = _toy_dataset()
    w = train(spec, (x, y), TrainConfig(lr=1.0, epochs=50, batch=16, seed=0))
    assert evaluate(spec, w, (x, y)).accuracy == 1.0


def test_zero_epochs_returns_init():
    spec = mlp([2, 3, 2])
    x, y = _toy_dataset(40)
    w = train(spec, (x, y), TrainConfig(epochs=0, seed=4))
    assert w.equals(init_weights(spec, 4))


def test_training_is_deterministic():
    spec = mlp([2, 4, 2])
    x, y = _toy_dataset(120)
    cfg = TrainConfig(lr=0.5, epochs=3, batch=8, seed=1)
    assert train(spec, (x, y), cfg).equals(train(spec, (x, y), cfg))


def test_divergence_raises():
    x, y = _toy_dataset(120)
    with pytest.raises(NumericError, match="epoch"), np.errstate(all="ignore"):
        train(mlp([2, 2]), (x * 1e300, y), TrainConfig(lr=1e300, epochs=5, batch=8))


def test_gradient_matches_finite_differences():
    # training loss gradient via the public trainer: one SGD step with lr=h equals -h * grad
    spec = NetworkSpec((5, 5, 1), (Conv2D(3, 3, 1, 2), Activation(), MaxPool(2), Flatten(), Dense(8, 3),
                                   Output(3)), "tiny")
    r = np.random.default_rng(0)
    x, y = r.uniform(0, 1, (4, 5, 5, 1)), np.array([0, 1, 2, 1])
    w0 = init_weights(spec, 0)
    lr = 1e-3
    w1 = train(spec, (x, y), TrainConfig(lr=lr, epochs=1, batch=4, seed=0), init=w0)
    grad = [(a - b) / lr for a, b in zip(w0.weights, w1.weights)]

    def loss(ws_):
        return cross_entropy(forward_ideal(spec, ws_, x), y)[0]

    h = 1e-6
    for k in range(2):
        for idx in [tuple(i) for i in np.argwhere(np.ones_like(w0.weights[k]))[::3]]:
            plus = [np.array(a) for a in w0.weights]
            minus = [np.array(a) for a in w0.weights]
            plus[k][idx] += h
            minus[k][idx] -= h
            fd = (loss(WeightSet(tuple(plus), w0.biases)) - loss(WeightSet(tuple(minus), w0.biases))) / (2 * h)
            assert grad[k][idx] == pytest.approx(fd, abs=1e-6)


def test_single_sample_accuracy_is_binary():
    spec = mlp([2, 2])
    w = init_weights(spec, 0)
    acc = evaluate(spec, w, (np.array([[0.3, 0.7]]), [1])).accuracy
    assert acc in (0.0, 1.0)


def test_evaluate_rejects_bad_datasets():
    spec = mlp([2, 2])
    w = init_weights(spec, 0)
    with pytest.raises(ValueError):
        evaluate(spec, w, (np.zeros((0, 2)), []))
    with pytest.raises(ValueError):
        evaluate(spec, w, (np.zeros((3, 2)), [0, 1]))


@pytest.mark.parametrize("backend", ["mrr", "mzi"])
def test_workers_do_not_change_noisy_predictions(backend, rng):
    spec = mlp([12, 8, 4])
    w = init_weights(spec, 0)
    x = rng.uniform(0, 1, (700, 12))
    runs = [predict(spec, w, x, backend, noise=NOISY, seed=3, workers=n) for n in (1, 2, 8)]
    assert all(np.array_equal(runs[0], r) for r in runs[1:])


def test_lossy_devices_degrade_without_recalibration():
    spec = mlp([6, 4, 3])
    w = init_weights(spec, 0)
    x = np.random.default_rng(1).uniform(0, 1, (10, 6))
    lossy = DeviceParams(mrr=MRRParams(a=0.95))
    nominal = PhotonicModel.program(spec, w, "mrr", lossy, calibrate_with=DeviceParams()).forward(x)
    compensated = PhotonicModel.program(spec, w, "mrr", lossy).forward(x)
    ideal = forward_ideal(spec, w, x)
    assert np.max(np.abs(nominal - ideal)) > 1e-3
    np.testing.assert_allclose(compensated, ideal, rtol=1e-6)
