"""Architecture conformance and whole-network gradient checks."""

import numpy as np
import numpy.testing as npt
import pytest

import fatiguenet as fn
from helpers import assert_grads_close, fd_case, numeric_grad

STRUCTURAL_SHAPES = [(98, 98, 6), (49, 49, 6), (47, 47, 16), (23, 23, 16),
                     (8464,), (120,), (84,), (1,)]
LAYER_PARAM_COUNTS = [60, 880, 1_015_800, 10_164, 85]


@pytest.fixture(scope="module")
def net():
    return fn.build_fatigue_net(fn.Rng(42))


def test_structural_output_shapes(net):
    shapes = [s for layer, s in zip(net.layers, net.output_shapes())
              if not isinstance(layer, fn.Activation)]
    assert shapes == STRUCTURAL_SHAPES


def test_per_layer_parameter_counts(net):
    counts = [sum(p.size for p in layer.params())
              for layer in net.layers if layer.params()]
    assert counts == LAYER_PARAM_COUNTS
    assert net.param_count() == 1_026_989


def test_all_parameters_float32_and_finite(net):
    for p in net.parameters():
        assert p.dtype == np.float32
        assert np.isfinite(p).all()


def test_same_seed_builds_identical_network():
    a = fn.build_fatigue_net(fn.Rng(7))
    b = fn.build_fatigue_net(fn.Rng(7))
    for pa, pb in zip(a.parameters(), b.parameters()):
        npt.assert_array_equal(pa, pb)
    c = fn.build_fatigue_net(fn.Rng(8))
    assert any(not np.array_equal(pa, pc)
               for pa, pc in zip(a.parameters(), c.parameters()))


def test_forward_output_in_open_interval(net):
    x = fn.Rng(1).uniform(0.0, 1.0, (4, 100, 100, 1)).astype(np.float32)
    p = net.forward(x)
    assert p.shape == (4,)
    assert ((p > 0.0) & (p < 1.0)).all()


def test_forward_is_pure(net):
    x = fn.Rng(2).uniform(0.0, 1.0, (2, 100, 100, 1)).astype(np.float32)
    npt.assert_array_equal(net.forward(x), net.forward(x))


def test_identical_images_identical_outputs(net):
    one = fn.Rng(3).uniform(0.0, 1.0, (1, 100, 100, 1)).astype(np.float32)
    batch = np.repeat(one, 5, axis=0)
    p = net.forward(batch)
    assert np.unique(p).size == 1


def test_wrong_input_shape_rejected(net):
    with pytest.raises(fn.ShapeError):
        net.forward(np.zeros((1, 50, 50, 1), dtype=np.float32))
    with pytest.raises(fn.ShapeError):
        net.forward(np.zeros((100, 100, 1), dtype=np.float32))


def test_backward_before_forward(net):
    fresh = fn.build_fatigue_net(fn.Rng(0))
    with pytest.raises(fn.StateError):
        fresh.backward(np.zeros(1))


def test_zero_loss_grad_zero_grads():
    net, x, _ = fd_case(0)
    net.forward(x)
    grads = net.backward(np.zeros(x.shape[0]))
    assert all(not g.any() for g in grads)


def test_grads_align_with_parameters():
    net, x, y = fd_case(1)
    p = net.forward(x)
    _, lg = fn.bce_loss(p, y)
    grads = net.backward(lg)
    params = net.parameters()
    assert len(grads) == len(params)
    assert all(g.shape == p.shape for g, p in zip(grads, params))


@pytest.mark.parametrize("seed", range(5))
def test_end_to_end_gradient_matches_finite_differences(seed):
    # 8x8-input clone of the production stack; finite differences of the
    # batch-mean loss against the chained analytic backward pass
    net, x, y = fd_case(seed)
    p = net.forward(x)
    _, loss_grad = fn.bce_loss(p, y)
    grads = net.backward(loss_grad)
    params = net.parameters()

    def run():
        return fn.bce_loss(net.forward(x), y)[0]

    for analytic, param in zip(grads, params):
        assert_grads_close(analytic, numeric_grad(run, param))


def test_input_gradient_matches_finite_differences():
    # chain rule through every layer down to the pixels
    net, x, y = fd_case(7)
    p = net.forward(x)
    _, loss_grad = fn.bce_loss(p, y)
    g = np.asarray(loss_grad).reshape(-1, 1)
    for layer in reversed(net.layers):
        g = layer.backward(g)

    def run():
        return fn.bce_loss(net.forward(x), y)[0]

    assert_grads_close(g, numeric_grad(run, x))
