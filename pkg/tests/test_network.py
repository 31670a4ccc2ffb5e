import numpy as np
import pytest

from fluxstep import (
    Activation,
    ConfigurationError,
    Conv1DKernel,
    DenseLayer,
    Network,
    Padding,
    UsageError,
    backward,
    conv1d,
    forward,
    init_identity,
)

EPS = np.finfo(float).eps


def random_net(rng, dims=None, multi=False):
    dims = dims or [int(rng.integers(2, 9)) for _ in range(int(rng.integers(2, 5)))]

    def stack(out_slice_dims):
        layers = []
        for k in range(len(out_slice_dims) - 1):
            act = Activation.LINEAR if k == len(out_slice_dims) - 2 else Activation.RELU
            layers.append(
                DenseLayer(
                    rng.standard_normal((out_slice_dims[k + 1], out_slice_dims[k])),
                    rng.standard_normal(out_slice_dims[k + 1]),
                    act,
                )
            )
        return layers

    if multi:
        return Network.multi([stack(dims) for _ in range(2)])
    return Network.single(stack(dims))


def fd_param_gradients(net, x, w, h=1e-6):
    """Central finite differences of w @ forward(net, x) w.r.t. every parameter."""

    def loss(net2):
        y, _ = forward(net2, x)
        return float(w @ y)

    out = []
    for s_idx, stack in enumerate(net.stacks):
        stack_out = []
        for k, layer in enumerate(stack):
            dW = np.zeros_like(layer.weights)
            db = np.zeros_like(layer.bias)
            for arr, grad in [(layer.weights, dW), (layer.bias, db)]:
                it = np.nditer(arr, flags=["multi_index"])
                for _ in it:
                    idx = it.multi_index
                    plus = arr.copy()
                    plus[idx] += h
                    minus = arr.copy()
                    minus[idx] -= h

                    def rebuild(repl):
                        stacks = []
                        for si, st in enumerate(net.stacks):
                            ls = []
                            for ki, l in enumerate(st):
                                if si == s_idx and ki == k:
                                    if repl.shape == l.weights.shape and arr is l.weights:
                                        ls.append(DenseLayer(repl, l.bias, l.activation))
                                    else:
                                        ls.append(DenseLayer(l.weights, repl, l.activation))
                                else:
                                    ls.append(l)
                            stacks.append(tuple(ls))
                        return Network(tuple(stacks))

                    grad[idx] = (loss(rebuild(plus)) - loss(rebuild(minus))) / (2 * h)
            stack_out.append((dW, db))
        out.append(stack_out)
    return out


class TestInitIdentity:
    def test_square(self):
        layer = init_identity(3, 3)
        np.testing.assert_array_equal(layer.weights, np.eye(3))
        np.testing.assert_array_equal(layer.bias, np.zeros(3))

    def test_tall_rectangular(self):
        layer = init_identity(2, 4)
        np.testing.assert_array_equal(layer.weights[:2], np.eye(2))
        np.testing.assert_array_equal(layer.weights[2:], np.zeros((2, 2)))

    def test_wide_block_acts_like_relu_on_leading_slice(self):
        rng = np.random.default_rng(0)
        layer = init_identity(300, 330)
        net = Network.single(
            [layer, init_identity(330, 300, Activation.LINEAR)]
        )
        x = rng.standard_normal(300)
        # the first relu layer alone maps x to (max(x, 0), zeros)
        z = layer.weights @ x + layer.bias
        np.testing.assert_array_equal(np.maximum(z, 0)[:300], np.maximum(x, 0))
        assert np.all(z[300:] == 0)
        # and the two-layer composition is the identity for nonnegative input
        y, _ = forward(net, np.abs(x))
        np.testing.assert_array_equal(y, np.abs(x))

    def test_column_offset_selects_slice(self):
        layer = init_identity(6, 2, Activation.LINEAR, column_offset=2)
        x = np.arange(6.0)
        np.testing.assert_array_equal(layer.weights @ x, x[2:4])

    def test_offset_bounds(self):
        with pytest.raises(ConfigurationError):
            init_identity(4, 2, column_offset=4)


class TestForward:
    def test_identity_net_fixed_point_on_nonnegative_input(self):
        rng = np.random.default_rng(1)
        net = Network.single(
            [init_identity(7, 7), init_identity(7, 7, Activation.LINEAR)]
        )
        x = np.abs(rng.standard_normal(7))
        y, _ = forward(net, x)
        assert np.max(np.abs(y - x)) <= 2 * EPS * np.max(np.abs(x))

    def test_affine_arithmetic(self):
        layer = DenseLayer(2 * np.eye(2), np.ones(2), Activation.LINEAR)
        y, _ = forward(Network.single([layer]), np.array([1.0, -1.0]))
        np.testing.assert_array_equal(y, [3.0, -1.0])

    def test_zero_propagates_through_identity_init(self):
        dims = [101, 100, 100, 101]
        layers = [
            init_identity(dims[k], dims[k + 1],
                          Activation.LINEAR if k == 2 else Activation.RELU)
            for k in range(3)
        ]
        y, _ = forward(Network.single(layers), np.zeros(101))
        np.testing.assert_array_equal(y, np.zeros(101))

    def test_shape_mismatch_rejected(self):
        net = Network.single([init_identity(3, 3, Activation.LINEAR)])
        with pytest.raises(ConfigurationError):
            forward(net, np.zeros(4))

    def test_positive_homogeneity_with_zero_bias(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            dims = [int(rng.integers(2, 7)) for _ in range(3)]
            layers = [
                DenseLayer(rng.standard_normal((dims[1], dims[0])), np.zeros(dims[1]),
                           Activation.RELU),
                DenseLayer(rng.standard_normal((dims[2], dims[1])), np.zeros(dims[2]),
                           Activation.LINEAR),
            ]
            net = Network.single(layers)
            x = rng.standard_normal(dims[0])
            a = float(rng.uniform(0.1, 10))
            y1, _ = forward(net, a * x)
            y0, _ = forward(net, x)
            np.testing.assert_allclose(y1, a * y0, rtol=1e-12, atol=1e-13)


class TestBackward:
    def test_single_linear_layer_chain_rule(self):
        rng = np.random.default_rng(3)
        W = rng.standard_normal((3, 4))
        b = rng.standard_normal(3)
        x = rng.standard_normal(4)
        net = Network.single([DenseLayer(W, b, Activation.LINEAR)])
        y, cache = forward(net, x)
        e0 = np.array([1.0, 0.0, 0.0])
        grads, dx = backward(net, cache, e0)
        np.testing.assert_array_equal(grads[0][0].d_weights, np.outer(e0, x))
        np.testing.assert_array_equal(grads[0][0].d_bias, e0)
        np.testing.assert_array_equal(dx, W[0])

    def test_zero_output_gradient_gives_zero_gradients(self):
        rng = np.random.default_rng(4)
        net = random_net(rng)
        x = rng.standard_normal(net.in_dim)
        _, cache = forward(net, x)
        grads, dx = backward(net, cache, np.zeros(net.out_dim))
        assert np.all(dx == 0)
        for stack in grads:
            for g in stack:
                assert np.all(g.d_weights == 0) and np.all(g.d_bias == 0)

    def test_stale_cache_rejected(self):
        rng = np.random.default_rng(5)
        net = random_net(rng, dims=[3, 4, 2])
        other = random_net(rng, dims=[3, 4, 2])
        _, cache = forward(net, rng.standard_normal(3))
        with pytest.raises(UsageError):
            backward(other, cache, np.zeros(2))

    @pytest.mark.parametrize("multi", [False, True])
    def test_gradients_match_finite_differences(self, multi):
        rng = np.random.default_rng(6)
        checked = 0
        while checked < 50:
            net = random_net(rng, multi=multi)
            x = rng.standard_normal(net.in_dim) * 2.0
            _, cache = forward(net, x)
            if any(
                np.min(np.abs(z)) < 1e-3 for pre in cache.pre for z in pre
            ):
                continue  # too close to a ReLU kink for finite differences
            w = rng.standard_normal(net.out_dim)
            grads, _ = backward(net, cache, w)
            fd = fd_param_gradients(net, x, w)
            for s_idx in range(len(net.stacks)):
                for k in range(len(net.stacks[s_idx])):
                    for got, want in [
                        (grads[s_idx][k].d_weights, fd[s_idx][k][0]),
                        (grads[s_idx][k].d_bias, fd[s_idx][k][1]),
                    ]:
                        denom = max(float(np.max(np.abs(want))), 1e-8)
                        assert np.max(np.abs(got - want)) / denom <= 1e-5
            checked += 1

    def test_input_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        net = random_net(rng, dims=[5, 6, 4])
        x = rng.standard_normal(5) * 3.0
        w = rng.standard_normal(4)
        _, cache = forward(net, x)
        _, dx = backward(net, cache, w)
        h = 1e-6
        for i in range(5):
            xp = x.copy()
            xp[i] += h
            xm = x.copy()
            xm[i] -= h
            num = (w @ forward(net, xp)[0] - w @ forward(net, xm)[0]) / (2 * h)
            assert abs(dx[i] - num) <= 1e-6 * max(abs(num), 1.0)


class TestNetworkValidation:
    def test_dimension_chaining_enforced(self):
        with pytest.raises(ConfigurationError):
            Network.single(
                [init_identity(3, 4), init_identity(5, 3, Activation.LINEAR)]
            )

    def test_output_layer_must_be_linear(self):
        with pytest.raises(ConfigurationError):
            Network.single([init_identity(3, 3, Activation.RELU)])

    def test_non_finite_parameters_rejected(self):
        W = np.eye(2)
        W[0, 0] = np.nan
        with pytest.raises(ConfigurationError):
            DenseLayer(W, np.zeros(2), Activation.LINEAR)


class TestConv1d:
    def test_single_tap_identity(self):
        out = conv1d([1.0, 2.0, 3.0], Conv1DKernel([1.0]))
        np.testing.assert_array_equal(out, [1, 2, 3])

    def test_centered_difference_kernel_with_zero_padding(self):
        out = conv1d([0.0, 1.0, 0.0], Conv1DKernel([-1, 0, 1], Padding.SAME_PAD_ZERO))
        np.testing.assert_array_equal(out, [1, 0, -1])

    def test_constant_input_scales_by_tap_sum(self):
        rng = np.random.default_rng(8)
        taps = rng.standard_normal(5)
        c = 3.7
        out = conv1d(np.full(11, c), Conv1DKernel(taps))
        np.testing.assert_allclose(out, c * taps.sum(), rtol=1e-14)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            n = int(rng.integers(5, 20))
            k = int(rng.choice([1, 3, 5]))
            sig = rng.standard_normal(n)
            taps = rng.standard_normal(k)
            kern = Conv1DKernel(taps, Padding.SAME_PAD_ZERO)
            got = conv1d(sig, kern)
            half = k // 2
            want = np.zeros(n)
            for i in range(n):
                for o in range(-half, half + 1):
                    j = i + o
                    if 0 <= j < n:
                        want[i] += sig[j] * taps[o + half]
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)

    def test_valid_mode_length_requirement(self):
        with pytest.raises(ConfigurationError):
            conv1d([1.0, 2.0], Conv1DKernel([1.0, 2.0, 3.0]))

    def test_zero_padding_needs_odd_taps(self):
        with pytest.raises(ConfigurationError):
            Conv1DKernel([1.0, 2.0], Padding.SAME_PAD_ZERO)
