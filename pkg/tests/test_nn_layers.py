import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fd_grad, rel_err
from cv2xsim.nn import (
    Adam,
    ArchConfig,
    BatchNorm2D,
    Conv2D,
    Dense,
    ReLU,
    adam_step,
    build_model,
    from_channels,
    mse_loss,
    predict,
    to_channels,
)

F64 = dict(dtype=np.float64)


class TestConvForward:
    def test_identity_kernel(self, rng):
        conv = Conv2D(1, 1, 1, 1, **F64)
        conv.weight[:] = 1.0
        conv.bias[:] = 0.0
        x = rng.standard_normal((2, 1, 6, 5))
        assert np.allclose(conv.forward(x.copy()), x)

    def test_zero_input_broadcasts_bias(self):
        conv = Conv2D(2, 3, 3, 3, **F64)
        conv.bias[:] = [1.0, -2.0, 0.5]
        y = conv.forward(np.zeros((2, 2, 6, 5)))
        for c, b in enumerate(conv.bias):
            assert np.allclose(y[:, c], b)

    def test_impulse_response_of_ones_kernel(self):
        conv = Conv2D(1, 1, 3, 3, **F64)
        conv.weight[:] = 1.0
        conv.bias[:] = 0.0
        x = np.zeros((1, 1, 7, 7))
        x[0, 0, 3, 3] = 1.0
        y = conv.forward(x)
        assert np.allclose(y[0, 0, 2:5, 2:5], 1.0)
        assert y[0, 0].sum() == pytest.approx(9.0)

    def test_even_kernel_rejected(self):
        with pytest.raises(ValueError):
            Conv2D(1, 1, 2, 3)

    def test_channel_mismatch_rejected(self):
        conv = Conv2D(2, 3, 3, 3)
        with pytest.raises(ValueError):
            conv.forward(np.zeros((1, 3, 4, 4), dtype=np.float32))


class TestGradientChecks:
    """Central finite differences against every layer's backward pass."""

    def _check_param_grads(self, layer, x, rng, tol=1e-4):
        probe = rng.standard_normal(layer.forward(x.copy(), train=True).shape)

        def loss_fn():
            return float(np.sum(layer.forward(x, train=True) * probe))

        layer.forward(x, train=True)
        layer.backward(probe.copy())
        analytic = [g.copy() for g in layer.grads()]
        for p, a in zip(layer.params(), analytic):
            numeric = fd_grad(loss_fn, p)
            assert rel_err(a, numeric) < tol
        # input gradient
        layer.forward(x, train=True)
        grad_x = layer.backward(probe.copy())
        if grad_x is not None:
            numeric = fd_grad(loss_fn, x)
            assert rel_err(grad_x, numeric) < tol

    @pytest.mark.parametrize("seed", range(10))
    def test_conv_backward(self, seed):
        gen = np.random.default_rng(seed)
        x = gen.standard_normal((1, 2, 8, 6))
        conv = Conv2D(2, 3, 3, 3, rng=gen, **F64)
        self._check_param_grads(conv, x, gen)

    @pytest.mark.parametrize("seed", range(10))
    def test_batchnorm_backward(self, seed):
        gen = np.random.default_rng(seed)
        x = gen.standard_normal((4, 2, 4, 3))
        self._check_param_grads(BatchNorm2D(2, **F64), x, gen)

    @pytest.mark.parametrize("seed", range(10))
    def test_dense_backward(self, seed):
        gen = np.random.default_rng(seed)
        x = gen.standard_normal((3, 4, 5, 4))
        self._check_param_grads(Dense(4, 3, rng=gen, **F64), x, gen)

    @pytest.mark.parametrize("seed", range(10))
    def test_relu_backward(self, seed):
        gen = np.random.default_rng(seed)
        x = gen.standard_normal((3, 2, 5, 4))
        x = np.where(np.abs(x) < 0.05, x + 0.1 * np.sign(x) + 0.01, x)  # avoid the kink
        relu = ReLU()
        probe = gen.standard_normal(x.shape)

        def loss_fn():
            return float(np.sum(relu.forward(x, train=True) * probe))

        relu.forward(x, train=True)
        analytic = relu.backward(probe.copy())
        assert rel_err(analytic, fd_grad(loss_fn, x)) < 1e-4

    def test_mse_gradient(self, rng):
        pred = rng.standard_normal((2, 2, 4, 3))
        target = rng.standard_normal((2, 2, 4, 3))
        _, grad = mse_loss(pred, target)

        def loss_fn():
            return mse_loss(pred, target)[0]

        assert rel_err(grad, fd_grad(loss_fn, pred)) < 1e-6


class TestConvBackwardIdentities:
    def test_zero_grad_out_zero_grads(self, rng):
        conv = Conv2D(2, 3, 3, 3, rng=rng, **F64)
        x = rng.standard_normal((2, 2, 5, 4))
        conv.forward(x)
        gx = conv.backward(np.zeros((2, 3, 5, 4)))
        assert np.all(gx == 0)
        assert np.all(conv.grad_weight == 0)
        assert np.all(conv.grad_bias == 0)

    def test_grad_bias_is_channel_sum(self, rng):
        conv = Conv2D(2, 3, 3, 3, rng=rng, **F64)
        x = rng.standard_normal((2, 2, 5, 4))
        g = rng.standard_normal((2, 3, 5, 4))
        conv.forward(x)
        conv.backward(g)
        assert np.allclose(conv.grad_bias, g.sum(axis=(0, 2, 3)))


class TestBatchNorm:
    def test_train_mode_normalizes(self, rng):
        bn = BatchNorm2D(3, **F64)
        x = 5.0 + 2.0 * rng.standard_normal((8, 3, 6, 5))
        y = bn.forward(x, train=True)
        assert np.allclose(y.mean(axis=(0, 2, 3)), 0.0, atol=1e-6)
        assert np.allclose(y.var(axis=(0, 2, 3)), 1.0, atol=1e-3)

    def test_idempotent_on_normalized_input(self, rng):
        bn = BatchNorm2D(2, eps=1e-12, **F64)
        x = rng.standard_normal((16, 2, 8, 6))
        x -= x.mean(axis=(0, 2, 3), keepdims=True)
        x /= x.std(axis=(0, 2, 3), keepdims=True)
        y = bn.forward(x, train=True)
        assert np.max(np.abs(y - x)) < 1e-6

    def test_gamma_zero_collapses_to_beta(self, rng):
        bn = BatchNorm2D(2, **F64)
        bn.gamma[:] = 0.0
        bn.beta[:] = [3.0, -1.0]
        y = bn.forward(rng.standard_normal((4, 2, 3, 3)), train=True)
        assert np.allclose(y[:, 0], 3.0)
        assert np.allclose(y[:, 1], -1.0)

    def test_batch_of_one_rejected(self):
        with pytest.raises(ValueError):
            BatchNorm2D(2).forward(np.zeros((1, 2, 4, 4), dtype=np.float32), train=True)

    def test_infer_mode_uses_running_stats(self, rng):
        bn = BatchNorm2D(2, momentum=1.0, **F64)
        x = 3.0 + rng.standard_normal((32, 2, 6, 5))
        bn.forward(x, train=True)  # momentum 1: running stats = this batch
        y = bn.forward(x, train=False)
        assert np.allclose(y.mean(axis=(0, 2, 3)), 0.0, atol=1e-6)

    def test_grad_beta_is_sum_and_grad_x_zero_mean(self, rng):
        bn = BatchNorm2D(3, **F64)
        x = rng.standard_normal((6, 3, 4, 4))
        g = rng.standard_normal((6, 3, 4, 4))
        bn.forward(x, train=True)
        gx = bn.backward(g)
        assert np.allclose(bn.grad_beta, g.sum(axis=(0, 2, 3)))
        # normalization removes the mean: per-channel sums of grad_x vanish
        assert np.allclose(gx.sum(axis=(0, 2, 3)), 0.0, atol=1e-9)


class TestDenseAndRelu:
    def test_dense_identity(self, rng):
        d = Dense(3, 3, **F64)
        d.weight[:] = np.eye(3)
        d.bias[:] = 0.0
        x = rng.standard_normal((2, 3, 4, 4))
        assert np.allclose(d.forward(x.copy()), x)

    def test_relu_identity_on_nonnegative(self, rng):
        x = np.abs(rng.standard_normal((2, 2, 3, 3)))
        assert np.allclose(ReLU().forward(x.copy()), x)

    def test_relu_does_not_mutate_by_default(self, rng):
        x = rng.standard_normal((2, 2, 3, 3))
        keep = x.copy()
        ReLU().forward(x, train=True)
        assert np.array_equal(x, keep)


class TestAdam:
    def test_zero_gradient_fresh_state(self):
        p = [np.array([1.0, -2.0])]
        Adam(learning_rate=0.1).step(p, [np.zeros(2)])
        assert np.array_equal(p[0], [1.0, -2.0])

    def test_first_step_is_signed_lr(self):
        p = [np.zeros(3)]
        adam_step(p, [np.array([4.0, -0.25, 1e-3])], Adam(learning_rate=0.1))
        assert np.allclose(p[0], [-0.1, 0.1, -0.1], atol=1e-4)

    def test_quadratic_convergence(self):
        theta = [np.array([1.0])]
        opt = Adam(learning_rate=0.1)
        for _ in range(200):
            opt.step(theta, [2 * theta[0]])
        assert abs(theta[0][0]) < 1e-2

    def test_literal_mode_skips_bias_correction(self):
        p = [np.zeros(1)]
        opt = Adam(learning_rate=0.1, bias_correction=False, eps=0.0)
        opt.step(p, [np.array([2.0])])
        # m1 = 0.1*g, v1 = 0.001*g^2 -> step = lr*m1/sqrt(v1)
        expected = -0.1 * (0.1 * 2.0) / np.sqrt(0.001 * 4.0)
        assert p[0][0] == pytest.approx(expected)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Adam().step([np.zeros(2)], [np.zeros(3)])


class TestModel:
    def test_output_shape_preserved(self, rng):
        model = build_model(seed=0)
        x = rng.standard_normal((2, 2, 576, 14)).astype(np.float32)
        assert model.forward(x, train=False).shape == (2, 2, 576, 14)

    def test_param_count_reported(self):
        model = build_model(seed=0)
        # conv stacks: (2*16*27+16) + (16*8*15+8) + (8*4*15+4) + (4*2*9+2)
        # BN: 2*(16+8+4+2); dense: 2*2+2
        conv = (2 * 16 * 27 + 16) + (16 * 8 * 15 + 8) + (8 * 4 * 15 + 4) + (4 * 2 * 9 + 2)
        bn = 2 * (16 + 8 + 4 + 2)
        dense = 2 * 2 + 2
        assert model.param_count() == conv + bn + dense

    def test_untrained_output_finite(self, rng):
        model = build_model(seed=1)
        x = rng.standard_normal((3, 2, 576, 14)).astype(np.float32)
        assert np.all(np.isfinite(model.forward(x, train=False)))

    def test_end_to_end_gradient_check(self):
        # single perturbed weights through the whole net, 64-bit
        gen = np.random.default_rng(0)
        arch = ArchConfig(conv_specs=((2, 3, 3, 3), (3, 2, 3, 3)))
        model = build_model(arch, seed=0, dtype=np.float64)
        x = gen.standard_normal((3, 2, 8, 6))
        y = gen.standard_normal((3, 2, 8, 6))

        def loss_fn():
            return mse_loss(model.forward(x, train=True), y)[0]

        model.forward(x, train=True)
        loss, grad = mse_loss(model.forward(x, train=True), y)
        model.backward(grad)
        analytic = [g.copy() for g in model.grads()]
        for p, a in zip(model.params(), analytic):
            numeric = fd_grad(loss_fn, p)
            # conv biases have exactly zero gradient through batch norm
            assert np.linalg.norm(a - numeric) <= max(
                1e-3 * max(np.linalg.norm(a), np.linalg.norm(numeric)), 1e-7
            )


class TestChannelMapping:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**16))
    def test_round_trip_exact(self, seed):
        gen = np.random.default_rng(seed)
        h = gen.standard_normal((3, 5, 4)) + 1j * gen.standard_normal((3, 5, 4))
        assert np.array_equal(from_channels(to_channels(h)), h)

    def test_channel_order_re_im(self):
        h = np.array([[1 + 2j]])
        x = to_channels(h)
        assert x.shape == (2, 1, 1)
        assert x[0, 0, 0] == 1.0 and x[1, 0, 0] == 2.0


class TestPredict:
    def test_shapes_and_determinism(self, rng):
        model = build_model(seed=0)
        h = rng.standard_normal((576, 14)) + 1j * rng.standard_normal((576, 14))
        out1 = predict(model, h)
        out2 = predict(model, h)
        assert out1.shape == (576, 14)
        assert np.iscomplexobj(out1)
        assert np.array_equal(out1, out2)

    def test_stacked_input(self, rng):
        model = build_model(seed=0)
        h = rng.standard_normal((3, 2, 576, 14)) + 1j * rng.standard_normal((3, 2, 576, 14))
        out = predict(model, h)
        assert out.shape == (3, 2, 576, 14)
        single = predict(model, h[1, 0])
        assert np.allclose(out[1, 0], single)
