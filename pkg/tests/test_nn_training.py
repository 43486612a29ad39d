import numpy as np
import pytest

from cv2xsim.nn import (
    ArchConfig,
    TrainConfig,
    build_model,
    load_model,
    predict,
    save_model,
    stratified_split,
    train,
)

SMALL_ARCH = ArchConfig(conv_specs=((2, 4, 3, 3), (4, 2, 3, 3)))


def toy_dataset(rng, n=24, shape=(2, 12, 6)):
    targets = rng.standard_normal((n, *shape)).astype(np.float32)
    inputs = targets + 0.5 * rng.standard_normal((n, *shape)).astype(np.float32)
    return inputs, targets


class TestTrain:
    def test_loss_decreases(self, rng):
        inputs, targets = toy_dataset(rng)
        model = build_model(SMALL_ARCH, seed=0)
        history = train(model, inputs, targets, TrainConfig(epochs=8, split=1.0, batch_size=8, seed=0))
        assert len(history) == 8
        assert history[-1] < history[0]

    def test_deterministic_given_seed(self, rng):
        inputs, targets = toy_dataset(rng)
        cfg = TrainConfig(epochs=3, split=0.5, batch_size=8, seed=7)
        m1 = build_model(SMALL_ARCH, seed=1)
        h1 = train(m1, inputs, targets, cfg)
        m2 = build_model(SMALL_ARCH, seed=1)
        h2 = train(m2, inputs, targets, cfg)
        assert h1 == h2
        for a, b in zip(m1.params(), m2.params()):
            assert np.array_equal(a, b)

    def test_bias_only_fit_converges(self):
        # zero input, constant target: the net only has its biases to fit,
        # and the constant-zero-variance case converges to near-zero loss
        inputs = np.zeros((16, 2, 8, 6), dtype=np.float32)
        targets = np.full((16, 2, 8, 6), 0.7, dtype=np.float32)
        model = build_model(SMALL_ARCH, seed=3)
        history = train(
            model,
            inputs,
            targets,
            TrainConfig(epochs=60, split=1.0, batch_size=8, learning_rate=1e-2, seed=0),
        )
        assert history[-1] < 1e-3

    def test_empty_dataset_rejected(self):
        model = build_model(SMALL_ARCH, seed=0)
        with pytest.raises(ValueError):
            train(model, np.zeros((0, 2, 8, 6)), np.zeros((0, 2, 8, 6)), TrainConfig())

    def test_shape_mismatch_rejected(self, rng):
        model = build_model(SMALL_ARCH, seed=0)
        with pytest.raises(ValueError):
            train(model, np.zeros((4, 2, 8, 6)), np.zeros((4, 2, 8, 5)), TrainConfig())


class TestStratifiedSplit:
    def test_proportions_per_stratum(self):
        strata = np.repeat([0, 1, 2, 3], 50)
        idx = stratified_split(strata, 0.3, np.random.default_rng(0))
        for s in range(4):
            assert np.count_nonzero(strata[idx] == s) == 15
        assert len(idx) == len(set(idx.tolist()))

    def test_split_only_used_for_updates(self, rng):
        # samples outside the split must not affect training: corrupt them
        inputs, targets = toy_dataset(rng, n=40)
        strata = np.zeros(40, dtype=int)
        cfg = TrainConfig(epochs=2, split=0.3, batch_size=4, seed=5)
        m1 = build_model(SMALL_ARCH, seed=2)
        h1 = train(m1, inputs, targets, cfg, strata=strata)
        idx = stratified_split(strata, 0.3, np.random.default_rng(5))
        outside = np.setdiff1d(np.arange(40), idx)
        inputs2 = inputs.copy()
        inputs2[outside] = 1e6
        m2 = build_model(SMALL_ARCH, seed=2)
        h2 = train(m2, inputs2, targets, cfg, strata=strata)
        assert h1 == h2


class TestCheckpoint:
    def test_round_trip(self, rng, tmp_path):
        inputs, targets = toy_dataset(rng)
        model = build_model(SMALL_ARCH, seed=0)
        cfg = TrainConfig(epochs=2, split=1.0, batch_size=8, seed=0)
        train(model, inputs, targets, cfg)
        path = tmp_path / "model.cvxm"
        save_model(path, model, cfg.to_dict())
        loaded, meta = load_model(path)
        assert meta["epochs"] == 2
        for a, b in zip(model.params(), loaded.params()):
            assert np.allclose(a, b, atol=1e-7)  # float32 storage
        for a, b in zip(model.batchnorms, loaded.batchnorms):
            assert np.allclose(a.running_mean, b.running_mean, atol=1e-7)
            assert np.allclose(a.running_var, b.running_var, atol=1e-7)
        h = rng.standard_normal((12, 6)) + 1j * rng.standard_normal((12, 6))
        assert np.allclose(predict(model, h), predict(loaded, h), atol=1e-5)

    def test_magic_enforced(self, tmp_path):
        path = tmp_path / "bad.cvxm"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ValueError, match="magic"):
            load_model(path)

    def test_bn_infer_train_gap_shrinks_with_batches(self, rng):
        # running stats converge toward batch stats as training proceeds
        inputs, targets = toy_dataset(rng, n=64)
        model = build_model(SMALL_ARCH, seed=0)
        gaps = []
        for _ in range(3):
            train(model, inputs, targets, TrainConfig(epochs=4, split=1.0, batch_size=16, seed=0))
            out_train = model.forward(inputs[:16].copy(), train=True)
            out_infer = model.forward(inputs[:16].copy(), train=False)
            gaps.append(float(np.mean(np.abs(out_train - out_infer))))
        assert gaps[-1] <= gaps[0]
