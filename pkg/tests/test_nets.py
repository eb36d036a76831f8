import numpy as np
import pytest

from giftworld.errors import ContractViolation
from giftworld.nets import (Adam, CrossEntropy, DenseNet, L1ToTarget,
                            LogProbWeighted, SquaredError, finite_difference_grads)


def rel_err(a, b):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)


class TestForward:
    def test_zero_weight_softmax_is_uniform(self):
        net = DenseNet([6, 8, 4], "softmax")
        out = net.forward(np.ones(6))
        np.testing.assert_allclose(out, [0.25] * 4, atol=1e-12)

    def test_zero_weight_scalar_is_zero(self):
        net = DenseNet([6, 8, 1], "scalar")
        assert net.forward(np.ones(6)) == 0.0

    def test_zero_weight_sigmoid_is_half(self):
        net = DenseNet([6, 8, 5], "sigmoid_map")
        np.testing.assert_allclose(net.forward(np.ones(6)), [0.5] * 5, atol=1e-12)

    def test_dimension_mismatch(self):
        net = DenseNet([6, 4], "softmax")
        with pytest.raises(ContractViolation):
            net.forward(np.ones(5))

    def test_batched_matches_single(self):
        rng = np.random.default_rng(0)
        net = DenseNet([5, 7, 3], "softmax", rng)
        xs = rng.normal(size=(4, 5))
        batch = net.forward(xs)
        for k in range(4):
            np.testing.assert_allclose(batch[k], net.forward(xs[k]), atol=1e-12)

    def test_softmax_normalized_and_positive(self):
        rng = np.random.default_rng(1)
        net = DenseNet([5, 16, 4], "softmax", rng)
        out = net.forward(rng.normal(size=(32, 5)) * 50)
        assert (out > 0).all()
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-9)

    def test_softmax_translation_invariance(self):
        rng = np.random.default_rng(2)
        net = DenseNet([4, 3], "softmax", rng)
        x = rng.normal(size=4)
        base = net.forward(x)
        net.biases[-1] += 7.5  # constant shift of all logits
        np.testing.assert_allclose(net.forward(x), base, atol=1e-9)


def _spec_for(head, out_dim, rng, batch):
    if head == "softmax":
        actions = rng.integers(out_dim, size=batch)
        return [LogProbWeighted(actions, rng.normal(size=batch)),
                CrossEntropy(actions)]
    if head == "scalar":
        return [SquaredError(rng.normal(size=batch))]
    return [L1ToTarget(rng.uniform(0.05, 0.95, size=(batch, out_dim)))]


class TestGradients:
    @pytest.mark.parametrize("head,out_dim", [("softmax", 3), ("scalar", 1),
                                              ("sigmoid_map", 4)])
    @pytest.mark.parametrize("dims", [(), (6,), (8, 5)])
    def test_against_finite_differences(self, head, out_dim, dims):
        rng = np.random.default_rng(hash((head, dims)) % 2**32)
        net = DenseNet([4, *dims, out_dim], head, rng)
        x = rng.normal(size=(3, 4))
        for spec in _spec_for(head, out_dim, rng, 3):
            _, grads, _ = net.loss_and_grads(x, spec)
            fd = finite_difference_grads(net, x, spec)
            for g, f in zip(grads, fd):
                assert rel_err(g, f).max() <= 1e-4

    def test_input_gradient_against_finite_differences(self):
        rng = np.random.default_rng(5)
        net = DenseNet([4, 6, 3], "softmax", rng)
        x = rng.normal(size=(2, 4))
        spec = CrossEntropy(np.array([0, 2]))
        _, _, dx = net.loss_and_grads(x, spec)
        step = 1e-6
        for b in range(2):
            for k in range(4):
                xp, xm = x.copy(), x.copy()
                xp[b, k] += step
                xm[b, k] -= step
                lp, _, _ = net.loss_and_grads(xp, spec)
                lm, _, _ = net.loss_and_grads(xm, spec)
                assert rel_err(dx[b, k], (lp - lm) / (2 * step)) <= 1e-4

    def test_uniform_cross_entropy_is_log_a(self):
        net = DenseNet([5, 4], "softmax")  # zero weights -> uniform
        loss, _, _ = net.loss_and_grads(np.ones((1, 5)), CrossEntropy(np.array([2])))
        assert loss == pytest.approx(np.log(4))

    def test_l1_gradient_sign(self):
        rng = np.random.default_rng(6)
        net = DenseNet([3, 4], "sigmoid_map", rng)
        x = rng.normal(size=(1, 3))
        out = net.forward(x)
        target = np.clip(out + rng.choice([-0.2, 0.2], size=out.shape), 0.01, 0.99)
        _, _, _ = net.loss_and_grads(x, L1ToTarget(target))
        # push the loss through the output-grad path: d|out-t|/d out = sign
        grads, _ = net.grads_from_output_grad(x, np.sign(out - target))
        loss_grads = net.loss_and_grads(x, L1ToTarget(target))[1]
        for g, h in zip(grads, loss_grads):
            np.testing.assert_allclose(g, h, atol=1e-12)

    def test_vjp_matches_loss_path_for_squared_error(self):
        rng = np.random.default_rng(7)
        net = DenseNet([3, 5, 1], "scalar", rng)
        x = rng.normal(size=(4, 3))
        targets = rng.normal(size=4)
        _, grads, dx = net.loss_and_grads(x, SquaredError(targets))
        d_out = np.asarray(net.forward(x)) - targets
        grads2, dx2 = net.grads_from_output_grad(x, d_out)
        for g, h in zip(grads, grads2):
            np.testing.assert_allclose(g, h, atol=1e-12)
        np.testing.assert_allclose(dx, dx2, atol=1e-12)

    def test_wrong_head_for_loss(self):
        net = DenseNet([3, 1], "scalar")
        with pytest.raises(ContractViolation):
            net.loss_and_grads(np.ones((1, 3)), CrossEntropy(np.array([0])))


class TestAdam:
    def test_zero_gradient_is_noop(self):
        rng = np.random.default_rng(8)
        net = DenseNet([3, 4, 2], "softmax", rng)
        before = [p.copy() for p in net.params]
        opt = Adam(net.params, lr=0.01)
        opt.apply([np.zeros_like(p) for p in net.params])
        for b, p in zip(before, net.params):
            np.testing.assert_allclose(b, p)

    def test_constant_gradient_direction_and_magnitude(self):
        p = np.array([0.0])
        opt = Adam([p], lr=0.01)
        prev = p[0]
        steps = []
        for _ in range(200):
            opt.apply([np.array([2.5])])
            steps.append(prev - p[0])
            prev = p[0]
        assert all(s > 0 for s in steps)  # monotone, opposite the gradient sign
        assert steps[-1] == pytest.approx(0.01, rel=1e-3)  # step size -> lr

    def test_determinism(self):
        rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
        n1 = DenseNet([4, 6, 2], "softmax", rng1)
        n2 = DenseNet([4, 6, 2], "softmax", rng2)
        o1, o2 = Adam(n1.params, 1e-3), Adam(n2.params, 1e-3)
        x = np.random.default_rng(10).normal(size=(5, 4))
        spec = CrossEntropy(np.array([0, 1, 0, 1, 0]))
        for _ in range(3):
            _, g1, _ = n1.loss_and_grads(x, spec)
            _, g2, _ = n2.loss_and_grads(x, spec)
            o1.apply(g1)
            o2.apply(g2)
        for a, b in zip(n1.params, n2.params):
            np.testing.assert_array_equal(a, b)


class TestCheckpoint:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(11)
        net = DenseNet([5, 8, 3], "softmax", rng)
        opt = Adam(net.params, lr=2e-3)
        x = rng.normal(size=(4, 5))
        _, grads, _ = net.loss_and_grads(x, CrossEntropy(np.array([0, 1, 2, 0])))
        opt.apply(grads)
        path = tmp_path / "net.npz"
        net.save(path, opt)
        loaded, loaded_opt = DenseNet.load(path)
        np.testing.assert_array_equal(loaded.forward(x), net.forward(x))
        assert loaded_opt.step_count == 1
        assert loaded_opt.lr == 2e-3
        for a, b in zip(loaded_opt.m, opt.m):
            np.testing.assert_array_equal(a, b)
