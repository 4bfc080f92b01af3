"""Layer math against independent oracles.

The convolution is checked against a seven-loop reference, every
trainable parameter against central finite differences, and the
loss head against hand-computed values.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specsense.nnet import (
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    ModelConfig,
    ReLU,
    build_model,
    cross_entropy,
    glorot_uniform,
    softmax,
    softmax_cross_entropy,
)


def pad_amounts(k, mode):
    if mode == "valid":
        return (0, 0)
    left = (k - 1) // 2
    return (left, k - 1 - left)


def conv_naive(x, weights, bias, pad):
    """Direct seven-loop convolution, the oracle for the im2col path."""
    batch, chans, height, width = x.shape
    filters, _, kh, kw = weights.shape
    ph = pad_amounts(kh, pad[0])
    pw = pad_amounts(kw, pad[1])
    xp = np.pad(x, ((0, 0), (0, 0), ph, pw))
    h_out = xp.shape[2] - kh + 1
    w_out = xp.shape[3] - kw + 1
    out = np.zeros((batch, filters, h_out, w_out))
    for b in range(batch):
        for f in range(filters):
            for i in range(h_out):
                for j in range(w_out):
                    acc = float(bias[f])
                    for c in range(chans):
                        for u in range(kh):
                            for v in range(kw):
                                acc += float(xp[b, c, i + u, j + v]) * float(
                                    weights[f, c, u, v]
                                )
                    out[b, f, i, j] = acc
    return out


@pytest.mark.parametrize(
    "chans,kernel,pad,height,width",
    [
        (1, (1, 3), ("same", "same"), 2, 8),
        (2, (2, 3), ("valid", "same"), 2, 7),
        (3, (2, 2), ("same", "valid"), 3, 6),
    ],
)
def test_conv_matches_naive_loop(chans, kernel, pad, height, width):
    rng = np.random.default_rng(11)
    layer = Conv2d(chans, 4, kernel, pad, rng, dtype=np.float64)
    x = rng.standard_normal((3, chans, height, width))
    got = layer.forward(x)
    want = conv_naive(x, layer.weights, layer.bias, pad)
    assert got.shape == want.shape
    np.testing.assert_allclose(got, want, atol=1e-6)


def test_conv_same_padding_keeps_width():
    layer = Conv2d(1, 2, (1, 3), ("same", "same"), np.random.default_rng(0))
    out = layer.forward(np.ones((1, 1, 2, 128), dtype=np.float32))
    assert out.shape == (1, 2, 2, 128)
    assert out.dtype == np.float32


def test_conv_rejects_input_smaller_than_kernel():
    layer = Conv2d(1, 2, (2, 3), ("valid", "same"), np.random.default_rng(0))
    with pytest.raises(ValueError):
        layer.forward(np.ones((1, 1, 1, 8), dtype=np.float32))


def test_dense_is_affine_map():
    rng = np.random.default_rng(3)
    layer = Dense(5, 3, rng, dtype=np.float64)
    x = rng.standard_normal((4, 5))
    np.testing.assert_allclose(layer.forward(x), x @ layer.weights.T + layer.bias)


def test_glorot_bound_and_determinism():
    limit = np.sqrt(6.0 / (40 + 30))
    w1 = glorot_uniform(np.random.default_rng(9), (30, 40), 40, 30, np.float32)
    w2 = glorot_uniform(np.random.default_rng(9), (30, 40), 40, 30, np.float32)
    assert np.max(np.abs(w1)) <= limit
    np.testing.assert_array_equal(w1, w2)


def test_relu_zeroes_negatives_and_masks_gradient():
    layer = ReLU()
    x = np.array([[-2.0, 0.0, 3.0]])
    out = layer.forward(x)
    np.testing.assert_array_equal(out, [[0.0, 0.0, 3.0]])
    grad = layer.backward(np.ones_like(x))
    np.testing.assert_array_equal(grad, [[0.0, 0.0, 1.0]])


def test_flatten_round_trip():
    layer = Flatten()
    x = np.arange(24.0).reshape(2, 3, 2, 2)
    out = layer.forward(x)
    assert out.shape == (2, 12)
    np.testing.assert_array_equal(layer.backward(out), x)


def test_dropout_eval_is_identity():
    layer = Dropout(0.6)
    x = np.random.default_rng(1).standard_normal((5, 7))
    np.testing.assert_array_equal(layer.forward(x, train=False), x)


def test_dropout_preserves_expectation():
    # inverted scaling keeps E[out] == x, so the empirical mean of the
    # kept-and-rescaled values must hover near the input
    rng = np.random.default_rng(5)
    layer = Dropout(0.4)
    x = np.ones((200, 500))
    out = layer.forward(x, train=True, rng=rng)
    kept = out[out > 0]
    np.testing.assert_allclose(kept[0], 1.0 / 0.6, rtol=1e-12)
    np.testing.assert_allclose(out.mean(), 1.0, atol=0.01)


def test_dropout_train_requires_rng():
    layer = Dropout(0.5)
    with pytest.raises(ValueError):
        layer.forward(np.ones((2, 2)), train=True)


def test_dropout_rejects_bad_rate():
    with pytest.raises(ValueError):
        Dropout(1.0)
    with pytest.raises(ValueError):
        Dropout(-0.1)


def test_softmax_frozen_two_logit_case():
    # 1 / (1 + e^-1) and its complement
    probs = softmax(np.array([[1.0, 0.0]]))
    np.testing.assert_allclose(
        probs, [[0.7310585786300049, 0.2689414213699951]], atol=1e-15
    )


def test_cross_entropy_uniform_eleven_classes():
    # -log(1/11) = log(11)
    probs = np.full((4, 11), 1.0 / 11.0)
    onehot = np.eye(11)[[0, 3, 7, 10]]
    np.testing.assert_allclose(
        cross_entropy(probs, onehot), 2.3978952727983707, atol=1e-12
    )


def test_cross_entropy_clips_zero_probability():
    probs = np.array([[0.0, 1.0]])
    onehot = np.array([[1.0, 0.0]])
    assert np.isfinite(cross_entropy(probs, onehot))


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.floats(min_value=-50, max_value=50), min_size=2, max_size=12),
    st.floats(min_value=-100, max_value=100),
)
def test_softmax_simplex_and_shift_invariance(row, shift):
    z = np.array([row])
    probs = softmax(z)
    assert np.all(probs > 0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(softmax(z + shift), probs, atol=1e-9)


def test_fused_loss_gradient_is_probs_minus_targets():
    rng = np.random.default_rng(21)
    logits = rng.standard_normal((6, 4))
    onehot = np.eye(4)[rng.integers(0, 4, 6)]
    loss, grad = softmax_cross_entropy(logits, onehot)
    np.testing.assert_allclose(loss, cross_entropy(softmax(logits), onehot), atol=1e-12)
    np.testing.assert_allclose(grad, (softmax(logits) - onehot) / 6.0, atol=1e-12)


def test_fused_loss_gradient_matches_finite_difference():
    rng = np.random.default_rng(22)
    logits = rng.standard_normal((3, 5))
    onehot = np.eye(5)[[4, 0, 2]]
    _, grad = softmax_cross_entropy(logits, onehot)
    h = 1e-6
    for i in range(3):
        for j in range(5):
            bumped = logits.copy()
            bumped[i, j] += h
            up, _ = softmax_cross_entropy(bumped, onehot)
            bumped[i, j] -= 2 * h
            down, _ = softmax_cross_entropy(bumped, onehot)
            np.testing.assert_allclose((up - down) / (2 * h), grad[i, j], atol=1e-7)


def test_saturated_logits_give_near_zero_loss_and_gradient():
    logits = np.array([[40.0, 0.0, 0.0], [0.0, 40.0, 0.0]])
    onehot = np.eye(3)[[0, 1]]
    loss, grad = softmax_cross_entropy(logits, onehot)
    assert loss < 1e-12
    assert np.max(np.abs(grad)) < 1e-12


def tiny_model(dropout=0.0):
    config = ModelConfig((1, 2, 8), 3, 2, 4, 3, dtype=np.float64)
    return build_model(config, seed=99, dropout=dropout)


def model_loss(model, x, onehot):
    # fresh identically-seeded rng per call keeps dropout masks frozen
    # across the finite-difference evaluations
    rng = np.random.default_rng(123)
    logits = model.forward(x, train=True, rng=rng)
    loss, dlogits = softmax_cross_entropy(logits, onehot)
    return loss, dlogits


@pytest.mark.parametrize("dropout", [0.0, 0.5])
def test_every_parameter_gradient_matches_finite_difference(dropout):
    rng = np.random.default_rng(33)
    model = tiny_model(dropout)
    x = rng.standard_normal((4, 1, 2, 8))
    onehot = np.eye(3)[rng.integers(0, 3, 4)]

    _, dlogits = model_loss(model, x, onehot)
    model.backward(dlogits)
    analytic = [g.copy() for g in model.grads()]

    h = 1e-3
    for param, grad in zip(model.params(), analytic, strict=True):
        flat = param.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up, _ = model_loss(model, x, onehot)
            flat[k] = orig - h
            down, _ = model_loss(model, x, onehot)
            flat[k] = orig
            fd = (up - down) / (2 * h)
            an = grad.reshape(-1)[k]
            rel = abs(fd - an) / max(abs(fd), abs(an), 1e-6)
            assert rel <= 1e-4, f"param grad off by {rel} at index {k}"


def test_batch_duplication_leaves_parameter_gradients_unchanged():
    # the loss averages over the batch, so stacking the same examples
    # twice must not change any parameter gradient
    rng = np.random.default_rng(44)
    model = tiny_model()
    x = rng.standard_normal((2, 1, 2, 8))
    onehot = np.eye(3)[[0, 2]]

    _, dl = softmax_cross_entropy(model.forward(x, train=False), onehot)
    model.backward(dl)
    single = [g.copy() for g in model.grads()]

    x2 = np.concatenate([x, x])
    y2 = np.concatenate([onehot, onehot])
    _, dl2 = softmax_cross_entropy(model.forward(x2, train=False), y2)
    model.backward(dl2)
    for a, b in zip(single, model.grads(), strict=True):
        np.testing.assert_allclose(a, b, atol=1e-12)
