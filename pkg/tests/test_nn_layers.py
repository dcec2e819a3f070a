import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icvmd.errors import ParameterError
from icvmd.nn.attention import scaled_softmax_attention, softmax, softmax_backward
from icvmd.nn.layers import (
    ConvLayer,
    Dense,
    causal_dilated_conv,
    conv_backward,
    conv_forward,
    dense_backward,
    dense_forward,
    impulse_probe,
    init_conv,
    init_dense,
    receptive_field,
    relu_backward,
    relu_forward,
)


# ------------------------------------------------------------------- conv


def test_conv_hand_case_width3():
    # Kernel taps: oldest lag gets weight 1, middle 0, current 1:
    # y_t = x_{t-2} + x_t.
    layer = ConvLayer(np.array([[[1.0, 0.0, 1.0]]]), np.zeros(1))
    y = causal_dilated_conv(np.array([[1.0, 2.0, 3.0, 4.0]]), layer)
    assert np.array_equal(y, [[1.0, 2.0, 4.0, 6.0]])


def test_conv_hand_case_dilation2():
    # Width 2, dilation 2: y_t = 2*x_{t-2} + x_t.
    layer = ConvLayer(np.array([[[2.0, 1.0]]]), np.zeros(1), dilation=2)
    y = causal_dilated_conv(np.array([[1.0, 2.0, 3.0, 4.0]]), layer)
    assert np.array_equal(y, [[1.0, 2.0, 5.0, 8.0]])


def test_conv_bias_and_channels():
    w = np.zeros((2, 2, 1))
    w[0, 0, 0] = 1.0  # out0 = in0
    w[1, 1, 0] = -1.0  # out1 = -in1
    layer = ConvLayer(w, np.array([10.0, 20.0]))
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    y = causal_dilated_conv(x, layer)
    assert np.array_equal(y, [[11.0, 12.0], [17.0, 16.0]])


def test_conv_causality():
    rng = np.random.default_rng(0)
    layer = ConvLayer(rng.normal(size=(3, 2, 4)), rng.normal(size=3), dilation=3)
    x = rng.normal(size=(1, 2, 50))
    y, _ = conv_forward(x, layer)
    x2 = x.copy()
    x2[:, :, 30:] += 5.0  # future change
    y2, _ = conv_forward(x2, layer)
    assert np.array_equal(y[:, :, :30], y2[:, :, :30])
    assert not np.allclose(y[:, :, 30:], y2[:, :, 30:])


def test_conv_backward_matches_finite_difference():
    rng = np.random.default_rng(1)
    layer = ConvLayer(rng.normal(size=(2, 3, 3)), rng.normal(size=2), dilation=2)
    x = rng.normal(size=(2, 3, 12))
    y, cache = conv_forward(x, layer)
    g = rng.normal(size=y.shape)  # arbitrary upstream gradient

    dx, dw, db = conv_backward(g, cache)
    loss = lambda out: float(np.sum(out * g))

    eps = 1e-6
    for arr, grad in ((x, dx), (layer.weights, dw), (layer.bias, db)):
        it = np.ndindex(*arr.shape)
        for idx in list(it)[:: max(1, arr.size // 20)]:  # sample coordinates
            orig = arr[idx]
            arr[idx] = orig + eps
            lp = loss(conv_forward(x, layer)[0])
            arr[idx] = orig - eps
            lm = loss(conv_forward(x, layer)[0])
            arr[idx] = orig
            num = (lp - lm) / (2 * eps)
            assert grad[idx] == pytest.approx(num, abs=1e-5, rel=1e-5)


def test_conv_validation():
    with pytest.raises(ParameterError):
        ConvLayer(np.zeros((2, 2)), np.zeros(2))
    with pytest.raises(ParameterError):
        ConvLayer(np.zeros((2, 2, 3)), np.zeros(3))
    with pytest.raises(ParameterError):
        ConvLayer(np.zeros((2, 2, 3)), np.zeros(2), dilation=0)
    layer = ConvLayer(np.zeros((2, 3, 1)), np.zeros(2))
    with pytest.raises(ParameterError):
        conv_forward(np.zeros((1, 2, 5)), layer)  # wrong channel count
    with pytest.raises(ParameterError):
        causal_dilated_conv(np.zeros((1, 2, 5)), layer)  # 3-D to 2-D wrapper


# ---------------------------------------------------------------- dense/relu


def test_dense_hand_case():
    layer = Dense(np.array([[1.0, 2.0], [0.0, -1.0]]), np.array([10.0, 0.0]))
    y, _ = dense_forward(np.array([[3.0, 4.0]]), layer)
    assert np.array_equal(y, [[3 + 8 + 10, -4]])


def test_dense_backward_hand_case():
    layer = Dense(np.array([[1.0, 2.0]]), np.array([0.0]))
    x = np.array([[3.0, 4.0]])
    _, cache = dense_forward(x, layer)
    dy = np.array([[2.0]])
    dx, dw, db = dense_backward(dy, cache, layer)
    assert np.array_equal(dx, [[2.0, 4.0]])
    assert np.array_equal(dw, [[6.0, 8.0]])
    assert np.array_equal(db, [2.0])


def test_dense_validation():
    layer = Dense(np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(ParameterError):
        dense_forward(np.zeros((1, 4)), layer)
    with pytest.raises(ParameterError):
        Dense(np.zeros((2, 3)), np.zeros(3))


def test_relu_forward_backward():
    x = np.array([-2.0, 0.0, 3.0])
    y, cache = relu_forward(x)
    assert np.array_equal(y, [0.0, 0.0, 3.0])
    dy = np.array([1.0, 1.0, 1.0])
    assert np.array_equal(relu_backward(dy, cache), [0.0, 0.0, 1.0])


# ----------------------------------------------------------- receptive field


def test_receptive_field_formula():
    assert receptive_field(2, (1, 2, 4, 8)) == 16
    assert receptive_field(3, (1,)) == 3
    assert receptive_field(1, (5, 9)) == 1
    with pytest.raises(ParameterError):
        receptive_field(0, (1,))
    with pytest.raises(ParameterError):
        receptive_field(2, ())
    with pytest.raises(ParameterError):
        receptive_field(2, (1, 0))


@pytest.mark.parametrize(
    "width,dilations",
    [(2, (1, 2, 4, 8)), (3, (1, 2)), (2, (1,)), (4, (1, 3)), (1, (2, 2))],
)
def test_impulse_probe_agrees_with_formula(width, dilations):
    assert impulse_probe(width, dilations) == receptive_field(width, dilations)


# ------------------------------------------------------------------ attention


def test_softmax_rows_sum_to_one():
    x = np.array([[1.0, 2.0, 3.0], [-5.0, 0.0, 5.0]])
    y = softmax(x, axis=1)
    assert np.allclose(y.sum(axis=1), 1.0)
    assert np.all(y > 0)


def test_softmax_is_shift_invariant_and_stable():
    x = np.array([1.0, 2.0])
    assert np.allclose(softmax(x), softmax(x + 1000.0))
    y = softmax(np.array([0.0, 10000.0]))
    assert np.all(np.isfinite(y))
    assert y[1] == pytest.approx(1.0)


def test_softmax_backward_matches_finite_difference():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(3, 5))
    dy = rng.normal(size=(3, 5))
    y = softmax(x, axis=1)
    dx = softmax_backward(dy, y, axis=1)
    eps = 1e-6
    for idx in np.ndindex(3, 5):
        xp = x.copy()
        xp[idx] += eps
        xm = x.copy()
        xm[idx] -= eps
        num = np.sum((softmax(xp, axis=1) - softmax(xm, axis=1)) * dy) / (2 * eps)
        assert dx[idx] == pytest.approx(num, abs=1e-6)


def test_attention_uniform_when_scores_equal():
    q = np.zeros((2, 4))
    k = np.ones((3, 4))
    v = np.arange(6.0).reshape(3, 2)
    out, w = scaled_softmax_attention(q, k, v)
    assert np.allclose(w, 1.0 / 3.0)
    assert np.allclose(out, v.mean(axis=0))


def test_attention_picks_matching_key():
    q = np.array([[10.0, 0.0]])
    k = np.array([[10.0, 0.0], [0.0, 10.0]])
    v = np.array([[1.0, 0.0], [0.0, 1.0]])
    out, w = scaled_softmax_attention(q, k, v)
    assert w[0, 0] > 0.999
    assert out[0, 0] == pytest.approx(1.0, abs=1e-3)


def test_attention_validation():
    with pytest.raises(ParameterError):
        scaled_softmax_attention(np.zeros((2, 3)), np.zeros((2, 4)), np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        scaled_softmax_attention(np.zeros((2, 3)), np.zeros((4, 3)), np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        scaled_softmax_attention(np.zeros(3), np.zeros((2, 3)), np.zeros((2, 2)))
    with pytest.raises(ParameterError):
        scaled_softmax_attention(np.zeros((2, 0)), np.zeros((2, 0)), np.zeros((2, 2)))


@settings(deadline=None, max_examples=60)
@given(
    n_q=st.integers(1, 6),
    n_k=st.integers(1, 6),
    d=st.integers(1, 5),
    seed=st.integers(0, 2**31),
)
def test_attention_weights_always_normalized(n_q, n_k, d, seed):
    rng = np.random.default_rng(seed)
    out, w = scaled_softmax_attention(
        rng.normal(size=(n_q, d)) * 10,
        rng.normal(size=(n_k, d)) * 10,
        rng.normal(size=(n_k, 3)),
    )
    assert w.shape == (n_q, n_k)
    assert np.allclose(w.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(w >= 0)
    assert out.shape == (n_q, 3)


# ---------------------------------------------------------------------- init


def test_init_is_seeded_and_bounded():
    a = init_conv(np.random.default_rng(5), 4, 3, 2, 1)
    b = init_conv(np.random.default_rng(5), 4, 3, 2, 1)
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.bias, b.bias)
    bound = np.sqrt(1.0 / (3 * 2))
    assert np.all(np.abs(a.weights) <= bound)
    d = init_dense(np.random.default_rng(5), 4, 9)
    assert np.all(np.abs(d.weights) <= np.sqrt(1.0 / 9))
    assert d.weights.shape == (4, 9)
    # Biases are drawn, not zeroed (keeps ReLU pre-activations off the kink).
    assert np.any(a.bias != 0)
    assert np.any(d.bias != 0)
