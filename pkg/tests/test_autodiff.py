import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdparse.autodiff import (
    Adam, AdamState, AutodiffError, BiLSTM, LSTM, MLP, Embedding, ShapeError, Tape, Tensor,
    adam_update, lstm_step, ops,
)
from tdparse.autodiff.gradcheck import check_gradients, relative_error


def param(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True)


# --- forward values -------------------------------------------------------

def test_matvec_hand_arithmetic():
    out = ops.matvec(Tensor([[1, 2], [3, 4]]), Tensor([1, 1]))
    np.testing.assert_array_equal(out.data, [3, 7])


def test_activation_fixed_points():
    np.testing.assert_array_equal(ops.tanh(Tensor([0.0, 0.0])).data, [0.0, 0.0])
    np.testing.assert_array_equal(ops.sigmoid(Tensor([0.0])).data, [0.5])


def test_softmax_symmetric():
    np.testing.assert_allclose(ops.softmax(Tensor([1.0, 1.0, 1.0])).data, [1 / 3] * 3, rtol=0, atol=1e-15)


def test_shape_mismatch_names_both_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2,\)"):
        ops.matvec(Tensor(np.zeros((2, 3))), Tensor([1.0, 2.0]))
    with pytest.raises(ShapeError):
        ops.add(Tensor(np.zeros(3)), Tensor(np.zeros(4)))


@pytest.mark.parametrize("scores,gold,expected", [
    ([0.0, 0.0], 0, math.log(2)),
    # log(1 + e^-20) from the log1p reference
    ([10.0, -10.0], 0, 2.061153620314381e-09),
    ([3.7], 0, 0.0),
    ([-120.0], 0, 0.0),
])
def test_cross_entropy_values(scores, gold, expected):
    loss = ops.cross_entropy(Tensor(scores), gold).item()
    assert loss == pytest.approx(expected, rel=1e-9, abs=1e-15)


def test_cross_entropy_gold_out_of_range():
    with pytest.raises(IndexError):
        ops.cross_entropy(Tensor([0.0, 1.0]), 2)


def test_cross_entropy_gradient_is_softmax_minus_onehot():
    s = Tensor([0.0, 0.0], requires_grad=True)
    with Tape() as tape:
        tape.backward(ops.cross_entropy(s, 0))
    np.testing.assert_allclose(s.grad, [-0.5, 0.5])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=12))
def test_softmax_properties(values):
    p = ops.softmax(Tensor(values)).data
    assert abs(p.sum() - 1.0) < 1e-9
    assert np.all(p > 0) and np.all(p <= 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-30, 30), min_size=1, max_size=8), st.data())
def test_cross_entropy_nonnegative(values, data):
    gold = data.draw(st.integers(0, len(values) - 1))
    assert ops.cross_entropy(Tensor(values), gold).item() >= 0.0


# --- tape mechanics -------------------------------------------------------

def test_backward_without_forward_is_fatal():
    with Tape() as tape:
        with pytest.raises(AutodiffError):
            tape.backward(Tensor([1.0]))


def test_backward_clears_tape():
    w = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as tape:
        loss = ops.cross_entropy(w, 1)
        tape.backward(loss)
        assert tape.nodes == []
        with pytest.raises(AutodiffError):
            tape.backward(loss)


def test_no_tape_means_no_recording():
    w = Tensor([1.0], requires_grad=True)
    out = ops.tanh(w)
    assert not out.requires_grad


def test_unused_embedding_rows_get_exact_zero_gradient():
    emb = Embedding(np.random.default_rng(0), 6, 3)
    with Tape() as tape:
        rows = emb([1, 3, 3])
        tape.backward(ops.cross_entropy(ops.reduce_sum(rows, axis=0), 2))
    assert np.all(emb.weight.grad[[0, 2, 4, 5]] == 0.0)
    assert np.any(emb.weight.grad[3] != 0.0)


# --- gradient checks on every primitive ------------------------------------

def _head(x):
    # Fixed random projection to a scalar loss so every output entry matters.
    flat = ops.reshape(x, (int(np.prod(x.shape)),))
    proj = Tensor(np.random.default_rng(99).normal(size=(3, flat.shape[0])))
    return ops.cross_entropy(ops.matvec(proj, flat), 1)


PRIMITIVE_CASES = {
    "matvec": (lambda p: ops.matvec(p["a"], p["v"]), {"a": (3, 4), "v": (4,)}),
    "matmul": (lambda p: ops.matmul(p["a"], p["b"]), {"a": (2, 3), "b": (3, 4)}),
    "add_broadcast": (lambda p: ops.add(p["a"], p["b"]), {"a": (3, 4), "b": (4,)}),
    "mul_broadcast": (lambda p: ops.mul(p["a"], p["b"]), {"a": (3, 4), "b": (3, 1)}),
    "tanh": (lambda p: ops.tanh(p["a"]), {"a": (5,)}),
    "sigmoid": (lambda p: ops.sigmoid(p["a"]), {"a": (5,)}),
    "concat": (lambda p: ops.concat([p["a"], p["b"]], axis=1), {"a": (2, 3), "b": (2, 2)}),
    "add_n": (lambda p: ops.add_n([p["a"], p["b"], p["a"]]), {"a": (4,), "b": (4,)}),
    "reduce_sum": (lambda p: ops.reduce_sum(p["a"], axis=0), {"a": (3, 4)}),
    "softmax": (lambda p: ops.softmax(p["a"]), {"a": (5,)}),
    "masked_softmax": (lambda p: ops.softmax(p["a"], axis=1, mask=np.array(
        [[1, 1, 0, 1], [0, 1, 1, 0], [1, 0, 0, 0]], bool)), {"a": (3, 4)}),
    "lookup": (lambda p: ops.lookup(p["e"], [2, 0, 2]), {"e": (4, 3)}),
    "take": (lambda p: p["a"][1:4], {"a": (6,)}),
    "reshape": (lambda p: ops.reshape(p["a"], (6, 2)), {"a": (3, 4)}),
    "cross_entropy": (lambda p: ops.cross_entropy(p["a"], 2), {"a": (5,)}),
    "cross_entropy_rows": (lambda p: ops.cross_entropy_rows(p["a"], [0, 3, 3]), {"a": (3, 4)}),
    "lstm_forward": (lambda p: ops.lstm_sequence(p["x"], p["w"], p["b"]), {"x": (4, 3), "w": (8, 5), "b": (8,)}),
    "lstm_reverse": (lambda p: ops.lstm_sequence(p["x"], p["w"], p["b"], reverse=True),
                     {"x": (4, 3), "w": (8, 5), "b": (8,)}),
}


@pytest.mark.parametrize("name", sorted(PRIMITIVE_CASES))
def test_primitive_gradients_match_finite_differences(name):
    fn, shapes = PRIMITIVE_CASES[name]
    rng = np.random.default_rng(7)
    params = {k: Tensor(rng.normal(scale=0.7, size=s), requires_grad=True) for k, s in shapes.items()}
    errors = check_gradients(lambda: _head(fn(params)), params, eps=1e-3)
    assert max(errors.values()) < 1e-4, errors


def test_cross_entropy_rows_gradient():
    rng = np.random.default_rng(3)
    s = param(rng, 4, 5)
    errors = check_gradients(lambda: ops.cross_entropy_rows(s, [0, 4, 2, 2]), {"s": s})
    assert errors["s"] < 1e-4


def test_relative_error_zero_when_both_vanish():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0


# --- LSTM ----------------------------------------------------------------

def _oracle_lstm_step(x, h_prev, c_prev, W, b):
    h = len(h_prev)
    z = W @ np.concatenate([x, h_prev]) + b
    sig = lambda v: 1.0 / (1.0 + np.exp(-v))
    i, f, g, o = sig(z[:h]), sig(z[h:2 * h]), np.tanh(z[2 * h:3 * h]), sig(z[3 * h:])
    c = f * c_prev + i * g
    return o * np.tanh(c), c


def test_lstm_step_zero_weights():
    h, c = lstm_step(Tensor(np.zeros(3)), Tensor(np.zeros(2)), Tensor(np.zeros(2)),
                     Tensor(np.zeros((8, 5))), Tensor(np.zeros(8)))
    np.testing.assert_array_equal(h.data, 0.0)
    b = np.zeros(8)
    b[2:4] = 1.0
    h, c = lstm_step(Tensor(np.zeros(3)), Tensor(np.zeros(2)), Tensor(np.zeros(2)),
                     Tensor(np.zeros((8, 5))), Tensor(b))
    np.testing.assert_array_equal(h.data, 0.0)


def test_lstm_step_matches_hand_rolled_oracle():
    rng = np.random.default_rng(42)
    x, hp, cp = rng.normal(size=3), rng.normal(size=4), rng.normal(size=4)
    W, b = rng.normal(size=(16, 7)), rng.normal(size=16)
    h, c = lstm_step(Tensor(x), Tensor(hp), Tensor(cp), Tensor(W), Tensor(b))
    h_ref, c_ref = _oracle_lstm_step(x, hp, cp, W, b)
    np.testing.assert_allclose(h.data, h_ref, rtol=1e-12)
    np.testing.assert_allclose(c.data, c_ref, rtol=1e-12)


def test_fused_sequence_matches_stepwise_oracle():
    rng = np.random.default_rng(5)
    lstm = LSTM(rng, 3, 4)
    X = rng.normal(size=(6, 3))
    H = lstm(Tensor(X)).data
    h, c = np.zeros(4), np.zeros(4)
    for t in range(6):
        h, c = _oracle_lstm_step(X[t], h, c, lstm.weight.data, lstm.bias.data)
        np.testing.assert_allclose(H[t], h, rtol=1e-12)
    Hr = lstm(Tensor(X), reverse=True).data
    h, c = np.zeros(4), np.zeros(4)
    for t in reversed(range(6)):
        h, c = _oracle_lstm_step(X[t], h, c, lstm.weight.data, lstm.bias.data)
        np.testing.assert_allclose(Hr[t], h, rtol=1e-12)


def test_lstm_forget_bias_initialised_to_one():
    lstm = LSTM(np.random.default_rng(0), 3, 4)
    np.testing.assert_array_equal(lstm.bias.data[4:8], 1.0)
    np.testing.assert_array_equal(lstm.bias.data[:4], 0.0)


def test_bilstm_length_one():
    bi = BiLSTM(np.random.default_rng(1), 3, 6)
    out = bi(Tensor(np.ones((1, 3))))
    assert out.shape == (1, 6)


def test_bilstm_palindrome_with_tied_weights():
    rng = np.random.default_rng(11)
    bi = BiLSTM(rng, 2, 6)
    bi.backward.weight.data[...] = bi.forward.weight.data
    bi.backward.bias.data[...] = bi.forward.bias.data
    a, b = rng.normal(size=2), rng.normal(size=2)
    out = bi(Tensor(np.stack([a, b, a]))).data
    for k in range(3):
        np.testing.assert_allclose(out[k, :3], out[2 - k, 3:], rtol=1e-12)


def test_bilstm_zero_weights_give_zero_outputs():
    bi = BiLSTM(np.random.default_rng(1), 3, 4)
    for p in bi.parameters():
        p.data[...] = 0.0
    out = bi(Tensor(np.random.default_rng(2).normal(size=(5, 3))))
    np.testing.assert_array_equal(out.data, 0.0)


def test_bilstm_rejects_empty_and_odd():
    bi = BiLSTM(np.random.default_rng(1), 3, 4)
    with pytest.raises(ShapeError):
        bi(Tensor(np.zeros((0, 3))))
    with pytest.raises(ValueError):
        BiLSTM(np.random.default_rng(1), 3, 5)


def test_bilstm_mlp_stack_gradients():
    rng = np.random.default_rng(8)
    bi = BiLSTM(rng, 3, 4)
    mlp = MLP(rng, 4, 5, 3)
    x = Tensor(rng.normal(size=(3, 3)), requires_grad=True)
    params = dict(bi.named_parameters("bi.")) | dict(mlp.named_parameters("mlp.")) | {"x": x}
    errors = check_gradients(lambda: ops.cross_entropy_rows(mlp(bi(x)), [0, 2, 1]), params)
    assert max(errors.values()) < 1e-4, errors


# --- Adam ----------------------------------------------------------------

def test_adam_zero_gradient_leaves_params():
    p = np.array([1.0, -2.0])
    state = AdamState()
    adam_update([p], [np.zeros(2)], state)
    np.testing.assert_array_equal(p, [1.0, -2.0])
    assert state.step == 1


def test_adam_first_step_moves_by_learning_rate():
    p = np.array([0.5, 0.5, 0.5])
    adam_update([p], [np.array([3.0, -0.2, 1e-3])], AdamState())
    np.testing.assert_allclose(p, [0.5 - 0.001, 0.5 + 0.001, 0.5 - 0.001], rtol=0, atol=1e-8)


def _scalar_adam_trace(theta, grads, lr=0.001, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        theta = theta - lr * (m / (1 - b1 ** t)) / (math.sqrt(v / (1 - b2 ** t)) + eps)
    return theta


def test_adam_two_steps_match_reference_trace():
    p = np.array([0.3, -1.2])
    w = Tensor(p.copy(), requires_grad=True)
    opt = Adam([w])
    grads = [np.array([0.4, -2.0]), np.array([0.4, -2.0])]
    for g in grads:
        w.grad[...] = g
        opt.step()
    expected = [_scalar_adam_trace(p[k], [g[k] for g in grads]) for k in range(2)]
    np.testing.assert_allclose(w.data, expected, rtol=1e-14)
    assert opt.state.step == 2


def test_training_is_bit_deterministic():
    def run():
        rng = np.random.default_rng(123)
        mlp = MLP(rng, 4, 6, 3)
        opt = Adam(mlp.parameters())
        data = np.random.default_rng(9).normal(size=(20, 4))
        for row in data:
            opt.zero_grad()
            with Tape() as tape:
                tape.backward(ops.cross_entropy_rows(mlp(Tensor(row[None, :])), [int(row[0] > 0)]))
            opt.step()
        return mlp.state_dict()

    a, b = run(), run()
    for k in a:
        assert a[k].tobytes() == b[k].tobytes()
