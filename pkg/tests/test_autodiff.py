import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from structgnn import autodiff as ad
from structgnn.autodiff import AdamState, Tensor, adam_step, grad_check
from structgnn.errors import NonFiniteValue, ShapeMismatch


def _param(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True)


def test_relu_gradient():
    x = Tensor(np.array([[-1.0, 2.0]]), requires_grad=True)
    ad.sum_all(ad.mul(ad.relu(x), np.array([[5.0, 7.0]]))).backward()
    assert x.grad.tolist() == [[0.0, 7.0]]


def test_square_gradient():
    x = Tensor(np.array([[3.0]]), requires_grad=True)
    ad.sum_all(ad.square(x)).backward()
    assert x.grad[0, 0] == 6.0


def test_sqrt_gradient_at_zero_is_zero():
    x = Tensor(np.array([[0.0, 4.0]]), requires_grad=True)
    ad.sum_all(ad.sqrt(x)).backward()
    assert x.grad.tolist() == [[0.0, 0.25]]


def test_shape_errors():
    with pytest.raises(ShapeMismatch):
        ad.matmul(np.ones((2, 3)), np.ones((2, 3)))
    with pytest.raises(ShapeMismatch):
        ad.add(np.ones((2, 3)), np.ones((3, 2)))


@pytest.mark.filterwarnings("ignore:overflow")
def test_non_finite_trips():
    with pytest.raises(NonFiniteValue):
        ad.mul(Tensor(np.array([[1e300]])), np.array([[1e300]]))
    with pytest.raises(NonFiniteValue):
        ad.sqrt(Tensor(np.array([[-1.0]])))


def test_two_layer_network_grad_check():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(6, 4))
    y = rng.normal(size=(6, 1))
    w1, b1, w2, b2 = _param(rng, 4, 5), _param(rng, 1, 5), _param(rng, 5, 1), _param(rng, 1, 1)

    def f():
        h = ad.relu(ad.add(ad.matmul(x, w1), b1))
        out = ad.add(ad.matmul(h, w2), b2)
        return ad.sqrt(ad.mean_all(ad.square(ad.sub(out, y))))

    assert grad_check(f, [w1, b1, w2, b2]) < 1e-6


def test_linear_model_grad_check():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(8, 3))
    y = rng.normal(size=(8, 1))
    w = _param(rng, 3, 1)
    assert grad_check(lambda: ad.sum_all(ad.square(ad.sub(ad.matmul(x, w), y))), [w]) < 1e-8


def test_constant_function_has_zero_gradient():
    w = Tensor(np.ones((2, 2)), requires_grad=True)
    ad.sum_all(ad.mul(w, 0.0)).backward()
    assert not w.grad.any()


def test_segment_and_concat_grad_check():
    rng = np.random.default_rng(2)
    x = _param(rng, 7, 3)
    z = _param(rng, 3, 2)
    seg = np.array([0, 0, 1, 2, 2, 2, 1])
    idx = np.array([6, 0, 3, 3, 1])

    def f():
        a = ad.segment_mean(x, seg, 3)
        b = ad.segment_sum(ad.gather_rows(x, idx), np.array([0, 1, 1, 2, 0]), 3)
        c = ad.concat([a, b, ad.matmul(a, z)])
        return ad.sum_all(ad.square(ad.relu(c))) + ad.mean_all(ad.sum_rows(c)) + ad.mean_all(ad.mean_rows(c))

    assert grad_check(f, [x, z]) < 1e-6


def test_mean_rows_conserves_gradient():
    x = Tensor(np.ones((4, 3)), requires_grad=True)
    ad.sum_all(ad.mul(ad.mean_rows(x), np.array([[1.0, 2.0, 3.0]]))).backward()
    np.testing.assert_allclose(x.grad, np.tile([0.25, 0.5, 0.75], (4, 1)))
    np.testing.assert_allclose(x.grad.sum(axis=0), [1.0, 2.0, 3.0])


def test_backward_visits_shared_nodes_once():
    x = Tensor(np.array([[2.0]]), requires_grad=True)
    y = ad.mul(x, x)
    z = ad.add(y, y)
    z.backward()
    assert x.grad[0, 0] == 8.0


def test_no_grad_builds_no_tape():
    x = Tensor(np.ones((1, 1)), requires_grad=True)
    with ad.no_grad():
        y = ad.mul(x, 2.0)
    assert not y.requires_grad


def test_adam_zero_gradient_leaves_params():
    p = np.array([1.0, -2.0])
    adam_step([p], [np.zeros(2)], AdamState(lr=0.1))
    assert p.tolist() == [1.0, -2.0]


def test_adam_first_step_is_sign_step():
    p = np.array([0.0, 0.0])
    g = np.array([3.0, -0.5])
    adam_step([p], [g], AdamState(lr=0.01))
    np.testing.assert_allclose(p, -0.01 * g / (np.abs(g) + 1e-8), rtol=1e-12)
    np.testing.assert_allclose(p, [-0.01, 0.01], rtol=1e-7)


def test_adam_steps_with_fixed_gradient_are_similar():
    p = np.array([0.0])
    state = AdamState(lr=0.01)
    g = np.array([1.5])
    adam_step([p], [g], state)
    first = -p[0]
    adam_step([p], [g], state)
    second = -p[0] - first
    assert abs(second - first) / first < 0.01


def test_adam_rejects_non_finite():
    with pytest.raises(NonFiniteValue):
        adam_step([np.zeros(1)], [np.array([np.nan])], AdamState())


def test_adam_small_lr_decreases_loss():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(1, 4))
    w = Tensor(rng.normal(size=(4, 1)), requires_grad=True)

    def loss():
        return ad.sum_all(ad.square(ad.sub(ad.matmul(x, w), 1.0)))

    before = loss()
    before.backward()
    opt = ad.Adam([w], lr=1e-5)
    opt.step()
    assert loss().item() < before.item()


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (3, 4), elements=st.floats(-10, 10)), arrays(np.float64, (1, 4), elements=st.floats(-10, 10)))
def test_broadcast_add_gradients(a, b):
    ta, tb = Tensor(a, requires_grad=True), Tensor(b, requires_grad=True)
    ad.sum_all(ad.add(ta, tb)).backward()
    assert np.all(ta.grad == 1.0)
    assert np.all(tb.grad == 3.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_matmul_grad_random_shapes(n, m, seed):
    rng = np.random.default_rng(seed)
    a = _param(rng, n, m)
    b = _param(rng, m, 2)
    assert grad_check(lambda: ad.sum_all(ad.square(ad.matmul(a, b))), [a, b]) < 1e-6
