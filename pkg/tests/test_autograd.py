import numpy as np
import pytest

from turknlp.errors import ShapeError
from turknlp.nn import autograd as ag
from turknlp.nn import core as nc
from turknlp.nn.autograd import Tensor, no_grad


def fd_check(build, shapes, seed, tol=1e-6):
    """build(params) -> scalar Tensor; params filled uniform(-1, 1)."""
    rng = np.random.default_rng(seed)
    params = [Tensor(rng.uniform(-1.0, 1.0, size=s), requires_grad=True)
              for s in shapes]
    err = nc.gradient_check(build, params)
    assert err < tol, err


class TestElementwise:
    def test_add_sub_mul_values(self):
        a = Tensor(np.array([1.0, 2.0]))
        b = Tensor(np.array([3.0, 5.0]))
        np.testing.assert_allclose(ag.add(a, b).data, [4.0, 7.0])
        np.testing.assert_allclose(ag.sub(a, b).data, [-2.0, -3.0])
        np.testing.assert_allclose(ag.mul(a, b).data, [3.0, 10.0])
        np.testing.assert_allclose(ag.scale(a, -2.0).data, [-2.0, -4.0])

    def test_gradients(self):
        fd_check(lambda ps: ag.vsum(ag.mul(ag.add(ps[0], ps[1]),
                                           ag.sub(ps[0], 0.5))),
                 [(4,), (4,)], seed=1)

    def test_constant_operand(self):
        fd_check(lambda ps: ag.vsum(ag.add(ps[0], 3.0)), [(3,)], seed=2)

    def test_activations_gradients(self):
        fd_check(lambda ps: ag.vsum(ag.sigmoid(ps[0])), [(5,)], seed=3)
        fd_check(lambda ps: ag.vsum(ag.tanh(ps[0])), [(5,)], seed=4)
        fd_check(lambda ps: ag.vsum(ag.mul(ag.softmax(ps[0]), np.arange(5.0))),
                 [(5,)], seed=5)

    def test_relu_values(self):
        x = Tensor(np.array([-1.0, 0.0, 2.0]))
        np.testing.assert_allclose(ag.relu(x).data, [0.0, 0.0, 2.0])

    def test_softmax_normalizes(self):
        out = ag.softmax(Tensor(np.array([1.0, 2.0, 3.0])))
        assert abs(out.data.sum() - 1.0) < 1e-12
        # shift invariance
        shifted = ag.softmax(Tensor(np.array([101.0, 102.0, 103.0])))
        np.testing.assert_allclose(out.data, shifted.data, atol=1e-12)


class TestLinear:
    def test_matvec_value(self):
        w = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
        x = Tensor(np.array([5.0, 6.0]))
        np.testing.assert_allclose(ag.matvec(w, x).data, [17.0, 39.0])

    def test_matvec_gradients(self):
        fd_check(lambda ps: ag.vsum(ag.tanh(ag.matvec(ps[0], ps[1]))),
                 [(3, 4), (4,)], seed=6)

    def test_dot_value_and_shape(self):
        a = Tensor(np.array([1.0, 2.0, 3.0]))
        b = Tensor(np.array([4.0, 5.0, 6.0]))
        out = ag.dot(a, b)
        assert out.ndim == 0
        assert float(out.data) == 32.0

    def test_dot_gradients(self):
        fd_check(lambda ps: ag.dot(ag.sigmoid(ps[0]), ps[1]), [(4,), (4,)], seed=7)

    def test_dot_mismatch(self):
        with pytest.raises(ShapeError):
            ag.dot(Tensor(np.zeros(2)), Tensor(np.zeros(3)))


class TestAggregation:
    def test_concat_value(self):
        out = ag.concat([Tensor(np.array([1.0])), Tensor(np.array([2.0, 3.0]))])
        np.testing.assert_allclose(out.data, [1.0, 2.0, 3.0])

    def test_concat_gradients(self):
        fd_check(lambda ps: ag.vsum(ag.tanh(ag.concat([ps[0], ps[1]]))),
                 [(2,), (3,)], seed=8)

    def test_concat_rejects_scalars(self):
        with pytest.raises(ShapeError):
            ag.concat([ag.dot(Tensor(np.ones(2)), Tensor(np.ones(2)))])

    def test_sum_mean_vectors(self):
        vs = [Tensor(np.array([1.0, 2.0])), Tensor(np.array([3.0, 4.0]))]
        np.testing.assert_allclose(ag.sum_vectors(vs).data, [4.0, 6.0])
        np.testing.assert_allclose(ag.mean_vectors(vs).data, [2.0, 3.0])
        fd_check(lambda ps: ag.vsum(ag.mean_vectors([ps[0], ps[1], ps[0]])),
                 [(3,), (3,)], seed=9)

    def test_stack_scalars(self):
        scalars = [ag.dot(Tensor(np.ones(2)), Tensor(np.full(2, v)))
                   for v in (1.0, 2.0)]
        np.testing.assert_allclose(ag.stack_scalars(scalars).data, [2.0, 4.0])
        fd_check(lambda ps: ag.vsum(ag.mul(ag.softmax(ag.stack_scalars(
            [ag.dot(ps[0], ps[1]), ag.dot(ps[0], ps[0])])), np.array([1.0, 3.0]))),
            [(3,), (3,)], seed=10)

    def test_stack_scalars_rejects_vectors(self):
        with pytest.raises(ShapeError):
            ag.stack_scalars([Tensor(np.zeros(2))])

    def test_take_row(self):
        m = Tensor(np.arange(6.0).reshape(3, 2), requires_grad=True)
        row = ag.take_row(m, 2)
        np.testing.assert_allclose(row.data, [4.0, 5.0])
        ag.backward(ag.vsum(row))
        np.testing.assert_allclose(m.grad, [[0, 0], [0, 0], [1, 1]])

    def test_take_row_bounds(self):
        with pytest.raises(ShapeError):
            ag.take_row(Tensor(np.zeros((2, 2))), 5)


class TestGraph:
    def test_shared_node_accumulates(self):
        x = Tensor(np.array([3.0]), requires_grad=True)
        y = ag.vsum(ag.mul(x, x))
        ag.backward(y)
        np.testing.assert_allclose(x.grad, [6.0])

    def test_diamond(self):
        x = Tensor(np.array([0.3, -0.2]), requires_grad=True)
        left = ag.sigmoid(x)
        right = ag.tanh(x)
        out = ag.vsum(ag.mul(left, right))
        ag.backward(out)
        fd = np.zeros(2)
        with no_grad():
            for i in range(2):
                for sign in (1, -1):
                    x.data[i] += sign * 1e-6
                    v = float(ag.vsum(ag.mul(ag.sigmoid(x), ag.tanh(x))).data)
                    fd[i] += sign * v / 2e-6
                    x.data[i] -= sign * 1e-6
        np.testing.assert_allclose(x.grad, fd, rtol=1e-5)

    def test_no_grad_blocks_tracking(self):
        x = Tensor(np.ones(2), requires_grad=True)
        with no_grad():
            y = ag.sigmoid(x)
        assert not y._needs
        assert y._parents == ()

    def test_backward_needs_scalar_or_accepts_vector(self):
        x = Tensor(np.ones(3), requires_grad=True)
        out = ag.vsum(ag.tanh(x))
        ag.backward(out)
        assert x.grad.shape == (3,)
