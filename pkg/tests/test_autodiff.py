import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisislens.autodiff import (
    LSTMWeights,
    Tensor,
    add,
    concat,
    conv1d_valid,
    cross_entropy,
    gather_rows,
    hadamard,
    lstm_step,
    matmul,
    relu,
    scale,
    softmax_axis,
    stack_rows,
)
from crisislens.errors import DataError, DimensionError, NumericError


def t(values, grad=False):
    return Tensor(values, requires_grad=grad)


class TestMatmul:
    def test_identity(self):
        m = [[1.5, -2.0], [3.0, 4.5]]
        out = matmul(t(np.eye(2)), t(m))
        np.testing.assert_array_equal(out.data, m)

    def test_direct_evaluation(self):
        out = matmul(t([[1.0, 2.0]]), t([[3.0], [4.0]]))
        np.testing.assert_array_equal(out.data, [[11.0]])

    def test_zero_matrix(self):
        out = matmul(t(np.zeros((2, 3))), t(np.ones((3, 4))))
        np.testing.assert_array_equal(out.data, np.zeros((2, 4)))

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 2\)"):
            matmul(t(np.ones((2, 3))), t(np.ones((2, 2))))

    def test_vector_cases(self):
        a = matmul(t([[1.0, 2.0], [3.0, 4.0]]), t([1.0, 1.0]))
        np.testing.assert_array_equal(a.data, [3.0, 7.0])
        b = matmul(t([1.0, 2.0]), t([3.0, 4.0]))
        assert b.item() == 11.0


class TestElementwise:
    def test_relu_sign_cases(self):
        np.testing.assert_array_equal(relu(t([-1.0, 0.0, 2.0])).data, [0.0, 0.0, 2.0])

    def test_hadamard(self):
        np.testing.assert_array_equal(hadamard(t([1.0, 2.0]), t([3.0, 4.0])).data, [3.0, 8.0])

    def test_add_identity(self):
        x = t([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(add(x, t([0.0, 0.0, 0.0])).data, x.data)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            hadamard(t([1.0, 2.0]), t([1.0, 2.0, 3.0]))
        with pytest.raises(DimensionError):
            add(t([1.0]), t([[1.0]]))

    def test_scale_requires_finite(self):
        with pytest.raises(NumericError):
            scale(t([1.0]), float("inf"))

    def test_relu_gradient_at_zero_is_zero(self):
        x = t([0.0], grad=True)
        relu(x).sum().backward()
        assert x.grad[0] == 0.0


class TestSoftmax:
    def test_symmetry(self):
        out = softmax_axis(t([0.0, 0.0, 0.0]), axis=0)
        np.testing.assert_allclose(out.data, [1 / 3] * 3, atol=1e-12)

    def test_direct_evaluation(self):
        out = softmax_axis(t([0.0, math.log(2.0)]), axis=0)
        np.testing.assert_allclose(out.data, [1 / 3, 2 / 3], atol=1e-12)

    def test_invalid_axis(self):
        with pytest.raises(IndexError):
            softmax_axis(t([1.0, 2.0]), axis=1)

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=6),
        st.floats(-100, 100),
    )
    @settings(max_examples=50, deadline=None)
    def test_sums_to_one_and_shift_invariant(self, values, shift):
        base = softmax_axis(t(values), axis=0)
        assert abs(base.data.sum() - 1.0) <= 1e-9
        assert (base.data > 0).all()
        shifted = softmax_axis(t(np.asarray(values) + shift), axis=0)
        np.testing.assert_allclose(shifted.data, base.data, atol=1e-9)

    def test_extreme_inputs_stay_finite(self):
        out = softmax_axis(t([1e6, -1e6, 0.0]), axis=0)
        assert np.isfinite(out.data).all()


class TestConv1d:
    def test_identity_kernel(self):
        seq = t([[1.0], [2.0], [-3.0]])
        out = conv1d_valid(seq, t([[[1.0]]]), t([0.0]))
        np.testing.assert_array_equal(out.data, seq.data)

    def test_direct_evaluation(self):
        seq = t([[1.0], [2.0], [3.0]])
        kernel = t(np.ones((2, 1, 1)))
        out = conv1d_valid(seq, kernel, t([0.0]))
        np.testing.assert_array_equal(out.data, [[3.0], [5.0]])

    def test_zero_case(self):
        out = conv1d_valid(t(np.zeros((4, 2))), t(np.random.default_rng(0).normal(size=(2, 2, 3))), t(np.zeros(3)))
        np.testing.assert_array_equal(out.data, np.zeros((3, 3)))

    @pytest.mark.parametrize("L", [1, 2, 5])
    def test_output_length(self, L):
        for w in range(1, L + 1):
            out = conv1d_valid(t(np.ones((L, 2))), t(np.ones((w, 2, 1))), t([0.0]))
            assert out.data.shape == (L - w + 1, 1)

    def test_sequence_too_short(self):
        with pytest.raises(DataError, match="too short"):
            conv1d_valid(t(np.ones((1, 2))), t(np.ones((2, 2, 1))), t([0.0]))


class TestLstmStep:
    def _zero_weights(self, d_in, d_h):
        return LSTMWeights(
            w_x=t(np.zeros((d_in, 4 * d_h))),
            w_h=t(np.zeros((d_h, 4 * d_h))),
            bias=t(np.zeros(4 * d_h)),
        )

    def test_zero_case(self):
        w = self._zero_weights(3, 2)
        h, c = lstm_step(t([1.0, 2.0, 3.0]), (t(np.zeros(2)), t(np.zeros(2))), w)
        np.testing.assert_array_equal(h.data, np.zeros(2))
        np.testing.assert_array_equal(c.data, np.zeros(2))

    def test_gate_equations_with_nonzero_cell(self):
        w = self._zero_weights(3, 2)
        c0 = np.array([0.8, -1.2])
        h, c = lstm_step(t([1.0, 2.0, 3.0]), (t(np.zeros(2)), t(c0)), w)
        np.testing.assert_allclose(c.data, 0.5 * c0, atol=1e-12)
        np.testing.assert_allclose(h.data, 0.5 * np.tanh(0.5 * c0), atol=1e-12)

    def test_output_shapes(self):
        w = self._zero_weights(4, 3)
        h, c = lstm_step(t(np.ones(4)), (t(np.zeros(3)), t(np.zeros(3))), w)
        assert h.data.shape == (3,)
        assert c.data.shape == (3,)

    def test_shape_mismatch(self):
        w = self._zero_weights(4, 3)
        with pytest.raises(DimensionError):
            lstm_step(t(np.ones(5)), (t(np.zeros(3)), t(np.zeros(3))), w)


class TestCrossEntropy:
    def test_perfect_prediction(self):
        logits = t([[40.0, 0.0]])
        assert cross_entropy(logits, [0]).item() < 1e-12

    def test_uniform_two_classes(self):
        loss = cross_entropy(t([[0.0, 0.0]]), [1])
        assert abs(loss.item() - math.log(2.0)) < 1e-12

    def test_label_out_of_range(self):
        with pytest.raises(DataError, match="label out of range"):
            cross_entropy(t([[0.0, 0.0]]), [2])

    @given(st.lists(st.lists(st.floats(-30, 30), min_size=3, max_size=3), min_size=1, max_size=5))
    @settings(max_examples=40, deadline=None)
    def test_nonnegative(self, rows):
        loss = cross_entropy(t(rows), [0] * len(rows))
        assert loss.item() >= 0.0

    def test_extreme_logits_stay_finite(self):
        loss = cross_entropy(t([[1e8, -1e8, 0.0]]), [1])
        assert np.isfinite(loss.item())


class TestStructuralOps:
    def test_concat_and_gradient_split(self):
        a = t([[1.0, 2.0]], grad=True)
        b = t([[3.0, 4.0], [5.0, 6.0]], grad=True)
        out = concat([a, b], axis=0)
        assert out.data.shape == (3, 2)
        out.sum().backward()
        np.testing.assert_array_equal(a.grad, np.ones((1, 2)))
        np.testing.assert_array_equal(b.grad, np.ones((2, 2)))

    def test_stack_rows(self):
        rows = [t([1.0, 2.0], grad=True), t([3.0, 4.0], grad=True)]
        out = stack_rows(rows)
        np.testing.assert_array_equal(out.data, [[1.0, 2.0], [3.0, 4.0]])
        (out * t([[1.0, 0.0], [0.0, 1.0]])).sum().backward()
        np.testing.assert_array_equal(rows[0].grad, [1.0, 0.0])
        np.testing.assert_array_equal(rows[1].grad, [0.0, 1.0])

    def test_gather_rows_scatter_adds(self):
        table = t([[1.0, 0.0], [0.0, 1.0]], grad=True)
        out = gather_rows(table, [0, 0, 1])
        assert out.data.shape == (3, 2)
        out.sum().backward()
        np.testing.assert_array_equal(table.grad, [[2.0, 2.0], [1.0, 1.0]])

    def test_gather_rows_out_of_range(self):
        with pytest.raises(DataError, match="out of range"):
            gather_rows(t(np.ones((2, 2))), [2])

    def test_non_finite_leaf_rejected(self):
        with pytest.raises(NumericError):
            Tensor([1.0, float("nan")])
