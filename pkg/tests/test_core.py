import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lextensor import (
    CapacityError,
    DenseTensor,
    ModeError,
    ShapeError,
    TensorIndexError,
    classic_vec,
    classic_vec_permutation,
    dematricize,
    kron,
    linear_index,
    matricize,
    matricize_oracle,
    multi_index,
    outer,
    permute_modes,
    unvec,
    vec,
)

CUBE = DenseTensor(np.arange(1, 9), (2, 2, 2))


def unfold_by_loops(arr, mode):
    """Brute-force unfolding: column = lexicographic rank of the other indices."""
    shape = arr.shape
    rest = [n for j, n in enumerate(shape) if j != mode]
    out = np.empty((shape[mode], math.prod(rest)))
    for idx in itertools.product(*(range(n) for n in shape)):
        others = [i for j, i in enumerate(idx) if j != mode]
        col = 0
        for i, n in zip(others, rest):
            col = col * n + i
        out[idx[mode], col] = arr[idx]
    return out


shapes = st.lists(st.integers(1, 6), min_size=1, max_size=5)


class TestLinearIndex:
    def test_caption_example(self):
        # 1-based (i, j, k) = (2, 1, 2) in a 2x2x2 array sits at (i-1)JK + (j-1)K + k = 6
        assert linear_index((2, 2, 2), (1, 0, 1)) + 1 == 6

    def test_order_one(self):
        assert [linear_index((7,), (i,)) for i in range(7)] == list(range(7))

    def test_enumeration_is_lexicographic(self):
        shape = (2, 3, 4)
        offsets = [linear_index(shape, idx) for idx in itertools.product(range(2), range(3), range(4))]
        assert offsets == list(range(24))

    def test_out_of_range_names_mode(self):
        with pytest.raises(TensorIndexError, match="mode 1"):
            linear_index((2, 3), (0, 3))
        with pytest.raises(TensorIndexError):
            linear_index((2, 3), (0,))

    @pytest.mark.parametrize(
        "shape, offset, expected",
        [((2, 2, 2), 0, (0, 0, 0)), ((2, 2, 2), 5, (1, 0, 1)), ((4,), 3, (3,))],
    )
    def test_multi_index(self, shape, offset, expected):
        assert multi_index(shape, offset) == expected

    def test_multi_index_range(self):
        with pytest.raises(TensorIndexError):
            multi_index((2, 2), 4)
        with pytest.raises(TensorIndexError):
            multi_index((2, 2), -1)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 7), min_size=1, max_size=4).filter(lambda s: math.prod(s) <= 10_000))
    def test_bijection(self, shape):
        total = math.prod(shape)
        for o in range(total):
            assert linear_index(shape, multi_index(shape, o)) == o


class TestDenseTensor:
    def test_rejects_bad_shapes(self):
        with pytest.raises(ShapeError):
            DenseTensor([1.0], ())
        with pytest.raises(ShapeError):
            DenseTensor([], (0,))
        with pytest.raises(ShapeError):
            DenseTensor([1.0, 2.0], (3,))

    def test_capacity(self):
        with pytest.raises(CapacityError):
            DenseTensor.zeros((2**40, 2**40))

    def test_immutable(self):
        with pytest.raises(ValueError):
            CUBE.data[0] = 5.0
        with pytest.raises(ValueError):
            CUBE.array[0, 0, 0] = 5.0

    def test_getitem(self):
        assert CUBE[0, 0, 0] == 1.0
        assert CUBE[1, 1, 1] == 8.0
        assert DenseTensor([4.0, 5.0], (2,))[1] == 5.0


class TestVec:
    def test_layout_identity(self):
        assert vec(CUBE).tolist() == [1, 2, 3, 4, 5, 6, 7, 8]

    def test_outer_is_kron(self):
        assert vec(outer([1, 2], [3, 4])).tolist() == [3, 4, 6, 8]
        assert vec(outer([1, 2], [3, 4])).tolist() == kron(np.array([1.0, 2]), np.array([3.0, 4])).tolist()

    def test_order_one(self):
        assert vec(DenseTensor([3.0, 1.0, 2.0], (3,))).tolist() == [3, 1, 2]

    def test_unvec(self):
        t = unvec(np.arange(1, 9), (2, 2, 2))
        assert t[0, 0, 0] == 1 and t[1, 1, 1] == 8 and t[0, 1, 0] == 3
        assert unvec(np.array([[1.0], [2.0]]), (2,)) == DenseTensor([1.0, 2.0], (2,))
        with pytest.raises(ShapeError):
            unvec(np.arange(7), (2, 2, 2))

    @settings(max_examples=50, deadline=None)
    @given(shapes, st.integers(0, 2**32 - 1))
    def test_vec_unvec_round_trip(self, shape, seed):
        t = DenseTensor(np.random.default_rng(seed).standard_normal(math.prod(shape)), shape)
        assert unvec(vec(t), shape) == t

    def test_rank_one_vec_is_kron_in_order(self):
        rng = np.random.default_rng(3)
        vs = [rng.standard_normal(n) for n in (2, 3, 4, 2)]
        np.testing.assert_array_equal(vec(outer(*vs)), kron(*vs))


class TestMatricize:
    def test_mode_one(self):
        assert matricize(CUBE, 0).tolist() == [[1, 2, 3, 4], [5, 6, 7, 8]]

    def test_modes_two_three(self):
        assert matricize(CUBE, 1).tolist() == [[1, 2, 5, 6], [3, 4, 7, 8]]
        assert matricize(CUBE, 2).tolist() == [[1, 3, 5, 7], [2, 4, 6, 8]]

    def test_against_loop_oracle(self):
        arr = np.random.default_rng(0).standard_normal((2, 3, 4, 5))
        for mode in range(4):
            np.testing.assert_array_equal(matricize(arr, mode), unfold_by_loops(arr, mode))

    def test_rank_one(self):
        a, b, c = np.array([1.0, 2]), np.array([3.0, -1, 2]), np.array([0.5, 4])
        np.testing.assert_array_equal(matricize(outer(a, b, c), 0), np.outer(a, kron(b, c)))

    def test_order_two(self):
        m = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(matricize(m, 0), m)
        np.testing.assert_array_equal(matricize(m, 1), m.T)

    def test_order_one(self):
        assert matricize(DenseTensor([1.0, 2.0, 3.0], (3,)), 0).shape == (3, 1)

    def test_mode_range(self):
        with pytest.raises(ModeError):
            matricize(CUBE, 3)
        with pytest.raises(ModeError):
            matricize_oracle(CUBE, -1)

    def test_dematricize(self):
        assert dematricize([[1, 2, 5, 6], [3, 4, 7, 8]], 1, (2, 2, 2)) == CUBE
        m = np.arange(6.0).reshape(2, 3)
        assert dematricize(m, 0, (2, 3)) == DenseTensor.from_array(m)
        with pytest.raises(ShapeError):
            dematricize(np.zeros((2, 3)), 1, (2, 2, 2))

    def test_round_trip_345(self):
        t = DenseTensor.from_array(np.random.default_rng(1).standard_normal((3, 4, 5)))
        for mode in range(3):
            assert dematricize(matricize(t, mode), mode, t.shape) == t

    @settings(max_examples=60, deadline=None)
    @given(shapes, st.data())
    def test_round_trip_property(self, shape, data):
        mode = data.draw(st.integers(0, len(shape) - 1))
        t = DenseTensor(np.random.default_rng(len(shape)).standard_normal(math.prod(shape)), shape)
        assert dematricize(matricize(t, mode), mode, shape) == t


class TestOracle:
    def test_cube_mode_one(self):
        # by hand: permute to (1, 3, 2), then fill a 2x4 matrix column by column
        assert matricize_oracle(CUBE, 0).tolist() == [[1, 2, 3, 4], [5, 6, 7, 8]]

    def test_order_two(self):
        m = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(matricize_oracle(m, 0), m)

    @pytest.mark.parametrize("shape", [(2, 3, 4), (5, 1, 3), (1, 1, 1), (3, 2, 2, 2), (2, 3, 1, 2, 3)])
    def test_agrees_with_matricize(self, shape):
        t = DenseTensor.from_array(np.random.default_rng(2).standard_normal(shape))
        for mode in range(len(shape)):
            np.testing.assert_array_equal(matricize_oracle(t, mode), matricize(t, mode))


class TestPermute:
    def test_identity(self):
        assert permute_modes(CUBE, (0, 1, 2)) == CUBE

    def test_transpose(self):
        m = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(permute_modes(m, (1, 0)).array, m.T)

    def test_index_relation(self):
        arr = np.random.default_rng(4).standard_normal((2, 3, 4))
        perm = (2, 0, 1)
        out = permute_modes(arr, perm)
        assert out.shape == (4, 2, 3)
        rng = np.random.default_rng(5)
        for _ in range(5):
            i = tuple(int(rng.integers(n)) for n in arr.shape)
            assert out[tuple(i[p] for p in perm)] == arr[i]

    def test_inverse(self):
        t = DenseTensor.from_array(np.random.default_rng(6).standard_normal((2, 3, 4, 5)))
        perm = (3, 1, 0, 2)
        assert permute_modes(permute_modes(t, perm), np.argsort(perm)) == t

    def test_not_a_permutation(self):
        with pytest.raises(ValueError):
            permute_modes(CUBE, (0, 0, 1))


class TestClassicVec:
    def test_matrix(self):
        m = DenseTensor([1.0, 2.0, 3.0, 4.0], (2, 2))
        assert vec(m).tolist() == [1, 2, 3, 4]
        assert classic_vec(m).tolist() == [1, 3, 2, 4]
        assert classic_vec_permutation((2, 2)).tolist() == [0, 2, 1, 3]

    def test_order_one(self):
        assert classic_vec_permutation((5,)).tolist() == list(range(5))

    def test_cube_both_captions(self):
        perm = classic_vec_permutation((2, 2, 2))
        I = J = K = 2
        for i, j, k in itertools.product(range(1, 3), repeat=3):
            lex = (i - 1) * J * K + (j - 1) * K + k
            col = (k - 1) * I * J + (j - 1) * I + i
            assert perm[col - 1] == lex - 1

    @pytest.mark.parametrize("shape", [(3,), (2, 5), (2, 3, 4), (3, 1, 2, 2)])
    def test_matches_fortran_order(self, shape):
        arr = np.random.default_rng(7).standard_normal(shape)
        np.testing.assert_array_equal(classic_vec(arr), arr.ravel(order="F"))
