"""
Unit tests for DenseArray and the psi calculus primitives.
"""

# mypy: ignore-errors

import numpy as np
import pytest

from moa_gemm import (
    DenseArray,
    ElementType,
    IndexVector,
    Layout,
    Shape,
    gamma,
    gamma_inverse,
    gamma_prefix,
    index_vectors,
    iota,
    psi,
    psi_span,
    rav,
    shape_of,
)
from moa_gemm.errors import (
    InvalidIndexError,
    LayoutMismatchError,
    OffsetOutOfRangeError,
    RankError,
    ShapeMismatchError,
    TypeMismatchError,
)
from moa_gemm.helpers import random_shape


class TestDenseArray:
    """Tests for building and reading DenseArrays."""

    def test_from_nested_and_back(self):
        """
        Scenario: Build from nested lists in both layouts

        Expected:
        - Row-major data is the row-by-row flattening
        - Column-major data is the column-by-column flattening
        - to_nested() gives the logical array back either way
        """
        row = DenseArray.from_nested([[1, 2], [3, 4]])
        col = DenseArray.from_nested([[1, 2], [3, 4]], Layout.COL_MAJOR)
        assert row.data.tolist() == [1, 2, 3, 4]
        assert col.data.tolist() == [1, 3, 2, 4]
        assert row.to_nested() == col.to_nested() == [[1, 2], [3, 4]]
        assert row.element is ElementType.I64

    def test_buffer_is_read_only(self):
        """
        Scenario: Try to write into the data buffer

        Expected:
        - numpy refuses the write
        """
        a = DenseArray.from_nested([1.0, 2.0])
        with pytest.raises(ValueError):
            a.data[0] = 5.0

    def test_length_mismatch(self):
        """
        Scenario: Give a buffer shorter than the shape needs

        Expected:
        - ShapeMismatchError
        """
        with pytest.raises(ShapeMismatchError):
            DenseArray(Shape.of(2, 2), np.arange(3))

    def test_from_components_stores_in_layout(self):
        """
        Scenario: Build a column-major array from row-major components

        Expected:
        - Logical content follows the row-major component order
        - Equality distinguishes layouts
        """
        col = DenseArray.from_components([2, 3], range(6), Layout.COL_MAJOR)
        assert col.to_nested() == [[0, 1, 2], [3, 4, 5]]
        assert col.with_layout(Layout.ROW_MAJOR).data.tolist() == list(range(6))
        assert col != col.with_layout(Layout.ROW_MAJOR)

    def test_scalar_and_item(self):
        """
        Scenario: Build a scalar array and read its value

        Expected:
        - item returns the value; item on a vector raises RankError
        """
        assert DenseArray.scalar(7).item == 7
        with pytest.raises(RankError):
            DenseArray.from_nested([1, 2]).item

    def test_lossy_element_type_rejected(self):
        """
        Scenario: Ask for i64 storage of float components

        Expected:
        - TypeMismatchError from every constructor, nothing truncated
        """
        with pytest.raises(TypeMismatchError):
            DenseArray.from_components([2], [1.5, 2.7], element=ElementType.I64)
        with pytest.raises(TypeMismatchError):
            DenseArray.scalar(2.9, ElementType.I64)
        with pytest.raises(TypeMismatchError):
            DenseArray.from_nested([[1.0, 2.0]], element=ElementType.I64)
        with pytest.raises(TypeMismatchError):
            DenseArray(Shape.of(2), np.array([0.5, 1.0]), element=ElementType.I64)

    def test_widening_element_type_allowed(self):
        """
        Scenario: Ask for f64 storage of integer components

        Expected:
        - The components are held as floats with the same values
        - An empty buffer takes any element type
        """
        a = DenseArray.from_components([3], [1, 2, 3], element=ElementType.F64)
        assert a.element is ElementType.F64
        assert a.data.dtype == np.float64
        assert a.data.tolist() == [1.0, 2.0, 3.0]
        empty = DenseArray.from_components([0], [], element=ElementType.I64)
        assert empty.size == 0


class TestShapeOf:
    """Tests for shape_of."""

    def test_examples(self):
        """
        Scenario: Shapes of a scalar, a matrix and an empty vector

        Expected:
        - Scalar: [] with size 1; 3x4 matrix: dim 2; length-0 vector: size 0
        """
        assert shape_of(DenseArray.scalar(1.0)) == Shape()
        assert shape_of(DenseArray.scalar(1.0)).size == 1
        assert shape_of(DenseArray.from_components([3, 4], range(12))).dim == 2
        assert shape_of(DenseArray.from_components([0], [])).size == 0


class TestGamma:
    """Tests for gamma, gamma_inverse and gamma_prefix."""

    def test_examples(self):
        """
        Scenario: Row-major offsets of known indices

        Expected:
        - gamma([], []) = 0, gamma([1,2],[3,4]) = 6, gamma([2,1],[4,3]) = 7
        - column-major mirrors: gamma([1,2],[3,4], col) = 7
        """
        assert gamma([], []) == 0
        assert gamma([1, 2], [3, 4]) == 6
        assert gamma([2, 1], [4, 3]) == 7
        assert gamma([1, 2], [3, 4], Layout.COL_MAJOR) == 7

    def test_matches_gemm_addressing(self):
        """
        Scenario: Compare gamma with i*p + j over a whole matrix

        Expected:
        - Equal at every valid index
        """
        m, p = 4, 3
        for i in range(m):
            for j in range(p):
                assert gamma([i, j], [m, p]) == i * p + j

    def test_invalid_index(self):
        """
        Scenario: Ask for the offset of a prefix and of an out-of-range index

        Expected:
        - InvalidIndexError, also catchable as IndexError
        """
        with pytest.raises(InvalidIndexError):
            gamma([1], [3, 4])
        with pytest.raises(IndexError):
            gamma([3, 0], [3, 4])

    def test_inverse_examples(self):
        """
        Scenario: Invert known offsets

        Expected:
        - 6 in [3,4] is [1,2]; 0 is the all-zeros index
        - Out-of-range offsets raise OffsetOutOfRangeError
        """
        assert gamma_inverse(6, [3, 4]) == IndexVector.of(1, 2)
        assert gamma_inverse(0, [2, 5, 3], Layout.COL_MAJOR) == IndexVector.of(0, 0, 0)
        with pytest.raises(OffsetOutOfRangeError):
            gamma_inverse(12, [3, 4])
        with pytest.raises(OffsetOutOfRangeError):
            gamma_inverse(-1, [3, 4])

    @pytest.mark.parametrize("layout", [Layout.ROW_MAJOR, Layout.COL_MAJOR])
    def test_bijection(self, rng, layout):
        """
        Scenario: Map every index of random shapes through gamma and back

        Expected:
        - Offsets cover [0, size) exactly once
        - gamma_inverse recovers each index
        """
        for _ in range(20):
            s = random_shape(rng)
            offsets = []
            for idx in index_vectors(s):
                offset = gamma(idx, s, layout)
                assert gamma_inverse(offset, s, layout) == idx
                offsets.append(offset)
            assert sorted(offsets) == list(range(s.size))

    def test_prefix(self):
        """
        Scenario: Start offset of a prefix-selected subarray

        Expected:
        - Equals gamma of the zero-padded index
        - Stays defined when the suffix has a zero extent
        """
        assert gamma_prefix([1], [3, 4]) == gamma([1, 0], [3, 4]) == 4
        assert gamma_prefix([], [3, 4]) == 0
        assert gamma_prefix([2], [3, 0]) == 0


class TestRavAndIota:
    """Tests for rav, iota and index_vectors."""

    def test_rav(self):
        """
        Scenario: Flatten a matrix and a scalar

        Expected:
        - Row-major [[1,2],[3,4]] flattens to [1,2,3,4]
        - A scalar becomes a length-1 vector
        - rav is idempotent
        """
        a = DenseArray.from_nested([[1, 2], [3, 4]])
        assert rav(a).to_nested() == [1, 2, 3, 4]
        assert rav(DenseArray.scalar(5)).shape == Shape.of(1)
        assert rav(rav(a)) == rav(a)

    def test_iota_examples(self):
        """
        Scenario: Enumerate indices of small shapes

        Expected:
        - iota([]) holds one empty index
        - iota([2,2]) lists indices in row-major order
        - iota([0]) is empty
        """
        assert iota([]).shape == Shape.of(1, 0)
        assert iota([2, 2]).to_nested() == [[0, 0], [0, 1], [1, 0], [1, 1]]
        assert iota([0]).shape.size == 0
        assert list(index_vectors([])) == [IndexVector()]


class TestPsi:
    """Tests for psi indexing."""

    def test_examples(self):
        """
        Scenario: Index [[1,2],[3,4]] with the empty, a prefix and a full index

        Expected:
        - [] returns the array, [1] the row [3,4], [1,0] the scalar 3
        """
        a = DenseArray.from_nested([[1, 2], [3, 4]])
        assert psi([], a) == a
        assert psi([1], a).to_nested() == [3, 4]
        assert psi([1, 0], a).item == 3
        assert psi([1, 0], a).shape == Shape()

    def test_column_major(self):
        """
        Scenario: Index a column-major array with a prefix

        Expected:
        - The logical row is returned whatever the storage order
        """
        a = DenseArray.from_nested([[1, 2, 3], [4, 5, 6]], Layout.COL_MAJOR)
        assert psi([1], a).to_nested() == [4, 5, 6]
        assert psi([0, 2], a).item == 3

    def test_invalid(self):
        """
        Scenario: Index with an out-of-range or too-long index

        Expected:
        - InvalidIndexError
        """
        a = DenseArray.from_nested([[1, 2], [3, 4]])
        with pytest.raises(InvalidIndexError):
            psi([2], a)
        with pytest.raises(InvalidIndexError):
            psi([0, 0, 0], a)

    def test_prefix_is_contiguous(self, mock_data):
        """
        Scenario: Compare a row-major prefix slice with its buffer span

        Expected:
        - psi_span is [gamma_prefix, gamma_prefix + suffix size)
        - The subarray's data is exactly that slice of the buffer
        - psi_span refuses column-major arrays
        """
        a = mock_data.arange_array((3, 4, 2))
        span = psi_span([2, 1], a)
        assert span == range(gamma_prefix([2, 1], a.shape), gamma_prefix([2, 1], a.shape) + 2)
        assert psi([2, 1], a).data.tolist() == a.data[span.start : span.stop].tolist()
        with pytest.raises(LayoutMismatchError):
            psi_span([0], a.with_layout(Layout.COL_MAJOR))

    @pytest.mark.parametrize("layout", [Layout.ROW_MAJOR, Layout.COL_MAJOR])
    def test_identity_on_random_shapes(self, rng, layout):
        """
        Scenario: Index random arrays at every iota index and reassemble

        Expected:
        - The reassembled array equals the original
        - Each scalar equals rav(a) at the gamma offset
        """
        for _ in range(100):
            s = random_shape(rng)
            values = rng.integers(-50, 50, size=s.size)
            a = DenseArray.from_components(s, values, layout, ElementType.I64)
            parts = []
            for idx in index_vectors(s):
                component = psi(idx, a).item
                assert component == rav(a).data[gamma(idx, s, layout)]
                parts.append(component)
            assert DenseArray.from_components(s, parts, layout, ElementType.I64) == a
