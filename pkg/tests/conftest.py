"""
Pytest configuration and shared fixtures.
"""

# mypy: ignore-errors

from pathlib import Path

import numpy as np
import pytest

from moa_gemm import AccessLog, DenseArray, HardwareShape, Layout
from moa_gemm.helpers import random_integer_matrix

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def rng():
    """
    Fixture for a seeded random generator.

    Returns:
        numpy.random.Generator: Generator seeded with 1234
    """
    return np.random.default_rng(1234)


@pytest.fixture
def empty_log():
    """
    Fixture for an empty AccessLog.

    Returns:
        AccessLog: Empty log ready for use
    """
    return AccessLog()


@pytest.fixture
def small_pair():
    """
    Fixture for the 2x2 example operands.

    Returns:
        tuple: (A, B) with A = [[1, 2], [3, 4]] and B = [[5, 6], [7, 8]]
    """
    return (
        DenseArray.from_nested([[1, 2], [3, 4]]),
        DenseArray.from_nested([[5, 6], [7, 8]]),
    )


@pytest.fixture
def rect_pair(rng):
    """
    Fixture for random integer operands of shapes [3, 4] and [4, 5].

    Returns:
        tuple: (A, B) row-major I64 matrices
    """
    return random_integer_matrix(rng, 3, 4), random_integer_matrix(rng, 4, 5)


@pytest.fixture
def v100():
    """
    Fixture for the default V100 16 GiB hardware shape.

    Returns:
        HardwareShape: 32 KiB working L1, 128 KiB full L1, 6 MiB L2, 80 SMs
    """
    return HardwareShape()


@pytest.fixture
def golden():
    """
    Fixture returning a reader for pinned golden files.

    Returns:
        callable: name -> file contents
    """

    def read(name):
        return (GOLDEN_DIR / name).read_text(encoding="utf-8")

    return read


class MockData:
    """Utility class for creating test data."""

    @staticmethod
    def arange_array(shape, layout=Layout.ROW_MAJOR):
        """
        Create an array whose components count up in row-major order.

        Args:
            shape (tuple): Array extents
            layout (Layout): Storage layout

        Returns:
            DenseArray: I64 array with components 0..size-1
        """
        size = int(np.prod(shape)) if shape else 1
        return DenseArray.from_components(shape, np.arange(size), layout)

    @staticmethod
    def flat_operands(rng, m, n, p):
        """
        Create flat integer buffers for a GEMM of shape (m, n, p).

        Returns:
            tuple: (A, B, A_matrix, B_matrix) flat buffers and DenseArrays
        """
        left = random_integer_matrix(rng, m, n)
        right = random_integer_matrix(rng, n, p)
        return left.data, right.data, left, right


@pytest.fixture
def mock_data():
    """
    Fixture for test data utilities.

    Returns:
        MockData: Utility class for creating test data
    """
    return MockData()


# Pytest markers configuration
def pytest_configure(config):
    """Configure custom pytest markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line("markers", "integration: marks tests as integration tests")
    config.addinivalue_line("markers", "performance: marks tests as performance tests")


# Command line options configuration
def pytest_addoption(parser):
    """Add custom command line options."""
    parser.addoption(
        "--run-slow", action="store_true", default=False, help="run slow tests"
    )
    parser.addoption(
        "--run-performance",
        action="store_true",
        default=False,
        help="run performance tests",
    )


# Test filtering based on options
def pytest_collection_modifyitems(config, items):
    """Modify test collection based on command line options."""
    if not config.getoption("--run-slow"):
        skip_slow = pytest.mark.skip(reason="need --run-slow option to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)

    if not config.getoption("--run-performance"):
        skip_perf = pytest.mark.skip(reason="need --run-performance option to run")
        for item in items:
            if "performance" in item.keywords:
                item.add_marker(skip_perf)
