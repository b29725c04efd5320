import numpy as np
import pytest

from fieldtopo import (ContributionMap2D, ContributionMap3D, Field2D, Field3D,
                       accumulate_vertex_2d, accumulate_vertex_3d, fill_data_3d,
                       neighborhood_data_2d)


def field2d(rows, max_level):
    return Field2D(np.array(rows, dtype=np.int32), max_level)


def field3d(cells, max_level):
    return Field3D(np.array(cells, dtype=np.int32), max_level)


def reference_gather_2d(field):
    """Gather composed from the public per-vertex operations; the fused
    kernel must reproduce this exactly."""
    cmap = ContributionMap2D.zeros(field.width, field.height, field.max_level)
    for i in range(field.height + 1):
        for j in range(field.width + 1):
            accumulate_vertex_2d(neighborhood_data_2d(field, i, j), cmap)
    return cmap


def reference_gather_3d(field):
    cmap = ContributionMap3D.zeros(field.width, field.height, field.depth,
                                   field.max_level)
    for i in range(field.height + 1):
        for j in range(field.width + 1):
            for k in range(field.depth + 1):
                accumulate_vertex_3d(fill_data_3d(field, i, j, k), cmap)
    return cmap


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile the numba kernels once so timed tests see steady state."""
    from fieldtopo import gather_2d_serial, gather_3d_serial, random_field

    gather_2d_serial(random_field((8, 8), "uniform", seed=0, max_level=7))
    gather_3d_serial(random_field((4, 4, 4), "uniform", seed=0, max_level=7))
