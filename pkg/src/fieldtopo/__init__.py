"""Topological descriptor curves of 2D/3D fields via vertex contributions.

One pass over a field's lattice vertices produces a contribution map:
birth/death histograms of neighborhood configuration types over filtration
levels. Euler characteristic, perimeter, area, surface-area, and volume
curves (and any custom weighting) then follow from a single dot product per
level, in exact fixed-point arithmetic.
"""

from .contrib2d import (ContributionMap2D, VertexNeighborhood2D,
                        accumulate_vertex_2d, diagonal_check, gather_2d_parallel,
                        gather_2d_serial, neighborhood_data_2d)
from .contrib3d import (ClassificationError, ContributionMap3D, PairClassCounts,
                        VertexNeighborhood3D, accumulate_vertex_3d, classify_config,
                        fill_data_3d, gather_3d_parallel, gather_3d_serial,
                        pair_classes)
from .descriptors import (DescriptorCurve, WeightTable, back_calc_empty,
                          builtin_weights, counts_at_levels, descriptor_curve,
                          format_eighths, load_weight_table)
from .fields import Field2D, Field3D, quantize, quantize_with_range, random_field
from .sources import (BmpLayout, BmpSource, MemorySource, RawVolumeSource,
                      as_source, open_bmp_lowmem, open_raw_lowmem, read_bmp,
                      read_raw_volume, read_sidecar, write_bmp, write_raw_volume,
                      write_sidecar)

__version__ = "0.1.0"

__all__ = [
    "Field2D", "Field3D", "quantize", "quantize_with_range", "random_field",
    "MemorySource", "BmpSource", "BmpLayout", "RawVolumeSource", "as_source",
    "read_bmp", "write_bmp", "open_bmp_lowmem",
    "read_raw_volume", "write_raw_volume", "open_raw_lowmem",
    "read_sidecar", "write_sidecar",
    "ContributionMap2D", "VertexNeighborhood2D", "neighborhood_data_2d",
    "accumulate_vertex_2d", "diagonal_check", "gather_2d_serial", "gather_2d_parallel",
    "ContributionMap3D", "VertexNeighborhood3D", "PairClassCounts",
    "fill_data_3d", "pair_classes", "classify_config", "accumulate_vertex_3d",
    "gather_3d_serial", "gather_3d_parallel", "ClassificationError",
    "WeightTable", "DescriptorCurve", "builtin_weights", "load_weight_table",
    "counts_at_levels", "back_calc_empty", "descriptor_curve", "format_eighths",
    "__version__",
]
