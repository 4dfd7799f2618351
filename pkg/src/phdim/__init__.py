"""Fractal dimension estimation from persistent homology of random samples."""

from ._backend import BACKEND, COMPILED
from .geometry import BallCount, EmptyInputError, count_scale, hausdorff_distance, pairwise_distances
from .mst import MST, euclidean_mst, minimum_spanning_tree, mst_alpha_weight, mst_edges_exceeding
from .persistence import (
    Barcode,
    FilteredSimplex,
    Filtration,
    ResourceGuardError,
    barcode_alpha_weight,
    build_cech_filtration,
    build_rips_filtration,
    compute_persistence,
    interval_count_exceeding,
    rips_persistence,
)
from .samplers import (
    IntervalCollection,
    IntervalOp,
    IntervalSchedule,
    MeasureSpec,
    apply_interval_op,
    build_schedule_levels,
    sample_measure,
    sample_nested,
)
from .estimators import (
    ahlfors_regularity_diagnostic,
    box_dimension_estimate,
    correlation_dimension_estimate,
    fit_ph_dimension,
    ph_dimension_estimate,
)

__version__ = "0.1.0"
