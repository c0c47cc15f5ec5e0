"""Level set mean curvature flow through planar conical singularities.

Numerical machinery for self-expanding curves asymptotic to planar cones,
their weighted Jacobi spectra and barrier constructions, and a grid level
set solver used to test the fattening dichotomy, rescaled convergence to
expanders, and o(sqrt(t)) uniqueness pinching at desk scale.
"""

from .geometry import (
    DiscreteCurve,
    GraphFunction,
    PlanarCone,
    graph_embed,
    graph_speed_factor,
    graph_unit_normal,
    linearized_mean_curvature,
    expander_residual,
    rescaled_flow_residual,
    resample_arclength,
    hausdorff_distance,
)

__version__ = "0.1.0"
