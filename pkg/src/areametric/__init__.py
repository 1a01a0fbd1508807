"""Intrinsic-area (mixed area) geometry of convex bodies: support fields on
S^1 and S^2, intrinsic volumes, hyperbolic distances between oriented
shapes, the quotient shape distance, support-function tests and lifts."""

from .bodies import (Ball, Body, Combination, Ellipsoid, Embedded, HalfEllipse, Moved, Point,
                     Polytope, Segment, eval_support, half_ellipse_constants, half_ellipse_k1,
                     load_body, read_body, rectangle_k2, support_point, transform)
from .constants import DimConstants, build_constants
from .errors import (AreaMetricError, BodyParseError, BoundaryShapeError, GridMismatchError,
                     InvalidDimensionError, NumericalConsistencyError)
from .forms import (af_defect, form_report, mean, polygon_oracles, polyhedron_oracles,
                    steiner_fit_mc, steiner_point, v1, v2, v2_form)
from .hyperbolic import (boundary_gap, dist_cross_ratio, dist_hyperboloid, dist_klein,
                         lift_horizontal, normalize_v1, normalize_v2, project_horizontal)
from .shape import (ShapeDistanceReport, ball_distance, dist_oriented, dist_shape,
                    geodesic_point, hyperbolic_mid, midpoint_law_check, rotation_objective)
from .sphere import (SphereGrid, SupportField, build_grid, inner_grad, inner_l2, sample_body,
                     sup_diff)
from .validity import ValidityVerdict, embed_lift, is_support_function, terminal_extension

__version__ = "0.1.0"
