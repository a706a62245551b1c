"""cvmesh: unstructured cell-centered control-volume meshes in 2D and 3D.

Cells grow around scattered points from circles/spheres of optimized radii:
Delaunay neighborhoods supply the local simplices, each simplex contributes a
closed-form candidate vertex (the radical center of its circles), radius
bounds keep the construction valid, and derivative-free optimization drives
the circles toward common intersection points when exact-intersection meshes
are requested.
"""
from .delaunay import (
    NeighborMap,
    Triangulation2,
    Triangulation3,
    neighbor_map,
    tetrahedralize3,
    triangulate2,
)
from .errors import CvMeshError
from .geometry import (
    HeightSource,
    HeightValue,
    Point,
    TriangleKind,
    TriangleShape,
    classify_triangle,
    distance2,
    distance3,
    neighbor_height2,
    neighbor_height3,
    point_line_distance2,
    point_line_distance3,
    tetra_height,
)
from .io import RunConfig, export_mesh, generate_points, mesh_from_doc, read_json
from .mesh import (
    ControlVolume,
    ControlVolumeMesh,
    build_volumes2,
    build_volumes3,
    validate_global,
    validate_perpendicularity,
)
from .optimize import (
    OptimizeResult,
    RosenbrockParams,
    SoftSelectionParams,
    rosenbrock_minimize,
    soft_selection_minimize,
)
from .pipeline import run_pipeline
from .solver import (
    CandidateVertex,
    CramerDeterminants,
    OverlapKind,
    OverlapMode,
    RadiusBounds,
    RadiusVector,
    VolumeMode,
    classify_overlap,
    cramer3,
    max_radii,
    objective,
    radius_bounds2,
    radius_bounds3,
    solve_radii,
    vertex2,
    vertex3,
)
from .svg import SvgOptions, render_svg

__version__ = "0.1.0"
