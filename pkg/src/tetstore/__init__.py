"""Tetrahedral mesh store with Hilbert-keyed point location."""

from .adjacency import elements_of_vertex, face_neighbor
from .errors import (
    ConnectivityError,
    CorruptArchiveError,
    DegenerateTetError,
    HilbertRangeError,
    MalformedElementError,
    MeshError,
    NotContainedError,
    NotFoundError,
    ParseError,
    PipelineError,
    TetStoreError,
    TraversalStuckError,
)
from .geometry import (
    centroid,
    exit_face,
    point_in_tet,
    signed_volume,
    solve_barycentric,
)
from .hilbert import Quantizer, assign_hcodes, h_decode, h_encode, quantize
from .interp import NodalField, interpolate, shape_values
from .locate import LocateResult, LocatorConfig, locate, locate_batch, select_candidate, traverse
from .mesh import MeshStore, TetQuad, TetVertexRow, Vertex, to_normalized, to_quad, validate_mesh
from .meshio import generate_box, load_archive, save_archive
from .partition import partition
from .pipeline import LoadConfig, run_pipeline
from .surface import extract_unoriented, orient

__version__ = "0.1.0"
