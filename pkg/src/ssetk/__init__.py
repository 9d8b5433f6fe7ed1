"""ssetk: partitioning algorithms that exploit small-set expansion.

The compiled kernels are used when the extension is built; otherwise a
pure-Python fallback is selected at import (see ``ssetk.BACKEND``).
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .errors import *  # noqa: F401,F403
from .graph import (
    RegularGraph,
    SseParams,
    SseReport,
    VertexSet,
    boundary_size,
    certify_sse,
    cut_value,
    double_graph,
    edge_expansion,
    generate_planted_bipartite_sse,
    generate_random_regular,
    generate_two_expanders,
    load_graph,
    save_graph,
)
from .sdp import SdpConfig, VectorSolution, sdp_objective, solve_maxcut_sdp
from .projection import project_to_r3
from .sphere import build_triangulation, compute_profile
from .softround import round_to_boundary, round_to_corners, separation_check
from .hyperplane import PipelineConfig, PipelineReport, run_maxcut_pipeline
from .spectral import cheeger_partition, dense_cut, quantize_vector, second_eigenpair, sweep_cut
from .dist import (
    Distribution,
    PseudoDistribution,
    correlated_sample,
    hellinger,
    kl_divergence,
    quantize_collection,
    statistical_distance,
)
from . import oracle
