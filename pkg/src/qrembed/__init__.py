"""Fast node embeddings for sparse graphs.

Pipeline: edge list -> transition matrix -> sparse log-ratio proximity
matrix -> blocked randomized QR range finder (with power iterations) ->
spectral diffusion filter.  Includes the node-classification evaluation
protocol (one-vs-rest logistic regression, Micro/Macro-F1) and dense
oracle references for validating the randomized path.
"""

from .diffusion import FilterSpec, apply_filter, make_filter, unit_rows
from .errors import (DegenerateBlockError, DomainError, NumericError,
                     ParseError, QrembedError)
from .evaluation import (EvalReport, LabelSet, f1_scores, load_labels,
                         ovr_train, predict_topk, run_protocol, split)
from .graph import Graph, SparseMatrix, load_edge_list, transition_matrix
from .oracle import SvdTriple, approx_error, dense_tsvd, theorem1_bound
from .proximity import ContextWeights, ProximityConfig, build_m, context_weights
from .rangefinder import (RbqrParams, block_orthonormalize, gaussian_block,
                          power_product, rbqr_basis, rbqr_embed)

__version__ = "0.1.0"
