"""Joint edge-sign prediction in signed social networks.

Predicts positive/negative person-to-person evaluations by trading off
per-edge sentiment costs against triangle-consistency costs, with convex MAP
inference over a hinge-loss relaxation, perceptron weight learning, an
evaluation harness, and a certified hardness reduction from the two-level
spin glass.
"""

from .graph import (
    EvidencePartition,
    ParseError,
    Sign,
    SignedEdge,
    SignedGraph,
    generate_synthetic,
    parse_edge_list,
    write_edge_list,
)
from .potentials import CostWeights, exact_objective, relaxed_objective
from .inference import SolverParams, SolverResult, admm_solve, brute_force_binary, build_problem
from .learning import LearnConfig, learn_weights
from .evaluation import auc_neg_pr, auc_roc, run_evidence_sweep
from .reduction import TlsgInstance, reduce_to_triangle_balance, verify_correspondence

__version__ = "0.1.0"
