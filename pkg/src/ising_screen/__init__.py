"""Sparse Ising graph recovery with L0-L2 constrained and L1-regularised node-wise estimators."""

from .estimators import (METHODS, GraphEstimate, MethodSpec, assemble_graph, bic_select,
                         fit_graph, fit_methods, fit_node, hard_threshold,
                         validation_conditional_likelihood)
from .losses import ISE, LOGISTIC, eval_ise, eval_logistic, lipschitz_constant
from .model import (ConnectivityMatrix, GraphStats, NodeProblem, SampleSet, graph_stats,
                    lattice_topology, node_problem, random_regular_topology)
from .sampler import (SamplerConfig, conditional_prob, exact_sample, gibbs_sample,
                      log_partition)
from .solver import (L0L2Constraint, SolverOptions, SolverResult, continuation_path,
                     dfo_solve, fista_solve, project_l1_ball, prox_l0l2)

__version__ = "0.1.0"

__all__ = [
    "METHODS", "GraphEstimate", "MethodSpec", "assemble_graph", "bic_select", "fit_graph",
    "fit_methods", "fit_node", "hard_threshold", "validation_conditional_likelihood", "ISE",
    "LOGISTIC", "eval_ise", "eval_logistic", "lipschitz_constant", "ConnectivityMatrix",
    "GraphStats", "NodeProblem", "SampleSet", "graph_stats", "lattice_topology",
    "node_problem", "random_regular_topology", "SamplerConfig", "conditional_prob",
    "exact_sample", "gibbs_sample", "log_partition", "L0L2Constraint", "SolverOptions",
    "SolverResult", "continuation_path", "dfo_solve", "fista_solve", "project_l1_ball",
    "prox_l0l2", "__version__",
]
