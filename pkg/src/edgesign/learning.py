"""Cost-weight estimation by the averaged structured perceptron.

The relaxed objective is linear in the 25 weight components (20 binned edge
entries, 4 triangle classes, 1 prior entry): objective(x; w) = w . Phi(x),
where Phi collects each component's unweighted hinge mass at an assignment.
Each epoch solves MAP under the current weights and moves every component by
the difference between its hinge mass at the MAP solution and at the ground
truth, making the truth comparatively cheaper; weights are projected to stay
non-negative and the returned estimate averages the per-epoch snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .graph import EvidencePartition, SignedGraph
from .inference import SolverParams, admm_solve, build_problem
from .potentials import (
    BIN_COUNT,
    CLASS_MULTIPLICITY,
    CostWeights,
    Z_CONFIGS,
    assemble_values,
    bin_index,
    hinge,
    indicator_surrogate,
    triangle_class,
)

__all__ = [
    "FEATURE_DIM",
    "LearnConfig",
    "feature_counts",
    "learn_weights",
    "normalized_edge_cost_report",
    "write_training_log",
]

FEATURE_DIM = 2 * BIN_COUNT + 4 + 1


@dataclass(frozen=True)
class LearnConfig:
    """Perceptron knobs. ``step_size=None`` means step_scale / (number of
    target edges); ``init=None`` means all components 1.0 with the prior set
    to the training pool's positive fraction."""

    epochs: int = 50
    step_size: float | None = None
    step_scale: float = 0.1
    weight_floor: float = 0.0
    init: CostWeights | None = None
    squared: bool = True
    solver: SolverParams = field(default_factory=SolverParams)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")


def feature_counts(
    graph: SignedGraph,
    partition: EvidencePartition,
    p,
    assignment: Sequence[float],
    prior: float,
    squared: bool = True,
) -> np.ndarray:
    """Per-component unweighted hinge mass Phi at an assignment over the free
    edges, such that weights.as_vector() . Phi equals the relaxed objective
    (evidence-fixed terms included, so the identity has no leftover constant).
    """
    vals, unknown = assemble_values(graph, assignment, partition.evidence)
    p_vec = graph.p_vector() if p is None else np.asarray(p, dtype=float)
    phi = np.zeros(FEATURE_DIM)
    for i in range(len(graph.edges)):
        if np.isnan(p_vec[i]):
            continue
        b = bin_index(p_vec[i]) - 1
        phi[b] += hinge(float(vals[i]) - p_vec[i])
        phi[BIN_COUNT + b] += hinge(p_vec[i] - float(vals[i]))
    for tri in graph.triangles:
        x_t = (vals[tri[0]], vals[tri[1]], vals[tri[2]])
        for z in Z_CONFIGS:
            phi[2 * BIN_COUNT + triangle_class(z)] += indicator_surrogate(
                x_t, z, squared
            )
    for i in unknown:
        phi[FEATURE_DIM - 1] += abs(float(vals[i]) - prior)
    return phi


def _truth_assignment(graph: SignedGraph, unknown: Sequence[int]) -> np.ndarray:
    truth = graph.truth_vector()
    x = truth[list(unknown)]
    if np.isnan(x).any():
        raise ValueError("every target edge needs a ground-truth sign for learning")
    return x


def learn_weights(
    graph: SignedGraph,
    partition: EvidencePartition,
    p,
    config: LearnConfig = LearnConfig(),
    history: list | None = None,
) -> CostWeights:
    """Averaged-perceptron weight estimation on one training partition.

    When ``history`` is a list, one row
    (epoch, objective_map, objective_truth, weight_l1_delta) is appended per
    epoch.
    """
    targets = sorted(partition.targets)
    if not targets:
        raise ValueError("partition has no target edges to learn from")
    truth_pool = graph.truth_vector()[sorted(partition.pool)]
    if np.isnan(truth_pool).any():
        raise ValueError("training pool contains edges without ground truth")
    if config.init is not None:
        init = config.init
    else:
        init = CostWeights.uniform(1.0, prior=float(np.mean(truth_pool)))
    prior = init.prior
    step = (
        config.step_size
        if config.step_size is not None
        else config.step_scale / len(targets)
    )

    x_truth = _truth_assignment(graph, targets)
    phi_truth = feature_counts(graph, partition, p, x_truth, prior, config.squared)

    w = init.as_vector()
    snapshots = []
    for epoch in range(1, config.epochs + 1):
        weights = CostWeights.from_vector(w, prior)
        problem = build_problem(graph, partition, p, weights, config.squared)
        result = admm_solve(problem, config.solver)
        phi_map = feature_counts(
            graph, partition, p, result.x, prior, config.squared
        )
        if history is not None:
            history.append(
                (
                    epoch,
                    float(w @ phi_map),
                    float(w @ phi_truth),
                    float(np.abs(step * (phi_map - phi_truth)).sum()),
                )
            )
        w = np.maximum(w + step * (phi_map - phi_truth), config.weight_floor)
        snapshots.append(w.copy())
    averaged = np.mean(snapshots, axis=0)
    return CostWeights.from_vector(averaged, prior)


def normalized_edge_cost_report(weights: CostWeights) -> np.ndarray:
    """Share of the total cost budget spent per probability bin.

    The denominator sums lambda1 + lambda0 over all bins, the triangle costs
    of all 8 sign configurations (class costs weighted by their multiplicity
    1,3,3,1), and the prior weight.
    """
    lam = np.asarray(weights.lambda1) + np.asarray(weights.lambda0)
    denom = (
        float(lam.sum())
        + float(np.dot(CLASS_MULTIPLICITY, weights.triangle_cost))
        + weights.prior_weight
    )
    if denom == 0.0:
        raise ValueError("all cost weights are zero")
    return lam / denom


def write_training_log(history: Sequence[tuple], stream: IO[str]) -> None:
    stream.write("epoch,objective_map,objective_truth,weight_l1_delta\n")
    for epoch, om, ot, delta in history:
        stream.write(f"{epoch},{om!r},{ot!r},{delta!r}\n")
