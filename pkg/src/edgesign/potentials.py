"""Cost functions for joint sign inference.

An assignment x over the unknown edges is scored by three kinds of terms:

* an edge cost pulling x_e toward the sentiment probability p_e, with a
  separate (lambda1, lambda0) pair per probability bin so that confident
  sentiment predictions can be made expensive to override;
* a triangle cost d indexed by how many of a triangle's three signs are
  positive (4 classes up to permutation symmetry);
* a prior cost pulling unknown edges toward the base rate of positive signs.

Each binary cost has a hinge-loss interpolation over [0, 1] that coincides
with it at binary points, so the relaxed objective is convex and exactly
extends the combinatorial one.
"""

from __future__ import annotations

import itertools
import json
from bisect import bisect_right
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .graph import Sign, SignedGraph

__all__ = [
    "BIN_COUNT",
    "TRIANGLE_CLASS_COUNT",
    "Z_CONFIGS",
    "CostWeights",
    "bin_index",
    "edge_cost_binary",
    "edge_cost_relaxed",
    "triangle_class",
    "indicator_surrogate",
    "triangle_cost_relaxed",
    "prior_cost",
    "unknown_edge_indices",
    "assemble_values",
    "exact_objective",
    "relaxed_objective",
]

BIN_COUNT = 10
TRIANGLE_CLASS_COUNT = 4
# All 8 binary sign configurations of a triangle, in a fixed order.
Z_CONFIGS: tuple[tuple[int, int, int], ...] = tuple(
    itertools.product((0, 1), repeat=3)
)
# Number of configurations in each positive-count class: C(3, k).
CLASS_MULTIPLICITY = (1, 3, 3, 1)

_BIN_EDGES = [k / 10 for k in range(1, 10)]


@dataclass(frozen=True)
class CostWeights:
    """All learnable cost parameters plus the sign prior.

    ``lambda1[i-1]``/``lambda0[i-1]`` penalize x_e above/below p_e when p_e
    falls in bin i; ``triangle_cost[k]`` is the cost of a triangle whose signs
    have k positives; ``prior_weight`` scales the |x_e - prior| pull.
    """

    lambda1: tuple[float, ...]
    lambda0: tuple[float, ...]
    triangle_cost: tuple[float, ...]
    prior_weight: float
    prior: float

    def __post_init__(self):
        object.__setattr__(self, "lambda1", tuple(float(v) for v in self.lambda1))
        object.__setattr__(self, "lambda0", tuple(float(v) for v in self.lambda0))
        object.__setattr__(
            self, "triangle_cost", tuple(float(v) for v in self.triangle_cost)
        )
        if len(self.lambda1) != BIN_COUNT or len(self.lambda0) != BIN_COUNT:
            raise ValueError(f"lambda vectors must have {BIN_COUNT} entries")
        if len(self.triangle_cost) != TRIANGLE_CLASS_COUNT:
            raise ValueError(f"triangle_cost must have {TRIANGLE_CLASS_COUNT} entries")
        for v in (*self.lambda1, *self.lambda0, *self.triangle_cost, self.prior_weight):
            if not (np.isfinite(v) and v >= 0.0):
                raise ValueError("cost weights must be finite and non-negative")
        if not 0.0 <= self.prior <= 1.0:
            raise ValueError("prior must be a probability")

    @classmethod
    def uniform(cls, value: float = 1.0, prior: float = 0.5) -> "CostWeights":
        return cls(
            (value,) * BIN_COUNT, (value,) * BIN_COUNT, (value,) * TRIANGLE_CLASS_COUNT,
            value, prior,
        )

    @classmethod
    def zeros(cls, prior: float = 0.5) -> "CostWeights":
        return cls.uniform(0.0, prior)

    def with_lambdas_zeroed(self) -> "CostWeights":
        """Network-only variant: drop all sentiment edge costs."""
        return CostWeights(
            (0.0,) * BIN_COUNT, (0.0,) * BIN_COUNT, self.triangle_cost,
            self.prior_weight, self.prior,
        )

    def as_vector(self) -> np.ndarray:
        """Flatten the 25 learnable components (prior itself is not learned)."""
        return np.array(
            self.lambda1 + self.lambda0 + self.triangle_cost + (self.prior_weight,)
        )

    @classmethod
    def from_vector(cls, vec: Sequence[float], prior: float) -> "CostWeights":
        vec = tuple(float(v) for v in vec)
        if len(vec) != 2 * BIN_COUNT + TRIANGLE_CLASS_COUNT + 1:
            raise ValueError("weight vector must have 25 entries")
        return cls(vec[:10], vec[10:20], vec[20:24], vec[24], prior)

    def to_json_dict(self) -> dict:
        return {
            "lambda1": list(self.lambda1),
            "lambda0": list(self.lambda0),
            "d": list(self.triangle_cost),
            "prior_weight": self.prior_weight,
            "prior": self.prior,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CostWeights":
        return cls(
            tuple(data["lambda1"]), tuple(data["lambda0"]), tuple(data["d"]),
            float(data["prior_weight"]), float(data["prior"]),
        )

    def save(self, stream: IO[str]) -> None:
        json.dump(self.to_json_dict(), stream, indent=2, sort_keys=True)
        stream.write("\n")

    @classmethod
    def load(cls, stream: IO[str]) -> "CostWeights":
        return cls.from_json_dict(json.load(stream))


def bin_index(p_e: float) -> int:
    """Bin of p_e among [0,.1), [.1,.2), ..., [.9,1.0], returned in 1..10.

    A value exactly on an interior boundary goes to the higher bin; 1.0 folds
    into bin 10.
    """
    if not 0.0 <= p_e <= 1.0:
        raise ValueError(f"p_e={p_e} outside [0, 1]")
    return min(bisect_right(_BIN_EDGES, p_e) + 1, BIN_COUNT)


def hinge(y: float) -> float:
    return y if y > 0.0 else 0.0


def edge_cost_binary(x_e: int, p_e: float, lam1: float, lam0: float) -> float:
    """lam1*(1-p)*x + lam0*p*(1-x); at most one summand is non-zero."""
    if x_e not in (0, 1):
        raise ValueError("x_e must be binary")
    return lam1 * (1.0 - p_e) * x_e + lam0 * p_e * (1 - x_e)


def edge_cost_relaxed(x_e: float, p_e: float, lam1: float, lam0: float) -> float:
    """Linear hinge interpolation lam1*(x-p)_+ + lam0*(p-x)_+ of the edge cost."""
    return lam1 * hinge(x_e - p_e) + lam0 * hinge(p_e - x_e)


def triangle_class(z: Sequence[int]) -> int:
    """Number of positive signs in a binary triangle configuration (0..3)."""
    z = tuple(z)
    if len(z) != 3 or any(v not in (0, 1) for v in z):
        raise ValueError("z must be a binary triple")
    return sum(z)


def indicator_surrogate(x_t: Sequence[float], z: Sequence[int], squared: bool) -> float:
    """Convex stand-in (1 - ||x_t - z||_1)_+ for the exact match indicator.

    At binary x_t it equals the indicator in both the linear and squared modes
    (the squared flag matters only at fractional points).
    """
    l1 = sum(abs(float(x) - zi) for x, zi in zip(x_t, z))
    h = hinge(1.0 - l1)
    return h * h if squared else h


def triangle_cost_relaxed(
    x_t: Sequence[float], weights: CostWeights, squared: bool
) -> float:
    """Sum over all 8 configurations z of d[class(z)] * surrogate(x_t, z)."""
    total = 0.0
    for z in Z_CONFIGS:
        w = weights.triangle_cost[triangle_class(z)]
        if w:
            total += w * indicator_surrogate(x_t, z, squared)
    return total


def prior_cost(x_e: float, weights: CostWeights) -> float:
    """prior_weight * |x_e - prior| (two hinges, one per side)."""
    return weights.prior_weight * (
        hinge(x_e - weights.prior) + hinge(weights.prior - x_e)
    )


def unknown_edge_indices(
    graph: SignedGraph, evidence: Iterable[int] | None = None
) -> list[int]:
    """Edge indices treated as free variables, ascending.

    With an explicit evidence set, everything outside it is free (observed
    signs on non-evidence edges are ground truth hidden from the solver);
    without one, exactly the UNKNOWN-signed edges are free.
    """
    if evidence is None:
        return [i for i, e in enumerate(graph.edges) if e.sign is Sign.UNKNOWN]
    evidence = set(evidence)
    for i in evidence:
        if graph.edges[i].sign is Sign.UNKNOWN:
            raise ValueError(f"evidence edge {i} lacks an observed sign")
    return [i for i in range(len(graph.edges)) if i not in evidence]


def assemble_values(
    graph: SignedGraph,
    x: Sequence[float],
    evidence: Iterable[int] | None = None,
) -> tuple[np.ndarray, list[int]]:
    """Full per-edge value vector: fixed edges at their observed signs, free
    edges (ascending index order) at the entries of ``x``."""
    unknown = unknown_edge_indices(graph, evidence)
    x = np.asarray(x, dtype=float)
    if x.shape != (len(unknown),):
        raise ValueError(f"assignment has {x.shape} values, expected {len(unknown)}")
    vals = np.empty(len(graph.edges))
    unknown_set = set(unknown)
    for i, e in enumerate(graph.edges):
        if i in unknown_set:
            continue
        if e.sign.x is None:
            raise ValueError(f"fixed edge {i} lacks an observed sign")
        vals[i] = e.sign.x
    vals[unknown] = x
    return vals, unknown


def _resolve_p(graph: SignedGraph, p) -> np.ndarray:
    if p is None:
        return graph.p_vector()
    p = np.asarray(p, dtype=float)
    if p.shape != (len(graph.edges),):
        raise ValueError("p must have one entry per edge (NaN where absent)")
    return p


def exact_objective(
    graph: SignedGraph,
    x: Sequence[float],
    p,
    weights: CostWeights,
    evidence: Iterable[int] | None = None,
) -> float:
    """Combinatorial objective at a binary assignment over the free edges:
    binned edge costs (edges with a sentiment probability), exact triangle
    costs, and the prior cost on free edges."""
    vals, unknown = assemble_values(graph, x, evidence)
    if not np.all(np.isin(vals[unknown], (0.0, 1.0))):
        raise ValueError("exact objective requires a binary assignment")
    p_vec = _resolve_p(graph, p)
    total = 0.0
    for i in range(len(graph.edges)):
        if not np.isnan(p_vec[i]):
            b = bin_index(p_vec[i]) - 1
            total += edge_cost_binary(
                int(vals[i]), p_vec[i], weights.lambda1[b], weights.lambda0[b]
            )
    for t in graph.triangles:
        k = int(round(vals[t[0]] + vals[t[1]] + vals[t[2]]))
        total += weights.triangle_cost[k]
    for i in unknown:
        total += prior_cost(vals[i], weights)
    return total


def relaxed_objective(
    graph: SignedGraph,
    x: Sequence[float],
    p,
    weights: CostWeights,
    squared: bool = True,
    evidence: Iterable[int] | None = None,
) -> float:
    """Hinge-loss objective at a fractional assignment; coincides with
    :func:`exact_objective` whenever the assignment is binary."""
    vals, unknown = assemble_values(graph, x, evidence)
    p_vec = _resolve_p(graph, p)
    total = 0.0
    for i in range(len(graph.edges)):
        if not np.isnan(p_vec[i]):
            b = bin_index(p_vec[i]) - 1
            total += edge_cost_relaxed(
                float(vals[i]), p_vec[i], weights.lambda1[b], weights.lambda0[b]
            )
    for t in graph.triangles:
        x_t = (vals[t[0]], vals[t[1]], vals[t[2]])
        total += triangle_cost_relaxed(x_t, weights, squared)
    for i in unknown:
        total += prior_cost(float(vals[i]), weights)
    return total
