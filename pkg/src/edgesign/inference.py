"""MAP inference for the hinge-loss objective.

The relaxed objective is a weighted sum of (optionally squared) hinges of
affine functions of at most three variables, minimized over the unit box.
``admm_solve`` runs consensus ADMM: every hinge keeps local copies of its
variables, updated by an exact proximal step in closed form, and the
consensus update averages local copies (plus duals) and clips to [0, 1].
``brute_force_binary`` exhaustively minimizes the exact binary objective on
small instances and serves as the solver's oracle in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .graph import EvidencePartition, SignedGraph
from .potentials import (
    CostWeights,
    Z_CONFIGS,
    bin_index,
    edge_cost_binary,
    triangle_class,
    unknown_edge_indices,
)

__all__ = [
    "Potential",
    "HlMrfProblem",
    "SolverResult",
    "SolverParams",
    "build_problem",
    "admm_solve",
    "prox_step",
    "round_solution",
    "brute_force_binary",
    "write_trace_csv",
]

MAX_BRUTE_FORCE_UNKNOWNS = 22


@dataclass(frozen=True)
class Potential:
    """weight * hinge(offset + coeffs . x[vars]) or its square."""

    weight: float
    vars: tuple[int, ...]
    coeffs: tuple[float, ...]
    offset: float
    squared: bool

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("potential weight must be non-negative")
        if len(self.vars) != len(self.coeffs) or not 1 <= len(self.vars) <= 3:
            raise ValueError("potential arity must be 1..3 with matching coefficients")

    def value(self, x: np.ndarray) -> float:
        h = max(0.0, self.offset + float(np.dot(self.coeffs, x[list(self.vars)])))
        return self.weight * (h * h if self.squared else h)


@dataclass
class HlMrfProblem:
    """Compiled inference problem over the free edges of one graph."""

    num_variables: int
    variable_edges: tuple[int, ...]
    potentials: tuple[Potential, ...]
    constant: float
    init: np.ndarray
    fixed_values: dict[int, float] = field(default_factory=dict)

    def objective(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        return self.constant + float(sum(pot.value(x) for pot in self.potentials))


@dataclass(frozen=True)
class SolverParams:
    rho: float = 1.0
    eps_abs: float = 1e-5
    eps_rel: float = 1e-4
    max_iter: int = 20000


@dataclass
class SolverResult:
    x: np.ndarray
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    trace: list[tuple[int, float, float, float]] = field(default_factory=list)


def build_problem(
    graph: SignedGraph,
    partition: EvidencePartition,
    p,
    weights: CostWeights,
    squared: bool = True,
) -> HlMrfProblem:
    """Decompose the relaxed objective into hinge potentials.

    Every non-evidence pool edge becomes a variable. Each variable edge with a
    sentiment probability contributes one hinge per side of p_e (binned
    lambdas) plus the prior hinge pair; each triangle with at least one free
    edge contributes up to 8 hinges, one per sign configuration; terms fully
    fixed by evidence are folded into the problem constant. Zero-weight
    hinges are dropped. The warm start puts each variable at its p_e when
    available, else at the prior.
    """
    n_edges = len(graph.edges)
    if partition.pool != frozenset(range(n_edges)):
        raise ValueError("partition pool must cover exactly the graph's edges")
    unknown = unknown_edge_indices(graph, partition.evidence)
    var_of = {e: i for i, e in enumerate(unknown)}
    p_vec = graph.p_vector() if p is None else np.asarray(p, dtype=float)
    if p_vec.shape != (n_edges,):
        raise ValueError("p must have one entry per edge")

    fixed: dict[int, float] = {}
    for i in partition.evidence:
        val = graph.edges[i].sign.x
        if val is None:
            raise ValueError(f"evidence edge {i} lacks an observed sign")
        fixed[i] = val

    potentials: list[Potential] = []
    constant = 0.0
    for e in unknown:
        if np.isnan(p_vec[e]):
            continue
        b = bin_index(p_vec[e]) - 1
        v = var_of[e]
        if weights.lambda1[b] > 0:
            potentials.append(
                Potential(weights.lambda1[b], (v,), (1.0,), -float(p_vec[e]), False)
            )
        if weights.lambda0[b] > 0:
            potentials.append(
                Potential(weights.lambda0[b], (v,), (-1.0,), float(p_vec[e]), False)
            )
    if weights.prior_weight > 0:
        for e in unknown:
            v = var_of[e]
            potentials.append(
                Potential(weights.prior_weight, (v,), (1.0,), -weights.prior, False)
            )
            potentials.append(
                Potential(weights.prior_weight, (v,), (-1.0,), weights.prior, False)
            )
    for e, val in fixed.items():
        if not np.isnan(p_vec[e]):
            b = bin_index(p_vec[e]) - 1
            constant += edge_cost_binary(
                int(val), float(p_vec[e]), weights.lambda1[b], weights.lambda0[b]
            )

    for tri in graph.triangles:
        free = [e for e in tri if e in var_of]
        if not free:
            k = int(round(sum(fixed[e] for e in tri)))
            constant += weights.triangle_cost[k]
            continue
        for z in Z_CONFIGS:
            w = weights.triangle_cost[triangle_class(z)]
            if w == 0:
                continue
            offset = 1.0
            vs: list[int] = []
            cs: list[float] = []
            for e, z_i in zip(tri, z):
                if e in var_of:
                    # |x - z_i| is x when z_i = 0 and 1 - x when z_i = 1.
                    vs.append(var_of[e])
                    if z_i == 0:
                        cs.append(-1.0)
                    else:
                        cs.append(1.0)
                        offset -= 1.0
                else:
                    offset -= abs(fixed[e] - z_i)
            potentials.append(Potential(w, tuple(vs), tuple(cs), offset, squared))

    init = np.array(
        [
            weights.prior if np.isnan(p_vec[e]) else float(p_vec[e])
            for e in unknown
        ]
    )
    return HlMrfProblem(
        len(unknown), tuple(unknown), tuple(potentials), constant, init, fixed
    )


def prox_step(
    potential: Potential,
    consensus: Sequence[float],
    dual: Sequence[float],
    rho: float,
) -> np.ndarray:
    """Exact minimizer of the potential plus (rho/2)||y - (consensus - dual)||^2.

    The minimizer lies on the line v - t*c through the proximal center v along
    the hinge's coefficient vector, which gives a closed form in all cases:
    hinge inactive at v (t = 0), interior stationary point, or, for the linear
    hinge, the projection onto the hinge boundary.
    """
    v = np.asarray(consensus, dtype=float) - np.asarray(dual, dtype=float)
    c = np.asarray(potential.coeffs)
    w = potential.weight
    s = potential.offset + float(np.dot(c, v))
    if w == 0.0 or s <= 0.0:
        return v
    cn2 = float(np.dot(c, c))
    if potential.squared:
        t = 2.0 * w * s / (rho + 2.0 * w * cn2)
    else:
        t = w / rho
        if s - t * cn2 <= 0.0:
            t = s / cn2
    return v - t * c


class _Bucket:
    """Vectorized state for all potentials of one arity."""

    def __init__(self, pots: list[Potential], n_vars: int):
        self.arity = len(pots[0].vars)
        self.w = np.array([p.weight for p in pots])
        self.vars = np.array([p.vars for p in pots], dtype=int)
        self.coeffs = np.array([p.coeffs for p in pots])
        self.offset = np.array([p.offset for p in pots])
        self.squared = np.array([p.squared for p in pots], dtype=bool)
        self.cn2 = np.einsum("ka,ka->k", self.coeffs, self.coeffs)
        self.y = np.zeros_like(self.coeffs)
        self.u = np.zeros_like(self.coeffs)

    def prox(self, x: np.ndarray, rho: float) -> None:
        v = x[self.vars] - self.u
        s = self.offset + np.einsum("ka,ka->k", self.coeffs, v)
        active = s > 0.0
        t = np.zeros(len(self.w))
        sq = active & self.squared
        t[sq] = 2.0 * self.w[sq] * s[sq] / (rho + 2.0 * self.w[sq] * self.cn2[sq])
        lin = active & ~self.squared
        t_int = self.w[lin] / rho
        boundary = s[lin] - t_int * self.cn2[lin] <= 0.0
        t_lin = np.where(boundary, s[lin] / self.cn2[lin], t_int)
        t[lin] = t_lin
        self.y = v - t[:, None] * self.coeffs

    def values(self, x: np.ndarray) -> np.ndarray:
        s = self.offset + np.einsum("ka,ka->k", self.coeffs, x[self.vars])
        h = np.maximum(s, 0.0)
        return self.w * np.where(self.squared, h * h, h)


def admm_solve(
    problem: HlMrfProblem,
    params: SolverParams = SolverParams(),
    trace: bool = False,
) -> SolverResult:
    """Consensus-ADMM minimization of the compiled problem over [0, 1]^n.

    Terminates when the primal and dual residual norms drop below
    eps_abs*sqrt(total local copies) + eps_rel*(problem scale), or at
    max_iter, in which case the result is flagged converged=False rather than
    raising. Iteration order is fixed, so results are bit-for-bit
    reproducible.
    """
    n = problem.num_variables
    if n == 0:
        return SolverResult(
            np.empty(0), problem.constant, 0, 0.0, 0.0, True, []
        )
    x = np.clip(problem.init.copy(), 0.0, 1.0)
    by_arity: dict[int, list[Potential]] = {}
    for pot in problem.potentials:
        by_arity.setdefault(len(pot.vars), []).append(pot)
    buckets = [_Bucket(pots, n) for _, pots in sorted(by_arity.items())]
    if not buckets:
        return SolverResult(
            x, problem.constant, 0, 0.0, 0.0, True, []
        )
    counts = np.zeros(n)
    for b in buckets:
        counts += np.bincount(b.vars.ravel(), minlength=n)
    covered = counts > 0
    n_slots = float(counts.sum())
    sqrt_slots = np.sqrt(n_slots)
    rho = params.rho

    history: list[tuple[int, float, float, float]] = []
    iterations = 0
    r_norm = d_norm = np.inf
    converged = False
    for it in range(1, params.max_iter + 1):
        iterations = it
        for b in buckets:
            b.prox(x, rho)
        sums = np.zeros(n)
        for b in buckets:
            sums += np.bincount(
                b.vars.ravel(), weights=(b.y + b.u).ravel(), minlength=n
            )
        x_new = x.copy()
        x_new[covered] = np.clip(sums[covered] / counts[covered], 0.0, 1.0)

        r_sq = 0.0
        d_sq = 0.0
        y_sq = 0.0
        xg_sq = 0.0
        u_sq = 0.0
        for b in buckets:
            gathered_new = x_new[b.vars]
            diff = b.y - gathered_new
            b.u += diff
            r_sq += float(np.sum(diff * diff))
            step = gathered_new - x[b.vars]
            d_sq += float(np.sum(step * step))
            y_sq += float(np.sum(b.y * b.y))
            xg_sq += float(np.sum(gathered_new * gathered_new))
            u_sq += float(np.sum(b.u * b.u))
        x = x_new
        r_norm = np.sqrt(r_sq)
        d_norm = rho * np.sqrt(d_sq)
        eps_pri = sqrt_slots * params.eps_abs + params.eps_rel * max(
            np.sqrt(y_sq), np.sqrt(xg_sq)
        )
        eps_dual = sqrt_slots * params.eps_abs + params.eps_rel * rho * np.sqrt(u_sq)
        if trace:
            obj = problem.constant + float(sum(b.values(x).sum() for b in buckets))
            history.append((it, obj, r_norm, d_norm))
        if r_norm <= eps_pri and d_norm <= eps_dual:
            converged = True
            break

    objective = problem.constant + float(sum(b.values(x).sum() for b in buckets))
    return SolverResult(x, objective, iterations, r_norm, d_norm, converged, history)


def round_solution(x: Sequence[float], threshold: float = 0.5) -> np.ndarray:
    """Binary signs from fractional values; exactly-at-threshold rounds to 1."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    return (np.asarray(x, dtype=float) >= threshold).astype(int)


def brute_force_binary(
    graph: SignedGraph,
    partition: EvidencePartition | None,
    p,
    weights: CostWeights,
) -> tuple[np.ndarray, float]:
    """Exhaustive minimizer of the exact binary objective (oracle).

    Ties break toward the lexicographically smallest assignment over the free
    edges in ascending index order. Refuses instances with more than 22 free
    edges.
    """
    evidence = partition.evidence if partition is not None else None
    if partition is not None:
        if partition.pool != frozenset(range(len(graph.edges))):
            raise ValueError("partition pool must cover exactly the graph's edges")
    unknown = unknown_edge_indices(graph, evidence)
    m = len(unknown)
    if m > MAX_BRUTE_FORCE_UNKNOWNS:
        raise ValueError(f"{m} unknown edges exceed brute-force limit")
    p_vec = graph.p_vector() if p is None else np.asarray(p, dtype=float)

    fixed_vals: dict[int, float] = {}
    unknown_set = set(unknown)
    for i, e in enumerate(graph.edges):
        if i in unknown_set:
            continue
        if e.sign.x is None:
            raise ValueError(f"fixed edge {i} lacks an observed sign")
        fixed_vals[i] = e.sign.x

    n_assign = 1 << m
    # Row k is the binary expansion of k, first variable as the most
    # significant bit, so row order is lexicographic and argmin tie-breaks
    # to the smallest assignment.
    if m:
        bits = (np.arange(n_assign)[:, None] >> np.arange(m - 1, -1, -1)) & 1
    else:
        bits = np.zeros((1, 0), dtype=int)
    var_of = {e: j for j, e in enumerate(unknown)}

    totals = np.zeros(n_assign)
    for i in range(len(graph.edges)):
        if np.isnan(p_vec[i]):
            continue
        b = bin_index(p_vec[i]) - 1
        c1 = weights.lambda1[b] * (1.0 - p_vec[i])
        c0 = weights.lambda0[b] * p_vec[i]
        if i in var_of:
            col = bits[:, var_of[i]]
            totals += col * c1 + (1 - col) * c0
        else:
            totals += c1 if fixed_vals[i] == 1.0 else c0
    if weights.prior_weight > 0:
        pi = weights.prior
        for i in unknown:
            col = bits[:, var_of[i]]
            totals += weights.prior_weight * (col * (1.0 - pi) + (1 - col) * pi)
    d = np.asarray(weights.triangle_cost)
    for tri in graph.triangles:
        k = np.zeros(n_assign, dtype=int)
        for e in tri:
            if e in var_of:
                k = k + bits[:, var_of[e]]
            else:
                k = k + int(fixed_vals[e])
        totals += d[k]

    best = int(np.argmin(totals))
    assignment = bits[best].astype(float)
    from .potentials import exact_objective

    objective = exact_objective(graph, assignment, p, weights, evidence)
    return assignment, objective


def write_trace_csv(result: SolverResult, stream: IO[str]) -> None:
    stream.write("iter,objective,primal_residual,dual_residual\n")
    for it, obj, r, s in result.trace:
        stream.write(f"{it},{obj!r},{r!r},{s!r}\n")
