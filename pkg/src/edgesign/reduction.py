"""Two-level spin-glass instances and their star reduction to sign inference.

A two-level spin glass (TLSG) puts vertices on two stacked width x height
grids with nearest-neighbor edges inside each level plus vertical edges
between levels, each edge carrying a cost in {-1, 0, +1}; the task is to pick
vertex spins in {-1, +1} minimizing H(x) = -sum c_uv x_u x_v.

The reduction adds a hub vertex joined to every TLSG vertex, so each TLSG
vertex becomes a hub edge and each TLSG edge {u, v} becomes the triangle
{(hub,u), (hub,v), (u,v)}. All edge costs are zero and the triangle for
{u, v} costs 1 - c_uv * s(z_u) * s(z_v), where z_u, z_v are the two hub-edge
signs, s(1) = +1, s(0) = -1, and the base-edge sign is ignored. Every sign
assignment then has total triangle cost |E| + H(spins), so the optima of the
two problems coincide up to the constant |E|; ``verify_correspondence``
certifies this by brute force instead of taking it on faith.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .graph import Sign, SignedEdge, SignedGraph

__all__ = [
    "TlsgInstance",
    "ReductionOutput",
    "ReductionCertificate",
    "grid_edges",
    "random_instance",
    "parse_tlsg",
    "write_tlsg",
    "tlsg_energy",
    "brute_force_tlsg",
    "reduce_to_triangle_balance",
    "balance_cost",
    "brute_force_balance",
    "verify_correspondence",
]

MAX_TLSG_BRUTE_FORCE = 20
MAX_VERIFY_VERTICES = 14


def grid_edges(width: int, height: int) -> tuple[tuple[int, int], ...]:
    """Canonical edge order of the two-stacked-grid topology.

    Vertex (level, row, col) has id level*width*height + row*width + col.
    Within each level: right edges then down edges in row-major order; then
    the vertical edges pairing the levels.
    """
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be >= 1")
    lvl = width * height
    edges: list[tuple[int, int]] = []
    for level in (0, 1):
        base = level * lvl
        for r in range(height):
            for c in range(width):
                vid = base + r * width + c
                if c + 1 < width:
                    edges.append((vid, vid + 1))
                if r + 1 < height:
                    edges.append((vid, vid + width))
    for i in range(lvl):
        edges.append((i, lvl + i))
    return tuple(edges)


@dataclass(frozen=True)
class TlsgInstance:
    width: int
    height: int
    costs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(int(c) for c in self.costs))
        expected = grid_edges(self.width, self.height)
        if len(self.costs) != len(expected):
            raise ValueError(
                f"expected {len(expected)} edge costs, got {len(self.costs)}"
            )
        if any(c not in (-1, 0, 1) for c in self.costs):
            raise ValueError("edge costs must be in {-1, 0, +1}")

    @property
    def vertex_count(self) -> int:
        return 2 * self.width * self.height

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return grid_edges(self.width, self.height)


def random_instance(width: int, height: int, rng_seed: int) -> TlsgInstance:
    rng = np.random.default_rng(rng_seed)
    n_edges = len(grid_edges(width, height))
    return TlsgInstance(width, height, tuple(int(c) for c in rng.integers(-1, 2, n_edges)))


def parse_tlsg(stream: IO[str]) -> TlsgInstance:
    """Header ``w h`` then one ``u v c`` line per edge (any edge order, but the
    edge set must match the grid topology exactly)."""
    from .graph import ParseError

    lines = [ln.strip() for ln in stream if ln.strip()]
    if not lines:
        raise ParseError("empty instance file", line=1)
    try:
        w, h = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise ParseError("header must be 'width height'", line=1)
    expected = grid_edges(w, h)
    cost_of: dict[tuple[int, int], int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            u, v, c = (int(tok) for tok in line.split())
        except ValueError:
            raise ParseError("edge row must be 'u v c'", line=lineno)
        key = (min(u, v), max(u, v))
        if key not in set(expected):
            raise ParseError(f"edge {key} not in the grid topology", line=lineno)
        cost_of[key] = c
    if set(cost_of) != set(expected):
        missing = sorted(set(expected) - set(cost_of))
        raise ParseError(f"missing edges, e.g. {missing[:3]}")
    return TlsgInstance(w, h, tuple(cost_of[e] for e in expected))


def write_tlsg(instance: TlsgInstance, stream: IO[str]) -> None:
    stream.write(f"{instance.width} {instance.height}\n")
    for (u, v), c in zip(instance.edges, instance.costs):
        stream.write(f"{u} {v} {c}\n")


def tlsg_energy(instance: TlsgInstance, spins: Sequence[int]) -> float:
    """H(x) = -sum over edges of c_uv * x_u * x_v for spins in {-1, +1}."""
    spins = np.asarray(spins, dtype=int)
    if spins.shape != (instance.vertex_count,):
        raise ValueError("one spin per vertex required")
    if not np.all(np.isin(spins, (-1, 1))):
        raise ValueError("spins must be -1 or +1")
    total = 0
    for (u, v), c in zip(instance.edges, instance.costs):
        total -= c * int(spins[u]) * int(spins[v])
    return float(total)


def _spin_matrix(n: int) -> np.ndarray:
    """All 2^n spin vectors, row k the binary expansion of k with the first
    vertex as the most significant bit mapped 0 -> -1, 1 -> +1 (so row order
    is lexicographic with -1 < +1)."""
    bits = (np.arange(1 << n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return 2 * bits - 1


def brute_force_tlsg(instance: TlsgInstance) -> tuple[float, np.ndarray]:
    """Exhaustive ground state; ties break to the lexicographically smallest
    spin vector. Limited to 20 vertices."""
    n = instance.vertex_count
    if n > MAX_TLSG_BRUTE_FORCE:
        raise ValueError(f"{n} vertices exceed brute-force limit")
    spins = _spin_matrix(n)
    energy = np.zeros(len(spins))
    for (u, v), c in zip(instance.edges, instance.costs):
        if c:
            energy -= c * spins[:, u] * spins[:, v]
    best = int(np.argmin(energy))
    return float(energy[best]), spins[best].copy()


@dataclass
class ReductionOutput:
    """Sign-inference instance produced by the star construction."""

    graph: SignedGraph
    star_vertex: int
    vertex_to_edge: dict[int, int]
    edge_to_triangle: dict[int, int]
    triangle_tables: tuple[np.ndarray, ...]  # (2,2,2) cost table per triangle


def reduce_to_triangle_balance(instance: TlsgInstance) -> ReductionOutput:
    """Build the star instance: hub edges 0..|V|-1 (hub edge u joins vertex u
    to the hub), base edges |V|..|V|+|E|-1 in instance edge order, all signs
    unknown, all edge costs absent, one {0,1,2}-valued triangle table per TLSG
    edge."""
    n = instance.vertex_count
    star = n
    edges = [SignedEdge(u, star) for u in range(n)]
    for (u, v) in instance.edges:
        edges.append(SignedEdge(u, v))
    graph = SignedGraph(n + 1, tuple(edges), directed=False)

    triangles = graph.triangles
    tri_index = {t: i for i, t in enumerate(triangles)}
    vertex_to_edge = {u: u for u in range(n)}
    edge_to_triangle: dict[int, int] = {}
    tables: list[np.ndarray | None] = [None] * len(triangles)
    sign_val = np.array([-1, 1])
    for j, ((u, v), c) in enumerate(zip(instance.edges, instance.costs)):
        key = tuple(sorted((u, v, n + j)))
        t = tri_index[key]
        edge_to_triangle[j] = t
        # Triangle coordinates follow ascending edge index: hub edge u, hub
        # edge v, base edge; the base coordinate does not affect the cost.
        table = np.empty((2, 2, 2))
        for z0, z1, z2 in itertools.product((0, 1), repeat=3):
            table[z0, z1, z2] = 1 - c * sign_val[z0] * sign_val[z1]
        tables[t] = table
    if len(edge_to_triangle) != len(triangles):
        raise AssertionError("triangle set does not match the TLSG edge set")
    return ReductionOutput(
        graph, star, vertex_to_edge, edge_to_triangle, tuple(tables)
    )


def balance_cost(output: ReductionOutput, edge_signs: Sequence[int]) -> float:
    """Total triangle cost of a full binary sign assignment over all edges."""
    x = np.asarray(edge_signs, dtype=int)
    if x.shape != (len(output.graph.edges),):
        raise ValueError("one sign per edge required")
    total = 0.0
    for t, tri in enumerate(output.graph.triangles):
        table = output.triangle_tables[t]
        total += float(table[x[tri[0]], x[tri[1]], x[tri[2]]])
    return total


def brute_force_balance(output: ReductionOutput) -> tuple[float, np.ndarray]:
    """Exhaustive minimum over hub-edge signs.

    The construction's tables ignore the base-edge coordinate (asserted
    here), so base edges are fixed at 0 and only the 2^|V| hub assignments are
    enumerated; ties break to the lexicographically smallest hub-sign vector.
    """
    n_star = output.star_vertex
    for table in output.triangle_tables:
        if not np.allclose(table[:, :, 0], table[:, :, 1]):
            raise AssertionError("triangle table depends on the base edge")
    n_assign = 1 << n_star
    bits = (np.arange(n_assign)[:, None] >> np.arange(n_star - 1, -1, -1)) & 1
    totals = np.zeros(n_assign)
    for t, tri in enumerate(output.graph.triangles):
        table = output.triangle_tables[t]
        stars = [e for e in tri if e < n_star]
        z0 = bits[:, stars[0]]
        z1 = bits[:, stars[1]]
        totals += table[:, :, 0][z0, z1]
    best = int(np.argmin(totals))
    return float(totals[best]), bits[best].copy()


def _spins_from_star_signs(signs: Sequence[int]) -> np.ndarray:
    return 2 * np.asarray(signs, dtype=int) - 1


def _star_signs_from_spins(spins: Sequence[int]) -> np.ndarray:
    return ((np.asarray(spins, dtype=int) + 1) // 2).astype(int)


@dataclass
class ReductionCertificate:
    passed: bool
    offset: float
    min_energy: float
    min_balance_cost: float
    spins_witness: tuple[int, ...]
    star_signs_witness: tuple[int, ...]
    checks: dict[str, bool]

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "offset": self.offset,
            "min_energy": self.min_energy,
            "min_balance_cost": self.min_balance_cost,
            "spins_witness": list(self.spins_witness),
            "star_signs_witness": list(self.star_signs_witness),
            "checks": dict(sorted(self.checks.items())),
        }

    def save(self, stream: IO[str]) -> None:
        json.dump(self.to_json_dict(), stream, indent=2, sort_keys=True)
        stream.write("\n")


def verify_correspondence(instance: TlsgInstance) -> ReductionCertificate:
    """Brute-force both sides of the reduction and certify that the optima and
    witnesses correspond: min balance cost = |E| + min energy, optimal
    hub-edge signs decode to a ground state, and a ground state encodes to an
    optimal balance assignment."""
    n = instance.vertex_count
    if n > MAX_VERIFY_VERTICES:
        raise ValueError(f"{n} vertices exceed verification limit")
    output = reduce_to_triangle_balance(instance)
    offset = float(len(instance.edges))
    min_h, spins_star = brute_force_tlsg(instance)
    min_b, star_signs = brute_force_balance(output)

    checks = {
        "objective_identity": bool(np.isclose(min_b, offset + min_h)),
        "balance_witness_decodes_to_ground_state": bool(
            np.isclose(tlsg_energy(instance, _spins_from_star_signs(star_signs)), min_h)
        ),
    }
    encoded = _star_signs_from_spins(spins_star)
    full = np.concatenate([encoded, np.zeros(len(instance.edges), dtype=int)])
    checks["ground_state_encodes_to_balance_optimum"] = bool(
        np.isclose(balance_cost(output, full), min_b)
    )
    return ReductionCertificate(
        all(checks.values()),
        offset,
        min_h,
        min_b,
        tuple(int(s) for s in spins_star),
        tuple(int(s) for s in star_signs),
        checks,
    )
