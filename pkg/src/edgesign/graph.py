"""Signed-graph data model, triangle index, sampling, and edge-list TSV I/O."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable

import numpy as np

__all__ = [
    "ParseError",
    "Sign",
    "SignedEdge",
    "SignedGraph",
    "EvidencePartition",
    "parse_edge_list",
    "write_edge_list",
    "enumerate_triangles",
    "bfs_sample",
    "random_edge_partition",
    "apply_evidence_mask",
    "partition_from_signs",
    "remove_overlap",
    "edge_subgraph",
    "generate_synthetic",
    "derive_seed",
]


class ParseError(ValueError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Sign(Enum):
    """Observed polarity of an edge, or UNKNOWN when the sign must be inferred."""

    POSITIVE = "+1"
    NEGATIVE = "-1"
    UNKNOWN = "?"

    @property
    def x(self) -> float | None:
        """Sign-variable value: 1.0 positive, 0.0 negative, None unknown."""
        if self is Sign.POSITIVE:
            return 1.0
        if self is Sign.NEGATIVE:
            return 0.0
        return None

    @staticmethod
    def from_x(value: float) -> "Sign":
        return Sign.POSITIVE if value >= 0.5 else Sign.NEGATIVE


@dataclass(frozen=True)
class SignedEdge:
    """One person-to-person evaluation: endpoints, sign state, sentiment probability, text."""

    src: int
    dst: int
    sign: Sign = Sign.UNKNOWN
    p: float | None = None
    text: str | None = None

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"self-loop at node {self.src}")
        if self.p is not None and not (np.isfinite(self.p) and 0.0 <= self.p <= 1.0):
            raise ValueError(f"edge probability {self.p!r} outside [0, 1]")

    @property
    def pair(self) -> tuple[int, int]:
        """Endpoints as an unordered (min, max) pair."""
        return (self.src, self.dst) if self.src < self.dst else (self.dst, self.src)


@dataclass
class SignedGraph:
    """A signed graph. Treated as immutable after construction; the triangle
    index is built lazily on first access and cached.

    Node ids are dense integers in [0, node_count). A subgraph produced by the
    sampling helpers keeps its parent's node-id namespace so that edge sets of
    different samples remain comparable.
    """

    node_count: int
    edges: tuple[SignedEdge, ...]
    directed: bool = False
    _triangles: tuple[tuple[int, int, int], ...] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        self.edges = tuple(self.edges)
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            if not (0 <= e.src < self.node_count and 0 <= e.dst < self.node_count):
                raise ValueError(f"edge ({e.src}, {e.dst}) outside node range")
            key = (e.src, e.dst) if self.directed else e.pair
            if key in seen:
                raise ValueError(f"duplicate edge between {e.src} and {e.dst}")
            seen.add(key)

    @property
    def triangles(self) -> tuple[tuple[int, int, int], ...]:
        if self._triangles is None:
            self._triangles = enumerate_triangles(self)
        return self._triangles

    def p_vector(self) -> np.ndarray:
        """Per-edge sentiment probabilities; NaN where absent."""
        return np.array(
            [np.nan if e.p is None else e.p for e in self.edges], dtype=float
        )

    def truth_vector(self) -> np.ndarray:
        """Per-edge observed sign values in {0, 1}; NaN where unknown."""
        return np.array(
            [np.nan if e.sign.x is None else e.sign.x for e in self.edges], dtype=float
        )

    def observed_indices(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e.sign is not Sign.UNKNOWN]


@dataclass(frozen=True)
class EvidencePartition:
    """Edge-index sets for one experiment: disjoint train/test pools plus the
    evidence subset whose signs are revealed to the solver."""

    train_edges: frozenset[int]
    test_edges: frozenset[int]
    evidence: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "train_edges", frozenset(self.train_edges))
        object.__setattr__(self, "test_edges", frozenset(self.test_edges))
        object.__setattr__(self, "evidence", frozenset(self.evidence))
        if self.train_edges & self.test_edges:
            raise ValueError("train and test edge sets overlap")
        if not self.evidence <= (self.train_edges | self.test_edges):
            raise ValueError("evidence edges outside the train/test pool")

    @property
    def pool(self) -> frozenset[int]:
        return self.train_edges | self.test_edges

    @property
    def targets(self) -> frozenset[int]:
        """Edges whose signs must be predicted."""
        return self.pool - self.evidence


def parse_edge_list(stream: IO[str]) -> SignedGraph:
    """Parse the edge-list TSV format.

    First line is ``# directed=<true|false>``; each data row is
    ``src<TAB>dst<TAB>sign<TAB>p[<TAB>text]`` with sign in {+1, -1, ?} and p a
    float in [0, 1] or ``-`` when absent. Node tokens are densely re-mapped in
    order of first appearance. When several rows name the same unordered node
    pair, the last occurrence wins (it replaces the earlier edge in place).
    """
    lines = iter(enumerate(stream, start=1))
    try:
        _, header = next(lines)
    except StopIteration:
        raise ParseError("missing '# directed=<true|false>' header", line=1)
    header = header.strip()
    if header == "# directed=true":
        directed = True
    elif header == "# directed=false":
        directed = False
    else:
        raise ParseError("expected '# directed=<true|false>' header", line=1)

    node_ids: dict[str, int] = {}
    by_pair: dict[tuple[int, int], SignedEdge] = {}
    for lineno, raw in lines:
        line = raw.rstrip("\r\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) not in (4, 5):
            raise ParseError(
                f"expected 4 or 5 tab-separated columns, got {len(cols)}", line=lineno
            )
        src_tok, dst_tok, sign_tok, p_tok = cols[:4]
        try:
            sign = Sign(sign_tok)
        except ValueError:
            raise ParseError(f"sign {sign_tok!r} not one of +1, -1, ?", line=lineno)
        if p_tok == "-":
            p = None
        else:
            try:
                p = float(p_tok)
            except ValueError:
                raise ParseError(f"probability {p_tok!r} is not a number", line=lineno)
            if not (np.isfinite(p) and 0.0 <= p <= 1.0):
                raise ParseError(f"probability {p} outside [0, 1]", line=lineno)
        text = _unescape(cols[4]) if len(cols) == 5 else None
        src = node_ids.setdefault(src_tok, len(node_ids))
        dst = node_ids.setdefault(dst_tok, len(node_ids))
        if src == dst:
            raise ParseError(f"self-loop at node {src_tok!r}", line=lineno)
        edge = SignedEdge(src, dst, sign, p, text)
        by_pair[edge.pair] = edge
    return SignedGraph(len(node_ids), tuple(by_pair.values()), directed)


def write_edge_list(graph: SignedGraph, stream: IO[str]) -> None:
    """Inverse of :func:`parse_edge_list` (round-trips exactly)."""
    stream.write(f"# directed={'true' if graph.directed else 'false'}\n")
    for e in graph.edges:
        cols = [
            str(e.src),
            str(e.dst),
            e.sign.value,
            "-" if e.p is None else repr(e.p),
        ]
        if e.text is not None:
            cols.append(_escape(e.text))
        stream.write("\t".join(cols) + "\n")


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unescape(token: str) -> str:
    out: list[str] = []
    it = iter(token)
    for ch in it:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(it, "")
        out.append({"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}.get(nxt, nxt))
    return "".join(out)


def enumerate_triangles(graph: SignedGraph) -> tuple[tuple[int, int, int], ...]:
    """All 3-edge cycles, each exactly once, as ascending edge-index triples.

    Direction is ignored for cycle detection; if antiparallel edges exist
    between a pair, the lowest-index edge represents the pair, so every
    unordered node triple contributes at most one triangle.
    """
    rep: dict[tuple[int, int], int] = {}
    for idx, e in enumerate(graph.edges):
        rep.setdefault(e.pair, idx)
    adj: dict[int, set[int]] = {}
    for u, v in rep:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    triangles: list[tuple[int, int, int]] = []
    for (u, v) in sorted(rep):
        for w in sorted(adj[u] & adj[v]):
            if w <= v:
                continue
            e_uv = rep[(u, v)]
            e_uw = rep[(min(u, w), max(u, w))]
            e_vw = rep[(min(v, w), max(v, w))]
            triangles.append(tuple(sorted((e_uv, e_uw, e_vw))))
    return tuple(sorted(set(triangles)))


def edge_subgraph(graph: SignedGraph, edge_indices: Iterable[int]) -> SignedGraph:
    """Subgraph keeping only the given edges (node namespace preserved)."""
    idx = sorted(set(edge_indices))
    return SignedGraph(graph.node_count, tuple(graph.edges[i] for i in idx), graph.directed)


def _adjacency(graph: SignedGraph) -> dict[int, list[int]]:
    adj: dict[int, set[int]] = {u: set() for u in range(graph.node_count)}
    for e in graph.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)
    return {u: sorted(vs) for u, vs in adj.items()}


def bfs_sample(
    graph: SignedGraph, seed: int, node_budget: int, rng_seed: int
) -> SignedGraph:
    """Induced subgraph on the first ``node_budget`` nodes reached by BFS from
    ``seed``, following both in- and out-links. The seed counts against the
    budget. Frontier ties are broken by shuffling each adjacency list with the
    seeded rng, so the result is a pure function of (graph, seed, rng_seed).
    """
    if not 0 <= seed < graph.node_count:
        raise ValueError(f"seed node {seed} outside graph")
    if node_budget < 1:
        raise ValueError("node_budget must be >= 1")
    rng = np.random.default_rng(rng_seed)
    adj = _adjacency(graph)
    visited = {seed}
    queue = [seed]
    head = 0
    while head < len(queue) and len(visited) < node_budget:
        u = queue[head]
        head += 1
        nbrs = adj[u]
        for j in rng.permutation(len(nbrs)):
            v = nbrs[j]
            if v not in visited:
                visited.add(v)
                queue.append(v)
                if len(visited) >= node_budget:
                    break
    kept = tuple(e for e in graph.edges if e.src in visited and e.dst in visited)
    return SignedGraph(graph.node_count, kept, graph.directed)


def random_edge_partition(
    graph: SignedGraph, folds: int, rng_seed: int
) -> list[frozenset[int]]:
    """Random partition of all edge indices into ``folds`` near-equal parts."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > len(graph.edges):
        raise ValueError(f"cannot split {len(graph.edges)} edges into {folds} folds")
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(len(graph.edges))
    return [frozenset(int(i) for i in chunk) for chunk in np.array_split(perm, folds)]


def apply_evidence_mask(
    graph: SignedGraph,
    edge_pool: Iterable[int],
    evidence_ratio: float,
    rng_seed: int,
    role: str = "test",
) -> EvidencePartition:
    """Reveal a uniformly random fraction of the pool's signs as evidence.

    ``|evidence| = round(evidence_ratio * |pool|)`` (half-up); the remaining
    pool edges are the prediction targets. ``role`` says whether the pool is a
    training or testing pool, which only affects which partition field it
    lands in.
    """
    if not 0.0 <= evidence_ratio <= 1.0:
        raise ValueError("evidence_ratio must be in [0, 1]")
    pool = sorted(set(edge_pool))
    for i in pool:
        if graph.edges[i].sign is Sign.UNKNOWN:
            raise ValueError(f"pool edge {i} has no ground-truth sign")
    count = int(np.floor(evidence_ratio * len(pool) + 0.5))
    rng = np.random.default_rng(rng_seed)
    evidence = frozenset(
        int(i) for i in rng.choice(pool, size=count, replace=False)
    ) if count else frozenset()
    pool_set = frozenset(pool)
    if role == "train":
        return EvidencePartition(pool_set, frozenset(), evidence)
    if role == "test":
        return EvidencePartition(frozenset(), pool_set, evidence)
    raise ValueError(f"role must be 'train' or 'test', got {role!r}")


def partition_from_signs(graph: SignedGraph) -> EvidencePartition:
    """Partition on all edges with the observed signs as evidence; edges whose
    sign is ? are the targets. Used when a file already encodes the split."""
    return EvidencePartition(
        frozenset(),
        frozenset(range(len(graph.edges))),
        frozenset(graph.observed_indices()),
    )


def remove_overlap(test_graph: SignedGraph, train_graph: SignedGraph) -> SignedGraph:
    """Drop from ``test_graph`` every edge also present in ``train_graph``.

    Edge identity is (source, target) for directed graphs and the unordered
    pair otherwise; both graphs must share a node-id namespace and direction
    convention.
    """
    if test_graph.directed != train_graph.directed:
        raise ValueError("graphs disagree on directedness")
    if test_graph.directed:
        train_keys = {(e.src, e.dst) for e in train_graph.edges}
        kept = tuple(e for e in test_graph.edges if (e.src, e.dst) not in train_keys)
    else:
        train_keys = {e.pair for e in train_graph.edges}
        kept = tuple(e for e in test_graph.edges if e.pair not in train_keys)
    return SignedGraph(test_graph.node_count, kept, test_graph.directed)


def generate_synthetic(
    nodes: int,
    edge_prob: float,
    camp_flip_noise: float,
    sentiment_noise: float,
    rng_seed: int,
) -> SignedGraph:
    """Planted two-camp graph with tunable sign and sentiment noise.

    Each node joins one of two camps; the true sign of an edge is positive iff
    its endpoints share a camp, then flipped independently with probability
    ``camp_flip_noise`` (at zero flip noise every triangle has an even number
    of negative edges). The sentiment probability is a Beta(5,2) draw for true
    positives / Beta(2,5) for true negatives, reflected onto the correct side
    of 0.5, then blended with a Uniform(0,1) draw by weight
    ``sentiment_noise`` (1.0 makes p independent of the sign).
    """
    for name, v in [
        ("edge_prob", edge_prob),
        ("camp_flip_noise", camp_flip_noise),
        ("sentiment_noise", sentiment_noise),
    ]:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must be in [0, 1]")
    rng = np.random.default_rng(rng_seed)
    camps = rng.integers(0, 2, size=nodes)
    iu, ju = np.triu_indices(nodes, k=1)
    selected = rng.random(len(iu)) < edge_prob
    src = iu[selected]
    dst = ju[selected]
    m = len(src)
    same_camp = camps[src] == camps[dst]
    flips = rng.random(m) < camp_flip_noise
    positive = same_camp ^ flips
    a = np.where(positive, 5.0, 2.0)
    b = np.where(positive, 2.0, 5.0)
    beta = rng.beta(a, b) if m else np.empty(0)
    # Reflect wrong-side draws so the noiseless plant always signals correctly.
    beta = np.where(positive, np.maximum(beta, 1.0 - beta), np.minimum(beta, 1.0 - beta))
    uniform = rng.random(m)
    p = (1.0 - sentiment_noise) * beta + sentiment_noise * uniform
    edges = tuple(
        SignedEdge(
            int(src[k]),
            int(dst[k]),
            Sign.POSITIVE if positive[k] else Sign.NEGATIVE,
            float(p[k]),
        )
        for k in range(m)
    )
    return SignedGraph(nodes, edges, directed=False)


def derive_seed(master: int, *tags) -> int:
    """Stable sub-stream seed so components can be varied independently."""
    return zlib.crc32(repr((int(master),) + tags).encode("utf-8"))
