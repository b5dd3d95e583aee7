"""Shared fixtures: the two worked desiderata networks and weight settings."""

import pytest

from edgesign.graph import EvidencePartition, Sign, SignedEdge, SignedGraph
from edgesign.potentials import CostWeights


@pytest.fixture
def simple_balance_weights() -> CostWeights:
    """Unit edge costs, unit cost on unbalanced triangle classes (0 and 2
    positives), free balanced classes, no prior."""
    return CostWeights((1.0,) * 10, (1.0,) * 10, (1.0, 0.0, 1.0, 0.0), 0.0, 0.5)


@pytest.fixture
def binned_balance_weights() -> CostWeights:
    """Balance-consistent weights with the characteristic learned shape:
    expensive extreme sentiment bins, cheap middle bins, strong unbalanced
    triangle costs, and a positive prior."""
    lam = (2.0, 2.0, 2.0, 0.1, 0.1, 0.1, 0.1, 2.0, 2.0, 2.0)
    return CostWeights(lam, lam, (8.0, 0.0, 8.0, 0.0), 0.5, 0.76)


@pytest.fixture
def teasing_network() -> tuple[SignedGraph, EvidencePartition]:
    """Two triangles sharing one unknown edge whose comment reads negative
    (p = 0.2) while all four observed context edges are positive."""
    edges = (
        SignedEdge(0, 1, Sign.UNKNOWN, 0.2),
        SignedEdge(0, 2, Sign.POSITIVE),
        SignedEdge(1, 2, Sign.POSITIVE),
        SignedEdge(0, 3, Sign.POSITIVE),
        SignedEdge(1, 3, Sign.POSITIVE),
    )
    graph = SignedGraph(4, edges)
    partition = EvidencePartition(
        frozenset(), frozenset(range(5)), frozenset({1, 2, 3, 4})
    )
    return graph, partition


@pytest.fixture
def sparse_triangle_network() -> tuple[SignedGraph, EvidencePartition]:
    """One triangle with a single observed positive edge; the upper unknown
    edge has a clearly positive comment (p = 0.95), the lower one an
    uninformative comment (p = 0.5)."""
    edges = (
        SignedEdge(0, 1, Sign.UNKNOWN, 0.5),
        SignedEdge(1, 2, Sign.UNKNOWN, 0.95),
        SignedEdge(0, 2, Sign.POSITIVE),
    )
    graph = SignedGraph(3, edges)
    partition = EvidencePartition(frozenset(), frozenset(range(3)), frozenset({2}))
    return graph, partition
