"""Spin-glass instances, the star reduction, and correspondence certificates."""

import io
import itertools

import numpy as np
import pytest

from edgesign.graph import Sign
from edgesign.reduction import (
    TlsgInstance,
    balance_cost,
    brute_force_balance,
    brute_force_tlsg,
    grid_edges,
    parse_tlsg,
    random_instance,
    reduce_to_triangle_balance,
    tlsg_energy,
    verify_correspondence,
    write_tlsg,
)


def all_zero(width, height):
    return TlsgInstance(width, height, (0,) * len(grid_edges(width, height)))


class TestTopology:
    def test_2x2_grid_edge_count(self):
        # Per level: 2 right + 2 down; plus 4 vertical = 12.
        assert len(grid_edges(2, 2)) == 12

    def test_1x1_single_vertical_edge(self):
        assert grid_edges(1, 1) == ((0, 1),)

    def test_base_graph_is_triangle_free(self):
        for w, h in [(1, 1), (2, 2), (3, 2), (4, 3)]:
            inst = all_zero(w, h)
            out = reduce_to_triangle_balance(inst)
            base_edges = [
                e for i, e in enumerate(out.graph.edges) if i >= inst.vertex_count
            ]
            from edgesign.graph import SignedGraph, enumerate_triangles

            base = SignedGraph(inst.vertex_count, tuple(base_edges))
            assert enumerate_triangles(base) == ()

    def test_instance_validates_costs(self):
        with pytest.raises(ValueError):
            TlsgInstance(2, 2, (2,) * 12)
        with pytest.raises(ValueError):
            TlsgInstance(2, 2, (0,) * 11)


class TestEnergy:
    def test_single_edge_equal_spins(self):
        inst = TlsgInstance(1, 1, (1,))
        assert tlsg_energy(inst, [1, 1]) == -1.0
        assert tlsg_energy(inst, [-1, -1]) == -1.0
        assert tlsg_energy(inst, [1, -1]) == 1.0

    def test_zero_costs_zero_energy(self):
        inst = all_zero(2, 2)
        rng = np.random.default_rng(0)
        for _ in range(10):
            spins = rng.choice([-1, 1], inst.vertex_count)
            assert tlsg_energy(inst, spins) == 0.0

    def test_global_flip_invariance(self):
        inst = random_instance(2, 2, 5)
        rng = np.random.default_rng(1)
        for _ in range(20):
            spins = rng.choice([-1, 1], inst.vertex_count)
            assert tlsg_energy(inst, spins) == tlsg_energy(inst, -spins)


class TestBruteForceTlsg:
    def test_1x1_positive_coupling(self):
        inst = TlsgInstance(1, 1, (1,))
        energy, spins = brute_force_tlsg(inst)
        assert energy == -1.0
        assert spins[0] == spins[1]

    def test_all_zero_costs(self):
        energy, spins = brute_force_tlsg(all_zero(2, 2))
        assert energy == 0.0
        assert np.all(spins == -1)  # lexicographic tie-break

    def test_matches_exhaustive_recomputation(self):
        inst = random_instance(2, 2, 11)
        energy, spins = brute_force_tlsg(inst)
        ref = min(
            tlsg_energy(inst, s)
            for s in itertools.product((-1, 1), repeat=inst.vertex_count)
        )
        assert energy == ref
        assert tlsg_energy(inst, spins) == ref

    def test_refuses_large_instances(self):
        with pytest.raises(ValueError):
            brute_force_tlsg(all_zero(4, 3))


class TestReduction:
    def test_construction_counts(self):
        inst = random_instance(2, 2, 3)
        out = reduce_to_triangle_balance(inst)
        n, m = inst.vertex_count, len(inst.edges)
        assert out.graph.node_count == n + 1
        assert len(out.graph.edges) == n + m
        assert len(out.graph.triangles) == m
        assert out.star_vertex == n

    def test_all_signs_unknown_and_costs_absent(self):
        out = reduce_to_triangle_balance(random_instance(2, 2, 4))
        assert all(e.sign is Sign.UNKNOWN for e in out.graph.edges)
        assert all(e.p is None for e in out.graph.edges)

    def test_bijections(self):
        inst = random_instance(3, 2, 5)
        out = reduce_to_triangle_balance(inst)
        assert sorted(out.vertex_to_edge) == list(range(inst.vertex_count))
        assert len(set(out.vertex_to_edge.values())) == inst.vertex_count
        assert sorted(out.edge_to_triangle) == list(range(len(inst.edges)))
        assert sorted(out.edge_to_triangle.values()) == list(
            range(len(out.graph.triangles))
        )

    def test_zero_cost_edge_constant_table(self):
        inst = all_zero(1, 1)
        out = reduce_to_triangle_balance(inst)
        assert np.all(out.triangle_tables[0] == 1.0)

    def test_tables_ignore_base_coordinate(self):
        out = reduce_to_triangle_balance(random_instance(2, 2, 6))
        for table in out.triangle_tables:
            assert np.array_equal(table[:, :, 0], table[:, :, 1])

    def test_offset_identity_exhaustive(self):
        # Total triangle cost = |E| + H(spins) for every assignment, checked
        # exhaustively on instances up to 12 vertices.
        for w, h, seed in [(1, 1, 0), (2, 1, 1), (2, 2, 2), (3, 2, 3)]:
            inst = random_instance(w, h, seed)
            out = reduce_to_triangle_balance(inst)
            n, m = inst.vertex_count, len(inst.edges)
            for bits in itertools.product((0, 1), repeat=n):
                spins = 2 * np.asarray(bits) - 1
                full = np.concatenate([np.asarray(bits), np.zeros(m, dtype=int)])
                assert balance_cost(out, full) == m + tlsg_energy(inst, spins)

    def test_balance_cost_independent_of_base_edges(self):
        inst = random_instance(2, 2, 7)
        out = reduce_to_triangle_balance(inst)
        n, m = inst.vertex_count, len(inst.edges)
        rng = np.random.default_rng(8)
        for _ in range(20):
            stars = rng.integers(0, 2, n)
            a = np.concatenate([stars, rng.integers(0, 2, m)])
            b = np.concatenate([stars, rng.integers(0, 2, m)])
            assert balance_cost(out, a) == balance_cost(out, b)

    def test_z2_symmetry_of_balance_objective(self):
        inst = random_instance(2, 2, 9)
        out = reduce_to_triangle_balance(inst)
        n, m = inst.vertex_count, len(inst.edges)
        rng = np.random.default_rng(10)
        for _ in range(20):
            stars = rng.integers(0, 2, n)
            full = np.concatenate([stars, np.zeros(m, dtype=int)])
            flipped = np.concatenate([1 - stars, np.zeros(m, dtype=int)])
            assert balance_cost(out, full) == balance_cost(out, flipped)

    def test_minimum_matches_offset_identity(self):
        inst = TlsgInstance(2, 2, (1,) * 12)
        out = reduce_to_triangle_balance(inst)
        min_b, _ = brute_force_balance(out)
        min_h, _ = brute_force_tlsg(inst)
        assert min_b == len(inst.edges) + min_h


class TestVerifyCorrespondence:
    def test_hundred_random_instances(self):
        for seed in range(100):
            cert = verify_correspondence(random_instance(2, 2, seed))
            assert cert.passed, cert.checks

    def test_all_zero_instance(self):
        cert = verify_correspondence(all_zero(2, 2))
        assert cert.passed
        assert cert.min_energy == 0.0
        assert cert.min_balance_cost == len(grid_edges(2, 2))

    def test_single_edge_instance(self):
        cert = verify_correspondence(TlsgInstance(1, 1, (1,)))
        assert cert.passed
        assert cert.min_energy == -1.0
        # Optimal hub-edge signs equal: both endpoints get the same sign.
        assert cert.star_signs_witness[0] == cert.star_signs_witness[1]

    def test_refuses_large_instances(self):
        with pytest.raises(ValueError):
            verify_correspondence(all_zero(4, 2))

    def test_certificate_json(self):
        cert = verify_correspondence(random_instance(2, 1, 3))
        buf = io.StringIO()
        cert.save(buf)
        import json

        data = json.loads(buf.getvalue())
        assert data["passed"] is True
        assert "objective_identity" in data["checks"]


class TestTlsgIO:
    def test_round_trip(self):
        inst = random_instance(3, 2, 12)
        buf = io.StringIO()
        write_tlsg(inst, buf)
        assert parse_tlsg(io.StringIO(buf.getvalue())) == inst

    def test_rejects_wrong_topology(self):
        from edgesign.graph import ParseError

        with pytest.raises(ParseError):
            parse_tlsg(io.StringIO("2 2\n0 5 1\n"))

    def test_rejects_missing_edges(self):
        from edgesign.graph import ParseError

        with pytest.raises(ParseError):
            parse_tlsg(io.StringIO("1 1\n"))

    def test_accepts_any_edge_order(self):
        inst = random_instance(2, 1, 13)
        buf = io.StringIO()
        write_tlsg(inst, buf)
        lines = buf.getvalue().strip().splitlines()
        reordered = "\n".join([lines[0]] + list(reversed(lines[1:]))) + "\n"
        assert parse_tlsg(io.StringIO(reordered)) == inst
