import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blocktc.bcsr import build_block_graph
from blocktc.kernels import (
    LatapyConfig,
    ScratchMap,
    intersect_count,
    task_count_hash,
    task_count_list,
    task_count_list_ops,
    tc_hash,
    tc_latapy,
    tc_list,
)
from blocktc.oracle import brute_force_count, enumerate_triangles
from blocktc.partition import PartitionVector, partition_symmetric
from blocktc.tasking import compose_tasks

from conftest import complete, edge_set, ordered, random_graph, star, triangle_set_by_matrix


def test_intersect_small():
    assert intersect_count([], [1, 2]) == 0
    assert intersect_count([1, 3, 5], [3, 5, 7]) == 2


def test_intersect_does_not_modify_inputs():
    a = np.array([1, 4, 9])
    b = np.array([4, 9, 10])
    intersect_count(a, b)
    assert a.tolist() == [1, 4, 9] and b.tolist() == [4, 9, 10]


def test_intersect_random_vs_set():
    rng = np.random.default_rng(0)
    a = np.sort(rng.choice(10_000, 1000, replace=False))
    b = np.sort(rng.choice(10_000, 1000, replace=False))
    assert intersect_count(a, b) == len(set(a.tolist()) & set(b.tolist()))


@settings(max_examples=100, deadline=None)
@given(st.sets(st.integers(0, 200)), st.sets(st.integers(0, 200)))
def test_intersect_property(a, b):
    assert intersect_count(sorted(a), sorted(b)) == len(a & b)


def test_oracle_agrees_with_trace():
    for seed in range(4):
        g = random_graph(50, 0.2, seed)
        assert brute_force_count(g) == triangle_set_by_matrix(sorted(edge_set(g)))
        assert len(enumerate_triangles(g)) == brute_force_count(g)


def test_oracle_bound():
    with pytest.raises(ValueError):
        brute_force_count(ordered([], 600))


def test_whole_graph_kernels_small():
    k3 = ordered(complete(3))
    assert tc_list(k3) == tc_hash(k3) == 1
    assert tc_list(ordered(complete(5))) == math.comb(5, 3) == 10
    s = ordered(star(9))
    assert tc_list(s) == tc_hash(s) == 0


def test_whole_graph_vs_brute():
    g = random_graph(60, 0.15, seed=1)
    ref = brute_force_count(g)
    assert tc_list(g) == ref
    assert tc_hash(g) == ref


def test_latapy_branches():
    g = random_graph(80, 0.1, seed=2)
    ref = brute_force_count(g)
    assert tc_latapy(g, math.inf) == tc_list(g) == ref
    assert tc_latapy(g, 0) == tc_hash(g) == ref
    for k in (2, 8, 32):
        assert tc_latapy(g, LatapyConfig(k)) == ref


def test_latapy_rejects_negative_k():
    with pytest.raises(ValueError):
        LatapyConfig(-1)
    with pytest.raises(ValueError):
        tc_latapy(ordered(complete(3)), -1)


def test_scratch_reuse_across_graphs():
    scratch = ScratchMap(100)
    for seed in range(5):
        g = random_graph(100, 0.1, seed)
        assert tc_hash(g, scratch) == tc_list(g)


def test_scratch_too_small():
    with pytest.raises(ValueError):
        tc_hash(ordered(complete(5)), ScratchMap(3))


def _tasks(bg):
    return [(t, *t.blocks(bg)) for t in compose_tasks(bg)]


def test_single_block_task_equals_whole_graph():
    g = random_graph(60, 0.15, 4)
    bg = build_block_graph(g, PartitionVector([0, g.n]))
    a = bg.block(0, 0)
    assert task_count_list(a, a, a) == tc_list(g)
    assert task_count_hash(a, a, a, ScratchMap(g.n)) == tc_hash(g)


def test_empty_first_block_gives_zero():
    g = ordered(complete(4) + [(10, 11)], 12)
    bg = build_block_graph(g, PartitionVector([0, 4, 8, 12]))
    a, b, c = bg.block(0, 1), bg.block(1, 2), bg.block(0, 2)
    assert a.nnz == 0
    assert task_count_list(a, b, c) == 0
    assert task_count_hash(a, b, c, ScratchMap(4)) == 0


def test_empty_middle_block_gives_zero():
    g = ordered(complete(6), 6)
    bg = build_block_graph(g, PartitionVector([0, 3, 3, 6]))
    a, b, c = bg.block(0, 1), bg.block(1, 2), bg.block(0, 2)
    assert b.nnz == 0
    assert task_count_hash(a, b, c, ScratchMap(6)) == 0


def test_p3_task_sum_equals_brute():
    g = random_graph(40, 0.2, seed=5)
    bg = build_block_graph(g, partition_symmetric(g, 3))
    tasks = _tasks(bg)
    assert len(tasks) == 10
    assert sum(task_count_list(a, b, c) for _, a, b, c in tasks) == brute_force_count(g)


@pytest.mark.parametrize("p", [1, 2, 3, 5, 8])
def test_list_and_hash_agree_per_task(p):
    g = random_graph(100, 0.12, seed=p)
    bg = build_block_graph(g, partition_symmetric(g, p))
    scratch = ScratchMap(bg.max_part_size())
    for _, a, b, c in _tasks(bg):
        n_list = task_count_list(a, b, c)
        assert task_count_hash(a, b, c, scratch) == n_list
        assert task_count_list_ops(a, b, c)[0] == n_list


@pytest.mark.parametrize("p", [2, 3, 5, 8])
def test_per_task_counts_match_enumeration(p):
    g = random_graph(100, 0.1, seed=10 + p)
    pv = partition_symmetric(g, p)
    bg = build_block_graph(g, pv)
    expected = Counter(tuple(pv.part_of(list(tri)).tolist()) for tri in enumerate_triangles(g))
    for t, a, b, c in _tasks(bg):
        assert task_count_list(a, b, c) == expected.get(t.triplet, 0)


def test_geometry_mismatch_rejected():
    g = random_graph(30, 0.2, 0)
    bg = build_block_graph(g, partition_symmetric(g, 3))
    with pytest.raises(ValueError):
        task_count_list(bg.block(0, 1), bg.block(0, 2), bg.block(0, 2))
    with pytest.raises(ValueError):
        task_count_hash(bg.block(0, 0), bg.block(1, 1), bg.block(0, 1), ScratchMap(30))


def test_task_scratch_too_small():
    g = random_graph(30, 0.2, 0)
    bg = build_block_graph(g, PartitionVector([0, 30]))
    a = bg.block(0, 0)
    with pytest.raises(ValueError):
        task_count_hash(a, a, a, ScratchMap(10))


def test_scratch_keys_never_repeat():
    s = ScratchMap(4)
    first = s.reserve(3)
    second = s.reserve(5)
    assert second >= first + 3
