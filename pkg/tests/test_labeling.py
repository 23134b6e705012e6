import numpy as np
import pytest
from hypothesis import given, strategies as st

from nnshift import (AscentResult, Clustering, DataError, Dataset, EpsParams,
                     eps_proximity_partitioned, estimate_epsilon, local_eps_proximity,
                     merge_bucket_clusters, min_max_normalize, nmi, prototype_labeling)
from nnshift.datasets import load_hepta
from nnshift.labeling import (ClusterGraph, UnionFind, bucket_size_warnings,
                              partitioned_labeling, relabel_by_first_member, write_graph_dump)

from oracles import eps_graph_components, same_partition


def _line(*xs):
    return Dataset(np.reshape(xs, (-1, 1)))


def test_estimate_grid():
    assert estimate_epsilon(_line(0, 1, 2, 3), 1, m1=1) == pytest.approx(1.0)


def test_estimate_coincident():
    assert estimate_epsilon(_line(4, 4), 1) == 0.0


def test_estimate_hand_enumeration():
    assert estimate_epsilon(_line(0, 1, 3), 2, m1=1) == pytest.approx(2.0)


def test_estimate_needs_more_points():
    with pytest.raises(DataError):
        estimate_epsilon(_line(0, 1, 3), 3)


def test_local_examples():
    lab = local_eps_proximity([[0], [1], [2], [10]], 1.5).labels
    assert lab.tolist() == [0, 0, 0, 1]
    assert local_eps_proximity([[0], [1], [3]], 0).labels.tolist() == [0, 1, 2]
    assert local_eps_proximity([[0, 0], [3, 4], [1, 1]], 5.0).n_clusters == 1


def test_local_discovery_order():
    # the second component is seeded from point 1, the first unexplored after component 0
    lab = local_eps_proximity([[0], [10], [0.5], [10.5], [20]], 1.0).labels
    assert lab.tolist() == [0, 1, 0, 1, 2]


def test_local_negative_eps():
    with pytest.raises(DataError):
        local_eps_proximity([[0]], -1)


@given(st.integers(0, 2**32 - 1), st.integers(1, 200), st.integers(1, 4))
def test_local_matches_eps_graph(seed, n, d):
    rng = np.random.default_rng(seed)
    pts = rng.random((n, d))
    eps = float(rng.uniform(0, 0.5))
    got = local_eps_proximity(pts, eps).labels
    assert same_partition(got, eps_graph_components(pts, eps))


@given(st.integers(0, 2**32 - 1))
def test_local_monotone_in_eps(seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((60, 2))
    counts = [local_eps_proximity(pts, e).n_clusters for e in np.linspace(0, 0.5, 8)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_merge_single_bucket_is_identity():
    pts = np.array([[0.0], [5.0], [0.1]])
    local = local_eps_proximity(pts, 0.5).labels
    out, graph = merge_bucket_clusters(pts, [np.arange(3)], [local], 0.5)
    assert out.labels.tolist() == local.tolist()
    assert graph.edges == []


def _chain_buckets():
    left = np.round(np.arange(4.0, 4.95, 0.3), 1)   # 4.0 4.3 4.6 4.9
    right = np.round(np.arange(5.0, 6.0, 0.3), 1)   # 5.0 5.3 5.6 5.9
    pts = np.concatenate([left, right]).reshape(-1, 1)
    ids = [np.arange(4), np.arange(4, 8)]
    local = [local_eps_proximity(pts[i], 0.35).labels for i in ids]
    return pts, ids, local


def test_merge_one_linking_pair():
    pts, ids, local = _chain_buckets()
    out, graph = merge_bucket_clusters(pts, ids, local, 0.2, k3=1)
    assert out.n_clusters == 1 and graph.edges == [(0, 1)]


def test_merge_threshold_not_met():
    pts, ids, local = _chain_buckets()
    out, _ = merge_bucket_clusters(pts, ids, local, 0.2, k3=2)
    assert out.labels.tolist() == [0] * 4 + [1] * 4


def test_partitioned_single_bucket_equals_local():
    rng = np.random.default_rng(0)
    ds = Dataset(rng.random((300, 2)))
    a = eps_proximity_partitioned(ds, EpsParams(eps2=0.05, m1=1)).labels
    b = local_eps_proximity(ds.points, 0.05).labels
    assert np.array_equal(a, b)


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_two_separated_blobs(seed, m1):
    rng = np.random.default_rng(seed)
    pts = np.vstack([rng.normal(0, 0.02, (50, 2)), rng.normal(1, 0.02, (50, 2))])
    ds = Dataset(pts)
    eps2 = 0.2
    got = eps_proximity_partitioned(ds, EpsParams(eps2=eps2, m1=m1, seed=seed % 1000)).labels
    truth = eps_graph_components(pts, eps2)
    assert len(set(truth)) == 2
    assert same_partition(got, truth)


@given(st.integers(0, 2**32 - 1), st.integers(1, 10), st.integers(1, 3))
def test_partitioned_never_splits_and_merges_soundly(seed, m1, k3):
    rng = np.random.default_rng(seed)
    pts = rng.random((150, 2))
    eps2 = float(rng.uniform(0.02, 0.15))
    ds = Dataset(pts)
    out, graph, idx, _ = partitioned_labeling(ds, EpsParams(eps2=eps2, m1=m1, k3=k3,
                                                           seed=seed % 1000))
    truth = eps_graph_components(pts, eps2)
    # any final cluster lies inside one true component ...
    for c in range(out.n_clusters):
        assert len(set(truth[out.labels == c])) == 1
    # ... and bucket-local clusters are never split
    for b in idx.buckets:
        if len(b):
            local = local_eps_proximity(pts[np.sort(b)], eps2).labels
            for c in set(local.tolist()):
                assert len(set(out.labels[np.sort(b)][local == c])) == 1
    labs = out.labels
    assert set(labs.tolist()) == set(range(out.n_clusters))


def test_partitioned_deterministic_across_workers():
    rng = np.random.default_rng(3)
    ds = Dataset(rng.random((4000, 2)))
    p = EpsParams(eps2=0.01, m1=8, seed=5)
    a = eps_proximity_partitioned(ds, p, workers=1).labels
    b = eps_proximity_partitioned(ds, p, workers=4).labels
    assert np.array_equal(a, b)


def test_hepta_labeling_quality():
    ds = min_max_normalize(load_hepta())[0]
    c = eps_proximity_partitioned(ds, EpsParams(eps_knn=10, m1=4))
    assert nmi(ds.truth, c) >= 0.9
    # the seven largest clusters are the seven true clusters
    sizes = np.bincount(c.labels)
    for lab in np.argsort(sizes)[-7:]:
        assert len(set(ds.truth[c.labels == lab].tolist())) == 1


def test_prototype_labeling_examples():
    same = AscentResult(np.ones((4, 2)), np.ones(4, int), np.ones(4, bool))
    assert prototype_labeling(same, 0.0).n_clusters == 1
    distinct = AscentResult(np.arange(4.0).reshape(-1, 1), np.ones(4, int), np.ones(4, bool))
    assert prototype_labeling(distinct, 0.0).n_clusters == 4
    chain = AscentResult(np.array([[0.0], [1e-7], [5.0]]), np.ones(3, int), np.ones(3, bool))
    assert prototype_labeling(chain, 1e-6).labels.tolist() == [0, 0, 1]


def test_relabel_by_first_member():
    assert relabel_by_first_member([5, 5, 2, 9, 2]).tolist() == [0, 0, 1, 2, 1]
    assert relabel_by_first_member([3, -1, 1]).tolist() == [0, -1, 1]


def test_clustering_noise_and_metric_labels():
    c = Clustering([0, -1, 1, -1])
    assert c.n_clusters == 2 and c.n_noise == 2
    assert c.metric_labels().tolist() == [0, 2, 1, 3]


def test_union_find_and_graph():
    uf = UnionFind(4)
    assert uf.union(0, 1) and not uf.union(1, 0)
    g = ClusterGraph(vertices=[(0, 0), (0, 1), (1, 0)], edges=[(0, 2)])
    comp = g.components()
    assert comp[0] == comp[2] != comp[1]


def test_eps_params_validation():
    for bad in (dict(eps2=-1.0), dict(eps_knn=0), dict(k3=0), dict(m1=0)):
        with pytest.raises(DataError):
            EpsParams(**bad)


@pytest.mark.parametrize("sizes,fires", [([500, 2000], False), ([499, 800], True),
                                         ([2001], True), ([1000] * 5, False), ([0, 1000], True)])
def test_bucket_advisory(sizes, fires):
    assert bool(bucket_size_warnings(sizes)) == fires


def test_graph_dump(tmp_path):
    pts, ids, local = _chain_buckets()
    out, graph = merge_bucket_clusters(pts, ids, local, 0.2)
    write_graph_dump(graph, out, ids, local, tmp_path / "g.csv")
    rows = (tmp_path / "g.csv").read_text().splitlines()
    assert rows == ["bucket,local_cluster,global_label", "0,0,0", "1,0,0"]
