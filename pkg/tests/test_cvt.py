"""CVT containers: k-means behavior, centroid construction, cell rules."""

import numpy as np
import pytest

import aurora_qd.cvt as cvt_mod
from aurora_qd import (AddStatus, BallisticTask, CentroidSet, CvtGrid,
                       Individual, LloydKMeans, build_blind_centroids,
                       build_prior_centroids, nearest_centroids)


def make_ind(sensory, fitness=0.0):
    s = np.asarray(sensory, dtype=float)
    return Individual(genotype=np.zeros(2), sensory=s, descriptor=s.copy(),
                      fitness=fitness)


def sorted_rows(a):
    return a[np.lexsort(a.T[::-1])]


# ----------------------------------------------------------------- k-means

def test_kmeans_with_k_equal_n_returns_the_points(rng):
    X = rng.uniform(0, 1, (40, 3))
    model = LloydKMeans(n_clusters=40, random_state=0).fit(X)
    np.testing.assert_allclose(sorted_rows(model.cluster_centers_),
                               sorted_rows(X), atol=1e-12)
    # The expansion-based distances leave rounding noise around 1e-15.
    assert model.inertia_ == pytest.approx(0.0, abs=1e-9)


def test_kmeans_k1_is_the_mean(rng):
    X = rng.normal(size=(100, 4))
    model = LloydKMeans(n_clusters=1, random_state=0).fit(X)
    np.testing.assert_allclose(model.cluster_centers_[0], X.mean(axis=0),
                               rtol=1e-12)


def test_kmeans_two_separated_clusters(rng):
    a = rng.normal(0.0, 0.05, (50, 2))
    b = rng.normal(10.0, 0.05, (50, 2))
    X = np.vstack([a, b])
    model = LloydKMeans(n_clusters=2, random_state=1).fit(X)
    centers = sorted_rows(model.cluster_centers_)
    np.testing.assert_allclose(centers[0], a.mean(axis=0), atol=1e-9)
    np.testing.assert_allclose(centers[1], b.mean(axis=0), atol=1e-9)
    # Labels agree with the construction.
    labels = model.labels_
    assert len(set(labels[:50])) == 1 and len(set(labels[50:])) == 1
    assert labels[0] != labels[-1]


def test_kmeans_inertia_path_non_increasing(rng):
    X = rng.uniform(0, 1, (300, 5))
    model = LloydKMeans(n_clusters=10, random_state=2).fit(X)
    path = np.asarray(model.inertia_path_)
    assert np.all(np.diff(path) <= 1e-9)
    assert model.n_iter_ == len(path) <= model.max_iter


def test_kmeans_more_clusters_than_points(rng):
    X = rng.uniform(0, 1, (5, 2))
    model = LloydKMeans(n_clusters=8, random_state=3).fit(X)
    assert model.cluster_centers_.shape == (8, 2)
    assert model.inertia_ == pytest.approx(0.0, abs=1e-20)


def test_kmeans_duplicate_points(rng):
    X = np.tile(rng.uniform(0, 1, (3, 2)), (10, 1))
    model = LloydKMeans(n_clusters=3, random_state=4).fit(X)
    np.testing.assert_allclose(sorted_rows(model.cluster_centers_),
                               sorted_rows(np.unique(X, axis=0)), atol=1e-12)


def test_kmeans_deterministic(rng):
    X = rng.uniform(0, 1, (200, 4))
    a = LloydKMeans(n_clusters=7, random_state=11).fit(X)
    b = LloydKMeans(n_clusters=7, random_state=11).fit(X)
    np.testing.assert_array_equal(a.cluster_centers_, b.cluster_centers_)


def test_predict_matches_brute_force(rng):
    X = rng.uniform(0, 1, (200, 6))
    model = LloydKMeans(n_clusters=12, random_state=5).fit(X)
    queries = rng.uniform(0, 1, (500, 6))
    got = model.predict(queries)
    diff = queries[:, None, :] - model.cluster_centers_[None, :, :]
    expected = np.argmin((diff ** 2).sum(-1), axis=1)
    np.testing.assert_array_equal(got, expected)


def test_nearest_centroids_chunked_path(rng, monkeypatch):
    # Shrink the block budget so several blocks are exercised.
    monkeypatch.setattr(cvt_mod, "_CHUNK_ELEMENTS", 1000)
    points = rng.uniform(0, 1, (300, 10))
    centroids = rng.uniform(0, 1, (50, 10))
    idx, dist2 = nearest_centroids(points, centroids, return_distances=True)
    diff = points[:, None, :] - centroids[None, :, :]
    d2 = (diff ** 2).sum(-1)
    np.testing.assert_array_equal(idx, np.argmin(d2, axis=1))
    np.testing.assert_allclose(dist2, d2.min(axis=1), atol=1e-9)
    assert np.all(dist2 >= 0.0)


def test_nearest_centroids_validation(rng):
    with pytest.raises(ValueError):
        nearest_centroids(rng.normal(size=(5, 3)), rng.normal(size=(4, 2)))


# ------------------------------------------------------------- centroid sets

def test_blind_centroids_within_bounds():
    bounds = np.stack([np.zeros(10), np.arange(1.0, 11.0)])
    cs = build_blind_centroids(bounds, k=500, seed=3)
    assert cs.centroids.shape == (500, 10)
    assert cs.kind == "blind" and cs.seed == 3 and cs.k == 500 and cs.dim == 10
    assert np.all(cs.centroids >= bounds[0])
    assert np.all(cs.centroids <= bounds[1])
    cs2 = build_blind_centroids(bounds, k=500, seed=3)
    np.testing.assert_array_equal(cs.centroids, cs2.centroids)


def test_blind_centroids_refined():
    bounds = np.array([[0.0, 0.0], [1.0, 1.0]])
    cs = build_blind_centroids(bounds, k=20, seed=0, refine=True, max_iter=20)
    assert cs.centroids.shape == (20, 2)
    assert np.all(cs.centroids >= 0.0) and np.all(cs.centroids <= 1.0)


def test_blind_centroids_bad_bounds():
    with pytest.raises(ValueError):
        build_blind_centroids(np.array([[1.0, 1.0], [0.0, 0.0]]), k=5)


def test_prior_centroids_from_ballistic_grid():
    task = BallisticTask()
    cs = build_prior_centroids(task, n_samples=25, k=25, seed=0)
    assert cs.kind == "prior"
    assert cs.centroids.shape == (25, 100)
    # The grid contains duplicate trajectories (every zero-force genotype
    # flies the same), so compare as point sets: each center coincides
    # with a sample and each sample with a center.
    data = task.sensory_batch(task.prior_genotypes(25))
    _, d2_centers = nearest_centroids(cs.centroids, data, return_distances=True)
    _, d2_samples = nearest_centroids(data, cs.centroids, return_distances=True)
    assert d2_centers.max() < 1e-9
    assert d2_samples.max() < 1e-9


def test_centroid_set_validates_matrix():
    with pytest.raises(ValueError):
        CentroidSet(np.zeros(3))


# ----------------------------------------------------------------- CvtGrid

def grid_from(points):
    return CvtGrid(CentroidSet(np.asarray(points, dtype=float)))


def test_cvt_one_individual_per_cell():
    grid = grid_from([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert grid.try_add(make_ind([0.1, 0.0])).status is AddStatus.ADDED
    assert grid.try_add(make_ind([0.9, 0.1])).status is AddStatus.ADDED
    assert len(grid) == 2
    # Same cell, equal fitness: incumbent stays.
    result = grid.try_add(make_ind([0.2, 0.0]))
    assert result.status is AddStatus.REJECTED
    assert len(grid) == 2


def test_cvt_fitness_duel():
    grid = grid_from([[0.0, 0.0], [5.0, 5.0]])
    grid.try_add(make_ind([0.0, 0.1], fitness=1.0))
    result = grid.try_add(make_ind([0.1, 0.0], fitness=2.0))
    assert result.status is AddStatus.REPLACED
    assert result.replaced.fitness == 1.0
    assert grid.individuals[0].fitness == 2.0


def test_cvt_hint_agrees_with_cell_of(rng):
    centroids = rng.uniform(0, 1, (30, 4))
    grid = CvtGrid(CentroidSet(centroids))
    batch = rng.uniform(0, 1, (50, 4))
    hints = grid.prepare_batch(batch)
    for row, hint in zip(batch, hints):
        assert grid.cell_of(row) == int(hint)


def test_cvt_uniform_parent_sampling(rng):
    grid = grid_from([[0.0, 0.0], [3.0, 0.0], [6.0, 0.0]])
    for x in (0.0, 3.0, 6.0):
        grid.try_add(make_ind([x, 0.0]))
    parents = grid.sample_parents(60_000, rng)
    freq = np.bincount([int(p.descriptor[0] // 3) for p in parents],
                       minlength=3) / 60_000
    np.testing.assert_allclose(freq, [1 / 3] * 3, atol=0.01)
    with pytest.raises(ValueError):
        grid_from([[0.0, 0.0]]).sample_parents(1, rng)


def test_cvt_interface_conventions(rng):
    grid = grid_from([[0.0, 0.0], [1.0, 1.0]])
    assert grid.l is None
    assert grid.prepare(np.zeros((2, 2))) is None
    ind = make_ind([0.0, 0.1])
    grid.try_add(ind)
    assert grid.on_result(ind, None) is None  # no curiosity feedback
    np.testing.assert_array_equal(grid.descriptors(), [[0.0, 0.1]])
    assert grid.sensory_matrix().shape == (1, 2)
