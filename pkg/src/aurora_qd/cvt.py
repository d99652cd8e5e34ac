"""Centroidal Voronoi tessellation baseline over the raw sensory space.

Instead of learning a low-dimensional descriptor, this container
discretizes the 100-D sensory space directly: a fixed set of centroids
(from a prior dataset or blind uniform sampling) defines the cells, each
cell holds at most one individual, and parents are drawn uniformly from
the filled cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .archive import AddResult, AddStatus
from .validation import check_matrix

# Cap on the scratch size of a distance block, in elements.
_CHUNK_ELEMENTS = 8_000_000


def nearest_centroids(points, centroids, return_distances=False):
    """Index of the closest centroid for every point, computed in blocks.

    Distances use the expansion |x - c|^2 = |x|^2 - 2 x.c + |c|^2 so each
    block is one matrix product; block size is bounded to keep the scratch
    allocation small even with very many centroids.
    """
    x = np.ascontiguousarray(points, dtype=np.float64)
    c = np.ascontiguousarray(centroids, dtype=np.float64)
    if x.ndim != 2 or c.ndim != 2 or x.shape[1] != c.shape[1]:
        raise ValueError("points and centroids must be 2-D with matching columns")
    c_norm = np.einsum("ij,ij->i", c, c)
    rows = max(1, _CHUNK_ELEMENTS // max(c.shape[0], 1))
    idx = np.empty(x.shape[0], dtype=np.int64)
    dist2 = np.empty(x.shape[0]) if return_distances else None
    for start in range(0, x.shape[0], rows):
        block = x[start:start + rows]
        d2 = c_norm[None, :] - 2.0 * (block @ c.T)
        best = np.argmin(d2, axis=1)
        idx[start:start + rows] = best
        if return_distances:
            x_norm = np.einsum("ij,ij->i", block, block)
            picked = d2[np.arange(block.shape[0]), best] + x_norm
            dist2[start:start + rows] = np.maximum(picked, 0.0)
    if return_distances:
        return idx, dist2
    return idx


class LloydKMeans(ClusterMixin, BaseEstimator):
    """Plain Lloyd's algorithm with k-means++ seeding.

    Iterates assignment and mean updates until assignments are stable or
    ``max_iter`` is reached; empty clusters are reseeded to the point
    farthest from its current centroid. ``inertia_path_`` records the
    within-cluster sum of squares at each assignment step.
    """

    def __init__(self, n_clusters, max_iter=100, random_state=None):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.random_state = random_state

    def _seed(self, X, rng):
        n = X.shape[0]
        k = self.n_clusters
        if k > n:
            # Not enough points for distinct seeds; draw with replacement.
            return X[rng.integers(0, n, size=k)].copy()
        centers = np.empty((k, X.shape[1]))
        first = int(rng.integers(n))
        centers[0] = X[first]
        closest = np.einsum("ij,ij->i", X - centers[0], X - centers[0])
        for i in range(1, k):
            total = closest.sum()
            if total <= 0.0:
                # All remaining points coincide with a chosen center.
                centers[i:] = X[rng.integers(0, n, size=k - i)]
                break
            probs = closest / total
            nxt = int(rng.choice(n, p=probs))
            centers[i] = X[nxt]
            diff = X - centers[i]
            closest = np.minimum(closest, np.einsum("ij,ij->i", diff, diff))
        return centers

    def fit(self, X, y=None):
        X = check_matrix(X, name="X")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be at least 1")
        rng = np.random.default_rng(self.random_state)
        centers = self._seed(X, rng)
        labels = None
        inertia_path = []
        for _ in range(self.max_iter):
            new_labels, dist2 = nearest_centroids(X, centers, return_distances=True)
            inertia_path.append(float(dist2.sum()))
            if labels is not None and np.array_equal(new_labels, labels):
                labels = new_labels
                break
            labels = new_labels
            for ci in range(self.n_clusters):
                members = labels == ci
                if np.any(members):
                    centers[ci] = X[members].mean(axis=0)
                else:
                    centers[ci] = X[int(np.argmax(dist2))]
                    dist2[int(np.argmax(dist2))] = 0.0
        self.cluster_centers_ = centers
        self.labels_ = labels
        self.inertia_path_ = inertia_path
        self.inertia_ = inertia_path[-1]
        self.n_iter_ = len(inertia_path)
        return self

    def predict(self, X):
        X = check_matrix(X, n_cols=self.cluster_centers_.shape[1], name="X")
        return nearest_centroids(X, self.cluster_centers_)


@dataclass(frozen=True)
class CentroidSet:
    """A fixed centroid collection defining the cells of a CVT container."""

    centroids: np.ndarray
    kind: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "centroids",
            np.ascontiguousarray(check_matrix(self.centroids, name="centroids")),
        )

    @property
    def k(self):
        return self.centroids.shape[0]

    @property
    def dim(self):
        return self.centroids.shape[1]


def build_prior_centroids(task, n_samples=10000, k=10000, seed=None, max_iter=100):
    """Centroids from trajectories of a genotype grid of the task.

    The grid is simulated, the flattened trajectories are clustered with
    k-means, and the centers become the cells. With ``n_samples == k`` the
    clustering converges immediately to (a permutation of) the samples.
    """
    data = task.sensory_batch(task.prior_genotypes(n_samples))
    model = LloydKMeans(n_clusters=k, max_iter=max_iter, random_state=seed).fit(data)
    return CentroidSet(model.cluster_centers_, kind="prior", seed=seed)


def build_blind_centroids(bounds, k=100000, seed=None, refine=False, max_iter=100):
    """Centroids drawn uniformly inside per-dimension bounds.

    ``bounds`` is a (2, d) array of lower and upper rows. Optional k-means
    refinement evens the cells out; by default the raw uniform draws are
    used directly.
    """
    bounds = check_matrix(bounds, min_rows=2, name="bounds")
    if bounds.shape[0] != 2:
        raise ValueError("bounds must have exactly two rows (lower, upper)")
    lower, upper = bounds[0], bounds[1]
    if np.any(upper < lower):
        raise ValueError("upper bounds must not be below lower bounds")
    rng = np.random.default_rng(seed)
    points = rng.uniform(lower, upper, size=(k, bounds.shape[1]))
    if refine:
        points = LloydKMeans(n_clusters=k, max_iter=max_iter,
                             random_state=seed).fit(points).cluster_centers_
    return CentroidSet(points, kind="blind", seed=seed)


class CvtGrid:
    """Fixed-cell container: one individual per Voronoi cell.

    A candidate lands in the cell of its nearest centroid; an empty cell
    accepts it, an occupied cell holds a fitness duel where ties keep the
    incumbent. Parent selection is uniform over filled cells, and add
    outcomes do not feed back into selection.
    """

    def __init__(self, centroid_set: CentroidSet):
        self.centroid_set = centroid_set
        self.cells = {}

    def __len__(self):
        return len(self.cells)

    @property
    def individuals(self):
        return list(self.cells.values())

    @property
    def l(self):
        return None

    def prepare(self, descriptors):
        return None

    def prepare_batch(self, descriptors):
        """Assign a whole descriptor batch to cells in one pass."""
        return nearest_centroids(descriptors, self.centroid_set.centroids)

    def cell_of(self, descriptor):
        return int(nearest_centroids(descriptor[None, :],
                                     self.centroid_set.centroids)[0])

    def try_add(self, individual, hint=None):
        cell = int(hint) if hint is not None else self.cell_of(
            np.asarray(individual.descriptor, dtype=float))
        incumbent = self.cells.get(cell)
        if incumbent is None:
            self.cells[cell] = individual
            return AddResult(AddStatus.ADDED)
        if individual.fitness > incumbent.fitness:
            self.cells[cell] = individual
            return AddResult(AddStatus.REPLACED, replaced=incumbent)
        return AddResult(AddStatus.REJECTED)

    def sample_parents(self, n, rng):
        if not self.cells:
            raise ValueError("cannot sample parents from an empty container")
        pool = list(self.cells.values())
        idx = rng.integers(0, len(pool), size=n)
        return [pool[i] for i in idx]

    def on_result(self, parent, result):
        """Uniform selection: outcomes do not alter selection weights."""
        return None

    def genotypes(self):
        return np.stack([ind.genotype for ind in self.individuals])

    def sensory_matrix(self):
        return np.stack([ind.sensory for ind in self.individuals])

    def descriptors(self):
        return np.stack([ind.descriptor for ind in self.individuals])
