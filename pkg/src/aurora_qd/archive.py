"""Unstructured behavioral archive with curiosity-driven parent selection.

The container keeps individuals whose descriptors are mutually at least a
threshold distance apart. A candidate closer than the threshold to its
nearest stored neighbor competes with that single neighbor on fitness;
strictly higher fitness replaces, ties keep the incumbent. Replacement
adopts the winner's descriptor, so the winner additionally needs threshold
clearance from every other entry, otherwise it is rejected and the spacing
invariant survives. Each outcome feeds back into the parent's curiosity
score, which biases future parent sampling toward lineages that keep
discovering novel behaviors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .validation import as_float_array, check_matrix


class AddStatus(enum.Enum):
    ADDED = "added"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class AddResult:
    status: AddStatus
    replaced: "Individual | None" = None

    @property
    def accepted(self):
        return self.status is not AddStatus.REJECTED


@dataclass
class Individual:
    """One evaluated controller and everything the search knows about it."""

    genotype: np.ndarray
    sensory: np.ndarray
    descriptor: np.ndarray
    fitness: float = 0.0
    curiosity: float = 0.0


@dataclass(frozen=True)
class CuriosityConfig:
    """Reward shaping for the curiosity score.

    The score is clamped below at ``floor``; selection weights are
    ``curiosity - floor + selection_offset`` so that fresh entries still
    have non-zero probability.
    """

    reward: float = 1.0
    penalty: float = -0.5
    floor: float = 0.0
    selection_offset: float = 1.0

    def __post_init__(self):
        if self.selection_offset <= 0:
            raise ValueError("selection_offset must be positive")


def update_curiosity(individual, result, config=CuriosityConfig()):
    """Apply the add/reject reward to a parent's curiosity, clamped at the floor."""
    delta = config.reward if result.accepted else config.penalty
    individual.curiosity = max(config.floor, individual.curiosity + delta)
    return individual.curiosity


def recompute_l(descriptors, target_capacity, l_min=1e-6):
    """Distance threshold that would fit ``target_capacity`` entries.

    Uses the bounding box of the descriptors: the threshold is the edge of
    a d-dimensional cell such that ``target_capacity`` cells tile the box
    volume, floored at ``l_min`` to stay positive for degenerate clouds.
    """
    desc = check_matrix(descriptors, name="descriptors")
    if target_capacity <= 0:
        raise ValueError("target_capacity must be positive")
    extents = desc.max(axis=0) - desc.min(axis=0)
    volume = float(np.prod(extents))
    threshold = (volume / target_capacity) ** (1.0 / desc.shape[1])
    return max(threshold, l_min)


class _GridIndex:
    """Uniform-grid neighbor index over descriptors, cell size = threshold.

    Any stored point closer than the threshold to a query lies in one of
    the 3^d cells around the query's cell, so scanning that neighborhood
    reproduces the exact nearest neighbor whenever it matters for adds.
    """

    def __init__(self, cell_size, dim):
        self.cell_size = float(cell_size)
        self.dim = dim
        self.cells = {}

    def _key(self, descriptor):
        return tuple(np.floor(descriptor / self.cell_size).astype(np.int64))

    def insert(self, index, descriptor):
        self.cells.setdefault(self._key(descriptor), []).append(index)

    def remove(self, index, descriptor):
        key = self._key(descriptor)
        self.cells[key].remove(index)
        if not self.cells[key]:
            del self.cells[key]

    def candidates(self, descriptor):
        center = self._key(descriptor)
        out = []
        for offset in np.ndindex(*(3,) * self.dim):
            key = tuple(c + o - 1 for c, o in zip(center, offset))
            out.extend(self.cells.get(key, ()))
        return out


class UnstructuredArchive:
    """Distance-thresholded archive in descriptor space.

    Parameters
    ----------
    descriptor_dim : dimensionality of the descriptors.
    l : minimum descriptor distance between stored entries.
    target_capacity : entry budget used when the threshold is recomputed.
    l_min : lower bound for the recomputed threshold.
    curiosity : reward shaping for parent selection.
    use_grid_index : accelerate nearest-neighbor checks with a uniform
        grid; the add/compete outcomes are identical to the linear scan.
    """

    def __init__(self, descriptor_dim, l=1.0, target_capacity=10000, l_min=1e-6,
                 curiosity=CuriosityConfig(), use_grid_index=False):
        if descriptor_dim < 1:
            raise ValueError("descriptor_dim must be at least 1")
        if l <= 0:
            raise ValueError("the distance threshold l must be positive")
        self.descriptor_dim = descriptor_dim
        self.l = float(l)
        self.target_capacity = int(target_capacity)
        self.l_min = float(l_min)
        self.curiosity = curiosity
        self.use_grid_index = use_grid_index
        self._entries = []
        self._buf = np.empty((256, descriptor_dim))
        self._grid = None

    def __len__(self):
        return len(self._entries)

    @property
    def individuals(self):
        """Stored entries in insertion order (replacements keep the slot)."""
        return list(self._entries)

    def descriptors(self):
        """Copy of the stored descriptors, shape (n, descriptor_dim)."""
        return self._buf[: len(self._entries)].copy()

    def genotypes(self):
        return np.stack([ind.genotype for ind in self._entries])

    def sensory_matrix(self):
        return np.stack([ind.sensory for ind in self._entries])

    def prepare(self, descriptors):
        """Set the initial threshold from the first descriptor batch."""
        self.l = recompute_l(descriptors, self.target_capacity, self.l_min)

    def _ensure_capacity(self, n):
        if n > self._buf.shape[0]:
            grown = np.empty((max(n, 2 * self._buf.shape[0]), self.descriptor_dim))
            grown[: len(self._entries)] = self._buf[: len(self._entries)]
            self._buf = grown

    def _rebuild_grid(self):
        self._grid = _GridIndex(self.l, self.descriptor_dim)
        for i in range(len(self._entries)):
            self._grid.insert(i, self._buf[i])

    def nearest(self, descriptor):
        """Exact nearest stored entry: (index, distance); (None, inf) if empty."""
        n = len(self._entries)
        if n == 0:
            return None, np.inf
        diff = self._buf[:n] - descriptor
        dist2 = np.einsum("ij,ij->i", diff, diff)
        i = int(np.argmin(dist2))
        return i, float(np.sqrt(dist2[i]))

    def _nearest_for_add(self, descriptor):
        """Nearest neighbor, exact whenever the distance is below l."""
        if not self.use_grid_index:
            return self.nearest(descriptor)
        if self._grid is None or self._grid.cell_size != self.l:
            self._rebuild_grid()
        cand = self._grid.candidates(descriptor)
        if not cand:
            return (None, np.inf) if not self._entries else (0, np.inf)
        idx = np.asarray(cand)
        diff = self._buf[idx] - descriptor
        dist2 = np.einsum("ij,ij->i", diff, diff)
        j = int(np.argmin(dist2))
        return int(idx[j]), float(np.sqrt(dist2[j]))

    def try_add(self, individual, hint=None):
        """Insert, compete, or reject a candidate; returns an AddResult.

        ``hint`` is accepted for container interface uniformity and ignored.
        """
        desc = as_float_array(individual.descriptor, "descriptor")
        if desc.shape != (self.descriptor_dim,):
            raise ValueError(
                f"descriptor must have shape ({self.descriptor_dim},), got {desc.shape}"
            )
        individual.descriptor = desc
        n = len(self._entries)
        if n == 0:
            return self._append(individual)
        idx, dist = self._nearest_for_add(desc)
        if dist >= self.l:
            return self._append(individual)
        incumbent = self._entries[idx]
        if individual.fitness > incumbent.fitness and self._clear_for_swap(desc, idx):
            self._entries[idx] = individual
            if self._grid is not None:
                self._grid.remove(idx, self._buf[idx])
                self._grid.insert(idx, desc)
            self._buf[idx] = desc
            return AddResult(AddStatus.REPLACED, replaced=incumbent)
        return AddResult(AddStatus.REJECTED)

    def _clear_for_swap(self, descriptor, skip):
        """True when every entry other than ``skip`` is at least l away.

        Replacement adopts the winner's descriptor, so without this check a
        swap could leave the winner closer than l to an entry it never
        competed with.
        """
        n = len(self._entries)
        if n == 1:
            return True
        if self._grid is not None:
            idx = np.asarray([i for i in self._grid.candidates(descriptor)
                              if i != skip], dtype=np.int64)
            if idx.size == 0:
                return True
        else:
            idx = np.arange(n)
            idx = idx[idx != skip]
        diff = self._buf[idx] - descriptor
        dist2 = np.einsum("ij,ij->i", diff, diff)
        return float(np.sqrt(dist2.min())) >= self.l

    def _append(self, individual):
        n = len(self._entries)
        self._ensure_capacity(n + 1)
        self._buf[n] = individual.descriptor
        self._entries.append(individual)
        if self._grid is not None:
            self._grid.insert(n, individual.descriptor)
        return AddResult(AddStatus.ADDED)

    def selection_weights(self):
        cfg = self.curiosity
        return np.array(
            [ind.curiosity - cfg.floor + cfg.selection_offset for ind in self._entries]
        )

    def sample_parents(self, n, rng):
        """Sample n parents (with replacement) proportionally to curiosity weight."""
        if not self._entries:
            raise ValueError("cannot sample parents from an empty archive")
        w = self.selection_weights()
        p = w / w.sum()
        idx = rng.choice(len(self._entries), size=n, p=p)
        return [self._entries[i] for i in idx]

    def select_parent(self, rng):
        return self.sample_parents(1, rng)[0]

    def on_result(self, parent, result):
        """Feed an offspring's add outcome back into the parent's curiosity."""
        update_curiosity(parent, result, self.curiosity)

    def prepare_batch(self, descriptors):
        """No per-batch precomputation is needed for this container."""
        return None

    def fresh_copy(self, l=None):
        """Empty archive with the same configuration (optionally a new threshold)."""
        return UnstructuredArchive(
            self.descriptor_dim,
            l=self.l if l is None else l,
            target_capacity=self.target_capacity,
            l_min=self.l_min,
            curiosity=self.curiosity,
            use_grid_index=self.use_grid_index,
        )


def rebuild_after_update(archive, new_descriptors, new_l=None):
    """Re-admit all entries under refreshed descriptors and threshold.

    Entries are re-added in insertion order, so the result can only keep or
    shrink the population: every survivor was already present before the
    update. Curiosity scores travel with the individuals.
    """
    desc = check_matrix(new_descriptors, n_cols=archive.descriptor_dim,
                        name="new_descriptors")
    entries = archive.individuals
    if desc.shape[0] != len(entries):
        raise ValueError("need exactly one new descriptor per stored entry")
    rebuilt = archive.fresh_copy(l=new_l)
    for ind, row in zip(entries, desc):
        ind.descriptor = row.copy()
        rebuilt.try_add(ind)
    return rebuilt
