"""Descriptor extractors: map evaluated behaviors to archive coordinates.

An extractor turns a batch of genotypes and their raw sensory vectors into
low-dimensional descriptors. Variants differ only in this mapping: task
ground truth, raw genotype, raw sensory data, or the latent space of a
learned dimensionality-reduction model that can be refitted online.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

from .validation import check_matrix

DEFAULT_UPDATE_BATCHES = (0, 50, 150, 350, 750, 1550, 3150)


@dataclass(frozen=True)
class UpdateSchedule:
    """Batch indices after which the descriptor model is refitted.

    The spacing roughly doubles so early updates are frequent while the
    archive is small and late updates are rare once it has stabilized.
    Batch 0 denotes the initial fit on the random population.
    """

    batches: tuple = DEFAULT_UPDATE_BATCHES

    def __post_init__(self):
        seq = tuple(int(b) for b in self.batches)
        if any(b < 0 for b in seq):
            raise ValueError("update batches must be non-negative")
        if any(b2 <= b1 for b1, b2 in zip(seq, seq[1:])):
            raise ValueError("update batches must be strictly increasing")
        object.__setattr__(self, "batches", seq)

    def due(self, batch_index):
        return batch_index in self.batches


class DescriptorExtractor:
    """Base interface; subclasses set ``kind`` and implement describe()."""

    kind = "base"
    trainable = False

    @property
    def descriptor_dim(self):
        raise NotImplementedError

    def describe(self, genotypes, sensory):
        raise NotImplementedError

    def refit(self, sensory, seed=None):
        raise ValueError(f"extractor '{self.kind}' has no trainable model")

    @property
    def can_reconstruct(self):
        return False


class HandCodedDescriptor(DescriptorExtractor):
    """Task-defined ground-truth descriptor."""

    kind = "hand_coded"

    def __init__(self, task):
        if not task.has_ground_truth:
            raise ValueError(f"task '{task.name}' defines no ground-truth descriptor")
        self.task = task

    @property
    def descriptor_dim(self):
        return 2

    def describe(self, genotypes, sensory):
        sensory = check_matrix(sensory, name="sensory")
        trajs = sensory.reshape(sensory.shape[0], -1, 2)
        return self.task.ground_truth_batch(genotypes, trajs)


class GenotypeDescriptor(DescriptorExtractor):
    """The genotype itself as descriptor."""

    kind = "genotype"

    def __init__(self, task):
        self.task = task

    @property
    def descriptor_dim(self):
        return self.task.genotype_dim

    def describe(self, genotypes, sensory):
        return check_matrix(genotypes, n_cols=self.task.genotype_dim,
                            name="genotypes").copy()


class SensoryDescriptor(DescriptorExtractor):
    """Raw flattened trajectory as a high-dimensional descriptor."""

    kind = "sensory"

    def __init__(self, n_features):
        self.n_features = n_features

    @property
    def descriptor_dim(self):
        return self.n_features

    def describe(self, genotypes, sensory):
        return check_matrix(sensory, n_cols=self.n_features, name="sensory").copy()


class LearnedDescriptor(DescriptorExtractor):
    """Latent space of a dimensionality-reduction estimator.

    ``trainable`` controls whether :meth:`refit` is allowed; a pretrained
    extractor keeps its model frozen for the whole run. Refitting clones
    the estimator so every update trains from a fresh initialization
    (unless the estimator itself opts into warm starts).
    """

    def __init__(self, model, kind, trainable):
        self.model = model
        self.kind = kind
        self.trainable = trainable

    @property
    def descriptor_dim(self):
        return self.model.n_components if hasattr(self.model, "n_components") \
            else self.model.latent_dim

    @property
    def fitted(self):
        return getattr(self.model, "components_", None) is not None \
            or getattr(self.model, "params_", None) is not None

    @property
    def min_refit_rows(self):
        return getattr(self.model, "min_fit_rows", 1)

    def describe(self, genotypes, sensory):
        return self.model.transform(sensory)

    def refit(self, sensory, seed=None):
        if not self.trainable:
            raise ValueError(f"extractor '{self.kind}' is frozen; refit is not allowed")
        est = clone(self.model)
        if seed is not None and "random_state" in est.get_params():
            est.set_params(random_state=int(seed))
        if getattr(est, "warm_start", False) and getattr(self.model, "params_", None) is not None:
            # Carry the previous weights over as the warm initialization.
            est.params_ = {k: v.copy() for k, v in self.model.params_.items()}
        est.fit(sensory)
        self.model = est
        return self

    @property
    def can_reconstruct(self):
        return self.fitted

    def reconstruct(self, sensory):
        return self.model.reconstruct(sensory)
