"""Batch loop of the quality-diversity search.

One batch: sample parents by curiosity weight from the batch-start
population, mutate, evaluate, describe, then stream the offspring into the
container in order. Descriptor refits happen between batches: the model is
retrained on the archive's sensory data, every stored descriptor is
reprojected, the distance threshold is recomputed, and the archive is
rebuilt by re-adding its entries, which can only shrink it.

All randomness flows through a single generator per run, and parents for a
batch are drawn in one call before any offspring is evaluated, so results
do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .archive import Individual, UnstructuredArchive, rebuild_after_update, recompute_l
from .validation import check_matrix

SEED_RANGE = 2 ** 31


@dataclass
class RunState:
    """Everything the loop carries between batches."""

    task: object
    extractor: object
    container: object
    rng: np.random.Generator
    seed: int
    batch_index: int = 0
    evaluations: int = 0
    metrics_log: list = field(default_factory=list)


def mutate(genotypes, lower, upper, rng, sigma_fraction=0.05):
    """Per-component Gaussian mutation, scale proportional to bound range.

    The standard deviation for each component is ``sigma_fraction`` of that
    component's bound range; offspring are clamped back into the bounds.
    """
    g = check_matrix(genotypes, name="genotypes")
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if sigma_fraction < 0:
        raise ValueError("sigma_fraction must be non-negative")
    sigma = sigma_fraction * (upper - lower)
    noise = rng.normal(0.0, 1.0, g.shape) * sigma
    return np.clip(g + noise, lower, upper)


def evaluate_batch(task, extractor, genotypes):
    """Simulate genotypes and describe them; returns (sensory, descriptors)."""
    sensory = task.sensory_batch(genotypes)
    descriptors = extractor.describe(genotypes, sensory)
    return sensory, descriptors


def initialize(task, extractor, container, n_init, rng, seed=0):
    """Random population, first descriptor fit, and initial threshold.

    For trainable extractors this is the batch-0 model fit: the model is
    trained on the sensory data of the random population before any
    descriptor is computed.
    """
    if n_init < 2:
        raise ValueError("n_init must be at least 2")
    genotypes = rng.uniform(task.lower_bounds, task.upper_bounds,
                            (n_init, task.genotype_dim))
    sensory = task.sensory_batch(genotypes)
    if extractor.trainable:
        extractor.refit(sensory, seed=int(rng.integers(SEED_RANGE)))
    descriptors = extractor.describe(genotypes, sensory)
    container.prepare(descriptors)
    hints = container.prepare_batch(descriptors)
    for j in range(n_init):
        ind = Individual(genotype=genotypes[j].copy(), sensory=sensory[j].copy(),
                         descriptor=descriptors[j].copy())
        container.try_add(ind, hint=None if hints is None else hints[j])
    state = RunState(task=task, extractor=extractor, container=container,
                     rng=rng, seed=seed)
    state.evaluations = n_init
    return state


def run_batch(state, batch_size, sigma_fraction=0.05, recorder=None):
    """Advance the search by one batch and append a metrics record."""
    state.batch_index += 1
    if batch_size > 0:
        container = state.container
        task = state.task
        parents = container.sample_parents(batch_size, state.rng)
        parent_genotypes = np.stack([p.genotype for p in parents])
        offspring = mutate(parent_genotypes, task.lower_bounds, task.upper_bounds,
                           state.rng, sigma_fraction)
        sensory, descriptors = evaluate_batch(task, state.extractor, offspring)
        hints = container.prepare_batch(descriptors)
        for j in range(batch_size):
            ind = Individual(genotype=offspring[j].copy(), sensory=sensory[j].copy(),
                             descriptor=descriptors[j].copy())
            result = container.try_add(ind, hint=None if hints is None else hints[j])
            container.on_result(parents[j], result)
        state.evaluations += batch_size
    row = recorder.record(state) if recorder is not None else None
    state.metrics_log.append(row)
    return row


def refine_descriptors(state):
    """Refit the descriptor model on the archive and rebuild it.

    Only meaningful for trainable extractors over an unstructured archive;
    the refreshed threshold targets the same capacity as before. If the
    archive holds fewer rows than the model can be fitted on, the update is
    skipped and the previous model stays in place.
    """
    container = state.container
    if not isinstance(container, UnstructuredArchive):
        raise ValueError("descriptor refits require an unstructured archive")
    sensory = container.sensory_matrix()
    if sensory.shape[0] < getattr(state.extractor, "min_refit_rows", 1):
        return container
    state.extractor.refit(sensory, seed=int(state.rng.integers(SEED_RANGE)))
    descriptors = state.extractor.describe(container.genotypes(), sensory)
    new_l = recompute_l(descriptors, container.target_capacity, container.l_min)
    state.container = rebuild_after_update(container, descriptors, new_l)
    return state.container
