"""Search loop: initialization, batches, refits, determinism."""

import numpy as np
import pytest

from aurora_qd import (BallisticTask, CentroidSet, CvtGrid, GenotypeDescriptor,
                       HandCodedDescriptor, LearnedDescriptor, PcaReducer,
                       UnstructuredArchive, initialize, refine_descriptors,
                       run_batch)


def fresh_state(seed=0, n_init=32, extractor_cls=HandCodedDescriptor,
                target_capacity=500):
    task = BallisticTask()
    extractor = extractor_cls(task)
    container = UnstructuredArchive(extractor.descriptor_dim,
                                    target_capacity=target_capacity)
    rng = np.random.default_rng(seed)
    return initialize(task, extractor, container, n_init, rng, seed=seed)


def archives_equal(a, b):
    ia, ib = a.individuals, b.individuals
    if len(ia) != len(ib):
        return False
    for x, y in zip(ia, ib):
        if not (np.array_equal(x.genotype, y.genotype)
                and np.array_equal(x.descriptor, y.descriptor)
                and x.fitness == y.fitness and x.curiosity == y.curiosity):
            return False
    return True


def test_initialize_populates_archive():
    state = fresh_state(n_init=32)
    assert state.evaluations == 32
    assert 1 <= len(state.container) <= 32
    assert state.batch_index == 0
    # The threshold was derived from the init batch, not the default.
    assert state.container.l != 1.0
    with pytest.raises(ValueError):
        fresh_state(n_init=1)


def test_initialize_fits_trainable_extractor():
    task = BallisticTask()
    ext = LearnedDescriptor(PcaReducer(n_components=2), kind="pca_inc",
                            trainable=True)
    container = UnstructuredArchive(2, target_capacity=500)
    state = initialize(task, ext, container, 16, np.random.default_rng(0))
    assert ext.fitted
    assert state.container.descriptors().shape[1] == 2


def test_run_batch_counts_and_logs():
    state = fresh_state()
    row = run_batch(state, batch_size=16)
    assert row is None  # no recorder attached
    assert state.batch_index == 1
    assert state.evaluations == 32 + 16
    assert len(state.metrics_log) == 1
    run_batch(state, batch_size=16)
    assert state.evaluations == 64


def test_run_batch_zero_size_still_logs():
    state = fresh_state()
    size_before = len(state.container)
    run_batch(state, batch_size=0)
    assert state.batch_index == 1
    assert state.evaluations == 32
    assert len(state.container) == size_before
    assert len(state.metrics_log) == 1


def test_archive_size_monotone_between_refits():
    state = fresh_state()
    sizes = [len(state.container)]
    for _ in range(20):
        run_batch(state, batch_size=16)
        sizes.append(len(state.container))
    assert all(b >= a for a, b in zip(sizes, sizes[1:]))


def test_same_seed_reproduces_run():
    a = fresh_state(seed=42)
    b = fresh_state(seed=42)
    for _ in range(10):
        run_batch(a, batch_size=8)
        run_batch(b, batch_size=8)
    assert archives_equal(a.container, b.container)


def test_different_seeds_diverge():
    a = fresh_state(seed=1)
    b = fresh_state(seed=2)
    for _ in range(5):
        run_batch(a, batch_size=8)
        run_batch(b, batch_size=8)
    assert not archives_equal(a.container, b.container)


def test_refine_rebuilds_with_new_threshold():
    state = fresh_state(extractor_cls=lambda task: LearnedDescriptor(
        PcaReducer(n_components=2), kind="pca_inc", trainable=True),
        target_capacity=200)
    for _ in range(10):
        run_batch(state, batch_size=16)
    size_before = len(state.container)
    container = refine_descriptors(state)
    assert container is state.container
    assert len(container) <= size_before
    # Descriptors now come from the refreshed model.
    sensory = container.sensory_matrix()
    np.testing.assert_allclose(container.descriptors(),
                               state.extractor.model.transform(sensory),
                               atol=1e-10)


def test_refine_requires_unstructured_archive():
    task = BallisticTask()
    ext = GenotypeDescriptor(task)
    grid = CvtGrid(CentroidSet(np.zeros((3, 2))))
    state = type("S", (), {"container": grid})()
    with pytest.raises(ValueError):
        refine_descriptors(state)


def test_parents_drawn_before_any_evaluation():
    # Offspring of one batch never become parents within the same batch:
    # all parents of batch k are members of the batch-start archive.
    state = fresh_state()
    members_before = {id(ind) for ind in state.container.individuals}

    original = state.container.sample_parents

    captured = []

    def spy(n, rng):
        parents = original(n, rng)
        captured.extend(parents)
        return parents

    state.container.sample_parents = spy
    run_batch(state, batch_size=16)
    assert len(captured) == 16
    assert all(id(p) in members_before for p in captured)


def test_refine_skips_when_archive_too_small():
    # A degenerate archive (fewer rows than the model can fit on) keeps the
    # previous model instead of crashing the run.
    task = BallisticTask()
    extractor = LearnedDescriptor(PcaReducer(n_components=2), kind="pca_inc",
                                  trainable=True)
    container = UnstructuredArchive(2, target_capacity=100)
    rng = np.random.default_rng(3)
    state = initialize(task, extractor, container, 16, rng, seed=3)
    model_before = state.extractor.model
    # Shrink the archive to a single entry below min_refit_rows.
    lone = state.container.individuals[0]
    small = state.container.fresh_copy()
    small.prepare(np.array([lone.descriptor]))
    small.try_add(lone)
    state.container = small
    assert extractor.min_refit_rows == 2
    out = refine_descriptors(state)
    assert out is small
    assert state.extractor.model is model_before
