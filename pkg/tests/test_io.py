"""On-disk formats: every artifact round-trips exactly."""

import numpy as np
import pytest

from aurora_qd import (CentroidSet, ConvAutoencoder, Individual, PcaReducer,
                       UnstructuredArchive)
from aurora_qd.serialization import (load_archive, load_centroids, load_model,
                                     read_json, read_metrics_csv,
                                     read_points_csv, save_archive,
                                     save_centroids, save_model, write_json,
                                     write_metrics_csv, write_points_csv)


def test_archive_round_trip(tmp_path, rng):
    archive = UnstructuredArchive(2, l=0.1)
    for _ in range(20):
        d = rng.uniform(0, 1, 2)
        archive.try_add(Individual(genotype=rng.uniform(0, 1, 2),
                                   sensory=rng.uniform(0, 1, 100),
                                   descriptor=d, fitness=float(rng.uniform()),
                                   curiosity=float(rng.integers(0, 5))))
    path = save_archive(tmp_path / "archive.json", archive, batch_index=7,
                        seed=3, variant_name="hand_coded")
    header, entries = load_archive(path)
    assert header == {"batch_index": 7, "l": archive.l, "seed": 3,
                      "variant_name": "hand_coded", "size": len(archive)}
    assert len(entries) == len(archive)
    for got, expect in zip(entries, archive.individuals):
        np.testing.assert_array_equal(got.genotype, expect.genotype)
        np.testing.assert_array_equal(got.sensory, expect.sensory)
        np.testing.assert_array_equal(got.descriptor, expect.descriptor)
        assert got.fitness == expect.fitness
        assert got.curiosity == expect.curiosity


def test_cvt_archive_header_has_no_threshold(tmp_path):
    from aurora_qd import CvtGrid

    grid = CvtGrid(CentroidSet(np.array([[0.0, 0.0], [1.0, 1.0]])))
    grid.try_add(Individual(genotype=np.zeros(2), sensory=np.zeros(2),
                            descriptor=np.zeros(2)))
    path = save_archive(tmp_path / "a.json", grid, 0, 0, "cvt_blind")
    header, entries = load_archive(path)
    assert header["l"] is None
    assert len(entries) == 1


def test_pca_model_round_trip(tmp_path, rng):
    X = rng.normal(size=(50, 100))
    model = PcaReducer(n_components=2).fit(X)
    path = save_model(tmp_path / "model.json", model)
    loaded = load_model(path)
    np.testing.assert_array_equal(loaded.components_, model.components_)
    np.testing.assert_array_equal(loaded.mean_, model.mean_)
    np.testing.assert_array_equal(loaded.transform(X), model.transform(X))


def test_autoencoder_model_round_trip(tmp_path, rng):
    X = rng.normal(size=(16, 100))
    model = ConvAutoencoder(max_epochs=3, early_stop_window=0, n_repeats=1,
                            random_state=0).fit(X)
    path = save_model(tmp_path / "model.json", model)
    loaded = load_model(path)
    assert loaded.get_params() == model.get_params()
    np.testing.assert_array_equal(loaded.transform(X), model.transform(X))
    np.testing.assert_array_equal(loaded.reconstruct(X), model.reconstruct(X))


def test_save_model_rejects_unknown(tmp_path):
    with pytest.raises(TypeError):
        save_model(tmp_path / "model.json", object())


def test_centroids_round_trip(tmp_path, rng):
    cs = CentroidSet(rng.uniform(0, 1, (30, 5)), kind="blind", seed=9)
    path = save_centroids(tmp_path / "centroids.npz", cs)
    loaded = load_centroids(path)
    np.testing.assert_array_equal(loaded.centroids, cs.centroids)
    assert loaded.kind == "blind" and loaded.seed == 9
    assert loaded.k == 30 and loaded.dim == 5
    # The header fields are stored explicitly in the npz payload.
    with np.load(path) as data:
        assert int(data["k"]) == 30 and int(data["dim"]) == 5
        assert str(data["kind"]) == "blind" and int(data["seed"]) == 9


def test_centroids_none_seed(tmp_path):
    cs = CentroidSet(np.zeros((2, 2)), kind="prior", seed=None)
    loaded = load_centroids(save_centroids(tmp_path / "c.npz", cs))
    assert loaded.seed is None


def test_metrics_csv_round_trip(tmp_path):
    columns = ["batch", "archive_size", "l", "klc", "rmse"]
    rows = [
        {"batch": 1, "archive_size": 10, "l": 0.1, "klc": 1.2345678901234567,
         "rmse": None},
        {"batch": 2, "archive_size": 11, "l": 0.1, "klc": None, "rmse": 0.5},
    ]
    path = write_metrics_csv(tmp_path / "metrics.csv", rows, columns)
    got_columns, got_rows = read_metrics_csv(path)
    assert got_columns == columns
    assert got_rows == rows  # exact, including the float and the Nones


def test_metrics_csv_is_byte_stable(tmp_path):
    columns = ["batch", "archive_size", "l", "klc", "rmse"]
    rows = [{"batch": 1, "archive_size": 3, "l": 1 / 3, "klc": 0.1 + 0.2,
             "rmse": None}]
    a = write_metrics_csv(tmp_path / "a.csv", rows, columns)
    b = write_metrics_csv(tmp_path / "b.csv", rows, columns)
    assert a.read_bytes() == b.read_bytes()
    # repr formatting keeps the full precision of every float.
    assert "0.30000000000000004" in a.read_text()


def test_points_csv_round_trip(tmp_path, rng):
    pts = rng.normal(size=(40, 2))
    path = write_points_csv(tmp_path / "points.csv", pts)
    np.testing.assert_array_equal(read_points_csv(path), pts)


def test_json_round_trip(tmp_path):
    payload = {"a": 1, "b": [1.5, None], "c": {"nested": True}}
    path = write_json(tmp_path / "x.json", payload)
    assert read_json(path) == payload
    # Deterministic layout: keys are sorted, indentation fixed.
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')


def test_writers_create_parent_dirs(tmp_path):
    path = write_json(tmp_path / "deep" / "nested" / "x.json", {})
    assert path.is_file()
