"""On-disk formats: archives and models as JSON, centroids as npz, metrics as CSV.

JSON keeps float64 values exactly (repr round-trips), so saving and
reloading a model reproduces identical projections. CSV cells use repr
formatting as well, which makes metrics files byte-stable across runs with
the same seed.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .archive import Individual
from .autoencoder import ConvAutoencoder, NetworkSpec
from .cvt import CentroidSet
from .pca import PcaReducer


def _fmt(value):
    """CSV cell formatting: repr for floats, empty string for missing."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_archive(path, container, batch_index, seed, variant_name):
    """Write a container snapshot with its threshold and provenance header."""
    payload = {
        "header": {
            "batch_index": int(batch_index),
            "l": None if container.l is None else float(container.l),
            "seed": int(seed),
            "variant_name": str(variant_name),
            "size": len(container),
        },
        "entries": [
            {
                "genotype": np.asarray(ind.genotype, dtype=float).tolist(),
                "descriptor": np.asarray(ind.descriptor, dtype=float).tolist(),
                "sensory": np.asarray(ind.sensory, dtype=float).tolist(),
                "fitness": float(ind.fitness),
                "curiosity": float(ind.curiosity),
            }
            for ind in container.individuals
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh)
    return path


def load_archive(path):
    """Read a snapshot back; returns (header dict, list of individuals)."""
    with open(path) as fh:
        payload = json.load(fh)
    entries = [
        Individual(
            genotype=np.asarray(e["genotype"], dtype=float),
            sensory=np.asarray(e["sensory"], dtype=float),
            descriptor=np.asarray(e["descriptor"], dtype=float),
            fitness=float(e["fitness"]),
            curiosity=float(e["curiosity"]),
        )
        for e in payload["entries"]
    ]
    return payload["header"], entries


def save_model(path, model):
    """Serialize a fitted reducer (linear or autoencoder) to JSON."""
    if isinstance(model, PcaReducer):
        payload = {
            "kind": "pca",
            "n_components": int(model.n_components),
            "mean": model.mean_.tolist(),
            "components": model.components_.tolist(),
            "explained_variance": model.explained_variance_.tolist(),
        }
    elif isinstance(model, ConvAutoencoder):
        spec = model.network_spec_
        payload = {
            "kind": "autoencoder",
            "params_init": model.get_params(),
            "spec": {
                "steps": spec.steps, "channels": spec.channels,
                "conv_maps": spec.conv_maps, "kernel": spec.kernel,
                "stride": spec.stride, "hidden": spec.hidden,
                "latent": spec.latent,
            },
            "weights": {k: v.tolist() for k, v in model.params_.items()},
            "norm_mean": model.norm_mean_.tolist(),
            "norm_std": model.norm_std_.tolist(),
            "n_features_in": int(model.n_features_in_),
        }
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh)
    return path


def load_model(path):
    """Rebuild a fitted reducer from :func:`save_model` output."""
    with open(path) as fh:
        payload = json.load(fh)
    kind = payload["kind"]
    if kind == "pca":
        model = PcaReducer(n_components=payload["n_components"])
        model.mean_ = np.asarray(payload["mean"], dtype=float)
        model.components_ = np.asarray(payload["components"], dtype=float)
        model.explained_variance_ = np.asarray(payload["explained_variance"],
                                               dtype=float)
        return model
    if kind == "autoencoder":
        model = ConvAutoencoder(**payload["params_init"])
        model.network_spec_ = NetworkSpec(**payload["spec"])
        model.params_ = {k: np.asarray(v, dtype=float)
                         for k, v in payload["weights"].items()}
        model.norm_mean_ = np.asarray(payload["norm_mean"], dtype=float)
        model.norm_std_ = np.asarray(payload["norm_std"], dtype=float)
        model.n_features_in_ = int(payload["n_features_in"])
        model.reports_ = []
        return model
    raise ValueError(f"unknown model kind '{kind}'")


def save_centroids(path, centroid_set):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        centroids=centroid_set.centroids,
        k=np.asarray(centroid_set.k),
        dim=np.asarray(centroid_set.dim),
        kind=np.asarray(centroid_set.kind),
        seed=np.asarray(-1 if centroid_set.seed is None else centroid_set.seed),
    )
    return path


def load_centroids(path):
    with np.load(path, allow_pickle=False) as data:
        seed = int(data["seed"])
        return CentroidSet(
            centroids=np.asarray(data["centroids"], dtype=float),
            kind=str(data["kind"]),
            seed=None if seed < 0 else seed,
        )


def write_metrics_csv(path, rows, columns):
    """Write per-batch metric rows; missing values become empty cells."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
    return path


def read_metrics_csv(path):
    """Read metric rows back as dicts with floats (None for empty cells)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = []
        for raw in reader:
            row = {}
            for col, cell in zip(columns, raw):
                if cell == "":
                    row[col] = None
                elif col in ("batch", "archive_size"):
                    row[col] = int(cell)
                else:
                    row[col] = float(cell)
            rows.append(row)
    return columns, rows


def write_points_csv(path, points, header=("x", "y")):
    """Plain 2-D point list, used for trajectories and reference descriptor sets."""
    pts = np.asarray(points, dtype=float)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in pts:
            writer.writerow([_fmt(float(v)) for v in row])
    return path


def read_points_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.asarray([[float(c) for c in row] for row in reader])


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return path


def read_json(path):
    with open(path) as fh:
        return json.load(fh)
