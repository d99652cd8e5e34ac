"""Experiment orchestration: assemble variants, run them, aggregate suites.

A *variant* names how descriptors are produced (hand-coded, genotype,
learned with or without online refits, or CVT over raw sensory data).
``run`` executes one seeded run and optionally writes its artifacts;
``run_suite`` executes variants x replications, building the shared
ground-truth reference archive first so coverage divergence is measured
against the same target for every run.
"""

from __future__ import annotations

import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .archive import UnstructuredArchive
from .autoencoder import ConvAutoencoder
from .config import (CVT_VARIANTS, PRETRAINED_VARIANTS, RunConfig, SuiteConfig,
                     config_from_dict, config_to_dict)
from .cvt import CvtGrid, build_blind_centroids, build_prior_centroids
from .engine import SEED_RANGE, initialize, refine_descriptors, run_batch
from .extractors import (GenotypeDescriptor, HandCodedDescriptor,
                         LearnedDescriptor, SensoryDescriptor, UpdateSchedule)
from .metrics import diversity, klc, reconstruction_rmse
from .pca import PcaReducer
from .serialization import (load_centroids, read_points_csv, save_archive,
                            save_centroids, save_model, write_json,
                            write_metrics_csv, write_points_csv)
from .tasks import SENSORY_DIM, TASKS


def build_task(config: RunConfig):
    if config.task == "ballistic":
        return TASKS["ballistic"](config.ballistic)
    if config.task == "airhockey":
        return TASKS["airhockey"](config.airhockey)
    raise ValueError(f"unknown task '{config.task}'")


def _make_model(config: RunConfig, kind, seed):
    dr = config.dr
    if kind.startswith("pca"):
        return PcaReducer(n_components=dr.latent_dim)
    return ConvAutoencoder(
        latent_dim=dr.latent_dim, conv_maps=dr.conv_maps,
        kernel_size=dr.kernel_size, stride=dr.stride,
        hidden_units=dr.hidden_units, learning_rate=dr.learning_rate,
        beta1=dr.beta1, beta2=dr.beta2, minibatch_size=dr.minibatch_size,
        max_epochs=dr.max_epochs, early_stop_window=dr.early_stop_window,
        n_repeats=dr.n_repeats, val_fraction=dr.val_fraction,
        warm_start=dr.warm_start, random_state=seed,
    )


def _centroids_for(config: RunConfig, task, setup_rng):
    cvt = config.cvt
    kind = "prior" if config.variant == "cvt_prior" else "blind"
    path = cvt.centroids_path
    if path and Path(path).is_file():
        cs = load_centroids(path)
        if cs.kind != kind:
            raise ValueError(
                f"cached centroids at {path} are '{cs.kind}', expected '{kind}'"
            )
        return cs
    seed = int(setup_rng.integers(SEED_RANGE))
    if kind == "prior":
        cs = build_prior_centroids(task, n_samples=cvt.prior_samples,
                                   k=cvt.prior_k, seed=seed,
                                   max_iter=cvt.kmeans_max_iter)
    else:
        cs = build_blind_centroids(task.sensory_bounds(), k=cvt.blind_k,
                                   seed=seed, refine=cvt.refine_blind,
                                   max_iter=cvt.kmeans_max_iter)
    if path:
        save_centroids(path, cs)
    return cs


def build_components(config: RunConfig, task, setup_rng):
    """Extractor and container for the configured variant."""
    v = config.variant
    if v in CVT_VARIANTS:
        extractor = SensoryDescriptor(SENSORY_DIM)
        container = CvtGrid(_centroids_for(config, task, setup_rng))
        return extractor, container
    if v == "hand_coded":
        extractor = HandCodedDescriptor(task)
    elif v == "genotype":
        extractor = GenotypeDescriptor(task)
    else:
        model = _make_model(config, v, int(setup_rng.integers(SEED_RANGE)))
        trainable = v.endswith("_inc")
        extractor = LearnedDescriptor(model, kind=v, trainable=trainable)
        if v in PRETRAINED_VARIANTS:
            prior = task.sensory_batch(task.prior_genotypes(config.cvt.prior_samples))
            extractor.model.fit(prior)
    container = UnstructuredArchive(
        extractor.descriptor_dim, l=1.0,
        target_capacity=config.target_capacity, l_min=config.l_min,
        curiosity=config.curiosity, use_grid_index=config.use_grid_index,
    )
    return extractor, container


class MetricsRecorder:
    """Produces one metrics row per batch for the task's quality measure."""

    def __init__(self, task, metrics_config, reference_points=None):
        self.task = task
        self.cfg = metrics_config
        self.reference = None if reference_points is None \
            else np.asarray(reference_points, dtype=float)
        self.bounds = task.metric_bounds()
        self.metric_name = task.metric
        self.columns = ["batch", "archive_size", "l", self.metric_name, "rmse"]

    def record(self, state):
        container = state.container
        row = {
            "batch": state.batch_index,
            "archive_size": len(container),
            "l": container.l,
        }
        if len(container) == 0:
            row[self.metric_name] = None
            row["rmse"] = None
            return row
        sensory = container.sensory_matrix()
        trajs = sensory.reshape(sensory.shape[0], -1, 2)
        if self.metric_name == "klc":
            if self.reference is None:
                row["klc"] = None
            else:
                points = self.task.ground_truth_batch(container.genotypes(), trajs)
                row["klc"] = klc(self.reference, points, self.bounds,
                                 self.cfg.klc_bins, self.cfg.klc_eps)
        else:
            row["diversity"] = diversity(trajs, self.bounds,
                                         self.cfg.diversity_bins)
        row["rmse"] = reconstruction_rmse(state.extractor, sensory)
        return row


@dataclass
class RunRecord:
    """Everything a finished run hands back to the caller."""

    config: dict
    variant: str
    seed: int
    columns: list
    rows: list
    summary: dict
    out_dir: Path | None = None
    container: object = None
    extractor: object = None


def _resolve_reference(config: RunConfig, reference_points):
    if reference_points is not None:
        return np.asarray(reference_points, dtype=float)
    if config.reference:
        return read_points_csv(config.reference)
    return None


def run(config: RunConfig, out_dir=None, reference_points=None, verbose=False):
    """Execute one run; returns a RunRecord and optionally writes artifacts.

    Artifacts: metrics.csv, summary.json, config.json, archive_final.json,
    one archive snapshot per descriptor update, and the fitted model for
    learned variants.
    """
    config.validate()
    started = time.perf_counter()
    seed_seq = np.random.SeedSequence(config.seed)
    run_rng, setup_rng = (np.random.default_rng(s) for s in seed_seq.spawn(2))
    task = build_task(config)
    extractor, container = build_components(config, task, setup_rng)
    schedule = UpdateSchedule(config.update_batches)
    reference = _resolve_reference(config, reference_points)
    recorder = MetricsRecorder(task, config.metrics, reference)
    out = Path(out_dir) if out_dir else (Path(config.out) if config.out else None)
    if out:
        out.mkdir(parents=True, exist_ok=True)
    state = initialize(task, extractor, container, config.resolved_n_init,
                       run_rng, seed=config.seed)
    for b in range(1, config.batches + 1):
        run_batch(state, config.batch_size, config.sigma_fraction, recorder)
        if state.extractor.trainable and schedule.due(state.batch_index):
            refine_descriptors(state)
            if out:
                save_archive(out / f"archive_batch{b:05d}.json", state.container,
                             b, config.seed, config.variant)
        if verbose and (b % 100 == 0 or b == config.batches):
            row = state.metrics_log[-1]
            value = row.get(recorder.metric_name)
            shown = "n/a" if value is None else f"{value:.4f}"
            print(f"[{config.variant} seed={config.seed}] batch {b}/{config.batches} "
                  f"size={row['archive_size']} {recorder.metric_name}={shown}",
                  flush=True)
    duration = time.perf_counter() - started
    final = state.metrics_log[-1]
    summary = {
        "task": config.task,
        "variant": config.variant,
        "seed": config.seed,
        "batches": config.batches,
        "evaluations": state.evaluations,
        "final_size": final["archive_size"],
        "final_l": final["l"],
        "metric": recorder.metric_name,
        "final_metric": final.get(recorder.metric_name),
        f"final_{recorder.metric_name}": final.get(recorder.metric_name),
        "final_rmse": final.get("rmse"),
        "duration_s": duration,
    }
    record = RunRecord(
        config=config_to_dict(config), variant=config.variant, seed=config.seed,
        columns=recorder.columns, rows=state.metrics_log, summary=summary,
        out_dir=out, container=state.container, extractor=state.extractor,
    )
    if out:
        write_metrics_csv(out / "metrics.csv", state.metrics_log, recorder.columns)
        write_json(out / "summary.json", summary)
        write_json(out / "config.json", record.config)
        save_archive(out / "archive_final.json", state.container,
                     config.batches, config.seed, config.variant)
        model = getattr(state.extractor, "model", None)
        if model is not None and getattr(state.extractor, "fitted", False):
            save_model(out / "model.json", model)
    return record


def ground_truth_points(task, container):
    """Project a container's entries into the ground-truth descriptor space."""
    sensory = container.sensory_matrix()
    trajs = sensory.reshape(sensory.shape[0], -1, 2)
    return task.ground_truth_batch(container.genotypes(), trajs)


def reference_run_config(suite: SuiteConfig):
    """The dedicated ground-truth run all coverage values are measured against.

    Uses a seed outside the replication range so the reference is never one
    of the compared runs.
    """
    return replace(suite.run, variant="hand_coded",
                   seed=suite.base_seed + suite.replications, reference=None)


def _run_job(args):
    """Suite worker: never raises, so one bad run cannot sink the suite."""
    config, out_dir, reference = args
    try:
        return run(config, out_dir=out_dir, reference_points=reference)
    except Exception as exc:  # noqa: BLE001 - failures are reported per run
        return {"variant": config.variant, "seed": config.seed, "error": repr(exc)}


def run_many(configs, parallel_runs=1, out_dirs=None, reference_points=None,
             verbose=False):
    """Run a list of configs; returns (records, failures).

    Failures are captured per run as {variant, seed, error} dicts and do
    not abort the remaining runs. An empty config list yields empty output.
    """
    configs = list(configs)
    if out_dirs is None:
        out_dirs = [None] * len(configs)
    jobs = [(cfg, out, reference_points)
            for cfg, out in zip(configs, out_dirs)]
    if parallel_runs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel_runs) as pool:
            outcomes = list(pool.map(_run_job, jobs))
    else:
        outcomes = []
        for job in jobs:
            if verbose:
                print(f"run: {job[0].variant} seed={job[0].seed}", flush=True)
            outcomes.append(_run_job(job))
    records = [o for o in outcomes if isinstance(o, RunRecord)]
    failures = [o for o in outcomes if not isinstance(o, RunRecord)]
    return records, failures


def nearest_rank(values, fraction):
    """Nearest-rank quantile: the ceil(fraction * n)-th smallest value."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    ordered = sorted(values)
    if not ordered:
        raise ValueError("cannot take a quantile of no values")
    k = max(1, math.ceil(fraction * len(ordered)))
    return ordered[k - 1]


@dataclass
class SuiteResult:
    records: list
    summary_rows: list
    failures: list
    reference_record: object = None
    out_dir: Path | None = None


def run_suite(suite: SuiteConfig, out_dir=None, verbose=False):
    """Run every variant for every replication seed and aggregate finals.

    For tasks measured by coverage divergence, a hand-coded reference run
    is executed first and its final archive, projected to ground truth,
    becomes the comparison target of every run in the suite.
    """
    suite.validate()
    out = Path(out_dir) if out_dir else (Path(suite.run.out) if suite.run.out else None)
    if out:
        out.mkdir(parents=True, exist_ok=True)
    task = build_task(suite.run)
    reference_points = None
    reference_record = None
    if task.metric == "klc":
        ref_config = reference_run_config(suite)
        ref_out = out / "reference" if out else None
        if verbose:
            print(f"reference run: hand_coded seed={ref_config.seed}", flush=True)
        reference_record = run(ref_config, out_dir=ref_out, verbose=verbose)
        reference_points = ground_truth_points(build_task(ref_config),
                                               reference_record.container)
        if out:
            write_points_csv(out / "reference_descriptors.csv", reference_points)
    configs = []
    out_dirs = []
    for variant in suite.variants:
        for i in range(suite.replications):
            cfg = replace(suite.run, variant=variant, seed=suite.base_seed + i,
                          reference=None)
            configs.append(cfg)
            out_dirs.append(out / "runs" / f"{variant}_seed{cfg.seed}" if out else None)
    records, failures = run_many(configs, parallel_runs=suite.parallel,
                                 out_dirs=out_dirs,
                                 reference_points=reference_points,
                                 verbose=verbose)
    for failure in failures:
        print(f"run failed: {failure['variant']} seed={failure['seed']}: "
              f"{failure['error']}", file=sys.stderr, flush=True)
    summary_rows = aggregate_finals(records)
    if out:
        write_json(out / "suite_summary.json", {
            "task": suite.run.task,
            "metric": task.metric,
            "replications": suite.replications,
            "rows": summary_rows,
            "failures": failures,
        })
        write_metrics_csv(out / "suite_summary.csv", summary_rows,
                          ["variant", "n", "median", "q1", "q3",
                           "median_size", "median_rmse"])
        if records:
            for metric in (task.metric, "size", "rmse"):
                export_plot_data(records, metric, out / "plots",
                                 include_scatter=(metric == task.metric))
    return SuiteResult(records=records, summary_rows=summary_rows,
                       failures=failures, reference_record=reference_record,
                       out_dir=out)


def aggregate_finals(records):
    """Per-variant nearest-rank median and quartiles of the final metric."""
    by_variant = {}
    for rec in records:
        by_variant.setdefault(rec.variant, []).append(rec)
    rows = []
    for variant, recs in by_variant.items():
        finals = [r.summary["final_metric"] for r in recs
                  if r.summary["final_metric"] is not None]
        sizes = [r.summary["final_size"] for r in recs]
        rmses = [r.summary["final_rmse"] for r in recs
                 if r.summary["final_rmse"] is not None]
        row = {
            "variant": variant,
            "n": len(recs),
            "median": nearest_rank(finals, 0.5) if finals else None,
            "q1": nearest_rank(finals, 0.25) if finals else None,
            "q3": nearest_rank(finals, 0.75) if finals else None,
            "median_size": nearest_rank(sizes, 0.5) if sizes else None,
            "median_rmse": nearest_rank(rmses, 0.5) if rmses else None,
        }
        rows.append(row)
    rows.sort(key=lambda r: (r["median"] is None, r["median"], r["variant"]))
    return rows


def _records_from_dir(runs_dir):
    """Rebuild slim records (rows plus summary) from a suite output tree."""
    from .serialization import read_json, read_metrics_csv

    runs_dir = Path(runs_dir)
    found = sorted(runs_dir.glob("**/summary.json"))
    records = []
    for summary_path in found:
        run_dir = summary_path.parent
        if run_dir.name == "reference" or not (run_dir / "metrics.csv").is_file():
            continue
        summary = read_json(summary_path)
        columns, rows = read_metrics_csv(run_dir / "metrics.csv")
        records.append(RunRecord(
            config=read_json(run_dir / "config.json")
            if (run_dir / "config.json").is_file() else {},
            variant=summary["variant"], seed=summary["seed"],
            columns=columns, rows=rows, summary=summary, out_dir=run_dir,
        ))
    if not records:
        raise FileNotFoundError(f"no run outputs found under {runs_dir}")
    return records


def _scatter_data(record):
    """Final-archive scatter: 2-D descriptors plus ground-truth projection.

    Returns None when the variant's descriptors are not 2-D (nothing to
    plot in descriptor space) or the archive is unavailable.
    """
    from .serialization import load_archive

    if record.container is not None:
        container = record.container
        descriptors = container.descriptors()
        genotypes = container.genotypes()
        sensory = container.sensory_matrix()
    elif record.out_dir and (Path(record.out_dir) / "archive_final.json").is_file():
        _, entries = load_archive(Path(record.out_dir) / "archive_final.json")
        if not entries:
            return None
        descriptors = np.stack([e.descriptor for e in entries])
        genotypes = np.stack([e.genotype for e in entries])
        sensory = np.stack([e.sensory for e in entries])
    else:
        return None
    if descriptors.ndim != 2 or descriptors.shape[1] != 2 or not record.config:
        return None
    task = build_task(config_from_dict(record.config))
    gt = None
    if task.has_ground_truth:
        trajs = sensory.reshape(sensory.shape[0], -1, 2)
        gt = task.ground_truth_batch(genotypes, trajs)
    rows = []
    for i in range(descriptors.shape[0]):
        rows.append({
            "descriptor_x": float(descriptors[i, 0]),
            "descriptor_y": float(descriptors[i, 1]),
            "gt_x": None if gt is None else float(gt[i, 0]),
            "gt_y": None if gt is None else float(gt[i, 1]),
        })
    return rows


def export_plot_data(records_or_dir, metric, out_dir, include_scatter=True):
    """Write per-batch median and quartile curves per variant.

    ``metric`` is one of the task metric names, ``size``, or ``rmse``.
    With ``include_scatter`` every run with 2-D descriptors also gets a
    final-archive scatter file pairing descriptors with their ground-truth
    projection. Returns the list of written paths.
    """
    if isinstance(records_or_dir, (str, Path)):
        records = _records_from_dir(records_or_dir)
    else:
        records = list(records_or_dir)
    column = {"size": "archive_size"}.get(metric, metric)
    by_variant = {}
    for rec in records:
        if column not in rec.columns:
            continue
        by_variant.setdefault(rec.variant, []).append(rec)
    if not by_variant:
        raise ValueError(f"metric '{metric}' is not present in any run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for variant, recs in sorted(by_variant.items()):
        n_batches = min(len(r.rows) for r in recs)
        rows = []
        for b in range(n_batches):
            values = [r.rows[b][column] for r in recs
                      if r.rows[b].get(column) is not None]
            if not values:
                continue
            rows.append({
                "batch": recs[0].rows[b]["batch"],
                "median": nearest_rank(values, 0.5),
                "q1": nearest_rank(values, 0.25),
                "q3": nearest_rank(values, 0.75),
            })
        if not rows:
            continue
        path = out / f"plot_{metric}_{variant}.csv"
        write_metrics_csv(path, rows, ["batch", "median", "q1", "q3"])
        written.append(path)
    if include_scatter:
        for rec in records:
            scatter = _scatter_data(rec)
            if scatter is None:
                continue
            path = out / f"scatter_{rec.variant}_seed{rec.seed}.csv"
            write_metrics_csv(path, scatter,
                              ["descriptor_x", "descriptor_y", "gt_x", "gt_y"])
            written.append(path)
    return written
