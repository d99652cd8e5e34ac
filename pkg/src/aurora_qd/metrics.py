"""Archive quality metrics: coverage divergence, diversity, reconstruction.

The coverage metric compares the ground-truth-space distribution of an
archive against a reference archive via KL divergence of smoothed 2-D
histograms. The diversity metric groups trajectories by their final arena
cell and sums the fraction of cells each group traverses. Reconstruction
error reports how faithfully a latent model reproduces sensory data.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, kept soft for docs builds
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

from .validation import as_float_array, check_matrix


def histogram_counts(points, bounds, bins=30):
    """Raw 2-D bin counts; points outside the bounds clamp onto the border.

    Clamping means the counts always sum to the number of points.
    """
    pts = check_matrix(points, n_cols=2, name="points")
    bounds = check_matrix(bounds, n_cols=2, name="bounds")
    if bounds.shape[0] != 2:
        raise ValueError("bounds must be a (2, 2) array of (low, high) rows")
    x = np.clip(pts[:, 0], bounds[0, 0], bounds[0, 1])
    y = np.clip(pts[:, 1], bounds[1, 0], bounds[1, 1])
    hist, _, _ = np.histogram2d(x, y, bins=bins, range=bounds)
    return hist


def normalized_histogram(points, bounds, bins=30, eps=1e-6):
    """Smoothed, normalized 2-D histogram of planar points.

    ``eps`` is added to every cell before normalization so the histogram
    never contains zeros and KL terms stay finite. The result sums to 1.
    """
    if eps <= 0:
        raise ValueError("eps must be positive to keep the KL terms finite")
    hist = histogram_counts(points, bounds, bins) + eps
    return hist / hist.sum()


def klc(reference_points, archive_points, bounds, bins=30, eps=1e-6):
    """KL divergence from an archive's histogram to the reference's.

    Both point sets live in the ground-truth descriptor space. Lower is
    better; identical point sets give exactly zero.
    """
    ref = normalized_histogram(reference_points, bounds, bins, eps)
    got = normalized_histogram(archive_points, bounds, bins, eps)
    return float(np.sum(ref * np.log(ref / got)))


@njit(cache=True)
def _mark_segment(ax, ay, bx, by, bins, mask):
    """Mark every grid cell a segment passes through (grid coordinates).

    Splits the segment at integer grid lines and bins the midpoint of each
    piece, which matches floor-based binning of densely sampled points.
    """
    ts = np.empty(2 * bins + 4)
    ts[0] = 0.0
    ts[1] = 1.0
    cnt = 2
    if bx != ax:
        lo = min(ax, bx)
        hi = max(ax, bx)
        m = int(np.floor(lo)) + 1
        while m <= hi:
            t = (m - ax) / (bx - ax)
            if 0.0 < t < 1.0:
                ts[cnt] = t
                cnt += 1
            m += 1
    if by != ay:
        lo = min(ay, by)
        hi = max(ay, by)
        m = int(np.floor(lo)) + 1
        while m <= hi:
            t = (m - ay) / (by - ay)
            if 0.0 < t < 1.0:
                ts[cnt] = t
                cnt += 1
            m += 1
    # Insertion sort; the list is tiny.
    for i in range(1, cnt):
        key = ts[i]
        j = i - 1
        while j >= 0 and ts[j] > key:
            ts[j + 1] = ts[j]
            j -= 1
        ts[j + 1] = key
    for i in range(cnt - 1):
        if ts[i + 1] <= ts[i]:
            continue
        tm = 0.5 * (ts[i] + ts[i + 1])
        px = ax + (bx - ax) * tm
        py = ay + (by - ay) * tm
        cx = min(max(int(np.floor(px)), 0), bins - 1)
        cy = min(max(int(np.floor(py)), 0), bins - 1)
        mask[cx, cy] = True


@njit(cache=True)
def _trajectory_cells(points, lo0, lo1, scale0, scale1, bins, mask):
    for i in range(points.shape[0] - 1):
        ax = (points[i, 0] - lo0) * scale0
        ay = (points[i, 1] - lo1) * scale1
        bx = (points[i + 1, 0] - lo0) * scale0
        by = (points[i + 1, 1] - lo1) * scale1
        _mark_segment(ax, ay, bx, by, bins, mask)


@njit(cache=True)
def _diversity_masks(trajectories, lo0, lo1, scale0, scale1, bins):
    n_groups = bins * bins
    group_cells = np.zeros((n_groups, bins, bins), dtype=np.bool_)
    for n in range(trajectories.shape[0]):
        traj = trajectories[n]
        last = traj.shape[0] - 1
        gx = min(max(int(np.floor((traj[last, 0] - lo0) * scale0)), 0), bins - 1)
        gy = min(max(int(np.floor((traj[last, 1] - lo1) * scale1)), 0), bins - 1)
        _trajectory_cells(traj, lo0, lo1, scale0, scale1, bins,
                          group_cells[gx * bins + gy])
    return group_cells


def traversed_cells(trajectory, bounds, bins=10):
    """Boolean (bins, bins) mask of grid cells the trajectory passes through."""
    traj = check_matrix(trajectory, n_cols=2, name="trajectory")
    bounds = check_matrix(bounds, n_cols=2, name="bounds")
    lo0, hi0 = bounds[0]
    lo1, hi1 = bounds[1]
    mask = np.zeros((bins, bins), dtype=np.bool_)
    _trajectory_cells(np.ascontiguousarray(traj), lo0, lo1,
                      bins / (hi0 - lo0), bins / (hi1 - lo1), bins, mask)
    return mask


def diversity(trajectories, bounds, bins=10):
    """Sum over endpoint groups of the traversed-cell fraction.

    Trajectories are grouped by the grid cell of their final point; each
    group contributes the number of distinct cells its members traverse,
    divided by the total cell count. Range: 0 to bins * bins.
    """
    trajs = as_float_array(trajectories, "trajectories")
    if trajs.ndim != 3 or trajs.shape[2] != 2:
        raise ValueError(f"expected trajectories of shape (N, T, 2), got {trajs.shape}")
    if trajs.shape[0] == 0:
        return 0.0
    bounds = check_matrix(bounds, n_cols=2, name="bounds")
    lo0, hi0 = bounds[0]
    lo1, hi1 = bounds[1]
    masks = _diversity_masks(np.ascontiguousarray(trajs), lo0, lo1,
                             bins / (hi0 - lo0), bins / (hi1 - lo1), bins)
    return float(masks.sum()) / (bins * bins)


def reconstruction_rmse(model, sensory):
    """Mean per-row RMSE between sensory data and its reconstruction.

    ``model`` needs a ``reconstruct`` method (or transform and
    inverse_transform); extractors without one yield None, meaning the
    metric does not apply.
    """
    if model is None:
        return None
    if hasattr(model, "can_reconstruct") and not model.can_reconstruct:
        return None
    data = check_matrix(sensory, name="sensory")
    if hasattr(model, "reconstruct"):
        recon = model.reconstruct(data)
    elif hasattr(model, "transform") and hasattr(model, "inverse_transform"):
        recon = model.inverse_transform(model.transform(data))
    else:
        return None
    resid = recon - data
    per_row = np.sqrt(np.mean(resid * resid, axis=1))
    return float(per_row.mean())


def repertoire_size(container):
    return len(container)
